use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use digicd::harness::{
    emit_plot, fit_slope, read_records, run_sweep_to_path, validate, ExperimentConfig, PlotStyle, SeriesSelector,
    Window, WORKERS_ENV,
};
use digicd::Error;

#[derive(Parser)]
#[command(name = "digicd", version, about = "Digitized counterdiabatic driving sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config and write CSV records.
    Run {
        config: PathBuf,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Overrides `output` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log-log slope of a CSV series inside an M window.
    Fit {
        csv: PathBuf,
        #[arg(long, default_value = ":")]
        window: Window,
        /// e.g. "T=1,truncation=0"
        #[arg(long, default_value = "")]
        series: SeriesSelector,
    },
    /// Render a CSV as an SVG log-log plot.
    Plot {
        csv: PathBuf,
        #[arg(long, default_value = "auto")]
        style: PlotStyle,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the dense and fermion engines and audit the error bound.
    Validate {
        #[arg(long, default_value_t = 8)]
        sites: usize,
        #[arg(long, default_value_t = 1.0)]
        total_time: f64,
        #[arg(long, value_delimiter = ',', default_value = "8,32,128")]
        slices: Vec<usize>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Domain(_) | Error::TooLarge { .. } | Error::Fit(_) | Error::Plot(_) => 2,
        Error::Io(_) | Error::Csv(_) => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, workers, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let path = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| Error::config("output", "no output path in config or --out"))?;
            let workers = workers.or(cfg.workers).unwrap_or_else(digicd::harness::default_workers);
            let summary = run_sweep_to_path(&cfg, workers, &path)?;
            eprintln!(
                "wrote {} records to {} ({} failed)",
                summary.records.len(),
                path.display(),
                summary.failures
            );
        }
        Command::Fit { csv, window, series } => {
            let records = read_records(&csv)?;
            let fit = fit_slope(&records, window, &series)?;
            println!("slope {:.4} ± {:.4} over {} points", fit.slope, fit.stderr, fit.points);
        }
        Command::Plot { csv, style, out } => {
            let records = read_records(&csv)?;
            let svg = emit_plot(&records, style)?;
            let path = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&path, svg)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Validate { sites, total_time, slices } => {
            let report = validate(sites, total_time, &slices)?;
            print!("{report}");
            report.into_result()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
