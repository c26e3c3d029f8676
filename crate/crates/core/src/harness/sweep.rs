//! Sweep execution and the CSV record format.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Comparison, Engine, ExperimentConfig};
use crate::bound::{audit, Trajectory};
use crate::dense::{infidelity, sector_ground_state, DenseChain, StateVector};
use crate::error::{Error, Result};
use crate::fermion::{global_infidelity, FermionChain, FermionDrive, ModeStateSet};
use crate::integrate::Convergence;
use crate::model::{CdAnsatz, ChainParams, Schedule, TrotterPlan};

/// Environment variable read for the default worker count.
pub const WORKERS_ENV: &str = "DIGICD_WORKERS";

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub engine: Engine,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "T")]
    pub total_time: f64,
    #[serde(rename = "M")]
    pub slices: usize,
    pub truncation: usize,
    pub infidelity: Option<f64>,
    pub bound_total: Option<f64>,
    pub wall_time: f64,
    pub error: Option<String>,
}

/// Reads records written by [`run_sweep`].
pub fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRecord>, _>>()?;
    Ok(rows)
}

/// Worker count from the environment, falling back to the core count.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Final states that every M of one (T, truncation) series is compared with.
enum Target {
    Dense(DenseChain, StateVector),
    Fermion(FermionChain, ModeStateSet),
}

fn build_target(cfg: &ExperimentConfig, total_time: f64, truncation: usize) -> Result<Target> {
    let params = ChainParams::new(cfg.sites)?;
    let schedule = Schedule::cosine(total_time)?;
    let ansatz = CdAnsatz::truncated(&params, truncation, cfg.coefficient_mode)?;
    match cfg.engine {
        Engine::Dense => {
            let chain = DenseChain::with_ansatz(&params, schedule, ansatz)?;
            let target = match cfg.comparison {
                Comparison::DigitizedVsContinuous => chain.reference(&chain.initial_state())?,
                Comparison::DigitizedVsAdiabatic => sector_ground_state(&params, 1.0)?,
            };
            Ok(Target::Dense(chain, target))
        }
        Engine::Fermion => {
            let chain = FermionChain::new(&params, schedule, FermionDrive::Ansatz(ansatz))?;
            let target = match cfg.comparison {
                Comparison::DigitizedVsContinuous => chain.evolve_reference(&chain.initial_state(), &Convergence::FERMION)?,
                Comparison::DigitizedVsAdiabatic => ModeStateSet::ground(&params, 1.0)?,
            };
            Ok(Target::Fermion(chain, target))
        }
    }
}

fn evaluate(cfg: &ExperimentConfig, target: &Target, slices: usize) -> Result<(f64, Option<f64>)> {
    let plan = TrotterPlan::with_rule(slices, cfg.evaluation_rule)?;
    match target {
        Target::Dense(chain, reference) => {
            let out = chain.trotter(&chain.initial_state(), &plan)?;
            let bound = if cfg.bound {
                Some(audit(chain, &plan, Trajectory::Reference)?.report.total)
            } else {
                None
            };
            Ok((infidelity(&out, reference)?, bound))
        }
        Target::Fermion(chain, reference) => {
            let out = chain.evolve_trotter(&chain.initial_state(), &plan)?;
            Ok((global_infidelity(&out, reference)?, None))
        }
    }
}

/// Summary of a finished sweep.
#[derive(Clone, Debug)]
pub struct SweepSummary {
    pub records: Vec<SweepRecord>,
    pub failures: usize,
}

/// Runs every (T, truncation, M) point of `cfg` on `workers` threads and
/// streams the records, in configuration order, to `out`.
pub fn run_sweep<W: Write + Send>(cfg: &ExperimentConfig, workers: usize, out: W) -> Result<SweepSummary> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let ms = cfg.slice_counts();
    let series: Vec<(f64, usize)> = cfg
        .total_times
        .iter()
        .flat_map(|&t| cfg.truncations.iter().map(move |&tr| (t, tr)))
        .collect();

    let targets: Vec<Result<Target>> = pool.install(|| {
        series
            .par_iter()
            .map(|&(t, tr)| build_target(cfg, t, tr))
            .collect()
    });
    let points: Vec<(usize, usize)> = (0..series.len())
        .flat_map(|s| ms.iter().map(move |&m| (s, m)))
        .collect();

    let mut writer = csv::Writer::from_writer(out);
    let (tx, rx) = mpsc::channel::<(usize, SweepRecord)>();
    let mut records = Vec::with_capacity(points.len());
    std::thread::scope(|scope| -> Result<()> {
        scope.spawn(|| {
            pool.install(|| {
                points.par_iter().enumerate().for_each_with(tx, |tx, (idx, &(s, m))| {
                    let (t, tr) = series[s];
                    let start = Instant::now();
                    let outcome = match &targets[s] {
                        Ok(target) => evaluate(cfg, target, m),
                        Err(e) => Err(Error::domain(e.to_string())),
                    };
                    let (inf, bound, error) = match outcome {
                        Ok((e, b)) => (Some(e), b, None),
                        Err(e) => {
                            log::warn!("T={t} truncation={tr} M={m}: {e}");
                            (None, None, Some(e.to_string()))
                        }
                    };
                    let rec = SweepRecord {
                        engine: cfg.engine,
                        sites: cfg.sites,
                        total_time: t,
                        slices: m,
                        truncation: tr,
                        infidelity: inf,
                        bound_total: bound,
                        wall_time: start.elapsed().as_secs_f64(),
                        error,
                    };
                    let _ = tx.send((idx, rec));
                });
            });
        });
        // Reorder so the file matches configuration order while still
        // flushing each record as soon as its predecessors are written.
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (idx, rec) in rx {
            pending.insert(idx, rec);
            while let Some(rec) = pending.remove(&next) {
                writer.serialize(&rec)?;
                writer.flush()?;
                records.push(rec);
                next += 1;
            }
        }
        Ok(())
    })?;
    writer.flush()?;
    let failures = records.iter().filter(|r| r.error.is_some()).count();
    Ok(SweepSummary { records, failures })
}

/// [`run_sweep`] into a file.
pub fn run_sweep_to_path(cfg: &ExperimentConfig, workers: usize, path: &Path) -> Result<SweepSummary> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(path)?;
    run_sweep(cfg, workers, std::io::BufWriter::new(file))
}
