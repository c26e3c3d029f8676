//! Fitted counterdiabatic coefficients along the sweep and how well each
//! truncation reproduces the exact mode amplitudes.

use digicd::cd_solver::{solve_alpha, truncated_exact_alpha};
use digicd::model::{ChainParams, Schedule};

fn main() -> digicd::Result<()> {
    let params = ChainParams::new(50)?;
    let schedule = Schedule::cosine(1.0)?;
    let (lambda, lambda_dot) = schedule.eval(0.5)?;

    println!("exact coefficients at t/T = 0.5 (first eight):");
    let exact = solve_alpha(params.max_order(), lambda, lambda_dot, &params)?;
    for (k, a) in exact.values.iter().take(8).enumerate() {
        println!("  alpha_{k} = {a:+.6e}");
    }

    println!("\n{:>10} {:>14} {:>16}", "truncated", "fit residual", "truncated exact");
    for truncated in [0, 10, 20, 30, 40, 47] {
        let order = params.max_order() - truncated;
        let fit = solve_alpha(order, lambda, lambda_dot, &params)?;
        let cut = truncated_exact_alpha(order, lambda, lambda_dot, &params)?;
        println!("{truncated:>10} {:>14.3e} {:>16.3e}", fit.residual, cut.residual);
    }
    Ok(())
}
