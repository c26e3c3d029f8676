//! Prints the annealing schedule and the Pauli terms of both Hamiltonians.

use digicd::cd_solver::solve_alpha;
use digicd::model::{cd_ansatz_terms, ref_hamiltonian_terms, CdAnsatz, ChainParams, Schedule};

fn main() -> digicd::Result<()> {
    let params = ChainParams::new(6)?;
    let schedule = Schedule::cosine(1.0)?;
    println!("{:>6} {:>10} {:>10}", "t", "lambda", "lambda'");
    for i in 0..=8 {
        let t = i as f64 / 8.0;
        let (l, ld) = schedule.eval(t)?;
        println!("{t:>6.3} {l:>10.5} {ld:>10.5}");
    }

    let (lambda, lambda_dot) = schedule.eval(0.5)?;
    println!("\nreference terms at lambda = {lambda}:");
    for term in ref_hamiltonian_terms(&params, lambda)? {
        println!("  {term}");
    }

    let ansatz = CdAnsatz::truncated(&params, 2, Default::default())?;
    let alpha = solve_alpha(ansatz.order(), lambda, lambda_dot, &params)?;
    println!("\ncounterdiabatic terms, order {}:", ansatz.order());
    for term in cd_ansatz_terms(&params, &ansatz, &alpha.values)? {
        println!("  {term}");
    }
    Ok(())
}
