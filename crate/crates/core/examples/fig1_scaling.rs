//! Digitized vs continuous infidelity with the exact drive at L = 50, fitted
//! over the low-M window and over a long tail.

use digicd::fermion::{global_infidelity, FermionChain, FermionDrive};
use digicd::harness::{fit_power_law, SliceGrid};
use digicd::model::{CdAnsatz, ChainParams, Schedule, TrotterPlan};
use digicd::Convergence;

fn main() -> digicd::Result<()> {
    let params = ChainParams::new(50)?;
    let ms = SliceGrid { min: 20, max: 2000, per_decade: 15 }.points();
    for total_time in [1.0, 5.0, 10.0] {
        let chain = FermionChain::new(&params, Schedule::cosine(total_time)?, FermionDrive::Ansatz(CdAnsatz::exact(&params)))?;
        let target = chain.evolve_reference(&chain.initial_state(), &Convergence::FERMION)?;
        let errs = ms
            .iter()
            .map(|&m| global_infidelity(&chain.evolve_trotter(&chain.initial_state(), &TrotterPlan::new(m)?)?, &target))
            .collect::<digicd::Result<Vec<f64>>>()?;
        println!("T = {total_time}");
        for (m, e) in ms.iter().zip(&errs) {
            println!("  M={m:>5}  {e:.4e}");
        }
        for (lo, hi) in [(20, 60), (20, 200), (200, 2000)] {
            let (xs, ys): (Vec<f64>, Vec<f64>) = ms
                .iter()
                .zip(&errs)
                .filter(|(m, _)| (lo..=hi).contains(*m))
                .map(|(&m, &e)| (m as f64, e))
                .unzip();
            println!("  slope over [{lo}, {hi}]: {}", fit_power_law(&xs, &ys)?);
        }
    }
    Ok(())
}
