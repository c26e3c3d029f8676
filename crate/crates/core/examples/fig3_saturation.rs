//! Infidelity against the final ground state: truncated drives level off,
//! the exact drive keeps improving.

use digicd::fermion::{global_infidelity, FermionChain, FermionDrive, ModeStateSet};
use digicd::model::{CdAnsatz, ChainParams, CoefficientMode, Schedule, TrotterPlan};

fn main() -> digicd::Result<()> {
    let params = ChainParams::new(50)?;
    let ground = ModeStateSet::ground(&params, 1.0)?;
    let ms = [20, 50, 100, 200, 500, 1000];
    print!("{:>10}", "truncated");
    for m in ms {
        print!(" {:>10}", format!("M={m}"));
    }
    println!();
    for truncation in [0, 10, 20, 30, 40] {
        let ansatz = CdAnsatz::truncated(&params, truncation, CoefficientMode::Variational)?;
        let chain = FermionChain::new(&params, Schedule::cosine(1.0)?, FermionDrive::Ansatz(ansatz))?;
        print!("{truncation:>10}");
        for m in ms {
            let out = chain.evolve_trotter(&chain.initial_state(), &TrotterPlan::new(m)?)?;
            print!(" {:>10.3e}", global_infidelity(&out, &ground)?);
        }
        println!();
    }
    Ok(())
}
