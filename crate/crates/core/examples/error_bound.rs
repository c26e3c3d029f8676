//! Slice angles and the cosine bound for a small chain, with the final
//! overlap it guarantees.

use digicd::bound::{audit, Trajectory};
use digicd::dense::DenseChain;
use digicd::model::{CdAnsatz, ChainParams, Schedule, TrotterPlan};

fn main() -> digicd::Result<()> {
    let params = ChainParams::new(6)?;
    let chain = DenseChain::with_ansatz(&params, Schedule::cosine(1.0)?, CdAnsatz::exact(&params))?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "M", "max L_n", "sum L_n", "cos bound", "overlap");
    for m in [8, 16, 32, 64, 128] {
        let a = audit(&chain, &TrotterPlan::new(m)?, Trajectory::Reference)?;
        println!(
            "{m:>5} {:>12.4e} {:>12.4e} {:>12.8} {:>12.8}",
            a.report.max_angle(),
            a.report.total,
            a.report.bound.unwrap_or(f64::NAN),
            a.overlap
        );
    }

    let a = audit(&chain, &TrotterPlan::new(16)?, Trajectory::Reference)?;
    println!("\nper-slice terms at M = 16:");
    a.report.write_csv(std::io::stdout())?;
    Ok(())
}
