//! The same protocol through the dense and the free-fermion engines.

use digicd::harness::validate::engine_infidelities;
use digicd::model::ChainParams;

fn main() -> digicd::Result<()> {
    for sites in [4, 6, 8] {
        let params = ChainParams::new(sites)?;
        for truncation in [0, 2] {
            for (m, dense, fermion) in engine_infidelities(&params, 1.0, truncation, &[8, 32, 128])? {
                println!(
                    "L={sites} truncation={truncation} M={m:>3}  dense {dense:.6e}  fermion {fermion:.6e}  diff {:.1e}",
                    (dense - fermion).abs()
                );
            }
        }
    }
    Ok(())
}
