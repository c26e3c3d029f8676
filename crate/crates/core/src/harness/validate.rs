//! Cross-checks between the two engines and the bound machinery.

use std::fmt;

use crate::bound::{audit, Trajectory};
use crate::dense::{eigensystem, infidelity, DenseChain};
use crate::error::{Error, Result};
use crate::fermion::{global_infidelity, FermionChain, FermionDrive};
use crate::integrate::Convergence;
use crate::model::{CdAnsatz, ChainParams, CoefficientMode, Schedule, TrotterPlan};

/// Largest chain `validate` accepts.
pub const VALIDATE_MAX_SITES: usize = 10;
/// Allowed |ΔE| between engines.
pub const ENGINE_AGREEMENT_TOL: f64 = 1e-8;
/// Allowed |⟨n|[H_ref, H_cd]|n⟩| relative to ‖H_ref‖‖H_cd‖.
pub const NULLITY_TOL: f64 = 1e-12;
/// Allowed negative margin in the overlap inequality.
pub const AUDIT_SLACK: f64 = 1e-10;

/// Schedule fractions t/T at which nullity is sampled.
const NULLITY_FRACTIONS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `Ok` when every check passed, otherwise the table as an error.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::Validation(self.to_string()))
        }
    }

    fn push(&mut self, name: String, value: f64, threshold: f64, passed: bool) {
        self.checks.push(Check {
            name,
            value,
            threshold,
            passed,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<44} {:>12} {:>12}  result", "check", "value", "threshold")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<44} {:>12.3e} {:>12.1e}  {}",
                c.name,
                c.value,
                c.threshold,
                if c.passed { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Worst |⟨n|[H_ref, H_cd]|n⟩| / (‖H_ref‖‖H_cd‖) over the lowest `levels`
/// eigenstates of H_ref(t).
pub fn commutator_nullity(chain: &DenseChain, t: f64, levels: usize) -> Result<f64> {
    let h = chain.reference_hamiltonian(t)?;
    let cd = chain.cd_hamiltonian(t)?;
    let scale = h.op_norm() * cd.op_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let comm = h.commutator(&cd)?;
    let eig = eigensystem(&h);
    let mut worst: f64 = 0.0;
    for n in 0..levels.min(eig.values.len()) {
        worst = worst.max(comm.expectation(&eig.state(n))?.norm() / scale);
    }
    Ok(worst)
}

/// Digitized-vs-continuous infidelity from both engines for every M.
pub fn engine_infidelities(params: &ChainParams, total_time: f64, truncation: usize, slices: &[usize]) -> Result<Vec<(usize, f64, f64)>> {
    let schedule = Schedule::cosine(total_time)?;
    let ansatz = CdAnsatz::truncated(params, truncation, CoefficientMode::Variational)?;
    let dense = DenseChain::with_ansatz(params, schedule, ansatz)?;
    let ferm = FermionChain::new(params, schedule, FermionDrive::Ansatz(ansatz))?;
    let d_ref = dense.reference(&dense.initial_state())?;
    let f_ref = ferm.evolve_reference(&ferm.initial_state(), &Convergence::FERMION)?;
    slices
        .iter()
        .map(|&m| {
            let plan = TrotterPlan::new(m)?;
            let ed = infidelity(&dense.trotter(&dense.initial_state(), &plan)?, &d_ref)?;
            let ef = global_infidelity(&ferm.evolve_trotter(&ferm.initial_state(), &plan)?, &f_ref)?;
            Ok((m, ed, ef))
        })
        .collect()
}

/// Runs the engine comparison, the bound audit and the nullity check for an
/// even chain of at most [`VALIDATE_MAX_SITES`] sites.
pub fn validate(sites: usize, total_time: f64, slices: &[usize]) -> Result<ValidationReport> {
    if sites < 4 || !sites.is_multiple_of(2) || sites > VALIDATE_MAX_SITES {
        return Err(Error::config(
            "sites",
            format!("validate needs an even chain of 4..={VALIDATE_MAX_SITES} sites, got {sites}"),
        ));
    }
    if slices.is_empty() || slices.contains(&0) {
        return Err(Error::config("slices", "slice counts must be positive"));
    }
    let params = ChainParams::new(sites)?;
    let mut report = ValidationReport::default();
    for truncation in [0, 2] {
        for (m, ed, ef) in engine_infidelities(&params, total_time, truncation, slices)? {
            let diff = (ed - ef).abs();
            report.push(
                format!("engines agree (truncation {truncation}, M {m})"),
                diff,
                ENGINE_AGREEMENT_TOL,
                diff < ENGINE_AGREEMENT_TOL,
            );
        }
    }
    let schedule = Schedule::cosine(total_time)?;
    let exact = DenseChain::with_ansatz(&params, schedule, CdAnsatz::exact(&params))?;
    for &m in slices {
        let a = audit(&exact, &TrotterPlan::new(m)?, Trajectory::Reference)?;
        let margin = a.margin.unwrap_or(f64::INFINITY);
        report.push(format!("bound holds (M {m})"), -margin, AUDIT_SLACK, a.holds(AUDIT_SLACK));
    }
    let levels = if sites <= 8 { exact.dim() } else { 1 };
    for frac in NULLITY_FRACTIONS {
        let worst = commutator_nullity(&exact, frac * total_time, levels)?;
        report.push(
            format!("eigenstate nullity (t/T = {frac})"),
            worst,
            NULLITY_TOL,
            worst < NULLITY_TOL,
        );
    }
    Ok(report)
}
