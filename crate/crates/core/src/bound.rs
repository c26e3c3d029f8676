//! State-dependent digitization error bound.
//!
//! The Fubini–Study angle between the continuous and digitized final states
//! is at most the sum of per-slice angles L_n, so whenever Σ L_n ≤ π/2 the
//! final overlap is at least cos Σ L_n. Short-time expansions of L_n give
//! the second-order commutator term (zero on eigenstates of H_ref) and the
//! third-order term in commutator and spectral forms.

use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::dense::{eigensystem, infidelity, DenseChain, DenseOperator, Eigensystem, StateVector};
use crate::error::{Error, Result};
use crate::integrate::Convergence;
use crate::model::{boundary_time, TrotterPlan};

/// Allowed deviation of U†U from the identity.
const UNITARITY_TOL: f64 = 1e-10;

/// One row of the per-slice table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceRecord {
    pub n: usize,
    pub t_n: f64,
    #[serde(rename = "L_n")]
    pub angle: f64,
    pub second_order: Option<f64>,
    pub third_order: Option<f64>,
}

/// Per-slice angles, their sum and the resulting overlap bound.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub slices: Vec<SliceRecord>,
    pub total: f64,
    /// Σ L_n ≤ π/2, the condition under which the bound holds.
    pub valid: bool,
    /// cos Σ L_n, present only when valid.
    pub bound: Option<f64>,
}

impl BoundReport {
    pub fn angles(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.angle).collect()
    }

    pub fn max_angle(&self) -> f64 {
        self.slices.iter().map(|s| s.angle).fold(0.0, f64::max)
    }

    /// CSV with columns n, t_n, L_n, second_order, third_order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.slices {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sums the angles and applies the validity condition.
pub fn total_bound(angles: &[f64]) -> Result<BoundReport> {
    let slices = angles
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if !(0.0..=FRAC_PI_2).contains(&a) {
                return Err(Error::domain(format!("slice angle {a} outside [0, π/2]")));
            }
            Ok(SliceRecord {
                n: i + 1,
                t_n: f64::NAN,
                angle: a,
                second_order: None,
                third_order: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(slices))
}

fn summarize(slices: Vec<SliceRecord>) -> BoundReport {
    let total: f64 = slices.iter().map(|s| s.angle).sum();
    let valid = total <= FRAC_PI_2;
    BoundReport {
        slices,
        total,
        valid,
        bound: valid.then(|| total.cos().max(0.0)),
    }
}

/// arccos|⟨a|b⟩|, taken as arcsin of the orthogonal part for precision at
/// small angles.
fn angle_between(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(infidelity(a, b)?.clamp(0.0, 1.0).asin())
}

fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// arccos |⟨ψ_n| U_d U_ref† |ψ_n⟩| for explicit slice propagators.
pub fn slice_overlap(psi_n: &StateVector, u_d: &DenseOperator, u_ref: &DenseOperator) -> Result<f64> {
    for u in [u_d, u_ref] {
        if u.dim() != psi_n.dim() {
            return Err(Error::DimensionMismatch(u.dim(), psi_n.dim()));
        }
        let drift = unitarity_error(u.matrix());
        if drift > UNITARITY_TOL {
            return Err(Error::NonUnitary(drift));
        }
    }
    let back = u_ref.matrix().adjoint() * psi_n.amplitudes();
    let fwd = StateVector::new(u_d.matrix() * back)?;
    angle_between(psi_n, &fwd)
}

/// exp(−iτH) as a matrix.
pub fn slice_propagator(h: &DenseOperator, tau: f64) -> DenseOperator {
    let eig = eigensystem(h);
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&e| Complex64::from_polar(1.0, -tau * e)),
    ));
    DenseOperator::new(&eig.vectors * phases * eig.vectors.adjoint()).expect("square")
}

/// (T²/2M²)|⟨ψ|[H_ref, H_cd]|ψ⟩|, the ordered first-order Trotter commutator.
pub fn second_order_term(psi: &StateVector, h_ref: &DenseOperator, h_cd: &DenseOperator, total_time: f64, slices: usize) -> Result<f64> {
    let c = h_ref.commutator(h_cd)?;
    let tau = total_time / slices as f64;
    Ok(tau * tau / 2.0 * c.expectation(psi)?.norm())
}

/// (T³/6M³)|⟨ψ|[H_cd, [H_cd, H_ref]]|ψ⟩|.
pub fn third_order_commutator(psi: &StateVector, h_ref: &DenseOperator, h_cd: &DenseOperator, total_time: f64, slices: usize) -> Result<f64> {
    let inner = h_cd.commutator(h_ref)?;
    let outer = h_cd.commutator(&inner)?;
    let tau = total_time / slices as f64;
    Ok(tau.powi(3) / 6.0 * outer.expectation(psi)?.norm())
}

/// (T³/3M³)|Σ_{k≠g} |⟨g|∂H|k⟩|² / (E_k − E_g)|. Any level within `gap_tol`
/// of E_g is an error.
pub fn third_order_spectral(eig: &Eigensystem, dh: &DenseOperator, g: usize, total_time: f64, slices: usize, gap_tol: f64) -> Result<f64> {
    let n = eig.values.len();
    if dh.dim() != n {
        return Err(Error::DimensionMismatch(dh.dim(), n));
    }
    if g >= n {
        return Err(Error::domain(format!("level {g} out of range 0..{n}")));
    }
    let bra = eig.vectors.column(g).adjoint() * dh.matrix();
    let mut sum = 0.0;
    for k in 0..n {
        if k == g {
            continue;
        }
        let gap = eig.values[k] - eig.values[g];
        if gap.abs() <= gap_tol {
            return Err(Error::Degenerate {
                gap: gap.abs(),
                tolerance: gap_tol,
            });
        }
        let elem = (&bra * eig.vectors.column(k))[(0, 0)];
        sum += elem.norm_sqr() / gap;
    }
    let tau = total_time / slices as f64;
    Ok(tau.powi(3) / 3.0 * sum.abs())
}

/// Which trajectory the slice angles are measured on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Trajectory {
    /// ψ_n from the continuous dynamics, L_n = arccos|⟨ψ_n|U_d ψ_{n−1}⟩|.
    #[default]
    Reference,
    /// φ_n from the digitized dynamics, L_n = arccos|⟨φ_n|U_ref φ_{n−1}⟩|.
    Digitized,
}

/// Both sides of the overlap inequality for one run.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub report: BoundReport,
    /// |⟨Ψ(T)|Ψ_d(T)⟩|.
    pub overlap: f64,
    /// overlap − cos Σ L_n when the bound applies.
    pub margin: Option<f64>,
}

impl AuditReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.margin.is_none_or(|m| m >= -slack)
    }
}

/// Evaluates the slice angles and the final overlap for `chain` under `plan`,
/// together with the per-slice Taylor terms on the measured trajectory.
pub fn audit(chain: &DenseChain, plan: &TrotterPlan, trajectory: Trajectory) -> Result<AuditReport> {
    let m = plan.slices();
    let total_time = chain.schedule().total_time();
    let psi0 = chain.initial_state();
    let reference = chain.reference_trajectory(&psi0, m)?;
    let mut digitized = vec![psi0];
    for n in 1..=m {
        let next = chain.trotter_slice(&digitized[n - 1], plan, n)?;
        digitized.push(next);
    }
    let mut slices = Vec::with_capacity(m);
    for n in 1..=m {
        let angle = match trajectory {
            Trajectory::Reference => {
                let stepped = chain.trotter_slice(&reference[n - 1], plan, n)?;
                angle_between(&reference[n], &stepped)?
            }
            Trajectory::Digitized => {
                let t0 = boundary_time(n - 1, m, total_time);
                let t1 = boundary_time(n, m, total_time);
                let stepped = chain.reference_segment(&digitized[n - 1], t0, t1, &Convergence::DENSE)?;
                angle_between(&digitized[n], &stepped)?
            }
        };
        let state = match trajectory {
            Trajectory::Reference => &reference[n],
            Trajectory::Digitized => &digitized[n],
        };
        let t_n = plan.sample_time(n, total_time);
        let h_ref = chain.reference_hamiltonian(t_n)?;
        let h_cd = chain.cd_hamiltonian(t_n)?;
        slices.push(SliceRecord {
            n,
            t_n,
            angle,
            second_order: Some(second_order_term(state, &h_ref, &h_cd, total_time, m)?),
            third_order: Some(third_order_commutator(state, &h_ref, &h_cd, total_time, m)?),
        });
    }
    let report = summarize(slices);
    let overlap = reference[m].inner(&digitized[m])?.norm().min(1.0);
    let margin = report.bound.map(|b| overlap - b);
    Ok(AuditReport {
        report,
        overlap,
        margin,
    })
}
