//! Ansatz weights α_k(t) from a momentum-space least-squares fit.
//!
//! Under the Jordan–Wigner map each ansatz order k contributes
//! 4 sin((k + 1)q) τ^y to the 2×2 block at momentum q, while the exact
//! counterdiabatic term contributes θ̇_q/2 τ^y. Matching the two over the
//! momenta q = mπ/L, m = 1..L−1 gives a small real least-squares problem.
//! At K = L − 2 the design matrix is a square discrete sine transform and
//! the fit is exact.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CdAnsatz, ChainParams, CoefficientMode};

/// Relative singular-value cutoff used for rank decisions.
const RANK_TOL: f64 = 1e-12;

/// Fit momenta mπ/L for m = 1..L−1.
pub fn fit_momenta(sites: usize) -> Vec<f64> {
    (1..sites).map(|m| m as f64 * PI / sites as f64).collect()
}

/// Block amplitude of ansatz order `k` at momentum `q`.
pub fn harmonic(k: usize, q: f64) -> f64 {
    4.0 * ((k + 1) as f64 * q).sin()
}

/// Exact per-mode counterdiabatic amplitude θ̇_q/2 at (λ, λ̇).
pub fn mode_target(q: f64, lambda: f64, lambda_dot: f64, params: &ChainParams) -> Result<f64> {
    if !(q > 0.0 && q < PI) {
        return Err(Error::domain(format!("momentum {q} outside (0, π)")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("λ = {lambda} outside [0, 1]")));
    }
    if lambda_dot == 0.0 {
        return Ok(0.0);
    }
    let (j, h) = (params.coupling(), params.field());
    let a = h * (1.0 - lambda);
    let b = j * lambda;
    let denom = a * a + b * b - 2.0 * a * b * q.cos();
    Ok(-lambda_dot * j * h * q.sin() / (2.0 * denom))
}

/// Design matrix of the fit together with its pseudo-inverse.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    order: usize,
    momenta: Vec<f64>,
    matrix: DMatrix<f64>,
    pinv: DMatrix<f64>,
    rank: usize,
}

impl ModeBasis {
    pub fn new(params: &ChainParams, order: usize) -> Result<Self> {
        if order > params.max_order() {
            return Err(Error::domain(format!(
                "ansatz order {order} exceeds L − 2 = {}",
                params.max_order()
            )));
        }
        let momenta = fit_momenta(params.sites());
        let matrix = DMatrix::from_fn(momenta.len(), order + 1, |n, k| harmonic(k, momenta[n]));
        let svd = matrix.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let eps = RANK_TOL * smax;
        let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
        let pinv = svd.pseudo_inverse(eps).map_err(|e| Error::Fit(e.to_string()))?;
        Ok(Self {
            order,
            momenta,
            matrix,
            pinv,
            rank,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    /// W[n, k] = w_k(q_n).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank < self.order + 1
    }

    /// a*(q_n) over the fit momenta.
    pub fn target(&self, lambda: f64, lambda_dot: f64, params: &ChainParams) -> Result<DVector<f64>> {
        let vals = self
            .momenta
            .iter()
            .map(|&q| mode_target(q, lambda, lambda_dot, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(DVector::from_vec(vals))
    }

    /// Root-mean-square of W α − target.
    pub fn residual(&self, alpha: &[f64], target: &DVector<f64>) -> f64 {
        let a = DVector::from_column_slice(alpha);
        let r = &self.matrix * a - target;
        (r.norm_squared() / r.len() as f64).sqrt()
    }

    /// Minimum-norm least-squares weights for `target`.
    pub fn solve(&self, target: &DVector<f64>) -> Vec<f64> {
        (&self.pinv * target).iter().copied().collect()
    }
}

/// Ansatz weights at one (λ, λ̇).
#[derive(Clone, Debug, PartialEq)]
pub struct CdCoefficients {
    pub order: usize,
    pub values: Vec<f64>,
    /// RMS of the unmatched per-mode amplitude over the fit momenta.
    pub residual: f64,
    /// Set when the minimum-norm rule picked one of several minimizers.
    pub rank_deficient: bool,
}

impl CdCoefficients {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            values: vec![0.0; order + 1],
            residual: 0.0,
            rank_deficient: false,
        }
    }

    /// Σ_k α_k w_k(q).
    pub fn mode_amplitude(&self, q: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(k, a)| a * harmonic(k, q))
            .sum()
    }
}

/// Coefficient provider for one chain and ansatz, caching the fit basis.
#[derive(Clone, Debug)]
pub struct CdSolver {
    params: ChainParams,
    ansatz: CdAnsatz,
    basis: ModeBasis,
    /// Only built for truncated-exact mode, to score the dropped weights.
    truncated_basis: Option<ModeBasis>,
}

impl CdSolver {
    pub fn new(params: &ChainParams, ansatz: CdAnsatz) -> Result<Self> {
        let (basis, truncated_basis) = match ansatz.mode() {
            CoefficientMode::Variational => (ModeBasis::new(params, ansatz.order())?, None),
            CoefficientMode::TruncatedExact => (
                ModeBasis::new(params, params.max_order())?,
                Some(ModeBasis::new(params, ansatz.order())?),
            ),
        };
        Ok(Self {
            params: *params,
            ansatz,
            basis,
            truncated_basis,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn ansatz(&self) -> &CdAnsatz {
        &self.ansatz
    }

    pub fn coefficients(&self, lambda: f64, lambda_dot: f64) -> Result<CdCoefficients> {
        let order = self.ansatz.order();
        if lambda_dot == 0.0 {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::domain(format!("λ = {lambda} outside [0, 1]")));
            }
            return Ok(CdCoefficients::zeros(order));
        }
        let target = self.basis.target(lambda, lambda_dot, &self.params)?;
        let mut values = self.basis.solve(&target);
        let scorer = match &self.truncated_basis {
            Some(b) => {
                values.truncate(order + 1);
                b
            }
            None => &self.basis,
        };
        Ok(CdCoefficients {
            order,
            residual: scorer.residual(&values, &target),
            values,
            rank_deficient: self.basis.rank_deficient(),
        })
    }
}

/// Least-squares weights for order `order` at (λ, λ̇).
pub fn solve_alpha(order: usize, lambda: f64, lambda_dot: f64, params: &ChainParams) -> Result<CdCoefficients> {
    let ansatz = CdAnsatz::new(params, order, CoefficientMode::Variational)?;
    CdSolver::new(params, ansatz)?.coefficients(lambda, lambda_dot)
}

/// Exact (K = L − 2) weights with orders above `order` dropped.
pub fn truncated_exact_alpha(order: usize, lambda: f64, lambda_dot: f64, params: &ChainParams) -> Result<CdCoefficients> {
    let ansatz = CdAnsatz::new(params, order, CoefficientMode::TruncatedExact)?;
    CdSolver::new(params, ansatz)?.coefficients(lambda, lambda_dot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{assemble, reference_hamiltonian, spectral_cd, DenseOperator, SymmetricSector};
    use crate::model::{cd_ansatz_terms, ref_hamiltonian_terms, Schedule};
    use proptest::prelude::*;

    fn chain(l: usize) -> ChainParams {
        ChainParams::new(l).unwrap()
    }

    #[test]
    fn zero_drive_gives_zero_weights() {
        let p = chain(8);
        for k in 0..=6 {
            let c = solve_alpha(k, 0.4, 0.0, &p).unwrap();
            assert!(c.values.iter().all(|&a| a == 0.0));
            assert_eq!(c.residual, 0.0);
            assert_eq!(c.values.len(), k + 1);
        }
    }

    #[test]
    fn exact_order_has_vanishing_residual() {
        let p = chain(8);
        let c = solve_alpha(6, 0.3, 1.1, &p).unwrap();
        assert!(c.residual < 1e-10, "residual {}", c.residual);
        assert!(!c.rank_deficient);
    }

    #[test]
    fn first_order_is_scalar_projection() {
        let p = chain(8);
        let (lam, ld) = (0.3, 0.9);
        let c = solve_alpha(0, lam, ld, &p).unwrap();
        let qs = fit_momenta(8);
        let (mut num, mut den) = (0.0, 0.0);
        for &q in &qs {
            let w = harmonic(0, q);
            num += w * mode_target(q, lam, ld, &p).unwrap();
            den += w * w;
        }
        assert!((c.values[0] - num / den).abs() < 1e-13);
        assert!(c.residual > 0.0);
    }

    #[test]
    fn truncated_exact_is_never_better() {
        let p = chain(8);
        let v = solve_alpha(2, 0.5, 1.3, &p).unwrap();
        let t = truncated_exact_alpha(2, 0.5, 1.3, &p).unwrap();
        assert!(t.residual >= v.residual - 1e-15);
        let full_v = solve_alpha(6, 0.5, 1.3, &p).unwrap();
        let full_t = truncated_exact_alpha(6, 0.5, 1.3, &p).unwrap();
        assert_eq!(full_v.values, full_t.values);
        assert!(truncated_exact_alpha(3, 0.5, 0.0, &p).unwrap().values.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn basis_is_full_rank_for_every_order() {
        let p = chain(50);
        for k in [0, 10, 24, 25, 40, 48] {
            let b = ModeBasis::new(&p, k).unwrap();
            assert_eq!(b.rank(), k + 1);
        }
        assert!(ModeBasis::new(&p, 49).is_err());
    }

    #[test]
    fn weights_vanish_at_schedule_endpoints() {
        let p = chain(10);
        let s = Schedule::cosine(1.0).unwrap();
        for t in [0.0, 1.0] {
            let (lam, ld) = s.eval(t).unwrap();
            for k in [0, 3, 8] {
                assert!(solve_alpha(k, lam, ld, &p).unwrap().values.iter().all(|&a| a == 0.0));
            }
        }
    }

    #[test]
    fn target_is_odd_in_q_and_zero_when_mode_stays_diagonal() {
        let p = chain(6);
        // At λ = 0 the block is pure τ^z, but λ̇ still tilts it; only λ̇ = 0 freezes it.
        assert_eq!(mode_target(0.7, 0.2, 0.0, &p).unwrap(), 0.0);
        assert!(mode_target(0.0, 0.5, 1.0, &p).is_err());
        assert!(mode_target(PI, 0.5, 1.0, &p).is_err());
    }

    /// Dense operator of the ansatz, as i·A with A real.
    fn ansatz_operator(p: &ChainParams, c: &CdCoefficients) -> DenseOperator {
        let ansatz = CdAnsatz::new(p, c.order, CoefficientMode::Variational).unwrap();
        assemble(&cd_ansatz_terms(p, &ansatz, &c.values).unwrap(), p.sites()).unwrap()
    }

    #[test]
    fn exact_weights_reproduce_spectral_cd() {
        for l in [6, 8] {
            let p = chain(l);
            let s = Schedule::cosine(1.0).unwrap();
            let sector = SymmetricSector::new(l).unwrap();
            for t in [0.1, 0.27, 0.5, 0.63, 0.9] {
                let (lam, ld) = s.eval(t).unwrap();
                let h = reference_hamiltonian(&p, lam).unwrap();
                let hp = assemble(&ref_hamiltonian_terms(&p, 1.0).unwrap(), l).unwrap();
                let hv = assemble(&ref_hamiltonian_terms(&p, 0.0).unwrap(), l).unwrap();
                let dh = hp.plus(&hv.scaled(-1.0)).unwrap().scaled(ld);
                let spectral = spectral_cd(&h, &dh, 1e-9).unwrap().operator;
                let c = solve_alpha(l - 2, lam, ld, &p).unwrap();
                let ansatz = ansatz_operator(&p, &c);
                let diff = sector.restrict(&spectral) - sector.restrict(&ansatz);
                let norm = diff.singular_values().max();
                assert!(norm < 1e-9, "L={l} t={t}: {norm}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weights_are_linear_in_drive(lam in 0.0f64..1.0, ld in -3.0f64..3.0, c in -4.0f64..4.0, k in 0usize..9) {
            let p = chain(10);
            let a = solve_alpha(k, lam, ld, &p).unwrap();
            let b = solve_alpha(k, lam, c * ld, &p).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((c * x - y).abs() <= 1e-9 * (1.0 + x.abs() * c.abs()));
            }
        }

        #[test]
        fn residual_shrinks_with_order(lam in 0.02f64..0.98, ld in 0.1f64..3.0) {
            let p = chain(12);
            let mut prev = f64::INFINITY;
            for k in 0..=10 {
                let r = solve_alpha(k, lam, ld, &p).unwrap().residual;
                prop_assert!(r <= prev * (1.0 + 1e-12) + 1e-14);
                prev = r;
            }
        }
    }
}
