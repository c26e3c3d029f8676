//! Continuous and digitized dynamics of the dense chain.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::expm::{propagate_imaginary, propagate_real_symmetric, taylor_propagate};
use super::{assemble, propagate, DenseOperator, StateVector, SymmetricSector};
use crate::cd_solver::CdSolver;
use crate::error::{Error, Result};
use crate::integrate::{romberg, Convergence};
use crate::model::{
    boundary_time, cd_ansatz_terms, CdAnsatz, ChainParams, CoefficientMode, Pauli, PauliString, Schedule,
    TrotterPlan,
};

/// λ-independent pieces of the Hamiltonians in one basis.
#[derive(Clone, Debug)]
struct Operators {
    /// −J Σ Z_i Z_{i+1}.
    bond: DMatrix<f64>,
    /// −h Σ X_i.
    field: DMatrix<f64>,
    /// Real A_k with Σ_i (Y X…X Z + Z X…X Y) at order k equal to i·A_k.
    cd_orders: Vec<DMatrix<f64>>,
}

impl Operators {
    fn dim(&self) -> usize {
        self.bond.nrows()
    }

    fn reference(&self, lambda: f64) -> DMatrix<f64> {
        &self.bond * lambda + &self.field * (1.0 - lambda)
    }

    fn cd(&self, alpha: &[f64]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim(), self.dim());
        for (c, op) in alpha.iter().zip(&self.cd_orders) {
            a += op * *c;
        }
        a
    }

    fn restricted(&self, sector: &SymmetricSector) -> Self {
        Self {
            bond: sector.restrict_real(&self.bond),
            field: sector.restrict_real(&self.field),
            cd_orders: self.cd_orders.iter().map(|a| sector.restrict_real(a)).collect(),
        }
    }
}

/// Dense model of one annealing protocol: the chain, its schedule and an
/// optional counterdiabatic ansatz, with the λ-independent pieces cached.
///
/// States inside the translation- and flip-symmetric sector are evolved in
/// that sector; any other state is evolved on the full space.
#[derive(Clone, Debug)]
pub struct DenseChain {
    params: ChainParams,
    schedule: Schedule,
    full: Operators,
    reduced: Option<(SymmetricSector, Operators)>,
    solver: Option<CdSolver>,
}

/// Largest ‖ψ − PPᵀψ‖ for which a state counts as lying in the sector.
const SECTOR_LEAK_TOL: f64 = 1e-12;

impl DenseChain {
    /// Chain driven by H_ref alone.
    pub fn uncorrected(params: &ChainParams, schedule: Schedule) -> Result<Self> {
        Self::build(params, schedule, None)
    }

    /// Chain driven by H_ref plus the given counterdiabatic ansatz.
    pub fn with_ansatz(params: &ChainParams, schedule: Schedule, ansatz: CdAnsatz) -> Result<Self> {
        Self::build(params, schedule, Some(ansatz))
    }

    fn build(params: &ChainParams, schedule: Schedule, ansatz: Option<CdAnsatz>) -> Result<Self> {
        let l = params.sites();
        let mut bond_terms = Vec::with_capacity(l);
        let mut field_terms = Vec::with_capacity(l);
        for i in 1..=l {
            bond_terms.push(PauliString::new(-params.coupling(), [(i, Pauli::Z), (i % l + 1, Pauli::Z)])?);
            field_terms.push(PauliString::new(-params.field(), [(i, Pauli::X)])?);
        }
        let bond = assemble(&bond_terms, l)?.matrix().map(|z| z.re);
        let field = assemble(&field_terms, l)?.matrix().map(|z| z.re);
        let (cd_orders, solver) = match ansatz {
            Some(a) => {
                let mut orders = Vec::with_capacity(a.order() + 1);
                for k in 0..=a.order() {
                    let single = CdAnsatz::new(params, k, CoefficientMode::Variational)?;
                    let mut alpha = vec![0.0; k + 1];
                    alpha[k] = 1.0;
                    let op = assemble(&cd_ansatz_terms(params, &single, &alpha)?, l)?;
                    orders.push(op.matrix().map(|z| z.im));
                }
                (orders, Some(CdSolver::new(params, a)?))
            }
            None => (Vec::new(), None),
        };
        let full = Operators {
            bond,
            field,
            cd_orders,
        };
        let sector = SymmetricSector::new(l)?;
        let reduced = full.restricted(&sector);
        Ok(Self {
            params: *params,
            schedule,
            full,
            reduced: Some((sector, reduced)),
            solver,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn ansatz(&self) -> Option<&CdAnsatz> {
        self.solver.as_ref().map(|s| s.ansatz())
    }

    pub fn dim(&self) -> usize {
        self.full.dim()
    }

    /// Dimension of the symmetric sector the protocol runs in.
    pub fn sector_dim(&self) -> Option<usize> {
        self.reduced.as_ref().map(|(s, _)| s.dim())
    }

    /// |+⟩^⊗L.
    pub fn initial_state(&self) -> StateVector {
        StateVector::all_plus(self.params.sites())
    }

    /// CD coefficients at (λ, λ̇); `None` without a drive or when all vanish.
    fn cd_coefficients(&self, lambda: f64, lambda_dot: f64) -> Result<Option<Vec<f64>>> {
        let Some(solver) = &self.solver else {
            return Ok(None);
        };
        let coeffs = solver.coefficients(lambda, lambda_dot)?;
        if coeffs.values.iter().all(|&a| a == 0.0) {
            return Ok(None);
        }
        Ok(Some(coeffs.values))
    }

    pub fn reference_hamiltonian(&self, t: f64) -> Result<DenseOperator> {
        let (lambda, _) = self.schedule.eval(t)?;
        Ok(DenseOperator::from_real(&self.full.reference(lambda)))
    }

    pub fn cd_hamiltonian(&self, t: f64) -> Result<DenseOperator> {
        let (lambda, lambda_dot) = self.schedule.eval(t)?;
        Ok(match self.cd_coefficients(lambda, lambda_dot)? {
            Some(alpha) => DenseOperator::from_imag(&self.full.cd(&alpha)),
            None => DenseOperator::zeros(self.dim()),
        })
    }

    /// H_ref(t) + H_cd(t).
    pub fn total_hamiltonian(&self, t: f64) -> Result<DenseOperator> {
        self.total_in(&self.full, t)
    }

    fn total_in(&self, ops: &Operators, t: f64) -> Result<DenseOperator> {
        let (lambda, lambda_dot) = self.schedule.eval(t)?;
        let h = ops.reference(lambda);
        let a = self.cd_coefficients(lambda, lambda_dot)?.map(|alpha| ops.cd(&alpha));
        let mat = DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| {
            Complex64::new(h[(r, c)], a.as_ref().map_or(0.0, |a| a[(r, c)]))
        });
        DenseOperator::new(mat)
    }

    /// ∂_t H_ref = λ̇ (H_P − H_V).
    pub fn derivative(&self, t: f64) -> Result<DenseOperator> {
        let (_, lambda_dot) = self.schedule.eval(t)?;
        Ok(DenseOperator::from_real(&((&self.full.bond - &self.full.field) * lambda_dot)))
    }

    /// Operators and coordinates for `psi`: the sector when `psi` lies in it.
    fn working(&self, psi: &StateVector) -> Result<(&Operators, DVector<Complex64>)> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), psi.dim()));
        }
        if let Some((sector, ops)) = &self.reduced {
            let v = sector.project(psi);
            if (psi.amplitudes() - sector.lift(&v)).norm() < SECTOR_LEAK_TOL {
                return Ok((ops, v));
            }
        }
        Ok((&self.full, psi.amplitudes().clone()))
    }

    fn to_full(&self, ops: &Operators, v: DVector<Complex64>) -> StateVector {
        match &self.reduced {
            Some((sector, reduced)) if std::ptr::eq(ops, reduced) => sector.embed(&v),
            _ => StateVector::from_normalized(v),
        }
    }

    fn slice_in(&self, ops: &Operators, v: &DVector<Complex64>, plan: &TrotterPlan, n: usize) -> Result<DVector<Complex64>> {
        if n == 0 || n > plan.slices() {
            return Err(Error::domain(format!("slice {n} outside 1..={}", plan.slices())));
        }
        let total = self.schedule.total_time();
        let tau = plan.slice_width(total);
        if tau == 0.0 {
            return Ok(v.clone());
        }
        let (lambda, lambda_dot) = self.schedule.eval(plan.sample_time(n, total))?;
        let mut amps = propagate_real_symmetric(&ops.reference(lambda), tau, v);
        if let Some(alpha) = self.cd_coefficients(lambda, lambda_dot)? {
            amps = propagate_imaginary(&ops.cd(&alpha), tau, &amps);
        }
        Ok(amps)
    }

    /// One Trotter slice exp(−iτH_cd(t_n)) exp(−iτH_ref(t_n)) applied to ψ.
    pub fn trotter_slice(&self, psi: &StateVector, plan: &TrotterPlan, n: usize) -> Result<StateVector> {
        let (ops, v) = self.working(psi)?;
        let out = self.slice_in(ops, &v, plan, n)?;
        Ok(self.to_full(ops, out))
    }

    /// Digitized evolution of `psi0` over the whole plan.
    pub fn trotter(&self, psi0: &StateVector, plan: &TrotterPlan) -> Result<StateVector> {
        let (ops, mut v) = self.working(psi0)?;
        for n in 1..=plan.slices() {
            v = self.slice_in(ops, &v, plan, n)?;
        }
        Ok(self.to_full(ops, v))
    }

    fn trajectory_in(&self, psi0: &StateVector, t0: f64, t1: f64, slices: usize, cfg: &Convergence) -> Result<Vec<StateVector>> {
        let (ops, v) = self.working(psi0)?;
        let start = StateVector::from_normalized(v);
        let traj = reference_trajectory_with(&start, |s| self.total_in(ops, (t0 + s).min(t1)), t1 - t0, slices, cfg)?;
        Ok(traj
            .into_iter()
            .map(|s| self.to_full(ops, s.amplitudes().clone()))
            .collect())
    }

    /// Continuous evolution under H_ref + H_cd, sampled at the `slices` + 1
    /// slice boundaries.
    pub fn reference_trajectory(&self, psi0: &StateVector, slices: usize) -> Result<Vec<StateVector>> {
        let total = self.schedule.total_time();
        self.trajectory_in(psi0, 0.0, total, slices, &Convergence::DENSE)
    }

    /// Continuous evolution of `psi` from `t0` to `t1`.
    pub fn reference_segment(&self, psi: &StateVector, t0: f64, t1: f64, cfg: &Convergence) -> Result<StateVector> {
        if t0.is_nan() || t1.is_nan() || t1 < t0 {
            return Err(Error::domain(format!("segment [{t0}, {t1}] is reversed")));
        }
        let mut traj = self.trajectory_in(psi, t0, t1, 1, cfg)?;
        Ok(traj.pop().expect("trajectory has two entries"))
    }

    /// Final state of [`DenseChain::reference_trajectory`].
    pub fn reference(&self, psi0: &StateVector) -> Result<StateVector> {
        let mut traj = self.reference_trajectory(psi0, 1)?;
        Ok(traj.pop().expect("trajectory has two entries"))
    }
}

/// Time-ordered evolution under `h_of_t` over [0, T], by midpoint exponential
/// steps (`substeps` per slice at the coarsest level) refined until the
/// extrapolated final state stops moving.
pub fn reference_evolve<F>(
    psi0: &StateVector,
    h_of_t: F,
    total_time: f64,
    substeps: usize,
    slices: usize,
) -> Result<StateVector>
where
    F: Fn(f64) -> Result<DenseOperator>,
{
    let mut traj = reference_trajectory(psi0, h_of_t, total_time, substeps, slices)?;
    Ok(traj.pop().expect("trajectory is never empty"))
}

/// As [`reference_evolve`], returning the state at every slice boundary.
pub fn reference_trajectory<F>(
    psi0: &StateVector,
    h_of_t: F,
    total_time: f64,
    substeps: usize,
    slices: usize,
) -> Result<Vec<StateVector>>
where
    F: Fn(f64) -> Result<DenseOperator>,
{
    if substeps == 0 {
        return Err(Error::domain("substeps per slice must be at least 1"));
    }
    let cfg = Convergence {
        initial_steps: substeps,
        ..Convergence::DENSE
    };
    reference_trajectory_with(psi0, h_of_t, total_time, slices, &cfg)
}

pub(crate) fn reference_trajectory_with<F>(
    psi0: &StateVector,
    h_of_t: F,
    total_time: f64,
    slices: usize,
    cfg: &Convergence,
) -> Result<Vec<StateVector>>
where
    F: Fn(f64) -> Result<DenseOperator>,
{
    if slices == 0 {
        return Err(Error::domain("slice count must be at least 1"));
    }
    if !(total_time.is_finite() && total_time >= 0.0) {
        return Err(Error::domain(format!("invalid total time {total_time}")));
    }
    let snapshots = romberg(cfg, |steps| {
        let mut psi: DVector<Complex64> = psi0.amplitudes().clone();
        let mut out = Vec::with_capacity(slices + 1);
        out.push(psi.as_slice().to_vec());
        for m in 1..=slices {
            let t0 = boundary_time(m - 1, slices, total_time);
            let width = (boundary_time(m, slices, total_time) - t0) / steps as f64;
            for s in 0..steps {
                let h = h_of_t(t0 + (s as f64 + 0.5) * width)?;
                if h.dim() != psi.len() {
                    return Err(Error::DimensionMismatch(h.dim(), psi.len()));
                }
                psi = taylor_propagate(h.matrix(), width, &psi);
            }
            out.push(psi.as_slice().to_vec());
        }
        Ok(out)
    })?;
    snapshots
        .into_iter()
        .map(|v| StateVector::new(DVector::from_vec(v)))
        .collect()
}

/// Digitized evolution: for n = 1..M applies exp(−iτH_cd(t_n)) exp(−iτH_ref(t_n))
/// with τ = T/M, where `factors(t)` returns (H_ref(t), H_cd(t)).
pub fn trotter_evolve<F>(psi0: &StateVector, plan: &TrotterPlan, total_time: f64, factors: F) -> Result<StateVector>
where
    F: Fn(f64) -> Result<(DenseOperator, DenseOperator)>,
{
    let tau = plan.slice_width(total_time);
    let mut psi = psi0.clone();
    for n in 1..=plan.slices() {
        let (h_ref, h_cd) = factors(plan.sample_time(n, total_time))?;
        psi = propagate(&h_ref, tau, &psi)?;
        psi = propagate(&h_cd, tau, &psi)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{infidelity, sector_ground_state};
    use crate::model::EvaluationRule;
    use proptest::prelude::*;

    fn chain(l: usize, t: f64, truncation: Option<usize>) -> DenseChain {
        let p = ChainParams::new(l).unwrap();
        let s = Schedule::cosine(t).unwrap();
        match truncation {
            Some(tr) => {
                let a = CdAnsatz::truncated(&p, tr, CoefficientMode::Variational).unwrap();
                DenseChain::with_ansatz(&p, s, a).unwrap()
            }
            None => DenseChain::uncorrected(&p, s).unwrap(),
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = StateVector::all_plus(3);
        let out = reference_evolve(&psi, |_| Ok(DenseOperator::zeros(8)), 2.0, 4, 3).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn diagonal_hamiltonian_phases_amplitudes() {
        let d = [0.3, -1.2, 2.0, 0.7];
        let mut m = DMatrix::zeros(4, 4);
        for i in 0..4 {
            m[(i, i)] = d[i];
        }
        let h = DenseOperator::from_real(&m);
        let psi = StateVector::all_plus(2);
        let out = reference_evolve(&psi, |_| Ok(h.clone()), 1.7, 2, 2).unwrap();
        for i in 0..4 {
            let expect = 0.5 * Complex64::from_polar(1.0, -d[i] * 1.7);
            assert!((out.amplitudes()[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_cd_tracks_ground_state() {
        let c = chain(4, 1.0, Some(0));
        let psi0 = c.initial_state();
        let traj = c.reference_trajectory(&psi0, 4).unwrap();
        for (m, psi) in traj.iter().enumerate() {
            let (lam, _) = c.schedule().eval(m as f64 / 4.0).unwrap();
            let g = sector_ground_state(c.params(), lam).unwrap();
            let e = infidelity(psi, &g).unwrap();
            assert!(e < 1e-8, "m={m}: {e}");
        }
    }

    #[test]
    fn single_constant_slice_matches_continuous() {
        let p = ChainParams::new(4).unwrap();
        let h = crate::dense::reference_hamiltonian(&p, 0.4).unwrap();
        let psi = StateVector::basis(16, 3);
        let plan = TrotterPlan::new(1).unwrap();
        let d = trotter_evolve(&psi, &plan, 0.8, |_| Ok((h.clone(), DenseOperator::zeros(16)))).unwrap();
        let r = reference_evolve(&psi, |_| Ok(h.clone()), 0.8, 1, 1).unwrap();
        assert!((d.amplitudes() - r.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn zero_time_leaves_state_alone() {
        let c = chain(4, 0.0, Some(0));
        let psi = c.initial_state();
        let plan = TrotterPlan::new(5).unwrap();
        let out = c.trotter(&psi, &plan).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn generic_and_cached_paths_agree() {
        let c = chain(6, 1.0, Some(1));
        let plan = TrotterPlan::new(7).unwrap();
        let psi = c.initial_state();
        let fast = c.trotter(&psi, &plan).unwrap();
        let slow = trotter_evolve(&psi, &plan, 1.0, |t| Ok((c.reference_hamiltonian(t)?, c.cd_hamiltonian(t)?))).unwrap();
        assert!((fast.amplitudes() - slow.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn sector_is_invariant_under_every_term() {
        let c = chain(6, 1.0, Some(0));
        let (sector, _) = c.reduced.as_ref().unwrap();
        let p = sector.basis();
        let mut ops = vec![&c.full.bond, &c.full.field];
        ops.extend(&c.full.cd_orders);
        for op in ops {
            let image = op * p;
            let leak = &image - p * p.tr_mul(&image);
            assert!(leak.norm() < 1e-12 * op.norm().max(1.0));
        }
    }

    #[test]
    fn states_outside_the_sector_use_the_full_space() {
        let c = chain(4, 1.0, Some(1));
        let plan = TrotterPlan::new(5).unwrap();
        let psi = StateVector::basis(16, 1);
        let fast = c.trotter(&psi, &plan).unwrap();
        let slow = trotter_evolve(&psi, &plan, 1.0, |t| Ok((c.reference_hamiltonian(t)?, c.cd_hamiltonian(t)?))).unwrap();
        assert!((fast.amplitudes() - slow.amplitudes()).norm() < 1e-12);
        let full = reference_evolve(&psi, |t| c.total_hamiltonian(t), 1.0, 8, 1).unwrap();
        let seg = c.reference_segment(&psi, 0.0, 1.0, &Convergence::DENSE).unwrap();
        assert!(infidelity(&full, &seg).unwrap() < 1e-9);
    }

    #[test]
    fn exact_cd_error_halves_per_doubling() {
        // Small chains show no M⁻² window: the ratio sits at the first-order value 2.
        let c = chain(8, 1.0, Some(0));
        let psi0 = c.initial_state();
        let reference = c.reference(&psi0).unwrap();
        let err = |m| infidelity(&c.trotter(&psi0, &TrotterPlan::new(m).unwrap()).unwrap(), &reference).unwrap();
        let (e32, e64, e128) = (err(32), err(64), err(128));
        for ratio in [e32 / e64, e64 / e128] {
            assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn evaluation_rule_changes_little() {
        let c = chain(6, 1.0, Some(0));
        let psi0 = c.initial_state();
        let reference = c.reference(&psi0).unwrap();
        for m in [16, 64] {
            let right = TrotterPlan::new(m).unwrap();
            let left = TrotterPlan::with_rule(m, EvaluationRule::LeftEndpoint).unwrap();
            let er = infidelity(&c.trotter(&psi0, &right).unwrap(), &reference).unwrap();
            let el = infidelity(&c.trotter(&psi0, &left).unwrap(), &reference).unwrap();
            assert!((er - el).abs() <= 1.0 / m as f64, "M={m}: {er} vs {el}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn trotter_preserves_norm(m in 1usize..40, t in 0.1f64..5.0, tr in 0usize..3) {
            let c = chain(4, t, Some(tr));
            let out = c.trotter(&c.initial_state(), &TrotterPlan::new(m).unwrap()).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }
}
