//! Shared domain types: the annealing schedule, chain parameters, Pauli
//! operator words, Trotter plans and the counterdiabatic ansatz.
//!
//! Everything here is an immutable value; the dense and free-fermion engines
//! both consume these types.

mod pauli;
mod schedule;

use serde::{Deserialize, Serialize};

pub use pauli::{Pauli, PauliString};
pub use schedule::{eval_schedule, Schedule, ScheduleKind};

use crate::error::{Error, Result};

/// Periodic transverse-field Ising chain
/// H(λ) = −λJ Σ Z_i Z_{i+1} − (1 − λ) h Σ X_i.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    sites: usize,
    coupling: f64,
    field: f64,
}

impl ChainParams {
    /// Chain with J = h = 1.
    pub fn new(sites: usize) -> Result<Self> {
        Self::with_couplings(sites, 1.0, 1.0)
    }

    pub fn with_couplings(sites: usize, coupling: f64, field: f64) -> Result<Self> {
        if sites < 4 || !sites.is_multiple_of(2) {
            return Err(Error::domain(format!(
                "chain length must be even and at least 4, got {sites}"
            )));
        }
        if !(coupling.is_finite() && field.is_finite() && coupling > 0.0 && field > 0.0) {
            return Err(Error::domain("coupling and field must be positive and finite"));
        }
        Ok(Self {
            sites,
            coupling,
            field,
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Highest ansatz order, L − 2.
    pub fn max_order(&self) -> usize {
        self.sites - 2
    }
}

/// Which end of a slice the piecewise-constant Hamiltonian is sampled at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationRule {
    /// H_k(nT/M) for slice n.
    #[default]
    RightEndpoint,
    /// H_k((n − 1)T/M) for slice n.
    LeftEndpoint,
}

/// First-order product-formula plan. Each slice applies the reference factor
/// first and the counterdiabatic factor second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrotterPlan {
    slices: usize,
    rule: EvaluationRule,
}

impl TrotterPlan {
    pub fn new(slices: usize) -> Result<Self> {
        Self::with_rule(slices, EvaluationRule::RightEndpoint)
    }

    pub fn with_rule(slices: usize, rule: EvaluationRule) -> Result<Self> {
        if slices == 0 {
            return Err(Error::domain("number of slices must be at least 1"));
        }
        Ok(Self { slices, rule })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn rule(&self) -> EvaluationRule {
        self.rule
    }

    pub fn slice_width(&self, total_time: f64) -> f64 {
        total_time / self.slices as f64
    }

    /// Time t_n at which slice `n` (1-based) samples its Hamiltonians.
    pub fn sample_time(&self, n: usize, total_time: f64) -> f64 {
        let m = match self.rule {
            EvaluationRule::RightEndpoint => n,
            EvaluationRule::LeftEndpoint => n - 1,
        };
        boundary_time(m, self.slices, total_time)
    }
}

/// The m-th slice boundary mT/M, exact at m = M.
pub(crate) fn boundary_time(m: usize, slices: usize, total_time: f64) -> f64 {
    if m == slices {
        total_time
    } else {
        total_time * m as f64 / slices as f64
    }
}

/// How the ansatz weights α_k are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientMode {
    /// Least-squares optimum within the order-K ansatz.
    #[default]
    Variational,
    /// Exact (K = L − 2) weights with orders above K dropped.
    TruncatedExact,
}

/// Counterdiabatic ansatz Σ_{k≤K} α_k Σ_i (Y_i X…X Z_{i+k+1} + Z_i X…X Y_{i+k+1}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CdAnsatz {
    order: usize,
    mode: CoefficientMode,
}

impl CdAnsatz {
    pub fn new(params: &ChainParams, order: usize, mode: CoefficientMode) -> Result<Self> {
        if order > params.max_order() {
            return Err(Error::domain(format!(
                "ansatz order {order} exceeds L − 2 = {}",
                params.max_order()
            )));
        }
        Ok(Self { order, mode })
    }

    /// The complete ansatz, K = L − 2.
    pub fn exact(params: &ChainParams) -> Self {
        Self {
            order: params.max_order(),
            mode: CoefficientMode::Variational,
        }
    }

    /// Ansatz with `truncation` of the highest orders removed.
    pub fn truncated(params: &ChainParams, truncation: usize, mode: CoefficientMode) -> Result<Self> {
        if truncation > params.max_order() {
            return Err(Error::domain(format!(
                "truncation {truncation} exceeds L − 2 = {}",
                params.max_order()
            )));
        }
        Self::new(params, params.max_order() - truncation, mode)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mode(&self) -> CoefficientMode {
        self.mode
    }

    /// Number of truncated interactions, (L − 2) − K.
    pub fn truncation_count(&self, params: &ChainParams) -> usize {
        params.max_order() - self.order
    }

    pub fn is_exact(&self, params: &ChainParams) -> bool {
        self.order == params.max_order()
    }
}

/// The 2L Pauli terms of H_ref(λ): L bond terms ZZ with weight −λJ (including
/// the wrap-around bond) followed by L field terms X with weight −(1 − λ)h.
pub fn ref_hamiltonian_terms(params: &ChainParams, lambda: f64) -> Result<Vec<PauliString>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("λ = {lambda} outside [0, 1]")));
    }
    let l = params.sites();
    let mut terms = Vec::with_capacity(2 * l);
    for i in 1..=l {
        terms.push(PauliString::new(
            -lambda * params.coupling(),
            [(i, Pauli::Z), (i % l + 1, Pauli::Z)],
        )?);
    }
    for i in 1..=l {
        terms.push(PauliString::new(
            -(1.0 - lambda) * params.field(),
            [(i, Pauli::X)],
        )?);
    }
    Ok(terms)
}

/// The 2L(K + 1) ansatz strings weighted by `alpha`. Zero weights are kept so
/// the term count only depends on (L, K).
pub fn cd_ansatz_terms(
    params: &ChainParams,
    ansatz: &CdAnsatz,
    alpha: &[f64],
) -> Result<Vec<PauliString>> {
    let k_max = ansatz.order();
    if k_max > params.max_order() {
        return Err(Error::domain(format!(
            "ansatz order {k_max} exceeds L − 2 = {}",
            params.max_order()
        )));
    }
    if alpha.len() != k_max + 1 {
        return Err(Error::domain(format!(
            "expected {} coefficients, got {}",
            k_max + 1,
            alpha.len()
        )));
    }
    let l = params.sites();
    let mut terms = Vec::with_capacity(2 * l * (k_max + 1));
    for (k, &a) in alpha.iter().enumerate() {
        for i in 1..=l {
            terms.push(ansatz_word(l, i, k, Pauli::Y, Pauli::Z, a)?);
            terms.push(ansatz_word(l, i, k, Pauli::Z, Pauli::Y, a)?);
        }
    }
    Ok(terms)
}

/// `first`_i X_{i+1} … X_{i+k} `last`_{i+k+1} on a ring of `l` sites.
fn ansatz_word(l: usize, i: usize, k: usize, first: Pauli, last: Pauli, coeff: f64) -> Result<PauliString> {
    let site = |offset: usize| (i - 1 + offset) % l + 1;
    let letters = std::iter::once((i, first))
        .chain((1..=k).map(|j| (site(j), Pauli::X)))
        .chain(std::iter::once((site(k + 1), last)));
    PauliString::new(coeff, letters)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(terms: &[PauliString], pred: impl Fn(&PauliString) -> bool) -> usize {
        terms.iter().filter(|t| pred(t)).count()
    }

    #[test]
    fn params_validation() {
        assert!(ChainParams::new(2).is_err());
        assert!(ChainParams::new(7).is_err());
        assert!(ChainParams::new(4).is_ok());
        assert!(ChainParams::with_couplings(4, 0.0, 1.0).is_err());
    }

    #[test]
    fn reference_terms_at_endpoints() {
        let p = ChainParams::new(4).unwrap();
        let t0 = ref_hamiltonian_terms(&p, 0.0).unwrap();
        assert_eq!(t0.len(), 8);
        assert_eq!(count(&t0, |t| t.weight() == 1 && t.coeff == -1.0), 4);
        assert_eq!(count(&t0, |t| t.weight() == 2 && t.coeff == 0.0), 4);

        let t1 = ref_hamiltonian_terms(&p, 1.0).unwrap();
        assert_eq!(count(&t1, |t| t.weight() == 2 && t.coeff == -1.0), 4);
        assert_eq!(count(&t1, |t| t.weight() == 1 && t.coeff == 0.0), 4);

        let th = ref_hamiltonian_terms(&p, 0.5).unwrap();
        assert!(th.iter().all(|t| t.coeff == -0.5));
        // wrap-around bond Z_4 Z_1
        assert!(th
            .iter()
            .any(|t| t.letter(4) == Some(Pauli::Z) && t.letter(1) == Some(Pauli::Z)));
        assert!(ref_hamiltonian_terms(&p, 1.5).is_err());
    }

    #[test]
    fn two_site_ansatz() {
        let p = ChainParams::new(4).unwrap();
        let a = CdAnsatz::new(&p, 0, CoefficientMode::Variational).unwrap();
        let terms = cd_ansatz_terms(&p, &a, &[0.3]).unwrap();
        assert_eq!(terms.len(), 8);
        for t in &terms {
            assert_eq!(t.weight(), 2);
            assert_eq!(t.coeff, 0.3);
        }
        for i in 1..=4 {
            let j = i % 4 + 1;
            assert!(terms
                .iter()
                .any(|t| t.letter(i) == Some(Pauli::Y) && t.letter(j) == Some(Pauli::Z)));
            assert!(terms
                .iter()
                .any(|t| t.letter(i) == Some(Pauli::Z) && t.letter(j) == Some(Pauli::Y)));
        }
        let zero = cd_ansatz_terms(&p, &a, &[0.0]).unwrap();
        assert_eq!(zero.len(), 8);
    }

    #[test]
    fn six_site_third_order_words() {
        let p = ChainParams::new(6).unwrap();
        let a = CdAnsatz::new(&p, 2, CoefficientMode::Variational).unwrap();
        let terms = cd_ansatz_terms(&p, &a, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(terms.len(), 36);
        let long: Vec<_> = terms.iter().filter(|t| t.coeff == 3.0).collect();
        assert_eq!(long.len(), 12);
        // Hand enumeration: Y_i X_{i+1} X_{i+2} Z_{i+3} and Z_i X X Y_{i+3}.
        for i in 1..=6usize {
            let s = |o: usize| (i - 1 + o) % 6 + 1;
            for (first, last) in [(Pauli::Y, Pauli::Z), (Pauli::Z, Pauli::Y)] {
                assert!(long.iter().any(|t| t.weight() == 4
                    && t.letter(i) == Some(first)
                    && t.letter(s(1)) == Some(Pauli::X)
                    && t.letter(s(2)) == Some(Pauli::X)
                    && t.letter(s(3)) == Some(last)));
            }
        }
    }

    #[test]
    fn ansatz_bounds() {
        let p = ChainParams::new(4).unwrap();
        assert!(CdAnsatz::new(&p, 3, CoefficientMode::Variational).is_err());
        let a = CdAnsatz::exact(&p);
        assert_eq!(a.truncation_count(&p), 0);
        assert!(a.is_exact(&p));
        assert!(cd_ansatz_terms(&p, &a, &[1.0]).is_err());
        let t = CdAnsatz::truncated(&p, 2, CoefficientMode::TruncatedExact).unwrap();
        assert_eq!(t.order(), 0);
        assert_eq!(t.truncation_count(&p), 2);
    }

    #[test]
    fn plan_sample_times() {
        let right = TrotterPlan::new(4).unwrap();
        let left = TrotterPlan::with_rule(4, EvaluationRule::LeftEndpoint).unwrap();
        assert_eq!(right.sample_time(4, 3.0), 3.0);
        assert_eq!(right.sample_time(1, 2.0), 0.5);
        assert_eq!(left.sample_time(1, 2.0), 0.0);
        assert_eq!(right.slice_width(2.0), 0.5);
        assert!(TrotterPlan::new(0).is_err());
    }

    fn sorted_words(terms: &[PauliString]) -> Vec<String> {
        let mut w: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
        w.sort();
        w
    }

    proptest::proptest! {
        #[test]
        fn ansatz_is_translation_invariant(half in 2usize..8, shift in 0usize..16, seed in proptest::collection::vec(-2.0f64..2.0, 13)) {
            let p = ChainParams::new(2 * half).unwrap();
            let ansatz = CdAnsatz::exact(&p);
            let alpha = &seed[..=p.max_order()];
            let terms = cd_ansatz_terms(&p, &ansatz, alpha).unwrap();
            let moved: Vec<PauliString> = terms.iter().map(|t| t.shifted(shift, p.sites())).collect();
            proptest::prop_assert_eq!(sorted_words(&terms), sorted_words(&moved));
        }
    }
}
