//! Exact simulation on the full 2^L Hilbert space.
//!
//! This is the ground-truth engine: Hamiltonians are assembled as dense
//! matrices from [`PauliString`]s, slice exponentials come from Hermitian
//! eigendecompositions, and the counterdiabatic term can be built directly
//! from the instantaneous spectrum. Practical up to L ≈ 12.

mod evolve;
mod expm;
mod sector;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{ref_hamiltonian_terms, ChainParams, PauliString};

pub use evolve::{reference_evolve, reference_trajectory, trotter_evolve, DenseChain};
pub use expm::propagate;
pub use sector::SymmetricSector;

/// Default cap on the number of sites a dense operator may span.
pub const DEFAULT_SITE_CAP: usize = 14;

/// Default threshold below which two levels count as degenerate (units of J).
pub const DEFAULT_GAP_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Normalized state on 2^L amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Wraps `amps` after normalizing; a zero vector is rejected.
    pub fn new(amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::domain("state vector has zero or non-finite norm"));
        }
        Ok(Self { amps: amps / Complex64::new(norm, 0.0) })
    }

    pub fn from_vec(amps: Vec<Complex64>) -> Result<Self> {
        Self::new(DVector::from_vec(amps))
    }

    pub(crate) fn from_normalized(amps: DVector<Complex64>) -> Self {
        Self { amps }
    }

    /// Computational basis state |index⟩.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// |+⟩^⊗L, the ground state of the transverse field.
    pub fn all_plus(sites: usize) -> Self {
        let dim = 1usize << sites;
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            amps: DVector::from_element(dim, Complex64::new(a, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Rotates the global phase so the largest amplitude is real-positive.
    pub fn fix_phase(mut self) -> Self {
        let (idx, _) = self
            .amps
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, a)| if a.norm() > best.1 { (i, a.norm()) } else { best });
        let a = self.amps[idx];
        if a.norm() > 0.0 {
            let phase = a.conj() / a.norm();
            self.amps *= phase;
        }
        self
    }
}

/// Dense complex matrix; Hamiltonians built here are Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::from_element(dim, dim, ZERO),
        }
    }

    pub fn from_real(mat: &DMatrix<f64>) -> Self {
        Self {
            mat: mat.map(|x| Complex64::new(x, 0.0)),
        }
    }

    /// `i·mat` for a real matrix.
    pub fn from_imag(mat: &DMatrix<f64>) -> Self {
        Self {
            mat: mat.map(|x| Complex64::new(0.0, x)),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// max |H − H†| entrywise.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, psi: &StateVector) -> Result<DVector<Complex64>> {
        if self.dim() != psi.dim() {
            return Err(Error::DimensionMismatch(self.dim(), psi.dim()));
        }
        Ok(&self.mat * &psi.amps)
    }

    /// ⟨ψ|A|ψ⟩.
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        Ok(psi.amps.dotc(&self.apply(psi)?))
    }

    /// [A, B] = AB − BA.
    pub fn commutator(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(DenseOperator {
            mat: &self.mat * &other.mat - &other.mat * &self.mat,
        })
    }

    pub fn scaled(&self, c: f64) -> DenseOperator {
        DenseOperator {
            mat: &self.mat * Complex64::new(c, 0.0),
        }
    }

    pub fn plus(&self, other: &DenseOperator) -> Result<DenseOperator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(DenseOperator {
            mat: &self.mat + &other.mat,
        })
    }

    /// Spectral norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.mat
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |a: f64, &b| a.max(b))
    }

    /// Entries have no imaginary part.
    pub(crate) fn is_real(&self) -> bool {
        self.mat.iter().all(|z| z.im == 0.0)
    }

    /// Entries have no real part.
    pub(crate) fn is_imaginary(&self) -> bool {
        self.mat.iter().all(|z| z.re == 0.0)
    }
}

/// Ascending eigenvalues with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn state(&self, index: usize) -> StateVector {
        StateVector::from_normalized(self.vectors.column(index).into_owned())
    }

    /// Matrix elements ⟨m|A|n⟩ in this eigenbasis.
    pub fn transform(&self, op: &DenseOperator) -> DMatrix<Complex64> {
        self.vectors.adjoint() * op.matrix() * &self.vectors
    }
}

/// Diagonalizes a Hermitian operator; real-symmetric input takes a faster
/// real path.
pub fn eigensystem(op: &DenseOperator) -> Eigensystem {
    let n = op.dim();
    let (values, vectors) = if op.is_real() {
        let real = op.matrix().map(|z| z.re);
        let eig = real.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = op.matrix().clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Eigensystem {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Σ coeff × (Kronecker product of Pauli matrices) on `sites` qubits.
pub fn assemble(terms: &[PauliString], sites: usize) -> Result<DenseOperator> {
    assemble_with_cap(terms, sites, DEFAULT_SITE_CAP)
}

pub fn assemble_with_cap(terms: &[PauliString], sites: usize, cap: usize) -> Result<DenseOperator> {
    if sites > cap {
        return Err(Error::TooLarge { sites, cap });
    }
    let dim = 1usize << sites;
    let mut mat = DMatrix::from_element(dim, dim, ZERO);
    for term in terms {
        if term.max_site() > sites {
            return Err(Error::domain(format!(
                "term acts on site {} of a {sites}-site register",
                term.max_site()
            )));
        }
        if term.coeff == 0.0 {
            continue;
        }
        let (flip, sign, ys) = term.masks(sites);
        let base = Complex64::new(term.coeff, 0.0) * Complex64::i().powu(ys);
        for b in 0..dim {
            let phase = if (b & sign).count_ones() % 2 == 1 { -base } else { base };
            mat[(b ^ flip, b)] += phase;
        }
    }
    Ok(DenseOperator { mat })
}

/// Reference Hamiltonian of the chain at λ as a dense operator.
pub fn reference_hamiltonian(params: &ChainParams, lambda: f64) -> Result<DenseOperator> {
    assemble(&ref_hamiltonian_terms(params, lambda)?, params.sites())
}

/// Counterdiabatic operator from the instantaneous spectrum, with the count of
/// level pairs skipped as (near-)degenerate.
#[derive(Clone, Debug)]
pub struct SpectralCd {
    pub operator: DenseOperator,
    pub skipped_pairs: usize,
    /// Largest |⟨m|∂H|n⟩| among the skipped pairs; nonzero values signal
    /// that degeneracies contaminate the result.
    pub max_skipped_coupling: f64,
}

/// i Σ_{m≠n} |m⟩⟨m|∂H|n⟩⟨n| / (E_n − E_m) over pairs with |E_m − E_n| > gap_tol.
pub fn spectral_cd(h: &DenseOperator, dh: &DenseOperator, gap_tol: f64) -> Result<SpectralCd> {
    if h.dim() != dh.dim() {
        return Err(Error::DimensionMismatch(h.dim(), dh.dim()));
    }
    let eig = eigensystem(h);
    Ok(spectral_cd_from(&eig, dh, gap_tol))
}

pub(crate) fn spectral_cd_from(eig: &Eigensystem, dh: &DenseOperator, gap_tol: f64) -> SpectralCd {
    let n = dh.dim();
    let elements = eig.transform(dh);
    let mut skipped = 0;
    let mut max_skipped: f64 = 0.0;
    let mut inner = DMatrix::from_element(n, n, ZERO);
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let gap = eig.values[k] - eig.values[m];
            if gap.abs() <= gap_tol {
                skipped += 1;
                max_skipped = max_skipped.max(elements[(m, k)].norm());
                continue;
            }
            inner[(m, k)] = Complex64::i() * elements[(m, k)] / gap;
        }
    }
    let mat = &eig.vectors * inner * eig.vectors.adjoint();
    SpectralCd {
        operator: DenseOperator { mat },
        skipped_pairs: skipped,
        max_skipped_coupling: max_skipped,
    }
}

/// Ground state of H_ref(λ) on the full space, phase fixed so the largest
/// amplitude is real-positive. Fails when the ground level is degenerate.
pub fn adiabatic_state(params: &ChainParams, lambda: f64) -> Result<StateVector> {
    adiabatic_state_with_tol(params, lambda, DEFAULT_GAP_TOL)
}

pub fn adiabatic_state_with_tol(params: &ChainParams, lambda: f64, gap_tol: f64) -> Result<StateVector> {
    let h = reference_hamiltonian(params, lambda)?;
    let eig = eigensystem(&h);
    let gap = eig.values[1] - eig.values[0];
    if gap <= gap_tol {
        return Err(Error::Degenerate {
            gap,
            tolerance: gap_tol,
        });
    }
    Ok(eig.state(0).fix_phase())
}

/// Ground state of H_ref(λ) inside the translation-invariant, spin-flip-even
/// sector reached from |+⟩^⊗L. Unlike [`adiabatic_state`] this stays
/// well-defined at λ = 1.
pub fn sector_ground_state(params: &ChainParams, lambda: f64) -> Result<StateVector> {
    let sector = SymmetricSector::new(params.sites())?;
    let h = reference_hamiltonian(params, lambda)?;
    let restricted = DenseOperator::new(sector.restrict(&h))?;
    let eig = eigensystem(&restricted);
    if eig.values.len() > 1 {
        let gap = eig.values[1] - eig.values[0];
        if gap <= DEFAULT_GAP_TOL {
            return Err(Error::Degenerate {
                gap,
                tolerance: DEFAULT_GAP_TOL,
            });
        }
    }
    Ok(sector.embed(&eig.vectors.column(0).into_owned()).fix_phase())
}

/// √(1 − |⟨ψ₁|ψ₂⟩|²), evaluated as the norm of the part of ψ₂ orthogonal
/// to ψ₁ so that small values keep full relative precision.
pub fn infidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let ua = &a.amps / Complex64::new(a.amps.norm(), 0.0);
    let ub = &b.amps / Complex64::new(b.amps.norm(), 0.0);
    let overlap = ua.dotc(&ub);
    let orth = ub - ua * overlap;
    Ok(orth.norm().min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Pauli;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_z_and_empty_sum() {
        let z = PauliString::new(1.0, [(1, Pauli::Z)]).unwrap();
        let op = assemble(&[z], 1).unwrap();
        assert_eq!(op.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(op.matrix()[(1, 1)], c(-1.0, 0.0));
        assert_eq!(op.matrix()[(0, 1)], c(0.0, 0.0));

        let empty = assemble(&[], 2).unwrap();
        assert_eq!(empty.dim(), 4);
        assert!(empty.matrix().iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn pauli_y_convention() {
        // Y = [[0, −i], [i, 0]]
        let y = PauliString::new(1.0, [(1, Pauli::Y)]).unwrap();
        let op = assemble(&[y], 1).unwrap();
        assert_eq!(op.matrix()[(0, 1)], c(0.0, -1.0));
        assert_eq!(op.matrix()[(1, 0)], c(0.0, 1.0));
    }

    #[test]
    fn kron_order_puts_site_one_first() {
        // X ⊗ I on two qubits flips the most significant bit.
        let x1 = PauliString::new(1.0, [(1, Pauli::X)]).unwrap();
        let op = assemble(&[x1], 2).unwrap();
        assert_eq!(op.matrix()[(2, 0)], c(1.0, 0.0));
        assert_eq!(op.matrix()[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn site_cap_and_range() {
        assert!(matches!(assemble_with_cap(&[], 5, 4), Err(Error::TooLarge { .. })));
        let far = PauliString::new(1.0, [(3, Pauli::X)]).unwrap();
        assert!(assemble(&[far], 2).is_err());
    }

    #[test]
    fn ground_energy_l4_half() {
        // Brute-force oracle computed before the build: −2 Σ_{q>0} |sin(q/2)|
        // over q ∈ {π/4, 3π/4} gives −2.6131259297527530.
        let p = ChainParams::new(4).unwrap();
        let h = reference_hamiltonian(&p, 0.5).unwrap();
        assert!(h.hermiticity_error() < 1e-12);
        let e = eigensystem(&h);
        assert!((e.values[0] + 2.613_125_929_752_753).abs() < 1e-12, "{}", e.values[0]);
    }

    #[test]
    fn spectral_cd_vanishes_without_drive() {
        let p = ChainParams::new(4).unwrap();
        let h = reference_hamiltonian(&p, 0.3).unwrap();
        let cd = spectral_cd(&h, &DenseOperator::zeros(16), DEFAULT_GAP_TOL).unwrap();
        assert!(cd.operator.matrix().iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn spectral_cd_is_hermitian_and_off_diagonal() {
        let p = ChainParams::new(4).unwrap();
        let h = reference_hamiltonian(&p, 0.4).unwrap();
        let dh = reference_hamiltonian(&p, 1.0)
            .unwrap()
            .plus(&reference_hamiltonian(&p, 0.0).unwrap().scaled(-1.0))
            .unwrap()
            .scaled(1.3);
        let cd = spectral_cd(&h, &dh, DEFAULT_GAP_TOL).unwrap();
        assert!(cd.operator.hermiticity_error() < 1e-12);
        let eig = eigensystem(&h);
        let diag = eig.transform(&cd.operator);
        let norm = cd.operator.op_norm();
        for n in 0..16 {
            assert!(diag[(n, n)].norm() < 1e-10 * norm);
        }
    }

    #[test]
    fn adiabatic_state_limits() {
        let p = ChainParams::new(4).unwrap();
        let plus = StateVector::all_plus(4);
        let g0 = adiabatic_state(&p, 0.0).unwrap();
        assert!(infidelity(&g0, &plus).unwrap() < 1e-7);
        assert!(matches!(adiabatic_state(&p, 1.0), Err(Error::Degenerate { .. })));

        let s1 = sector_ground_state(&p, 1.0).unwrap();
        // (|0000⟩ + |1111⟩)/√2
        assert!((s1.amplitudes()[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((s1.amplitudes()[15].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_state_matches_diagonalization() {
        let p = ChainParams::new(4).unwrap();
        let g = adiabatic_state(&p, 0.5).unwrap();
        let h = reference_hamiltonian(&p, 0.5).unwrap();
        let e = h.expectation(&g).unwrap().re;
        assert!((e + 2.613_125_929_752_753).abs() < 1e-11);
        let s = sector_ground_state(&p, 0.5).unwrap();
        assert!(infidelity(&g, &s).unwrap() < 1e-7);
    }

    #[test]
    fn infidelity_examples() {
        let a = StateVector::basis(2, 0);
        let b = StateVector::basis(2, 1);
        assert_eq!(infidelity(&a, &a).unwrap(), 0.0);
        assert_eq!(infidelity(&a, &b).unwrap(), 1.0);
        let m = StateVector::from_vec(vec![c(0.8, 0.0), c(0.6, 0.0)]).unwrap();
        assert!((infidelity(&a, &m).unwrap() - 0.6).abs() < 1e-15);
        let phased = StateVector::from_vec(vec![c(0.0, 0.8), c(0.0, 0.6)]).unwrap();
        assert!(infidelity(&m, &phased).unwrap() < 1e-7);
        assert!(infidelity(&a, &StateVector::basis(4, 0)).is_err());
    }
}
