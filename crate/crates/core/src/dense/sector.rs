use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DenseOperator, StateVector, DEFAULT_SITE_CAP};
use crate::error::{Error, Result};

/// Translation-invariant, spin-flip-even subspace of the chain.
///
/// Every term of the reference and counterdiabatic Hamiltonians commutes with
/// cyclic translation and with Π X_i, and |+⟩^⊗L lies in the +1/+1 sector,
/// so the annealing dynamics never leaves it. Each basis vector is the
/// uniform superposition over one class of bitstrings closed under rotation
/// and global flip.
#[derive(Clone, Debug)]
pub struct SymmetricSector {
    sites: usize,
    basis: DMatrix<f64>,
}

impl SymmetricSector {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 || sites > DEFAULT_SITE_CAP {
            return Err(Error::TooLarge {
                sites,
                cap: DEFAULT_SITE_CAP,
            });
        }
        let dim = 1usize << sites;
        let mask = dim - 1;
        let rotate = |b: usize| ((b << 1) | (b >> (sites - 1))) & mask;
        let mut class_of = vec![usize::MAX; dim];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for start in 0..dim {
            if class_of[start] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = Vec::new();
            for seed in [start, start ^ mask] {
                let mut b = seed;
                loop {
                    if class_of[b] == usize::MAX {
                        class_of[b] = id;
                        members.push(b);
                    }
                    b = rotate(b);
                    if b == seed {
                        break;
                    }
                }
            }
            classes.push(members);
        }
        let mut basis = DMatrix::zeros(dim, classes.len());
        for (c, members) in classes.iter().enumerate() {
            let w = 1.0 / (members.len() as f64).sqrt();
            for &b in members {
                basis[(b, c)] = w;
            }
        }
        Ok(Self { sites, basis })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Isometry from the sector into the full space.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Pᵀ A P.
    pub fn restrict(&self, op: &DenseOperator) -> DMatrix<Complex64> {
        let p = self.basis.map(|x| Complex64::new(x, 0.0));
        p.transpose() * op.matrix() * &p
    }

    /// Pᵀ|ψ⟩.
    pub fn project(&self, psi: &StateVector) -> DVector<Complex64> {
        let (re, im) = (psi.amplitudes().map(|z| z.re), psi.amplitudes().map(|z| z.im));
        let (pr, pi) = (self.basis.tr_mul(&re), self.basis.tr_mul(&im));
        DVector::from_fn(pr.len(), |i, _| Complex64::new(pr[i], pi[i]))
    }

    /// PᵀMP for a real operator.
    pub fn restrict_real(&self, op: &DMatrix<f64>) -> DMatrix<f64> {
        self.basis.tr_mul(&(op * &self.basis))
    }

    /// P v.
    pub fn lift(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let (re, im) = (v.map(|z| z.re), v.map(|z| z.im));
        let (fr, fi) = (&self.basis * re, &self.basis * im);
        DVector::from_fn(fr.len(), |i, _| Complex64::new(fr[i], fi[i]))
    }

    /// P v, normalized.
    pub fn embed(&self, v: &DVector<Complex64>) -> StateVector {
        let full = self.lift(v);
        let n = full.norm();
        StateVector::from_normalized(full / Complex64::new(n, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes_and_orthonormality() {
        // Necklaces of length L modulo complement: 4 → 4, 6 → 8.
        for (l, expect) in [(4, 4), (6, 8)] {
            let s = SymmetricSector::new(l).unwrap();
            assert_eq!(s.dim(), expect, "L = {l}");
            let gram = s.basis().transpose() * s.basis();
            assert!((gram - DMatrix::identity(expect, expect)).norm() < 1e-14);
        }
    }

    #[test]
    fn plus_state_lies_in_sector() {
        let s = SymmetricSector::new(6).unwrap();
        let plus = StateVector::all_plus(6);
        let v = s.project(&plus);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }
}
