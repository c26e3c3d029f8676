//! Applying exp(−iτH) to state vectors.
//!
//! Slice exponentials go through an eigendecomposition so they are exact to
//! machine precision. Real-symmetric H and purely imaginary H = iA (A real
//! antisymmetric) both reduce to a real symmetric eigenproblem; anything else
//! falls back to the complex Hermitian solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{eigensystem, DenseOperator, StateVector};
use crate::error::{Error, Result};

/// exp(−iτH)|ψ⟩ via the spectral decomposition of H.
pub fn propagate(h: &DenseOperator, tau: f64, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(h.dim(), psi.dim()));
    }
    if tau == 0.0 {
        return Ok(psi.clone());
    }
    let out = if h.is_real() {
        let real = h.matrix().map(|z| z.re);
        propagate_real_symmetric(&real, tau, psi.amplitudes())
    } else if h.is_imaginary() {
        let a = h.matrix().map(|z| z.im);
        propagate_imaginary(&a, tau, psi.amplitudes())
    } else {
        let eig = eigensystem(h);
        let coeffs = eig.vectors.adjoint() * psi.amplitudes();
        let phased = DVector::from_fn(coeffs.len(), |i, _| {
            coeffs[i] * Complex64::from_polar(1.0, -tau * eig.values[i])
        });
        &eig.vectors * phased
    };
    Ok(StateVector::from_normalized(out))
}

/// exp(−iτH)ψ for real symmetric H = V Λ Vᵀ.
pub(crate) fn propagate_real_symmetric(h: &DMatrix<f64>, tau: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let (re, im) = split(psi);
    let cr = v.tr_mul(&re);
    let ci = v.tr_mul(&im);
    // multiply each coefficient by e^{−iτλ}
    let mut pr = cr.clone();
    let mut pi = ci.clone();
    for k in 0..cr.len() {
        let (s, c) = (-tau * eig.eigenvalues[k]).sin_cos();
        pr[k] = c * cr[k] - s * ci[k];
        pi[k] = s * cr[k] + c * ci[k];
    }
    join(&(v * pr), &(v * pi))
}

/// exp(−iτ·iA)ψ = exp(τA)ψ for real antisymmetric A, through S = AᵀA:
/// exp(τA) = cos(τ√S) + A · sin(τ√S)/√S.
pub(crate) fn propagate_imaginary(a: &DMatrix<f64>, tau: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let s = a.tr_mul(a);
    let eig = s.symmetric_eigen();
    let w = &eig.eigenvectors;
    let (re, im) = split(psi);
    let cr = w.tr_mul(&re);
    let ci = w.tr_mul(&im);
    let n = cr.len();
    let mut cos_r = DVector::zeros(n);
    let mut cos_i = DVector::zeros(n);
    let mut sin_r = DVector::zeros(n);
    let mut sin_i = DVector::zeros(n);
    for k in 0..n {
        let mu = eig.eigenvalues[k].max(0.0).sqrt();
        let c = (tau * mu).cos();
        let sinc = if mu * tau.abs() < 1e-8 {
            tau * (1.0 - (tau * mu).powi(2) / 6.0)
        } else {
            (tau * mu).sin() / mu
        };
        cos_r[k] = c * cr[k];
        cos_i[k] = c * ci[k];
        sin_r[k] = sinc * cr[k];
        sin_i[k] = sinc * ci[k];
    }
    let out_r = w * cos_r + a * (w * sin_r);
    let out_i = w * cos_i + a * (w * sin_i);
    join(&out_r, &out_i)
}

/// exp(−iτH)ψ by a Taylor series summed until the terms fall below machine
/// precision, splitting τ so each piece has ‖τH‖∞ ≤ 1/2.
pub(crate) fn taylor_propagate(h: &DMatrix<Complex64>, tau: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
    let norm_inf = (0..h.nrows())
        .map(|r| h.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let pieces = ((tau.abs() * norm_inf) / 0.5).ceil().max(1.0) as usize;
    let step = tau / pieces as f64;
    let factor = Complex64::new(0.0, -step);
    let mut out = psi.clone();
    for _ in 0..pieces {
        let mut term = out.clone();
        let mut sum = out.clone();
        for j in 1..=60 {
            term = (h * &term) * (factor / j as f64);
            sum += &term;
            if term.norm() <= 1e-17 * sum.norm() {
                break;
            }
        }
        out = sum;
    }
    out
}

fn split(psi: &DVector<Complex64>) -> (DVector<f64>, DVector<f64>) {
    (psi.map(|z| z.re), psi.map(|z| z.im))
}

fn join(re: &DVector<f64>, im: &DVector<f64>) -> DVector<Complex64> {
    DVector::from_fn(re.len(), |i, _| Complex64::new(re[i], im[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{assemble, infidelity};
    use crate::model::{Pauli, PauliString};

    fn random_state(dim: usize, seed: u64) -> StateVector {
        // Small LCG keeps this test free of extra dependencies.
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        StateVector::from_vec((0..dim).map(|_| Complex64::new(next(), next())).collect()).unwrap()
    }

    fn terms() -> Vec<PauliString> {
        vec![
            PauliString::new(0.7, [(1, Pauli::Z), (2, Pauli::Z)]).unwrap(),
            PauliString::new(-0.4, [(2, Pauli::X)]).unwrap(),
            PauliString::new(0.9, [(1, Pauli::X), (3, Pauli::Z)]).unwrap(),
        ]
    }

    #[test]
    fn three_paths_agree_with_taylor() {
        let psi = random_state(8, 3);
        let real = assemble(&terms(), 3).unwrap();
        let imag = assemble(
            &[
                PauliString::new(0.5, [(1, Pauli::Y), (2, Pauli::Z)]).unwrap(),
                PauliString::new(-1.2, [(2, Pauli::X), (3, Pauli::Y)]).unwrap(),
            ],
            3,
        )
        .unwrap();
        let mixed = real.plus(&imag).unwrap();
        assert!(real.is_real() && imag.is_imaginary() && !mixed.is_real());
        for (op, tau) in [(&real, 0.37), (&imag, 1.9), (&mixed, -0.8)] {
            let fast = propagate(op, tau, &psi).unwrap();
            let slow = taylor_propagate(op.matrix(), tau, psi.amplitudes());
            let d = (fast.amplitudes() - slow).norm();
            assert!(d < 1e-13, "difference {d}");
            assert!((fast.norm() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_and_diagonal_generators() {
        let psi = random_state(4, 9);
        let zero = DenseOperator::zeros(4);
        assert_eq!(propagate(&zero, 2.0, &psi).unwrap(), psi);

        let diag = assemble(&[PauliString::new(1.5, [(1, Pauli::Z)]).unwrap()], 2).unwrap();
        let out = propagate(&diag, 0.3, &psi).unwrap();
        let d = [1.5, 1.5, -1.5, -1.5];
        for i in 0..4 {
            let expect = psi.amplitudes()[i] * Complex64::from_polar(1.0, -d[i] * 0.3);
            assert!((out.amplitudes()[i] - expect).norm() < 1e-14);
        }
        assert!(infidelity(&out, &psi).unwrap() > 0.0);
    }
}
