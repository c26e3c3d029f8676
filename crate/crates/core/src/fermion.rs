//! Free-fermion engine: the translation-invariant chain splits into
//! independent two-level problems, one per positive momentum of the
//! antiperiodic sector, so L = 100 costs no more than a few hundred 2×2
//! rotations per slice.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cd_solver::{harmonic, mode_target, CdCoefficients, CdSolver};
use crate::error::{Error, Result};
use crate::integrate::{romberg, Convergence};
use crate::model::{boundary_time, CdAnsatz, ChainParams, Schedule, TrotterPlan};

/// Two-component mode amplitude (vacuum, occupied pair).
pub type Spinor = [Complex64; 2];

const MOMENTUM_TOL: f64 = 1e-12;

/// Positive antiperiodic momenta (2n − 1)π/L, n = 1..L/2.
pub fn dynamic_momenta(sites: usize) -> Vec<f64> {
    (1..=sites / 2)
        .map(|n| (2 * n - 1) as f64 * PI / sites as f64)
        .collect()
}

fn check_momentum(q: f64, params: &ChainParams) -> Result<()> {
    let l = params.sites() as f64;
    let n = (q * l / PI + 1.0) / 2.0;
    let nearest = n.round();
    if (n - nearest).abs() * 2.0 * PI / l > MOMENTUM_TOL || nearest < 1.0 || nearest > l / 2.0 {
        return Err(Error::domain(format!(
            "momentum {q} is not of the form (2n − 1)π/{l}"
        )));
    }
    Ok(())
}

/// Block generator z τ^z + x τ^x + y τ^y.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ModeHamiltonian {
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl ModeHamiltonian {
    /// Half the level splitting.
    pub fn magnitude(&self) -> f64 {
        (self.z * self.z + self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn gap(&self) -> f64 {
        2.0 * self.magnitude()
    }

    pub fn ground_energy(&self) -> f64 {
        -self.magnitude()
    }

    pub fn plus(&self, other: &ModeHamiltonian) -> ModeHamiltonian {
        ModeHamiltonian {
            z: self.z + other.z,
            x: self.x + other.x,
            y: self.y + other.y,
        }
    }

    /// exp(−iτ(z τ^z + x τ^x + y τ^y)) applied to `s`.
    pub fn propagate(&self, tau: f64, s: &Spinor) -> Spinor {
        let r = self.magnitude();
        let c = (r * tau).cos();
        let sn = if r * tau.abs() < 1e-8 {
            tau * (1.0 - (r * tau).powi(2) / 6.0)
        } else {
            (r * tau).sin() / r
        };
        let a = Complex64::new(c, -sn * self.z);
        let d = Complex64::new(c, sn * self.z);
        let b = Complex64::new(-sn * self.y, -sn * self.x);
        let e = Complex64::new(sn * self.y, -sn * self.x);
        [a * s[0] + b * s[1], e * s[0] + d * s[1]]
    }

    /// Lower eigenvector of a real block (y = 0), (cos θ/2, sin θ/2).
    fn real_ground_state(&self) -> Spinor {
        let theta = (-self.x).atan2(-self.z);
        let (s, c) = (theta / 2.0).sin_cos();
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)]
    }
}

fn reference_block(q: f64, lambda: f64, params: &ChainParams) -> ModeHamiltonian {
    let (j, h) = (params.coupling(), params.field());
    ModeHamiltonian {
        z: -2.0 * (h * (1.0 - lambda) - j * lambda * q.cos()),
        x: 2.0 * j * lambda * q.sin(),
        y: 0.0,
    }
}

/// Reference block of H_ref(λ) at antiperiodic momentum `q`.
pub fn mode_hamiltonian(q: f64, lambda: f64, params: &ChainParams) -> Result<ModeHamiltonian> {
    check_momentum(q, params)?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!("λ = {lambda} outside [0, 1]")));
    }
    Ok(reference_block(q, lambda, params))
}

/// Source of the counterdiabatic τ^y amplitude.
#[derive(Clone, Copy, Debug)]
pub enum CdWeights<'a> {
    /// θ̇_q/2, the exact per-mode term.
    Exact,
    Coefficients(&'a CdCoefficients),
}

/// Counterdiabatic block at `q`, pure τ^y.
pub fn mode_cd(q: f64, weights: CdWeights<'_>, lambda: f64, lambda_dot: f64, params: &ChainParams) -> Result<ModeHamiltonian> {
    check_momentum(q, params)?;
    let y = match weights {
        CdWeights::Exact => mode_target(q, lambda, lambda_dot, params)?,
        CdWeights::Coefficients(c) => c.mode_amplitude(q),
    };
    Ok(ModeHamiltonian { z: 0.0, x: 0.0, y })
}

/// Product state over the positive antiperiodic momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeStateSet {
    momenta: Vec<f64>,
    states: Vec<Spinor>,
}

impl ModeStateSet {
    /// Instantaneous ground state of H_ref(λ), mode by mode.
    pub fn ground(params: &ChainParams, lambda: f64) -> Result<Self> {
        let momenta = dynamic_momenta(params.sites());
        let states = momenta
            .iter()
            .map(|&q| mode_hamiltonian(q, lambda, params).map(|h| h.real_ground_state()))
            .collect::<Result<_>>()?;
        Ok(Self { momenta, states })
    }

    /// The λ = 0 ground state, image of |+⟩^⊗L.
    pub fn initial(params: &ChainParams) -> Self {
        Self::ground(params, 0.0).expect("λ = 0 is in range")
    }

    pub fn from_parts(momenta: Vec<f64>, states: Vec<Spinor>) -> Result<Self> {
        if momenta.len() != states.len() {
            return Err(Error::DimensionMismatch(momenta.len(), states.len()));
        }
        for s in &states {
            let n = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            if (n - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitary(n - 1.0));
            }
        }
        Ok(Self { momenta, states })
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn states(&self) -> &[Spinor] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    fn flatten(&self) -> Vec<Complex64> {
        self.states.iter().flat_map(|s| [s[0], s[1]]).collect()
    }

    fn with_flat(&self, flat: &[Complex64]) -> Self {
        let states = flat
            .chunks_exact(2)
            .map(|c| {
                let n = (c[0].norm_sqr() + c[1].norm_sqr()).sqrt();
                [c[0] / n, c[1] / n]
            })
            .collect();
        Self {
            momenta: self.momenta.clone(),
            states,
        }
    }
}

/// √(1 − Π_q |⟨a_q|b_q⟩|²), with the product accumulated in log space.
pub fn global_infidelity(a: &ModeStateSet, b: &ModeStateSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(a.len(), b.len()));
    }
    if a
        .momenta
        .iter()
        .zip(&b.momenta)
        .any(|(p, q)| (p - q).abs() > MOMENTUM_TOL)
    {
        return Err(Error::domain("mode sets use different momenta"));
    }
    let mut log_fidelity = 0.0;
    for (u, v) in a.states.iter().zip(&b.states) {
        // |⟨u⊥|v⟩|² with u⊥ = (−ū₁, ū₀) is the leaked weight, exact when small.
        let nu = u[0].norm_sqr() + u[1].norm_sqr();
        let nv = v[0].norm_sqr() + v[1].norm_sqr();
        let leak = ((-u[1] * v[0] + u[0] * v[1]).norm_sqr() / (nu * nv)).min(1.0);
        if leak == 1.0 {
            return Ok(1.0);
        }
        log_fidelity += (-leak).ln_1p();
    }
    Ok((-log_fidelity.exp_m1()).max(0.0).sqrt().min(1.0))
}

/// Counterdiabatic drive applied by a [`FermionChain`].
#[derive(Clone, Debug)]
pub enum FermionDrive {
    Off,
    /// The exact per-mode amplitude, bypassing the ansatz.
    Exact,
    Ansatz(CdAnsatz),
}

/// One annealing protocol in the momentum representation.
#[derive(Clone, Debug)]
pub struct FermionChain {
    params: ChainParams,
    schedule: Schedule,
    momenta: Vec<f64>,
    exact: bool,
    solver: Option<CdSolver>,
    /// w_k(q_n) on the dynamic momenta.
    harmonics: DMatrix<f64>,
}

impl FermionChain {
    pub fn new(params: &ChainParams, schedule: Schedule, drive: FermionDrive) -> Result<Self> {
        let momenta = dynamic_momenta(params.sites());
        let (exact, solver) = match drive {
            FermionDrive::Off => (false, None),
            FermionDrive::Exact => (true, None),
            FermionDrive::Ansatz(a) => (false, Some(CdSolver::new(params, a)?)),
        };
        let cols = solver.as_ref().map_or(0, |s| s.ansatz().order() + 1);
        let harmonics = DMatrix::from_fn(momenta.len(), cols, |n, k| harmonic(k, momenta[n]));
        Ok(Self {
            params: *params,
            schedule,
            momenta,
            exact,
            solver,
            harmonics,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn initial_state(&self) -> ModeStateSet {
        ModeStateSet::initial(&self.params)
    }

    /// Per-mode τ^y amplitudes of H_cd at (λ, λ̇).
    pub fn cd_amplitudes(&self, lambda: f64, lambda_dot: f64) -> Result<Vec<f64>> {
        if self.exact {
            return self
                .momenta
                .iter()
                .map(|&q| mode_target(q, lambda, lambda_dot, &self.params))
                .collect();
        }
        match &self.solver {
            Some(s) => {
                let c = s.coefficients(lambda, lambda_dot)?;
                let y = &self.harmonics * DVector::from_vec(c.values);
                Ok(y.iter().copied().collect())
            }
            None => Ok(vec![0.0; self.momenta.len()]),
        }
    }

    /// Reference and counterdiabatic blocks at time `t`.
    pub fn blocks(&self, t: f64) -> Result<Vec<(ModeHamiltonian, f64)>> {
        let (lambda, lambda_dot) = self.schedule.eval(t)?;
        let ys = self.cd_amplitudes(lambda, lambda_dot)?;
        Ok(self
            .momenta
            .iter()
            .zip(ys)
            .map(|(&q, y)| (reference_block(q, lambda, &self.params), y))
            .collect())
    }

    fn check_modes(&self, modes: &ModeStateSet) -> Result<()> {
        if modes.len() != self.momenta.len() {
            return Err(Error::DimensionMismatch(self.momenta.len(), modes.len()));
        }
        Ok(())
    }

    /// First-order product: per slice, the reference rotation then the
    /// counterdiabatic one, both sampled at t_n.
    pub fn evolve_trotter(&self, modes: &ModeStateSet, plan: &TrotterPlan) -> Result<ModeStateSet> {
        self.check_modes(modes)?;
        let total = self.schedule.total_time();
        let tau = plan.slice_width(total);
        let mut states = modes.states.clone();
        if tau == 0.0 {
            return Ok(modes.clone());
        }
        for n in 1..=plan.slices() {
            for (s, (h, y)) in states.iter_mut().zip(self.blocks(plan.sample_time(n, total))?) {
                let mid = h.propagate(tau, s);
                *s = ModeHamiltonian { z: 0.0, x: 0.0, y }.propagate(tau, &mid);
            }
        }
        Ok(ModeStateSet {
            momenta: modes.momenta.clone(),
            states,
        })
    }

    /// Continuous evolution under H_ref + H_cd over [0, T].
    pub fn evolve_reference(&self, modes: &ModeStateSet, cfg: &Convergence) -> Result<ModeStateSet> {
        self.evolve_segment(modes, 0.0, self.schedule.total_time(), cfg)
    }

    /// Continuous evolution from `t0` to `t1`.
    pub fn evolve_segment(&self, modes: &ModeStateSet, t0: f64, t1: f64, cfg: &Convergence) -> Result<ModeStateSet> {
        self.check_modes(modes)?;
        if t0.is_nan() || t1.is_nan() || t1 < t0 {
            return Err(Error::domain(format!("segment [{t0}, {t1}] is reversed")));
        }
        let flat = romberg(cfg, |steps| {
            let mut states = modes.states.clone();
            let width = (t1 - t0) / steps as f64;
            for s in 0..steps {
                let t = t0 + (s as f64 + 0.5) * width;
                for (st, (h, y)) in states.iter_mut().zip(self.blocks(t)?) {
                    *st = ModeHamiltonian { y, ..h }.propagate(width, st);
                }
            }
            Ok(vec![states.iter().flat_map(|s| [s[0], s[1]]).collect()])
        })?;
        Ok(modes.with_flat(&flat[0]))
    }

    /// As [`FermionChain::evolve_reference`], sampled at the `slices` + 1
    /// slice boundaries.
    pub fn reference_trajectory(&self, modes: &ModeStateSet, slices: usize, cfg: &Convergence) -> Result<Vec<ModeStateSet>> {
        self.check_modes(modes)?;
        if slices == 0 {
            return Err(Error::domain("slice count must be at least 1"));
        }
        let total = self.schedule.total_time();
        let snaps = romberg(cfg, |steps| {
            let mut states = modes.states.clone();
            let mut out = vec![modes.flatten()];
            for m in 1..=slices {
                let t0 = boundary_time(m - 1, slices, total);
                let width = (boundary_time(m, slices, total) - t0) / steps as f64;
                for s in 0..steps {
                    let t = t0 + (s as f64 + 0.5) * width;
                    for (st, (h, y)) in states.iter_mut().zip(self.blocks(t)?) {
                        *st = ModeHamiltonian { y, ..h }.propagate(width, st);
                    }
                }
                out.push(states.iter().flat_map(|s| [s[0], s[1]]).collect());
            }
            Ok(out)
        })?;
        Ok(snaps.iter().map(|f| modes.with_flat(f)).collect())
    }
}
