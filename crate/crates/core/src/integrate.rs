//! Romberg refinement of midpoint-rule propagators.
//!
//! The exponential midpoint product is time-symmetric, so its error expands
//! in even powers of the step. Each doubling adds one row to the Richardson
//! tableau; the walk stops when successive diagonal entries agree.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stopping rule for the continuous reference dynamics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Convergence {
    /// Steps in the coarsest level (per slice when a slice grid is given).
    pub initial_steps: usize,
    /// Largest accepted change between successive extrapolants (2-norm).
    pub tolerance: f64,
    /// Doubling cap before giving up.
    pub max_doublings: usize,
}

impl Convergence {
    pub const DENSE: Convergence = Convergence {
        initial_steps: 8,
        tolerance: 1e-10,
        max_doublings: 14,
    };

    pub const FERMION: Convergence = Convergence {
        initial_steps: 64,
        tolerance: 1e-12,
        max_doublings: 16,
    };
}

/// Deepest extrapolation column used; higher orders only amplify noise.
const MAX_COLUMN: usize = 5;

/// Runs `level(steps)` for steps = initial·2^j, each returning snapshots of
/// flattened states, and returns the converged extrapolated snapshots.
pub(crate) fn romberg<F>(cfg: &Convergence, mut level: F) -> Result<Vec<Vec<Complex64>>>
where
    F: FnMut(usize) -> Result<Vec<Vec<Complex64>>>,
{
    let mut prev_row: Vec<Vec<Vec<Complex64>>> = Vec::new();
    let mut prev_best: Option<Vec<Vec<Complex64>>> = None;
    let mut change = f64::INFINITY;
    let mut quiet = 0;
    for j in 0..=cfg.max_doublings {
        let steps = cfg.initial_steps << j;
        let mut row = vec![level(steps)?];
        for k in 1..=j.min(MAX_COLUMN) {
            let factor = 1.0 / (4f64.powi(k as i32) - 1.0);
            let next = row[k - 1]
                .iter()
                .zip(&prev_row[k - 1])
                .map(|(fine, coarse)| {
                    fine.iter()
                        .zip(coarse)
                        .map(|(f, c)| f + (f - c) * factor)
                        .collect()
                })
                .collect();
            row.push(next);
        }
        let best = row.last().cloned().unwrap_or_default();
        if let Some(p) = &prev_best {
            change = max_distance(&best, p);
            // Two quiet levels in a row guard against an accidental match.
            if change < cfg.tolerance {
                quiet += 1;
                if quiet >= 2 || change < 1e-3 * cfg.tolerance {
                    return Ok(best);
                }
            } else {
                quiet = 0;
            }
        }
        prev_best = Some(best);
        prev_row = row;
    }
    Err(Error::Convergence {
        doublings: cfg.max_doublings,
        change,
        tolerance: cfg.tolerance,
    })
}

fn max_distance(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(u, v)| (u - v).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}
