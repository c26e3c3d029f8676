use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the annealing profile λ(t).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// λ(t) = (1 − cos(πt/T)) / 2, flat at both ends.
    #[default]
    Cosine,
}

/// Annealing schedule λ(t) on [0, T] with λ(0) = 0 and λ(T) = 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    total_time: f64,
    kind: ScheduleKind,
}

/// Slack for evaluation times that land a few ulps outside [0, T].
const TIME_SLACK: f64 = 1e-12;

impl Schedule {
    pub fn new(kind: ScheduleKind, total_time: f64) -> Result<Self> {
        if !total_time.is_finite() || total_time < 0.0 {
            return Err(Error::domain(format!(
                "total time must be finite and non-negative, got {total_time}"
            )));
        }
        Ok(Self { total_time, kind })
    }

    pub fn cosine(total_time: f64) -> Result<Self> {
        Self::new(ScheduleKind::Cosine, total_time)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Returns (λ(t), λ̇(t)).
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let big_t = self.total_time;
        let slack = TIME_SLACK * big_t.max(1.0);
        if !t.is_finite() || t < -slack || t > big_t + slack {
            return Err(Error::domain(format!(
                "time {t} outside schedule window [0, {big_t}]"
            )));
        }
        if big_t == 0.0 {
            return Ok((0.0, 0.0));
        }
        let t = t.clamp(0.0, big_t);
        match self.kind {
            ScheduleKind::Cosine => {
                // Endpoints are pinned so the rate vanishes exactly there.
                if t == 0.0 {
                    return Ok((0.0, 0.0));
                }
                if t == big_t {
                    return Ok((1.0, 0.0));
                }
                let phase = PI * t / big_t;
                Ok((0.5 * (1.0 - phase.cos()), PI / (2.0 * big_t) * phase.sin()))
            }
        }
    }
}

/// Free-function form of [`Schedule::eval`].
pub fn eval_schedule(schedule: &Schedule, t: f64) -> Result<(f64, f64)> {
    schedule.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let s = Schedule::cosine(1.0).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), (0.0, 0.0));
        assert_eq!(s.eval(1.0).unwrap(), (1.0, 0.0));
        let (l, r) = s.eval(0.5).unwrap();
        assert!((l - 0.5).abs() < 1e-15);
        assert!((r - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn outside_window_is_rejected() {
        let s = Schedule::cosine(2.0).unwrap();
        assert!(matches!(s.eval(-0.1), Err(Error::Domain(_))));
        assert!(matches!(s.eval(2.01), Err(Error::Domain(_))));
        assert!(s.eval(2.0 + 1e-14).is_ok());
    }

    #[test]
    fn zero_duration() {
        let s = Schedule::cosine(0.0).unwrap();
        assert_eq!(s.eval(0.0).unwrap(), (0.0, 0.0));
        assert!(Schedule::cosine(-1.0).is_err());
    }

    #[test]
    fn rate_matches_centered_differences() {
        // |λ̇ − D_δ λ| ≤ C δ² with C = π³/(12 T³), the bound on |λ'''|/6.
        for &big_t in &[0.5, 1.0, 5.0] {
            let s = Schedule::cosine(big_t).unwrap();
            let c = PI.powi(3) / (12.0 * big_t.powi(3)) * 1.01;
            for i in 1..40 {
                let t = big_t * i as f64 / 40.0;
                for &d in &[1e-3, 1e-4] {
                    let d = d * big_t;
                    if t - d < 0.0 || t + d > big_t {
                        continue;
                    }
                    let fd = (s.eval(t + d).unwrap().0 - s.eval(t - d).unwrap().0) / (2.0 * d);
                    let err = (s.eval(t).unwrap().1 - fd).abs();
                    assert!(err <= c * d * d + 1e-10, "t={t} d={d} err={err}");
                }
            }
        }
    }

    #[test]
    fn monotone_and_bounded() {
        let s = Schedule::cosine(3.0).unwrap();
        let mut prev = 0.0;
        for i in 0..=300 {
            let (l, r) = s.eval(3.0 * i as f64 / 300.0).unwrap();
            assert!((0.0..=1.0).contains(&l));
            assert!(l >= prev);
            assert!(r >= 0.0);
            prev = l;
        }
    }
}
