//! Power-law slopes from sweep records.

use std::str::FromStr;

use super::config::Engine;
use super::sweep::SweepRecord;
use crate::error::{Error, Result};

/// Minimum number of usable points for a fit.
pub const MIN_FIT_POINTS: usize = 4;

/// Slope of log E against log M with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

impl std::fmt::Display for SlopeFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4} ({} points)", self.slope, self.stderr, self.points)
    }
}

/// Ordinary least squares on (ln x, ln y).
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(xs.len(), ys.len()));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter_map(|(&x, &y)| {
            if x > 0.0 && y > 0.0 && y.is_finite() {
                Some((x.ln(), y.ln()))
            } else {
                log::warn!("dropping non-positive point ({x}, {y}) from fit");
                None
            }
        })
        .collect();
    let n = pts.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("need at least {MIN_FIT_POINTS} points, have {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
        points: n,
    })
}

/// Filter over records, written as comma-separated `key=value` pairs with
/// keys `engine`, `L`, `T`, `truncation`. An empty selector matches all.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SeriesSelector {
    pub engine: Option<Engine>,
    pub sites: Option<usize>,
    pub total_time: Option<f64>,
    pub truncation: Option<usize>,
}

impl FromStr for SeriesSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut sel = SeriesSelector::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::config("series", format!("expected key=value, got `{part}`")))?;
            let bad = |e: &dyn std::fmt::Display| Error::config("series", format!("{key}: {e}"));
            match key.trim() {
                "engine" => {
                    sel.engine = Some(match value.trim() {
                        "dense" => Engine::Dense,
                        "fermion" => Engine::Fermion,
                        other => return Err(bad(&format!("unknown engine `{other}`"))),
                    })
                }
                "L" => sel.sites = Some(value.trim().parse().map_err(|e| bad(&e))?),
                "T" => sel.total_time = Some(value.trim().parse().map_err(|e| bad(&e))?),
                "truncation" => sel.truncation = Some(value.trim().parse().map_err(|e| bad(&e))?),
                other => return Err(Error::config("series", format!("unknown key `{other}`"))),
            }
        }
        Ok(sel)
    }
}

impl SeriesSelector {
    pub fn matches(&self, r: &SweepRecord) -> bool {
        self.engine.is_none_or(|e| e == r.engine)
            && self.sites.is_none_or(|l| l == r.sites)
            && self.total_time.is_none_or(|t| (t - r.total_time).abs() <= 1e-9 * t.abs().max(1.0))
            && self.truncation.is_none_or(|k| k == r.truncation)
    }
}

/// Inclusive range of slice counts, parsed from `lo:hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::config("window", format!("expected lo:hi, got `{s}`")))?;
        let parse = |v: &str| -> Result<f64> {
            if v.trim().is_empty() {
                return Ok(f64::NAN);
            }
            v.trim()
                .parse()
                .map_err(|e| Error::config("window", format!("`{v}`: {e}")))
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        let w = Window {
            lo: if lo.is_nan() { 0.0 } else { lo },
            hi: if hi.is_nan() { f64::INFINITY } else { hi },
        };
        if w.lo > w.hi {
            return Err(Error::config("window", format!("empty window {s}")));
        }
        Ok(w)
    }
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, m: usize) -> bool {
        (self.lo..=self.hi).contains(&(m as f64))
    }
}

/// Fits the selected records with M inside `window`. Failed records and
/// non-positive infidelities are skipped with a warning.
pub fn fit_slope(records: &[SweepRecord], window: Window, selector: &SeriesSelector) -> Result<SlopeFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter(|r| selector.matches(r) && window.contains(r.slices))
        .filter_map(|r| match r.infidelity {
            Some(e) => Some((r.slices as f64, e)),
            None => {
                log::warn!("skipping failed record M={}", r.slices);
                None
            }
        })
        .unzip();
    fit_power_law(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(m: usize, e: f64, t: f64) -> SweepRecord {
        SweepRecord {
            engine: Engine::Fermion,
            sites: 50,
            total_time: t,
            slices: m,
            truncation: 0,
            infidelity: Some(e),
            bound_total: None,
            wall_time: 0.0,
            error: None,
        }
    }

    #[test]
    fn exact_power_laws() {
        let ms = [20.0, 35.0, 50.0, 80.0, 200.0];
        for p in [2.0, 1.0] {
            let ys: Vec<f64> = ms.iter().map(|m: &f64| 3.0 * m.powf(-p)).collect();
            let f = fit_power_law(&ms, &ys).unwrap();
            assert!((f.slope + p).abs() < 1e-12);
            assert!(f.stderr < 1e-10);
        }
    }

    #[test]
    fn too_few_points_and_bad_values() {
        assert!(matches!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.3]), Err(Error::Fit(_))));
        let f = fit_power_law(&[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 0.25, 0.0, 1.0 / 16.0, 1.0 / 25.0]).unwrap();
        assert_eq!(f.points, 4);
        assert!((f.slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn selector_and_window() {
        let sel: SeriesSelector = "T=1, truncation=0".parse().unwrap();
        let w: Window = "20:60".parse().unwrap();
        let mut records: Vec<_> = [20, 30, 40, 60, 100].iter().map(|&m| rec(m, 1.0 / (m * m) as f64, 1.0)).collect();
        records.extend([20, 30, 40, 60].iter().map(|&m| rec(m, 1.0 / m as f64, 5.0)));
        let f = fit_slope(&records, w, &sel).unwrap();
        assert_eq!(f.points, 4);
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!("X=1".parse::<SeriesSelector>().is_err());
        assert!("60:20".parse::<Window>().is_err());
        let open: Window = "100:".parse().unwrap();
        assert!(open.contains(5000) && !open.contains(99));
    }
}
