//! Sweep configuration files.
//!
//! ```toml
//! engine = "fermion"            # or "dense"
//! sites = 50
//! total_times = [1.0, 5.0, 10.0]
//! slices = { min = 20, max = 200, per_decade = 15 }   # or an explicit list
//! truncations = [0]
//! coefficient_mode = "variational"                     # or "truncated-exact"
//! comparison = "digitized-vs-continuous"               # or "digitized-vs-adiabatic"
//! output = "fig1_top.csv"
//! ```
//!
//! Optional keys: `workers`, `seed`, `bound` (dense only), `evaluation_rule`.
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dense::DEFAULT_SITE_CAP;
use crate::error::{Error, Result};
use crate::model::{CoefficientMode, EvaluationRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Dense,
    Fermion,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Dense => "dense",
            Engine::Fermion => "fermion",
        })
    }
}

/// What the digitized final state is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// Continuous evolution under the same Hamiltonians.
    #[default]
    DigitizedVsContinuous,
    /// Ground state of the final Hamiltonian.
    DigitizedVsAdiabatic,
}

/// Geometric slice grid with roughly `per_decade` points per factor of ten.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceGrid {
    pub min: usize,
    pub max: usize,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
}

fn default_per_decade() -> usize {
    15
}

impl SliceGrid {
    /// Rounded geometric points from `min` to `max`, both included, deduplicated.
    pub fn points(&self) -> Vec<usize> {
        if self.max <= self.min {
            return vec![self.min];
        }
        let decades = (self.max as f64 / self.min as f64).log10();
        let n = ((decades * self.per_decade as f64).ceil() as usize).max(1);
        let ratio = (self.max as f64 / self.min as f64).powf(1.0 / n as f64);
        let mut out: Vec<usize> = (0..=n)
            .map(|i| (self.min as f64 * ratio.powi(i as i32)).round() as usize)
            .collect();
        out[n] = self.max;
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SliceSpec {
    List(Vec<usize>),
    Grid(SliceGrid),
}

impl SliceSpec {
    pub fn points(&self) -> Vec<usize> {
        match self {
            SliceSpec::List(v) => v.clone(),
            SliceSpec::Grid(g) => g.points(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub sites: usize,
    pub total_times: Vec<f64>,
    pub slices: SliceSpec,
    #[serde(default = "default_truncations")]
    pub truncations: Vec<usize>,
    #[serde(default)]
    pub coefficient_mode: CoefficientMode,
    #[serde(default)]
    pub comparison: Comparison,
    #[serde(default)]
    pub evaluation_rule: EvaluationRule,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Also record Σ L_n per point (dense engine only).
    #[serde(default)]
    pub bound: bool,
}

fn default_truncations() -> Vec<usize> {
    vec![0]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn slice_counts(&self) -> Vec<usize> {
        self.slices.points()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 4 || !self.sites.is_multiple_of(2) {
            return Err(Error::config("sites", format!("must be even and at least 4, got {}", self.sites)));
        }
        if self.engine == Engine::Dense && self.sites > DEFAULT_SITE_CAP {
            return Err(Error::config(
                "sites",
                format!("dense engine supports at most {DEFAULT_SITE_CAP} sites, got {}", self.sites),
            ));
        }
        if self.total_times.is_empty() {
            return Err(Error::config("total_times", "at least one value required"));
        }
        for (i, t) in self.total_times.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(Error::config(format!("total_times[{i}]"), format!("invalid total time {t}")));
            }
        }
        let ms = self.slice_counts();
        if ms.is_empty() {
            return Err(Error::config("slices", "at least one slice count required"));
        }
        if let SliceSpec::Grid(g) = &self.slices {
            if g.per_decade == 0 {
                return Err(Error::config("slices.per_decade", "must be positive"));
            }
        }
        if ms.contains(&0) {
            return Err(Error::config("slices", "slice counts must be at least 1"));
        }
        for (i, &tr) in self.truncations.iter().enumerate() {
            if tr > self.sites - 2 {
                return Err(Error::config(
                    format!("truncations[{i}]"),
                    format!("{tr} exceeds L − 2 = {}", self.sites - 2),
                ));
            }
        }
        if self.truncations.is_empty() {
            return Err(Error::config("truncations", "at least one value required"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.bound && self.engine != Engine::Dense {
            return Err(Error::config("bound", "slice-angle bound is only available on the dense engine"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = r#"
engine = "fermion"
sites = 50
total_times = [1.0, 5.0, 10.0]
slices = { min = 20, max = 200 }
output = "out.csv"
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml(FIG1).unwrap();
        assert_eq!(c.engine, Engine::Fermion);
        assert_eq!(c.truncations, vec![0]);
        assert_eq!(c.coefficient_mode, CoefficientMode::Variational);
        assert_eq!(c.comparison, Comparison::DigitizedVsContinuous);
        let ms = c.slice_counts();
        assert_eq!((ms[0], *ms.last().unwrap()), (20, 200));
        assert_eq!(ms.len(), 16);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn explicit_list_and_modes() {
        let c = ExperimentConfig::from_toml(
            r#"
engine = "dense"
sites = 6
total_times = [1.0]
slices = [8, 32]
truncations = [0, 2]
coefficient_mode = "truncated-exact"
comparison = "digitized-vs-adiabatic"
bound = true
"#,
        )
        .unwrap();
        assert_eq!(c.slice_counts(), vec![8, 32]);
        assert_eq!(c.coefficient_mode, CoefficientMode::TruncatedExact);
    }

    fn config_path(text: &str) -> String {
        match ExperimentConfig::from_toml(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn rejections_name_the_field() {
        assert_eq!(config_path(&format!("{FIG1}\ncolour = 1\n")), "colour");
        assert_eq!(config_path(&FIG1.replace("sites = 50", "sites = 7")), "sites");
        assert_eq!(config_path(&FIG1.replace("\"fermion\"", "\"dense\"")), "sites");
        assert_eq!(config_path(&format!("{FIG1}\ntruncations = [49]\n")), "truncations[0]");
        assert_eq!(config_path(&FIG1.replace("sites = 50", "sites = \"fifty\"")), "sites");
        assert_eq!(config_path(&format!("{FIG1}\nbound = true\n")), "bound");
    }
}
