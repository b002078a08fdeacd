//! Run configuration: a TOML file whose every key has a default, overridden
//! by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qpf_core::families::FamilySpec;
use qpf_core::harper::{DEFAULT_IDS_PHASES, DEFAULT_LABEL_KMAX};
use qpf_core::rotnum::{default_seeds, Estimator, Method};
use qpf_core::scan::{Edge, WitnessSearch};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub family: Option<FamilySpec>,
    pub estimator: EstimatorConfig,
    /// Seeds the estimator's random starting points.
    pub seed: u64,
    pub jobs: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub probe: ProbeConfig,
    pub deviations: DeviationsConfig,
    pub sweep: SweepConfig,
    pub tongue: TongueConfig,
    pub strip: StripConfig,
    pub annulus: AnnulusConfig,
    pub ids: IdsConfig,
    pub gap_label: GapLabelConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub n: u64,
    /// Number of starting points: `(0, 0)` plus random ones.
    pub seeds: usize,
    pub method: Method,
    pub transient: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig { n: 100_000, seeds: 4, method: Method::Plain, transient: 0 }
    }
}

impl EstimatorConfig {
    pub fn build(&self, seed: u64) -> Estimator {
        Estimator::new(self.n, default_seeds(self.seeds, seed)).with_method(self.method).with_transient(self.transient)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Symmetric ε grid; defaults to `{±10⁻¹, …, ±10⁻⁶} ∪ {0}`.
    pub eps: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviationsConfig {
    pub theta: f64,
    pub x: f64,
    pub n: Vec<u64>,
    /// Estimated with the configured estimator when absent.
    pub rho: Option<f64>,
    /// Runs the boundedness diagnostic up to this many iterates.
    pub n_max: Option<u64>,
    pub growth_window: usize,
}

impl Default for DeviationsConfig {
    fn default() -> Self {
        DeviationsConfig {
            theta: 0.0,
            x: 0.0,
            n: (0..=16).map(|j| 1 << j).collect(),
            rho: None,
            n_max: None,
            growth_window: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub param2: Option<String>,
    pub lo2: Option<f64>,
    pub hi2: Option<f64>,
    pub points2: Option<usize>,
    pub eps: f64,
    pub min_width: f64,
    pub witness: WitnessSearch,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            param: "tau".into(),
            lo: -0.5,
            hi: 0.5,
            points: 101,
            param2: None,
            lo2: None,
            hi2: None,
            points2: None,
            eps: 0.0,
            min_width: 0.0,
            witness: WitnessSearch::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TongueConfig {
    pub param: String,
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
    pub edge: Edge,
    pub tol: f64,
}

impl Default for TongueConfig {
    fn default() -> Self {
        TongueConfig { param: "tau".into(), target: 0.0, lo: 0.0, hi: 0.5, edge: Edge::Right, tol: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StripConfig {
    pub grid: usize,
    /// Constant start curve iterated upward.
    pub below: f64,
    /// Constant start curve iterated downward.
    pub above: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub radius: usize,
    pub pinch_tol: f64,
}

impl Default for StripConfig {
    fn default() -> Self {
        StripConfig { grid: 4096, below: 0.25, above: 0.75, tol: 1e-10, max_iter: 10_000, radius: 1, pinch_tol: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnulusConfig {
    pub candidates: usize,
    pub grid: usize,
    pub max_iter: usize,
    pub strict_tol: f64,
}

impl Default for AnnulusConfig {
    fn default() -> Self {
        let d = qpf_core::graphs::AnnulusSearch::default();
        AnnulusConfig { candidates: d.candidates, grid: d.grid, max_iter: d.max_iter, strict_tol: d.strict_tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdsConfig {
    pub e_lo: f64,
    pub e_hi: f64,
    pub points: usize,
    pub size: usize,
    pub phases: usize,
    pub label_tol: f64,
    pub kmax: i64,
}

impl Default for IdsConfig {
    fn default() -> Self {
        IdsConfig {
            e_lo: -2.5,
            e_hi: 2.5,
            points: 101,
            size: 2000,
            phases: DEFAULT_IDS_PHASES,
            label_tol: 1e-4,
            kmax: DEFAULT_LABEL_KMAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapLabelConfig {
    pub e_lo: f64,
    pub e_hi: f64,
    pub tol: f64,
    pub kmax: i64,
}

impl Default for GapLabelConfig {
    fn default() -> Self {
        GapLabelConfig { e_lo: 0.0, e_hi: 0.0, tol: 1e-4, kmax: DEFAULT_LABEL_KMAX }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Rejects non-positive tolerances and empty estimator settings.
    pub fn validate(&self) -> CliResult<()> {
        let positive = [
            ("sweep.witness.tol", self.sweep.witness.tol),
            ("tongue.tol", self.tongue.tol),
            ("strip.tol", self.strip.tol),
            ("strip.pinch_tol", self.strip.pinch_tol),
            ("annulus.strict_tol", self.annulus.strict_tol),
            ("ids.label_tol", self.ids.label_tol),
            ("gap_label.tol", self.gap_label.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::config(format!("{name} must be a positive number, got {v}")));
            }
        }
        if self.estimator.n == 0 || self.estimator.seeds == 0 {
            return Err(CliError::config("estimator.n and estimator.seeds must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(CliError::config("jobs must be at least 1"));
        }
        Ok(())
    }
}

/// Default member of a family, all parameters zero.
pub fn family_by_name(name: &str) -> CliResult<FamilySpec> {
    match name {
        "translation" => Ok(FamilySpec::translation(0.0)),
        "arnold" => Ok(FamilySpec::arnold(0.0, 0.0, 0.0)),
        "harper" => Ok(FamilySpec::almost_mathieu(0.0, 0.0)),
        other => Err(CliError::config(format!("unknown family {other:?} (expected translation, arnold or harper)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = RunConfig::parse(
            r#"
            seed = 7
            [family]
            family = "arnold"
            alpha = 0.9
            tau = 0.0
            beta = 0.05
            [estimator]
            n = 5000
            method = "weighted"
            [sweep]
            param = "tau"
            points = 11
            [sweep.witness]
            tol = 1e-6
            qmax = 10
            pmax = 10
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.family, Some(FamilySpec::arnold(0.9, 0.0, 0.05)));
        assert_eq!(cfg.estimator.method, Method::Weighted);
        assert_eq!(cfg.estimator.seeds, 4);
        assert_eq!(cfg.sweep.witness.qmax, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("sed = 1").is_err());
        assert!(RunConfig::parse("[estimator]\nm = 3").is_err());
        assert!(RunConfig::parse("[family]\nfamily = \"translation\"\nrho0 = 0.1\nalpha = 1").is_err());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.tongue.tol = 0.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }
}
