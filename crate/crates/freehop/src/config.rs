//! File-driven experiment configuration.
//!
//! Experiments are described by a JSON document, strictly validated: unknown
//! keys are rejected, exactly one of `antennas`/`dims` fixes the chain
//! dimensions, and every derived quantity (noise grid, correlation matrices,
//! precoders) is constructed through the same library calls the tests use.
//! A parsed config re-serializes to an equivalent document, and outputs nest
//! the resolved config so every result file is self-describing.
//!
//! ```json
//! {
//!   "hops": 2,
//!   "antennas": 100,
//!   "correlations": [
//!     {"tx": {"kind": "exponential", "r": 0.7}, "rx": {"kind": "identity"}},
//!     {"tx": {"kind": "identity"}, "rx": {"kind": "identity"}}
//!   ],
//!   "precoder": "equal_power",
//!   "snr_db": [-5, 0, 5, 10, 15, 20],
//!   "trials": 1,
//!   "master_seed": 42,
//!   "format": "csv"
//! }
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{CorrelationSpec, NetworkModel};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::precoding::{
    equal_power_precoders, optimal_direction_precoders, random_unitary_precoders,
    PowerAllocation, PrecoderSet,
};
use crate::rng::StreamFactory;

/// A matrix entry in a config file: a bare real or an `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryConfig {
    Real(f64),
    Complex([f64; 2]),
}

impl EntryConfig {
    fn to_complex(self) -> Complex64 {
        match self {
            EntryConfig::Real(re) => Complex64::new(re, 0.0),
            EntryConfig::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// One side's correlation recipe as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationConfig {
    Identity,
    Exponential { r: f64 },
    Explicit { matrix: Vec<Vec<EntryConfig>> },
}

impl CorrelationConfig {
    fn to_spec(&self) -> Result<CorrelationSpec> {
        match self {
            CorrelationConfig::Identity => Ok(CorrelationSpec::Identity),
            CorrelationConfig::Exponential { r } => Ok(CorrelationSpec::Exponential { r: *r }),
            CorrelationConfig::Explicit { matrix } => {
                let rows = matrix.len();
                if rows == 0 {
                    return Err(Error::Config(
                        "explicit correlation matrix must not be empty".to_string(),
                    ));
                }
                if matrix.iter().any(|row| row.len() != rows) {
                    return Err(Error::Config(
                        "explicit correlation matrix must be square".to_string(),
                    ));
                }
                let m = CMatrix::from_fn(rows, rows, |i, j| matrix[i][j].to_complex());
                Ok(CorrelationSpec::Explicit(m))
            }
        }
    }
}

/// Per-hop pair of correlation recipes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageCorrelation {
    pub tx: CorrelationConfig,
    pub rx: CorrelationConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderScheme {
    EqualPower,
    OptimalDirections,
    RandomUnitary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_trials() -> usize {
    1
}

/// Full experiment description as parsed from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Number of hops `N` (source → destination crosses `N` channels).
    pub hops: usize,
    /// Uniform antenna count (all `N+1` levels); exclusive with `dims`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antennas: Option<usize>,
    /// Per-level antenna counts `k_0..k_N`; exclusive with `antennas`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    /// Per-hop correlation recipes; identity when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlations: Option<Vec<StageCorrelation>>,
    pub precoder: PrecoderScheme,
    /// Per-level diagonal allocations for `optimal_directions` (uniform when
    /// omitted). Rejected for other schemes rather than silently ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocation: Option<Vec<Vec<f64>>>,
    /// Per-level power budgets; defaults to the antenna counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<f64>>,
    /// SNR grid in dB, strictly increasing.
    pub snr_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Output path; stdout when omitted (a CLI flag overrides).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        if self.hops == 0 {
            return Err(Error::Config("hops must be at least 1".to_string()));
        }
        self.resolve_dims()?;
        if let Some(correlations) = &self.correlations {
            if correlations.len() != self.hops {
                return Err(Error::Config(format!(
                    "correlations lists {} hops, config declares {}",
                    correlations.len(),
                    self.hops
                )));
            }
        }
        if self.allocation.is_some() && self.precoder != PrecoderScheme::OptimalDirections {
            return Err(Error::Config(
                "allocation is only meaningful for the optimal_directions scheme".to_string(),
            ));
        }
        if let Some(budgets) = &self.budgets {
            if budgets.len() != self.hops {
                return Err(Error::Config(format!(
                    "budgets lists {} levels, expected {}",
                    budgets.len(),
                    self.hops
                )));
            }
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("snr_db grid must not be empty".to_string()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db entries must be finite".to_string()));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "snr_db grid must be strictly increasing".to_string(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".to_string()));
        }
        Ok(())
    }

    /// The chain's antenna counts `k_0..k_N`.
    pub fn resolve_dims(&self) -> Result<Vec<usize>> {
        match (&self.antennas, &self.dims) {
            (Some(k), None) => {
                if *k == 0 {
                    return Err(Error::Config("antennas must be positive".to_string()));
                }
                Ok(vec![*k; self.hops + 1])
            }
            (None, Some(dims)) => {
                if dims.len() != self.hops + 1 {
                    return Err(Error::Config(format!(
                        "dims lists {} levels, expected {} for {} hops",
                        dims.len(),
                        self.hops + 1,
                        self.hops
                    )));
                }
                if dims.iter().any(|&d| d == 0) {
                    return Err(Error::Config("dims entries must be positive".to_string()));
                }
                Ok(dims.clone())
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "give either antennas or dims, not both".to_string(),
            )),
            (None, None) => Err(Error::Config(
                "one of antennas or dims is required".to_string(),
            )),
        }
    }

    /// The noise grid `η = 10^(snr_db/10)`, strictly increasing.
    pub fn eta_grid(&self) -> Vec<f64> {
        self.snr_db.iter().map(|s| 10f64.powf(s / 10.0)).collect()
    }

    /// Builds the channel model (noise level set to the grid's first point;
    /// sweeps re-evaluate per grid point).
    pub fn build_model(&self) -> Result<NetworkModel> {
        let dims = self.resolve_dims()?;
        let eta0 = self.eta_grid()[0];
        let budgets = self.budgets.clone();
        match &self.correlations {
            None => {
                let model = NetworkModel::iid(&dims, eta0)?;
                match budgets {
                    None => Ok(model),
                    Some(_) => {
                        let specs: Vec<_> = (0..self.hops)
                            .map(|_| (CorrelationSpec::Identity, CorrelationSpec::Identity))
                            .collect();
                        NetworkModel::from_correlations(&dims, &specs, eta0, budgets)
                    }
                }
            }
            Some(correlations) => {
                let specs = correlations
                    .iter()
                    .map(|c| Ok((c.tx.to_spec()?, c.rx.to_spec()?)))
                    .collect::<Result<Vec<_>>>()?;
                NetworkModel::from_correlations(&dims, &specs, eta0, budgets)
            }
        }
    }

    /// Builds the configured precoder set. `seed` is the resolved master
    /// seed (config value unless overridden on the command line).
    pub fn build_precoders(&self, model: &NetworkModel, seed: u64) -> Result<PrecoderSet> {
        match self.precoder {
            PrecoderScheme::EqualPower => equal_power_precoders(model),
            PrecoderScheme::OptimalDirections => {
                let alloc = match &self.allocation {
                    None => PowerAllocation::uniform(model),
                    Some(levels) => PowerAllocation::new(levels.clone())?,
                };
                optimal_direction_precoders(model, &alloc)
            }
            PrecoderScheme::RandomUnitary => {
                let factory = StreamFactory::new(seed);
                random_unitary_precoders(model, &mut factory.precoder(0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{
                "hops": 1,
                "antennas": 4,
                "precoder": "equal_power",
                "snr_db": [0, 10]{}{extra}
            }}"#,
            if extra.is_empty() { "" } else { "," }
        )
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ExperimentConfig::from_json(&minimal("")).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.master_seed, 0);
        assert_eq!(c.format, OutputFormat::Csv);
        assert_eq!(c.resolve_dims().unwrap(), vec![4, 4]);
        let grid = c.eta_grid();
        assert!((grid[0] - 1.0).abs() < 1e-12);
        assert!((grid[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = minimal(r#""surprise": true"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("surprise"), "diagnostic: {err}");
    }

    #[test]
    fn dims_and_antennas_are_exclusive() {
        let text = minimal(r#""dims": [4, 4]"#);
        assert!(ExperimentConfig::from_json(&text).is_err());

        let none = r#"{"hops": 1, "precoder": "equal_power", "snr_db": [0]}"#;
        assert!(ExperimentConfig::from_json(none).is_err());
    }

    #[test]
    fn grid_must_increase() {
        let bad = r#"{"hops": 1, "antennas": 2, "precoder": "equal_power", "snr_db": [10, 10]}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let bad2 = r#"{"hops": 1, "antennas": 2, "precoder": "equal_power", "snr_db": []}"#;
        assert!(ExperimentConfig::from_json(bad2).is_err());
    }

    #[test]
    fn allocation_requires_aligned_scheme() {
        let text = minimal(r#""allocation": [[1.0, 0.5, 0.25, 0.1]]"#);
        let err = ExperimentConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("optimal_directions"));
    }

    #[test]
    fn correlation_configs_build_models() {
        let text = r#"{
            "hops": 2,
            "dims": [3, 4, 5],
            "correlations": [
                {"tx": {"kind": "exponential", "r": 0.5}, "rx": {"kind": "identity"}},
                {"tx": {"kind": "identity"},
                 "rx": {"kind": "explicit",
                        "matrix": [[1.0, [0.0, 0.2]], [[0.0, -0.2], 1.0]]}}
            ],
            "precoder": "equal_power",
            "snr_db": [0]
        }"#;
        // rx of the second hop must be 5x5 to match dims; the 2x2 explicit
        // matrix above is a deliberate mismatch.
        let c = ExperimentConfig::from_json(text).unwrap();
        assert!(c.build_model().is_err());

        let text_ok = r#"{
            "hops": 1,
            "dims": [2, 2],
            "correlations": [
                {"tx": {"kind": "explicit",
                        "matrix": [[1.0, [0.0, 0.2]], [[0.0, -0.2], 1.0]]},
                 "rx": {"kind": "identity"}}
            ],
            "precoder": "equal_power",
            "snr_db": [0]
        }"#;
        let c = ExperimentConfig::from_json(text_ok).unwrap();
        let model = c.build_model().unwrap();
        assert_eq!(model.hops(), 1);
        let ct = model.stage(1).c_t();
        assert!((ct[(0, 1)] - Complex64::new(0.0, 0.2)).norm() < 1e-14);
    }

    #[test]
    fn round_trip_preserves_the_config() {
        let text = r#"{
            "hops": 2,
            "antennas": 8,
            "correlations": [
                {"tx": {"kind": "exponential", "r": 0.7}, "rx": {"kind": "exponential", "r": 0.7}},
                {"tx": {"kind": "identity"}, "rx": {"kind": "identity"}}
            ],
            "precoder": "optimal_directions",
            "allocation": [[1,1,1,1,1,1,1,1],[1,1,1,1,1,1,1,1]],
            "budgets": [8, 8],
            "snr_db": [-5, 0, 5],
            "trials": 7,
            "master_seed": 99,
            "format": "json"
        }"#;
        let a = ExperimentConfig::from_json(text).unwrap();
        let b = ExperimentConfig::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn schemes_build_their_precoders() {
        for scheme in ["equal_power", "optimal_directions", "random_unitary"] {
            let text = format!(
                r#"{{"hops": 1, "antennas": 4, "precoder": "{scheme}", "snr_db": [0]}}"#
            );
            let c = ExperimentConfig::from_json(&text).unwrap();
            let model = c.build_model().unwrap();
            let p = c.build_precoders(&model, 1).unwrap();
            assert_eq!(p.levels().len(), 1);
        }
    }

    #[test]
    fn budgets_apply_without_correlations() {
        let text = r#"{
            "hops": 1, "antennas": 4, "precoder": "equal_power",
            "budgets": [2.0], "snr_db": [0]
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        let model = c.build_model().unwrap();
        assert!((model.budget(0) - 2.0).abs() < 1e-15);
    }
}
