//! Monte Carlo harness: trial runner, tracking metrics, concentration
//! verification suites, and CSV emission.

mod emit;
mod metrics;
mod trial;
mod verify;
mod world;

pub use emit::{emit_results, format_float};
pub use metrics::{AggregateMetrics, BoxStats, TrialResult};
pub use trial::{run_monte_carlo, run_trial};
pub use verify::{
    rademacher_dist, standard_test_distributions, verify_lemma1, verify_mgf, KnownDist,
    Lemma1Row, MgfRow,
};
pub use world::World;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::connectivity_radius;

/// Which filter variant a run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Leader locked to the initial mutual-information winner.
    FixedLeader,
    /// Leader node with subsampling hand-off (`N_b` particles transmitted).
    Subsample,
    /// Leader node with mixture hand-off (`5·N_p` values transmitted).
    Parametric,
    /// Leader node with uncompressed hand-off (no approximation).
    None,
    /// All satellite observations fused every step.
    Centralized,
}

/// Experiment settings. JSON config files use these exact field names.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_b", skip_serializing_if = "Option::is_none")]
    pub n_b: Option<usize>,
    #[serde(rename = "N_p", skip_serializing_if = "Option::is_none")]
    pub n_p: Option<usize>,
    pub lambda: f64,
    #[serde(rename = "K_l")]
    pub k_l: usize,
    #[serde(rename = "K_s")]
    pub k_s: usize,
    pub r0: f64,
    pub noise_amp: f64,
    pub p_d: f64,
    pub p_f: f64,
    /// Detection radius; defaults to 1.25 times the connectivity radius,
    /// which keeps every point of the square covered by enough sensors
    /// that the posterior localizes within a few steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_d: Option<f64>,
    #[serde(rename = "T")]
    pub t_steps: usize,
    pub trials: usize,
    pub mode: Mode,
    #[serde(rename = "reference_N")]
    pub reference_n: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 300,
            n_b: None,
            n_p: None,
            lambda: 0.2,
            k_l: 20,
            k_s: 200,
            r0: 0.02,
            noise_amp: 0.005,
            p_d: 0.8,
            p_f: 0.1,
            r_d: None,
            t_steps: 100,
            trials: 200,
            mode: Mode::None,
            reference_n: 3000,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// Detection radius after applying the `1.25 · r_c` default.
    pub fn resolved_r_d(&self) -> f64 {
        self.r_d
            .unwrap_or_else(|| 1.25 * connectivity_radius(self.k_s))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k_l == 0 || self.k_s == 0 || self.t_steps == 0 {
            return Err(Error::invalid_argument(
                "N, K_l, K_s and T must all be positive",
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid_argument("trials must be positive"));
        }
        if self.reference_n == 0 {
            return Err(Error::invalid_argument("reference_N must be positive"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid_argument("lambda must lie in [0, 1]"));
        }
        match self.mode {
            Mode::Subsample => {
                let n_b = self
                    .n_b
                    .ok_or_else(|| Error::invalid_argument("subsample mode requires N_b"))?;
                if n_b == 0 || n_b > self.n {
                    return Err(Error::invalid_argument("N_b must satisfy 1 <= N_b <= N"));
                }
            }
            Mode::Parametric => {
                let n_p = self
                    .n_p
                    .ok_or_else(|| Error::invalid_argument("parametric mode requires N_p"))?;
                if n_p == 0 {
                    return Err(Error::invalid_argument("N_p must be at least 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Ratio of regular particle count to values transmitted at hand-off:
/// `N/N_b` for subsampling, `2N/(5·N_p)` for the diagonal-Gaussian mixture.
pub fn compression_factor(config: &ExperimentConfig) -> Result<f64> {
    match config.mode {
        Mode::Subsample => {
            let n_b = config
                .n_b
                .ok_or_else(|| Error::invalid_argument("subsample mode requires N_b"))?;
            Ok(config.n as f64 / n_b as f64)
        }
        Mode::Parametric => {
            let n_p = config
                .n_p
                .ok_or_else(|| Error::invalid_argument("parametric mode requires N_p"))?;
            Ok(2.0 * config.n as f64 / (5.0 * n_p as f64))
        }
        _ => Err(Error::invalid_argument(
            "compression factor is defined only for subsample and parametric modes",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compression_factor_values() {
        let mut config = ExperimentConfig {
            mode: Mode::Subsample,
            n_b: Some(10),
            ..ExperimentConfig::default()
        };
        assert_eq!(compression_factor(&config).unwrap(), 30.0);
        config.n_b = Some(300);
        assert_eq!(compression_factor(&config).unwrap(), 1.0);
        config.mode = Mode::Parametric;
        config.n_p = Some(24);
        assert_eq!(compression_factor(&config).unwrap(), 5.0);
        config.mode = Mode::None;
        assert!(compression_factor(&config).is_err());
    }

    #[test]
    fn config_json_round_trip_uses_spec_names() {
        let config = ExperimentConfig {
            mode: Mode::Subsample,
            n_b: Some(30),
            ..ExperimentConfig::default()
        };
        let text = config.to_json().unwrap();
        for key in ["\"N\"", "\"N_b\"", "\"K_l\"", "\"K_s\"", "\"T\"", "\"reference_N\""] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.n, 300);
        assert_eq!(back.n_b, Some(30));
        assert_eq!(back.mode, Mode::Subsample);
    }

    #[test]
    fn partial_config_uses_defaults() {
        let config =
            ExperimentConfig::from_json(r#"{"mode": "centralized", "trials": 5}"#).unwrap();
        assert_eq!(config.n, 300);
        assert_eq!(config.lambda, 0.2);
        assert_eq!(config.trials, 5);
        assert_eq!(config.mode, Mode::Centralized);
    }

    #[test]
    fn validation_catches_mode_mismatch() {
        let config = ExperimentConfig {
            mode: Mode::Subsample,
            n_b: None,
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
        let config = ExperimentConfig {
            mode: Mode::Parametric,
            n_p: None,
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
    }
}
