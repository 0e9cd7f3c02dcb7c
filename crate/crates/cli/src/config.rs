//! Experiment configuration files.
//!
//! ```json
//! {
//!   "engine": "gaussian",
//!   "state": { "kind": "squeezed_thermal", "u": 0.6, "v": 0.6, "kappa": 1.0 },
//!   "angles": ["pi/8", "pi/4", "3pi/8", 0],
//!   "cutoff": 16,
//!   "seed": 0,
//!   "out": "report.csv",
//!   "scan": { "grid": 16, "refine": true },
//!   "sweep": { "u_start": 0.0, "u_stop": 1.2, "u_step": 0.02,
//!              "scenarios": ["equal", "zero", "opposite"], "kappas": [1.0, 0.9, 0.8] },
//!   "validate": { "trials": 1000, "replica_trials": 50 },
//!   "policy": { "verdict_tol": 1e-9 }
//! }
//! ```
//!
//! Every field is optional and unknown fields are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bellsim_core::detection::{parse_angle, AngleSettings};
use bellsim_core::sweep::SweepSpec;
use bellsim_core::NumericalPolicy;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Truncated Fock space.
    Fock,
    /// Covariance matrices (centered Gaussian states).
    Gaussian,
    /// Closed forms for coherent states and their mixtures.
    Analytic,
    /// The state's native engine and the Fock engine side by side.
    Both,
}

/// A complex number written as `[re, im]` or as a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> num_complex::Complex64 {
        match self {
            ComplexValue::Real(x) => num_complex::Complex64::new(x, 0.0),
            ComplexValue::Pair([re, im]) => num_complex::Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub z: [ComplexValue; 4],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    TwoPhoton {},
    Vacuum {},
    Coherent { z: [ComplexValue; 4] },
    Mixture { components: Vec<MixtureComponent> },
    SqueezedThermal { u: f64, v: f64, kappa: f64 },
    /// JSON file holding a pure Fock-space state.
    File { path: PathBuf },
}

impl StateSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StateSpec::TwoPhoton {} => "two_photon",
            StateSpec::Vacuum {} => "vacuum",
            StateSpec::Coherent { .. } => "coherent",
            StateSpec::Mixture { .. } => "mixture",
            StateSpec::SqueezedThermal { .. } => "squeezed_thermal",
            StateSpec::File { .. } => "file",
        }
    }

    pub fn native_engine(&self) -> Engine {
        match self {
            StateSpec::TwoPhoton {} | StateSpec::File { .. } => Engine::Fock,
            StateSpec::Vacuum {} | StateSpec::SqueezedThermal { .. } => Engine::Gaussian,
            StateSpec::Coherent { .. } | StateSpec::Mixture { .. } => Engine::Analytic,
        }
    }
}

/// An angle in radians or a string such as `"3pi/8"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Text(String),
}

impl AngleValue {
    pub fn radians(&self) -> Result<f64> {
        match self {
            AngleValue::Radians(x) => Ok(*x),
            AngleValue::Text(s) => Ok(parse_angle(s)?),
        }
    }
}

/// Four explicit angles, or `"random"` to draw them from the seed.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Fixed([AngleValue; 4]),
    Keyword(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub grid: Option<usize>,
    pub refine: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub trials: Option<u64>,
    pub replica_trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: Option<Engine>,
    pub state: Option<StateSpec>,
    pub angles: Option<AngleSpec>,
    pub cutoff: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub scan: Option<ScanConfig>,
    pub sweep: Option<SweepSpec>,
    pub validate: Option<ValidateConfig>,
    pub policy: Option<NumericalPolicy>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let mut config: Self =
            serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        // relative state files are resolved against the config's directory
        if let Some(StateSpec::File { path: state_path }) = &mut config.state {
            if state_path.is_relative() {
                if let Some(dir) = path.parent() {
                    *state_path = dir.join(&*state_path);
                }
            }
        }
        Ok(config)
    }
}

/// Resolves an angle specification; `"random"` draws four angles in `[0, pi)`.
pub fn resolve_angles(spec: Option<&AngleSpec>, seed: u64) -> Result<AngleSettings> {
    match spec {
        None => Ok(AngleSettings::reference()),
        Some(AngleSpec::Fixed(values)) => {
            let mut a = [0.0; 4];
            for (slot, v) in a.iter_mut().zip(values) {
                *slot = v.radians()?;
            }
            Ok(AngleSettings::from_array(a)?)
        }
        Some(AngleSpec::Keyword(k)) if k == "random" => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Ok(AngleSettings::from_array([(); 4].map(|_| rng.random_range(0.0..std::f64::consts::PI)))?)
        }
        Some(AngleSpec::Keyword(k)) => bail!("unknown angle keyword {k:?}; use four angles or \"random\""),
    }
}

/// Parses `--angles a,b,c,d`.
pub fn parse_angle_list(text: &str) -> Result<AngleSpec> {
    if text.trim() == "random" {
        return Ok(AngleSpec::Keyword("random".into()));
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("expected four comma-separated angles, got {}", parts.len());
    }
    let values: Vec<AngleValue> = parts.iter().map(|p| AngleValue::Text(p.to_string())).collect();
    Ok(AngleSpec::Fixed(values.try_into().expect("four values")))
}
