//! Run configuration: one TOML file with nested blocks for the protocol,
//! kernel, Reality source, solver, players and outputs.
//!
//! Configs are validated as a whole before any round runs: dimension
//! consistency between protocol, kernel and Reality, parameter ranges, and
//! the match between observation models and protocols. The effective
//! config (after a seed override) is hashed into the transcript header so
//! replays can be tied back to their inputs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::engine::{
    AdversarialPolicy, DatumSampler, ForecasterKind, IidObservationModel, LinkFunction,
    RealitySource, RunSetup, SkepticDescriptor,
};
use crate::forecaster::SolverConfig;
use crate::kernels::{Kernel, KernelSpec};
use crate::protocols::{ProtocolSpec, ProtocolVariant};
use crate::{Error, Result};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Where Reality's moves come from, as configured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RealityConfig {
    Iid {
        seed: u64,
        #[serde(default)]
        datum: DatumSampler,
        observations: IidObservationModel,
    },
    Adversarial {
        seed: u64,
        policy: AdversarialPolicy,
        #[serde(default)]
        datum: DatumSampler,
    },
    Replay {
        /// CSV with a header row: datum columns, then the raw observation.
        input: PathBuf,
    },
}

impl RealityConfig {
    pub fn seed(&self) -> u64 {
        match self {
            RealityConfig::Iid { seed, .. } | RealityConfig::Adversarial { seed, .. } => *seed,
            RealityConfig::Replay { .. } => 0,
        }
    }

    fn with_seed(&self, seed: u64) -> Self {
        let mut out = self.clone();
        match &mut out {
            RealityConfig::Iid { seed: s, .. } | RealityConfig::Adversarial { seed: s, .. } => {
                *s = seed
            }
            RealityConfig::Replay { .. } => {}
        }
        out
    }

    pub fn datum_dim(&self) -> usize {
        match self {
            RealityConfig::Iid { datum, .. } | RealityConfig::Adversarial { datum, .. } => {
                datum.dim()
            }
            RealityConfig::Replay { .. } => 0,
        }
    }

    pub fn replay_input(&self) -> Option<&PathBuf> {
        match self {
            RealityConfig::Replay { input } => Some(input),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub transcript: Option<PathBuf>,
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

fn default_schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn default_initial_capital() -> f64 {
    1.0
}

fn default_forecaster() -> ForecasterKind {
    ForecasterKind::K29
}

fn default_skeptic() -> SkepticDescriptor {
    SkepticDescriptor::Wlln
}

/// A complete run description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub horizon: usize,
    #[serde(default = "default_initial_capital")]
    pub initial_capital: f64,
    pub protocol: ProtocolVariant,
    pub kernel: KernelSpec,
    pub reality: RealityConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_forecaster")]
    pub forecaster: ForecasterKind,
    #[serde(default = "default_skeptic")]
    pub skeptic: SkepticDescriptor,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Stable hash of the effective config (after the seed override).
    pub fn config_hash(&self) -> Result<String> {
        Ok(format!("{:016x}", fnv1a64(self.to_toml_string()?.as_bytes())))
    }

    /// Validate everything and assemble the runtime objects. Replay
    /// sources need the CSV text, which the caller loads from
    /// `reality.input`.
    pub fn build(&self, seed_override: Option<u64>, replay_text: Option<&str>) -> Result<RunSetup> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "config schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        let protocol = ProtocolSpec::new(self.protocol.clone())
            .map_err(|e| Error::Config(format!("protocol: {e}")))?;
        let kernel = Kernel::from_spec(&self.kernel)
            .map_err(|e| Error::Config(format!("kernel: {e}")))?;
        if kernel.forecast_dim() != protocol.obs_dim() {
            return Err(Error::Config(format!(
                "kernel.forecast_dim {} does not match the protocol's observation dim {}",
                kernel.forecast_dim(),
                protocol.obs_dim()
            )));
        }

        let effective = RunConfig {
            reality: self
                .reality
                .with_seed(seed_override.unwrap_or_else(|| self.reality.seed())),
            ..self.clone()
        };
        let seed = effective.reality.seed();
        let config_hash = effective.config_hash()?;

        let reality = effective.build_reality(&protocol, &kernel, replay_text)?;
        if let ForecasterKind::Fixed { value } = &self.forecaster {
            if value.len() != protocol.obs_dim() {
                return Err(Error::Config(format!(
                    "forecaster.value has dim {}, protocol needs {}",
                    value.len(),
                    protocol.obs_dim()
                )));
            }
        }
        if let SkepticDescriptor::Exploit { scale } = &self.skeptic {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(Error::Config(format!(
                    "skeptic.scale must be > 0, got {scale}"
                )));
            }
        }

        Ok(RunSetup {
            protocol,
            kernel,
            forecaster: self.forecaster.clone(),
            skeptic: self.skeptic.clone(),
            reality,
            solver: self.solver,
            horizon: self.horizon,
            initial_capital: self.initial_capital,
            seed,
            config_hash,
        })
    }

    fn build_reality(
        &self,
        protocol: &ProtocolSpec,
        kernel: &Kernel,
        replay_text: Option<&str>,
    ) -> Result<RealitySource> {
        let datum_dim = kernel.datum_dim();
        match &self.reality {
            RealityConfig::Iid { seed, datum, observations } => {
                if datum.dim() != datum_dim {
                    return Err(Error::Config(format!(
                        "reality.datum has dim {}, kernel.datum_dim is {datum_dim}",
                        datum.dim()
                    )));
                }
                validate_observation_model(observations, protocol, datum_dim)?;
                Ok(RealitySource::iid(datum.clone(), observations.clone(), *seed))
            }
            RealityConfig::Adversarial { seed, policy, datum } => {
                if datum.dim() != datum_dim {
                    return Err(Error::Config(format!(
                        "reality.datum has dim {}, kernel.datum_dim is {datum_dim}",
                        datum.dim()
                    )));
                }
                Ok(RealitySource::adversarial(*policy, datum.clone(), *seed))
            }
            RealityConfig::Replay { input } => {
                let text = replay_text.ok_or_else(|| {
                    Error::Config(format!(
                        "replay source requires the CSV at {} to be loaded",
                        input.display()
                    ))
                })?;
                let rows = crate::engine::parse_replay_csv(text, protocol, datum_dim)?;
                if rows.is_empty() {
                    return Err(Error::Config("replay input has no data rows".into()));
                }
                Ok(RealitySource::replay(rows))
            }
        }
    }
}

fn validate_observation_model(
    model: &IidObservationModel,
    protocol: &ProtocolSpec,
    datum_dim: usize,
) -> Result<()> {
    match (model, protocol.variant()) {
        (IidObservationModel::Bernoulli { link }, ProtocolVariant::Binary) => {
            link.validate_config(datum_dim)
        }
        (IidObservationModel::Categorical { probs }, ProtocolVariant::MultiClass { classes }) => {
            if probs.len() != *classes {
                return Err(Error::Config(format!(
                    "reality.observations.probs has {} entries for {classes} classes",
                    probs.len()
                )));
            }
            if probs.iter().any(|p| *p < 0.0) {
                return Err(Error::Config("class probabilities must be nonnegative".into()));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "class probabilities must sum to 1, got {total}"
                )));
            }
            Ok(())
        }
        (
            IidObservationModel::UniformRange,
            ProtocolVariant::BoundedRegression { .. } | ProtocolVariant::MeanVariance { .. },
        ) => Ok(()),
        (
            IidObservationModel::TwoPoint { link },
            ProtocolVariant::BoundedRegression { .. } | ProtocolVariant::MeanVariance { .. },
        ) => link.validate_config(datum_dim),
        (model, variant) => Err(Error::Config(format!(
            "reality.observations model {model:?} does not fit protocol {variant:?}"
        ))),
    }
}

impl LinkFunction {
    fn validate_config(&self, datum_dim: usize) -> Result<()> {
        self.validate(datum_dim)
            .map_err(|e| Error::Config(format!("reality.observations.link: {e}")))
    }
}

/// Diagnostics configuration for `diagnose`: which soft neighborhoods to
/// evaluate and which tent test functions to check the RKHS bound with.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_activity_factor")]
    pub activity_factor: f64,
    #[serde(default)]
    pub neighborhoods: Vec<crate::diagnostics::TentFunction>,
    #[serde(default)]
    pub rkhs_tests: Vec<crate::diagnostics::TentFunction>,
}

fn default_activity_factor() -> f64 {
    crate::diagnostics::DEFAULT_ACTIVITY_FACTOR
}

impl DiagnosticsConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// FNV-1a, 64-bit; stable across platforms and releases.
fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in bytes {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}
