//! Run configuration files (TOML) for single simulations and optimization
//! campaigns. Both carry an explicit schema tag so stale files fail loudly,
//! and both reject unknown keys so typos cannot silently fall back to
//! defaults. Scenario paths are resolved relative to the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{corners_to_coeffs, HmMatrix, HmSurface, PolyCoeffs, SurfaceShape};
use crate::control::{DynamicSampler, ExpParams, NeighborMap};
use crate::harness::{default_bounds, Campaign, Mode, SeedPolicy, SurfaceConfig};
use crate::mopso::SwarmConfig;
use crate::scenario::Scenario;
use crate::sim::{Controller, SimConfig};

pub const SIMULATE_SCHEMA: &str = "mlbsim-simulate-v1";
pub const CAMPAIGN_SCHEMA: &str = "mlbsim-campaign-v1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config error: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn default_hm0() -> f64 {
    6.0
}

fn default_hm_min() -> f64 {
    crate::control::DEFAULT_HM_MIN_DB
}

fn default_hm_max() -> f64 {
    crate::control::DEFAULT_HM_MAX_DB
}

fn default_update_period() -> f64 {
    5.0
}

fn default_label() -> String {
    "run".to_string()
}

/// Margin surface described in a config file. Polynomial surfaces accept
/// either the four corner margins or the four raw coefficients (exactly one
/// of the two); exponential surfaces default b to the planning margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Polynomial {
        #[serde(skip_serializing_if = "Option::is_none")]
        corners: Option<[f64; 4]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        coeffs: Option<[f64; 4]>,
        #[serde(default = "default_hm_min")]
        hm_min_db: f64,
        #[serde(default = "default_hm_max")]
        hm_max_db: f64,
    },
    Exponential {
        a1: f64,
        a2: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        b: Option<f64>,
        #[serde(default = "default_hm_min")]
        hm_min_db: f64,
        #[serde(default = "default_hm_max")]
        hm_max_db: f64,
    },
}

impl SurfaceSpec {
    pub fn to_surface(&self, hm0_db: f64) -> Result<HmSurface, ConfigError> {
        let (shape, lo, hi) = match self {
            SurfaceSpec::Polynomial { corners, coeffs, hm_min_db, hm_max_db } => {
                let p = match (corners, coeffs) {
                    (Some(c), None) => corners_to_coeffs(c[0], c[1], c[2], c[3]),
                    (None, Some(b)) => PolyCoeffs { b0: b[0], b1: b[1], b2: b[2], b3: b[3] },
                    _ => {
                        return Err(ConfigError::Invalid(
                            "polynomial surface needs exactly one of `corners` or `coeffs`"
                                .to_string(),
                        ))
                    }
                };
                (SurfaceShape::Polynomial(p), *hm_min_db, *hm_max_db)
            }
            SurfaceSpec::Exponential { a1, a2, b, hm_min_db, hm_max_db } => (
                SurfaceShape::Exponential(ExpParams {
                    a1: *a1,
                    a2: *a2,
                    b: b.unwrap_or(hm0_db),
                }),
                *hm_min_db,
                *hm_max_db,
            ),
        };
        HmSurface::new(shape, lo, hi).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

/// Controller selection for a single simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    /// Constant planning margin everywhere.
    Planning {
        #[serde(default = "default_hm0")]
        hm0_db: f64,
    },
    /// All margins +inf: handovers never fire.
    Disabled,
    /// Surface sampled once at fixed loads. When `loads` is omitted, the
    /// caller must supply the planning run's average loads.
    Static {
        surface: SurfaceSpec,
        #[serde(skip_serializing_if = "Option::is_none")]
        loads: Option<Vec<f64>>,
        #[serde(default = "default_hm0")]
        hm0_db: f64,
    },
    /// Surface resampled from windowed loads every update period.
    Dynamic {
        surface: SurfaceSpec,
        #[serde(default = "default_update_period")]
        update_period_s: f64,
        #[serde(default = "default_hm0")]
        hm0_db: f64,
    },
}

impl Default for ControllerSpec {
    fn default() -> Self {
        ControllerSpec::Planning { hm0_db: default_hm0() }
    }
}

impl ControllerSpec {
    /// True when building the controller requires baseline loads that the
    /// file does not carry.
    pub fn needs_baseline_loads(&self) -> bool {
        matches!(self, ControllerSpec::Static { loads: None, .. })
    }

    /// Builds the runtime controller. `baseline_loads` is consulted only by
    /// the static kind when the file omits explicit loads.
    pub fn build(
        &self,
        n_cells: usize,
        neighbors: Option<&NeighborMap>,
        baseline_loads: Option<&[f64]>,
    ) -> Result<Controller, ConfigError> {
        let restrict = |mut m: HmMatrix| {
            if let Some(map) = neighbors {
                for k in 0..n_cells {
                    for i in 0..n_cells {
                        if k != i && !map.allows(k, i) {
                            m.set(k, i, f64::INFINITY);
                        }
                    }
                }
            }
            m
        };
        match self {
            ControllerSpec::Planning { hm0_db } => {
                Ok(Controller::Fixed(restrict(HmMatrix::constant(n_cells, *hm0_db))))
            }
            ControllerSpec::Disabled => Ok(Controller::Fixed(HmMatrix::disabled(n_cells))),
            ControllerSpec::Static { surface, loads, hm0_db } => {
                let surface = surface.to_surface(*hm0_db)?;
                let loads = match (loads, baseline_loads) {
                    (Some(l), _) => l.as_slice(),
                    (None, Some(l)) => l,
                    (None, None) => {
                        return Err(ConfigError::Invalid(
                            "static controller needs `loads` or a baseline run".to_string(),
                        ))
                    }
                };
                if loads.len() != n_cells {
                    return Err(ConfigError::Invalid(format!(
                        "{} load values for {} cells",
                        loads.len(),
                        n_cells
                    )));
                }
                if !loads.iter().all(|l| (0.0..=1.0).contains(l)) {
                    return Err(ConfigError::Invalid("loads must lie in [0, 1]".to_string()));
                }
                Ok(Controller::Fixed(crate::control::sample_hm_matrix(
                    &surface, loads, neighbors,
                )))
            }
            ControllerSpec::Dynamic { surface, update_period_s, hm0_db } => {
                let surface = surface.to_surface(*hm0_db)?;
                let initial = restrict(HmMatrix::constant(n_cells, *hm0_db));
                let sampler =
                    DynamicSampler::new(surface, *update_period_s, initial, neighbors.cloned())
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Ok(Controller::Dynamic(sampler))
            }
        }
    }
}

/// Config file for one `simulate` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub schema: String,
    /// Scenario file path, relative to this config file.
    pub scenario: String,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub controller: ControllerSpec,
}

impl SimulateSpec {
    pub fn from_toml_str(input: &str) -> Result<Self, ConfigError> {
        let spec: SimulateSpec = toml::from_str(input)?;
        if spec.schema != SIMULATE_SCHEMA {
            return Err(ConfigError::Invalid(format!(
                "schema {:?}, expected {SIMULATE_SCHEMA:?}",
                spec.schema
            )));
        }
        crate::tables::validate_label(&spec.label)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Scenario location resolved against the config file's directory.
    pub fn scenario_path(&self, config_path: &Path) -> PathBuf {
        config_path.parent().unwrap_or_else(|| Path::new(".")).join(&self.scenario)
    }
}

/// Swarm settings as written in campaign files; `bounds` defaults to the
/// standard search box for the chosen surface encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwarmSpec {
    pub population: usize,
    pub iterations: usize,
    pub phi: f64,
    pub parallel: bool,
    pub reseed_neighbors: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl Default for SwarmSpec {
    fn default() -> Self {
        let d = SwarmConfig::default();
        SwarmSpec {
            population: d.population,
            iterations: d.iterations,
            phi: d.phi,
            parallel: d.parallel,
            reseed_neighbors: d.reseed_neighbors,
            bounds: None,
        }
    }
}

fn default_replications() -> u32 {
    1
}

fn default_seed_policy() -> SeedPolicy {
    SeedPolicy::FixedPerCampaign
}

/// Config file for one `optimize` invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub schema: String,
    /// Scenario file path, relative to this config file.
    pub scenario: String,
    #[serde(default = "default_label")]
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    pub mode: Mode,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default = "default_seed_policy")]
    pub seed_policy: SeedPolicy,
    #[serde(default = "default_hm0")]
    pub hm0_db: f64,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub swarm: SwarmSpec,
}

impl CampaignSpec {
    pub fn from_toml_str(input: &str) -> Result<Self, ConfigError> {
        let spec: CampaignSpec = toml::from_str(input)?;
        if spec.schema != CAMPAIGN_SCHEMA {
            return Err(ConfigError::Invalid(format!(
                "schema {:?}, expected {CAMPAIGN_SCHEMA:?}",
                spec.schema
            )));
        }
        crate::tables::validate_label(&spec.label)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn scenario_path(&self, config_path: &Path) -> PathBuf {
        config_path.parent().unwrap_or_else(|| Path::new(".")).join(&self.scenario)
    }

    /// Binds the spec to a loaded scenario. The swarm seed is derived inside
    /// `run_campaign` from the campaign seed, never taken from the file.
    pub fn to_campaign(&self, scenario: Scenario) -> Result<Campaign, ConfigError> {
        let bounds = match &self.swarm.bounds {
            Some(b) => b.iter().map(|&[lo, hi]| (lo, hi)).collect(),
            None => default_bounds(&self.surface, self.hm0_db),
        };
        let campaign = Campaign {
            scenario,
            sim: self.sim.clone(),
            mode: self.mode,
            surface: self.surface.clone(),
            swarm: SwarmConfig {
                population: self.swarm.population,
                iterations: self.swarm.iterations,
                phi: self.swarm.phi,
                bounds,
                seed: 0,
                parallel: self.swarm.parallel,
                reseed_neighbors: self.swarm.reseed_neighbors,
            },
            hm0_db: self.hm0_db,
            replications: self.replications,
            seed_policy: self.seed_policy,
            seed: self.seed,
        };
        campaign.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(campaign)
    }
}
