//! Scenario files: the cell layout, radio constants, and simulation area a
//! run operates on, plus a jittered-hexagonal layout generator and two small
//! hand-placed desk layouts used by the test suites.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::NeighborMap;
use crate::net::{AntennaPattern, EfficiencyMap, EnbConfig, NetError, Point, RadioConstants, RadioModel};

pub const SCENARIO_SCHEMA: &str = "mlbsim-scenario-v1";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error("invalid scenario: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Axis-aligned simulation area in meters. Arrivals are uniform in it and
/// mobile users reflect off its edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }
}

/// Neighbor restriction for one cell, by cell id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborRecord {
    pub cell: u32,
    pub targets: Vec<u32>,
}

/// A complete, validated simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub reuse_factor: u8,
    pub area: Rect,
    pub radio: RadioConstants,
    pub antenna: AntennaPattern,
    pub efficiency: EfficiencyMap,
    pub cells: Vec<EnbConfig>,
    /// When present, handovers are restricted to listed (cell, target) pairs.
    pub neighbors: Option<Vec<NeighborRecord>>,
}

/// On-disk cell record; flat coordinates and defaulted powers keep
/// handwritten files short.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CellRecord {
    id: u32,
    x: f64,
    y: f64,
    azimuth_deg: f64,
    frequency_group: u8,
    #[serde(default = "default_prb_count")]
    prb_count: u16,
    #[serde(default = "default_prb_power")]
    prb_tx_power_dbm: f64,
    /// Defaults to the per-PRB data power when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pilot_power_dbm: Option<f64>,
}

fn default_prb_count() -> u16 {
    15
}

fn default_prb_power() -> f64 {
    32.0
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    schema: String,
    reuse_factor: u8,
    area: Rect,
    #[serde(default)]
    radio: RadioConstants,
    #[serde(default)]
    antenna: AntennaPattern,
    #[serde(default)]
    efficiency: EfficiencyMap,
    cells: Vec<CellRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neighbors: Option<Vec<NeighborRecord>>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if file.schema != SCENARIO_SCHEMA {
            return Err(ScenarioError::Parse(format!(
                "unsupported schema {:?}, expected {SCENARIO_SCHEMA:?}",
                file.schema
            )));
        }
        let cells = file
            .cells
            .iter()
            .map(|r| EnbConfig {
                id: r.id,
                position: Point::new(r.x, r.y),
                azimuth_deg: r.azimuth_deg,
                frequency_group: r.frequency_group,
                prb_count: r.prb_count,
                prb_tx_power_dbm: r.prb_tx_power_dbm,
                pilot_power_dbm: r.pilot_power_dbm.unwrap_or(r.prb_tx_power_dbm),
            })
            .collect();
        let scenario = Scenario {
            reuse_factor: file.reuse_factor,
            area: file.area,
            radio: file.radio,
            antenna: file.antenna,
            efficiency: file.efficiency,
            cells,
            neighbors: file.neighbors,
        };
        scenario.validate().map(|_| scenario)
    }

    pub fn to_toml_string(&self) -> String {
        let file = ScenarioFile {
            schema: SCENARIO_SCHEMA.to_string(),
            reuse_factor: self.reuse_factor,
            area: self.area,
            radio: self.radio.clone(),
            antenna: self.antenna.clone(),
            efficiency: self.efficiency.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| CellRecord {
                    id: c.id,
                    x: c.position.x,
                    y: c.position.y,
                    azimuth_deg: c.azimuth_deg,
                    frequency_group: c.frequency_group,
                    prb_count: c.prb_count,
                    prb_tx_power_dbm: c.prb_tx_power_dbm,
                    pilot_power_dbm: if c.pilot_power_dbm == c.prb_tx_power_dbm {
                        None
                    } else {
                        Some(c.pilot_power_dbm)
                    },
                })
                .collect(),
            neighbors: self.neighbors.clone(),
        };
        toml::to_string(&file).expect("scenario serialization cannot fail")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Collects every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut problems = Vec::new();
        if self.reuse_factor < 1 {
            problems.push("reuse_factor must be >= 1".to_string());
        }
        if !(self.area.width() > 0.0) || !(self.area.height() > 0.0) {
            problems.push("area must have positive width and height".to_string());
        }
        if ![self.area.x_min, self.area.y_min, self.area.x_max, self.area.y_max]
            .iter()
            .all(|v| v.is_finite())
        {
            problems.push("area bounds must be finite".to_string());
        }
        if self.cells.is_empty() {
            problems.push("scenario needs at least one cell".to_string());
        }
        let mut ids: Vec<u32> = self.cells.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.cells.len() {
            problems.push("cell ids must be unique".to_string());
        }
        for cell in &self.cells {
            if let Err(e) = cell.validate(self.reuse_factor) {
                problems.push(e.to_string());
            }
        }
        if let Err(e) = self.radio.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.antenna.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.efficiency.validate() {
            problems.push(e.to_string());
        }
        if let Some(records) = &self.neighbors {
            for rec in records {
                if self.index_of(rec.cell).is_none() {
                    problems.push(format!("neighbor record for unknown cell {}", rec.cell));
                }
                for &t in &rec.targets {
                    if self.index_of(t).is_none() {
                        problems.push(format!("cell {} lists unknown neighbor {}", rec.cell, t));
                    }
                    if t == rec.cell {
                        problems.push(format!("cell {} lists itself as neighbor", rec.cell));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid(problems))
        }
    }

    fn index_of(&self, id: u32) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    pub fn build_model(&self) -> Result<RadioModel, NetError> {
        RadioModel::new(
            self.cells.clone(),
            self.radio.clone(),
            self.antenna.clone(),
            self.efficiency.clone(),
            self.reuse_factor,
        )
    }

    /// Neighbor restriction translated from cell ids to cell indices.
    pub fn neighbor_map(&self) -> Option<NeighborMap> {
        let records = self.neighbors.as_ref()?;
        let mut lists = vec![Vec::new(); self.cells.len()];
        for rec in records {
            let k = self.index_of(rec.cell).expect("validated neighbor id");
            for &t in &rec.targets {
                lists[k].push(self.index_of(t).expect("validated neighbor id"));
            }
        }
        Some(NeighborMap::new(lists))
    }
}

/// Parameters for the jittered-hexagonal generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub sites: u32,
    pub isd_min_km: f64,
    pub isd_max_km: f64,
    /// Bounding-box margin around the outermost sites, meters.
    pub margin_m: f64,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams { sites: 15, isd_min_km: 1.5, isd_max_km: 2.0, margin_m: 1000.0, seed: 1 }
    }
}

/// Generates `sites` hexagonally packed three-sector sites spiraling out from
/// the origin. Each site is displaced by at most (isd_max − isd_min)/4, so
/// adjacent-site distances stay within [isd_min, isd_max]. Sector azimuths
/// are 0°/120°/240° with frequency groups 0/1/2.
pub fn generate(params: &LayoutParams) -> Result<Scenario, ScenarioError> {
    let mut problems = Vec::new();
    if params.sites < 1 {
        problems.push("sites must be >= 1".to_string());
    }
    if !(params.isd_min_km > 0.0) || !(params.isd_max_km >= params.isd_min_km) {
        problems.push(format!(
            "inter-site distance range ({}, {}) must satisfy 0 < min <= max",
            params.isd_min_km, params.isd_max_km
        ));
    }
    if !(params.margin_m > 0.0) || !params.margin_m.is_finite() {
        problems.push("margin must be > 0".to_string());
    }
    if !problems.is_empty() {
        return Err(ScenarioError::Invalid(problems));
    }

    let spacing_m = 1000.0 * (params.isd_min_km + params.isd_max_km) / 2.0;
    let jitter_max_m = 1000.0 * (params.isd_max_km - params.isd_min_km) / 4.0;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut cells = Vec::with_capacity(params.sites as usize * 3);
    for (site, (q, r)) in hex_spiral(params.sites as usize).into_iter().enumerate() {
        let base_x = spacing_m * (q as f64 + r as f64 / 2.0);
        let base_y = spacing_m * (3f64.sqrt() / 2.0) * r as f64;
        let angle = rng.random::<f64>() * std::f64::consts::TAU;
        let radius = jitter_max_m * rng.random::<f64>().sqrt();
        let x = base_x + radius * angle.cos();
        let y = base_y + radius * angle.sin();
        for sector in 0..3u32 {
            cells.push(EnbConfig {
                id: site as u32 * 3 + sector,
                position: Point::new(x, y),
                azimuth_deg: 120.0 * sector as f64,
                frequency_group: sector as u8,
                prb_count: default_prb_count(),
                prb_tx_power_dbm: default_prb_power(),
                pilot_power_dbm: default_prb_power(),
            });
        }
    }

    let xs: Vec<f64> = cells.iter().map(|c| c.position.x).collect();
    let ys: Vec<f64> = cells.iter().map(|c| c.position.y).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let area = Rect {
        x_min: min(&xs) - params.margin_m,
        y_min: min(&ys) - params.margin_m,
        x_max: max(&xs) + params.margin_m,
        y_max: max(&ys) + params.margin_m,
    };

    let scenario = Scenario {
        reuse_factor: 3,
        area,
        radio: RadioConstants::default(),
        antenna: AntennaPattern::default(),
        efficiency: EfficiencyMap::default(),
        cells,
        neighbors: None,
    };
    scenario.validate().map(|_| scenario)
}

/// Axial hex coordinates spiraling outward from the origin, deterministic.
fn hex_spiral(count: usize) -> Vec<(i32, i32)> {
    let dirs = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let mut out = Vec::with_capacity(count);
    out.push((0, 0));
    let mut ring = 1;
    while out.len() < count {
        let (mut q, mut r) = (-ring, ring);
        for &(dq, dr) in &dirs {
            for _ in 0..ring {
                if out.len() == count {
                    return out;
                }
                out.push((q, r));
                q += dq;
                r += dr;
            }
        }
        ring += 1;
    }
    out
}

/// Small fixed layouts for tests and examples.
pub mod presets {
    use super::*;

    fn sector_cells(sites: &[(f64, f64)]) -> Vec<EnbConfig> {
        let mut cells = Vec::with_capacity(sites.len() * 3);
        for (site, &(x, y)) in sites.iter().enumerate() {
            for sector in 0..3u32 {
                cells.push(EnbConfig {
                    id: site as u32 * 3 + sector,
                    position: Point::new(x, y),
                    azimuth_deg: 120.0 * sector as f64,
                    frequency_group: sector as u8,
                    prb_count: 15,
                    prb_tx_power_dbm: 32.0,
                    pilot_power_dbm: 32.0,
                });
            }
        }
        cells
    }

    fn bounded(sites: &[(f64, f64)], margin_m: f64) -> Rect {
        let min_x = sites.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let max_x = sites.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = sites.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let max_y = sites.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        Rect {
            x_min: min_x - margin_m,
            y_min: min_y - margin_m,
            x_max: max_x + margin_m,
            y_max: max_y + margin_m,
        }
    }

    fn scenario_from_sites(sites: &[(f64, f64)], margin_m: f64) -> Scenario {
        let s = Scenario {
            reuse_factor: 3,
            area: bounded(sites, margin_m),
            radio: RadioConstants::default(),
            antenna: AntennaPattern::default(),
            efficiency: EfficiencyMap::default(),
            cells: sector_cells(sites),
            neighbors: None,
        };
        s.validate().expect("preset must validate");
        s
    }

    /// Three sites / nine cells in a regular triangle, 1.7 km apart.
    pub fn desk_9() -> Scenario {
        let sites = [(0.0, 0.0), (1700.0, 0.0), (850.0, 1472.2)];
        scenario_from_sites(&sites, 1000.0)
    }

    /// Seven sites / 21 cells packed on a 150 m ring, each site's sector
    /// orientation staggered by a seventh of a sector, serving a box that
    /// extends far to the east of the cluster. Every sector overlaps its
    /// angular neighbors, and the east-facing sectors carry most of the
    /// offered traffic, so the baseline shows a wide spread of per-cell
    /// loads with hot cells that have underused neighbors.
    pub fn desk_21_clustered() -> Scenario {
        let ring_m = 150.0;
        let n_sites = 7u32;
        let mut cells = Vec::with_capacity(n_sites as usize * 3);
        for site in 0..n_sites {
            let angle = 2.0 * std::f64::consts::PI * f64::from(site) / f64::from(n_sites);
            let position = Point::new(ring_m * angle.cos(), ring_m * angle.sin());
            let rotation = 120.0 * f64::from(site) / f64::from(n_sites);
            for sector in 0..3u32 {
                cells.push(EnbConfig {
                    id: site * 3 + sector,
                    position,
                    azimuth_deg: rotation + 120.0 * f64::from(sector),
                    frequency_group: sector as u8,
                    prb_count: 15,
                    prb_tx_power_dbm: 32.0,
                    pilot_power_dbm: 32.0,
                });
            }
        }
        let s = Scenario {
            reuse_factor: 3,
            area: Rect { x_min: -1000.0, y_min: -3000.0, x_max: 6500.0, y_max: 3000.0 },
            radio: RadioConstants::default(),
            antenna: AntennaPattern::default(),
            efficiency: EfficiencyMap::default(),
            cells,
            neighbors: None,
        };
        s.validate().expect("preset must validate");
        s
    }
}
