//! Handover-margin controller surfaces: bilinear (polynomial) and exponential
//! load-difference parameterizations, corner-to-coefficient conversion, matrix
//! sampling, and the periodic sampler used in dynamic mode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("configuration error: {0}")]
    Config(String),
}

/// Bilinear surface coefficients, all in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyCoeffs {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

/// Exponential surface parameters, all in dB and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpParams {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl ExpParams {
    pub fn validate(&self) -> Result<(), ControlError> {
        for (name, v) in [("a1", self.a1), ("a2", self.a2), ("b", self.b)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ControlError::Config(format!(
                    "exponential parameter {name} = {v} must be finite and > 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceShape {
    Polynomial(PolyCoeffs),
    Exponential(ExpParams),
}

/// A margin surface plus the clamp bounds applied to every sampled value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmSurface {
    pub shape: SurfaceShape,
    pub hm_min_db: f64,
    pub hm_max_db: f64,
}

pub const DEFAULT_HM_MIN_DB: f64 = -10.0;
pub const DEFAULT_HM_MAX_DB: f64 = 20.0;

impl HmSurface {
    pub fn new(shape: SurfaceShape, hm_min_db: f64, hm_max_db: f64) -> Result<Self, ControlError> {
        if let SurfaceShape::Exponential(p) = &shape {
            p.validate()?;
        }
        if let SurfaceShape::Polynomial(p) = &shape {
            for v in [p.b0, p.b1, p.b2, p.b3] {
                if !v.is_finite() {
                    return Err(ControlError::Config("polynomial coefficients must be finite".into()));
                }
            }
        }
        if !(hm_min_db <= hm_max_db) || !hm_min_db.is_finite() || !hm_max_db.is_finite() {
            return Err(ControlError::Config(format!(
                "clamp bounds ({hm_min_db}, {hm_max_db}) must be finite with min <= max"
            )));
        }
        Ok(HmSurface { shape, hm_min_db, hm_max_db })
    }

    /// Margin for serving load `l_i` and target load `l_j`, clamped.
    pub fn sample(&self, l_i: f64, l_j: f64) -> f64 {
        let raw = match &self.shape {
            SurfaceShape::Polynomial(p) => poly_surface(l_i, l_j, p),
            SurfaceShape::Exponential(p) => exp_surface(l_i - l_j, p),
        };
        raw.clamp(self.hm_min_db, self.hm_max_db)
    }
}

/// b0 + b1·L_i + b2·L_j + b3·L_i·L_j, before clamping.
pub fn poly_surface(l_i: f64, l_j: f64, p: &PolyCoeffs) -> f64 {
    p.b0 + p.b1 * l_i + p.b2 * l_j + p.b3 * l_i * l_j
}

/// Recovers bilinear coefficients from the surface's four corner values, so
/// that poly_surface reproduces each corner exactly.
pub fn corners_to_coeffs(hm00: f64, hm10: f64, hm01: f64, hm11: f64) -> PolyCoeffs {
    PolyCoeffs {
        b0: hm00,
        b1: hm10 - hm00,
        b2: hm01 - hm00,
        b3: hm00 + hm11 - hm01 - hm10,
    }
}

/// Exponential margin as a function of the load difference w = L_i − L_j:
/// rises from b toward a1 as w → 1, falls toward 2b − a2 as w → −1,
/// continuous at w = 0 with value b. Parameters must be validated positive.
pub fn exp_surface(w: f64, p: &ExpParams) -> f64 {
    if w >= 0.0 {
        p.b * ((p.a1 / p.b).ln() * w).exp()
    } else {
        2.0 * p.b - p.b * (-(p.a2 / p.b).ln() * w).exp()
    }
}

/// Dense margin matrix indexed (serving, target). Disabled pairs hold +inf;
/// the diagonal is unused and kept at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HmMatrix {
    n: usize,
    hm: Vec<f64>,
}

impl HmMatrix {
    /// All ordered pairs set to `value` dB.
    pub fn constant(n: usize, value: f64) -> Self {
        let mut m = HmMatrix { n, hm: vec![value; n * n] };
        for k in 0..n {
            m.hm[k * n + k] = 0.0;
        }
        m
    }

    /// Every pair disabled: handovers never fire.
    pub fn disabled(n: usize) -> Self {
        let mut m = HmMatrix { n, hm: vec![f64::INFINITY; n * n] };
        for k in 0..n {
            m.hm[k * n + k] = 0.0;
        }
        m
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    /// Margin read by serving cell `k` for target `i`.
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.hm[k * self.n + i]
    }

    pub fn set(&mut self, k: usize, i: usize, value: f64) {
        self.hm[k * self.n + i] = value;
    }
}

/// Optional neighbor restriction: pair (k, i) is controllable iff i appears in
/// k's list. Pairs outside the relation sample to the +inf sentinel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborMap {
    lists: Vec<Vec<usize>>,
}

impl NeighborMap {
    pub fn new(lists: Vec<Vec<usize>>) -> Self {
        NeighborMap { lists }
    }

    pub fn allows(&self, k: usize, i: usize) -> bool {
        self.lists.get(k).is_some_and(|l| l.contains(&i))
    }

    pub fn n_cells(&self) -> usize {
        self.lists.len()
    }
}

/// Samples the full margin matrix from per-cell loads. With a neighbor map,
/// non-neighbor pairs are disabled rather than sampled.
pub fn sample_hm_matrix(
    surface: &HmSurface,
    loads: &[f64],
    neighbors: Option<&NeighborMap>,
) -> HmMatrix {
    let n = loads.len();
    let mut m = HmMatrix::constant(n, 0.0);
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let value = match neighbors {
                Some(map) if !map.allows(k, i) => f64::INFINITY,
                _ => surface.sample(loads[k], loads[i]),
            };
            m.set(k, i, value);
        }
    }
    m
}

/// Re-samples the margin matrix every `update_period_s` seconds of simulation
/// clock; between updates the emitted matrix is constant.
#[derive(Debug, Clone)]
pub struct DynamicSampler {
    surface: HmSurface,
    update_period_s: f64,
    last_update_s: f64,
    current: HmMatrix,
    neighbors: Option<NeighborMap>,
}

impl DynamicSampler {
    /// Starts from `initial` at clock 0; the first resample happens once the
    /// clock reaches `update_period_s`.
    pub fn new(
        surface: HmSurface,
        update_period_s: f64,
        initial: HmMatrix,
        neighbors: Option<NeighborMap>,
    ) -> Result<Self, ControlError> {
        if !(update_period_s > 0.0) {
            return Err(ControlError::Config(format!(
                "update period {update_period_s} must be > 0"
            )));
        }
        Ok(DynamicSampler {
            surface,
            update_period_s,
            last_update_s: 0.0,
            current: initial,
            neighbors,
        })
    }

    pub fn current(&self) -> &HmMatrix {
        &self.current
    }

    pub fn surface(&self) -> &HmSurface {
        &self.surface
    }

    /// Emits a fresh matrix iff `clock_s − last_update ≥ period` (boundary
    /// inclusive). Returns whether an update happened.
    pub fn maybe_update(&mut self, clock_s: f64, loads: &[f64]) -> bool {
        if clock_s - self.last_update_s < self.update_period_s {
            return false;
        }
        self.current = sample_hm_matrix(&self.surface, loads, self.neighbors.as_ref());
        self.last_update_s = clock_s;
        true
    }
}
