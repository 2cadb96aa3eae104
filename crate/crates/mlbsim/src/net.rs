//! Static radio model: geometry, Okumura-Hata path loss, lognormal shadowing
//! hooks, sector antenna pattern, co-channel interference and SINR, and the
//! attenuated-Shannon spectral-efficiency map.
//!
//! Everything here is a pure function of its inputs; the simulation engine
//! owns all mutable state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{db_to_lin, dbm_to_mw, lin_to_db};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Euclidean distance in meters.
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One cell (a sector counts as its own cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnbConfig {
    pub id: u32,
    pub position: Point,
    /// Boresight azimuth in degrees, measured counterclockwise from +x.
    pub azimuth_deg: f64,
    /// Frequency reuse group; must be < reuse_factor.
    pub frequency_group: u8,
    pub prb_count: u16,
    /// Per-PRB transmit power in dBm.
    pub prb_tx_power_dbm: f64,
    /// Pilot power in dBm; defaults equal to the per-PRB data power.
    pub pilot_power_dbm: f64,
}

impl EnbConfig {
    pub fn validate(&self, reuse_factor: u8) -> Result<(), NetError> {
        if self.prb_count < 1 {
            return Err(NetError::Config(format!("cell {}: prb_count must be >= 1", self.id)));
        }
        if self.frequency_group >= reuse_factor {
            return Err(NetError::Config(format!(
                "cell {}: frequency_group {} out of range for reuse factor {}",
                self.id, self.frequency_group, reuse_factor
            )));
        }
        if !self.prb_tx_power_dbm.is_finite() || !self.pilot_power_dbm.is_finite() {
            return Err(NetError::Config(format!("cell {}: powers must be finite", self.id)));
        }
        if !self.position.x.is_finite()
            || !self.position.y.is_finite()
            || !self.azimuth_deg.is_finite()
        {
            return Err(NetError::Config(format!("cell {}: geometry must be finite", self.id)));
        }
        Ok(())
    }
}

/// Propagation and noise constants shared by all cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RadioConstants {
    /// Thermal noise density in dBm/Hz.
    pub noise_density_dbm_hz: f64,
    /// Bandwidth of one PRB in Hz; power and noise are both per-PRB.
    pub prb_bandwidth_hz: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_exponent_coeff: f64,
    pub shadowing_sigma_db: f64,
    /// Distances below this (meters) are clamped before the path-loss law.
    pub min_distance_clamp_m: f64,
}

impl Default for RadioConstants {
    fn default() -> Self {
        RadioConstants {
            noise_density_dbm_hz: -174.0,
            prb_bandwidth_hz: 180_000.0,
            pathloss_intercept_db: 128.0,
            pathloss_exponent_coeff: 37.6,
            shadowing_sigma_db: 6.0,
            min_distance_clamp_m: 35.0,
        }
    }
}

impl RadioConstants {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.shadowing_sigma_db < 0.0 || !self.shadowing_sigma_db.is_finite() {
            return Err(NetError::Config("shadowing_sigma must be >= 0".into()));
        }
        if self.prb_bandwidth_hz <= 0.0 || !self.prb_bandwidth_hz.is_finite() {
            return Err(NetError::Config("prb_bandwidth must be > 0".into()));
        }
        if !self.noise_density_dbm_hz.is_finite()
            || !self.pathloss_intercept_db.is_finite()
            || !self.pathloss_exponent_coeff.is_finite()
            || !self.min_distance_clamp_m.is_finite()
        {
            return Err(NetError::Config("radio constants must be finite".into()));
        }
        Ok(())
    }

    /// Thermal noise over one PRB, in mW.
    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_density_dbm_hz + 10.0 * self.prb_bandwidth_hz.log10())
    }
}

/// Parabolic three-sector antenna pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AntennaPattern {
    pub max_gain_dbi: f64,
    pub theta_3db_deg: f64,
    pub front_to_back_db: f64,
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaPattern { max_gain_dbi: 15.0, theta_3db_deg: 65.0, front_to_back_db: 25.0 }
    }
}

impl AntennaPattern {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.theta_3db_deg <= 0.0 || !self.theta_3db_deg.is_finite() {
            return Err(NetError::Config("theta_3db must be > 0".into()));
        }
        if self.front_to_back_db < 0.0 || !self.front_to_back_db.is_finite() {
            return Err(NetError::Config("front_to_back must be >= 0".into()));
        }
        if !self.max_gain_dbi.is_finite() {
            return Err(NetError::Config("max_gain must be finite".into()));
        }
        Ok(())
    }
}

/// Attenuated-Shannon map from SINR to spectral efficiency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EfficiencyMap {
    pub alpha: f64,
    pub cap_bps_hz: f64,
    /// Below this SINR the link decodes nothing.
    pub sinr_min_db: f64,
}

impl Default for EfficiencyMap {
    fn default() -> Self {
        EfficiencyMap { alpha: 0.75, cap_bps_hz: 4.8, sinr_min_db: -6.5 }
    }
}

impl EfficiencyMap {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(NetError::Config("efficiency alpha must be > 0".into()));
        }
        if self.cap_bps_hz <= 0.0 || !self.cap_bps_hz.is_finite() {
            return Err(NetError::Config("efficiency cap must be > 0".into()));
        }
        if !self.sinr_min_db.is_finite() {
            return Err(NetError::Config("sinr_min must be finite".into()));
        }
        Ok(())
    }
}

/// One cell-to-user link: antenna gain G, path loss Q, shadowing, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGain {
    pub antenna_gain_db: f64,
    pub path_loss_db: f64,
    pub shadowing_db: f64,
}

impl LinkGain {
    /// Net channel gain G/Q (shadowing included) in dB.
    pub fn net_db(&self) -> f64 {
        self.antenna_gain_db - self.path_loss_db + self.shadowing_db
    }

    /// Net channel gain as a linear power ratio.
    pub fn net_linear(&self) -> f64 {
        db_to_lin(self.net_db())
    }
}

/// Boolean co-channel relation A(k,i): true iff k and i share a band, k != i.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMatrix {
    n: usize,
    a: Vec<bool>,
}

impl InterferenceMatrix {
    pub fn co_channel(&self, k: usize, i: usize) -> bool {
        self.a[k * self.n + i]
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }
}

/// Okumura-Hata style macro path loss; `distance_km` clamps at the near-field
/// limit before the law applies.
pub fn path_loss_db(distance_km: f64, constants: &RadioConstants) -> Result<f64, NetError> {
    if !distance_km.is_finite() {
        return Err(NetError::InvalidInput(format!("distance {distance_km} not finite")));
    }
    let clamped = distance_km.max(constants.min_distance_clamp_m / 1000.0);
    if clamped <= 0.0 {
        return Err(NetError::InvalidInput(format!(
            "distance {distance_km} km non-positive after clamp"
        )));
    }
    Ok(constants.pathloss_intercept_db + constants.pathloss_exponent_coeff * clamped.log10())
}

/// Sector gain toward `target`: max_gain − min(12·(θ/θ₃dB)², front_to_back),
/// with θ the bearing offset from boresight wrapped into [−180°, 180°].
pub fn antenna_gain_db(enb: &EnbConfig, target: &Point, pattern: &AntennaPattern) -> f64 {
    let bearing = (target.y - enb.position.y).atan2(target.x - enb.position.x).to_degrees();
    let mut offset = bearing - enb.azimuth_deg;
    offset = offset.rem_euclid(360.0);
    if offset > 180.0 {
        offset -= 360.0;
    }
    let rolloff = 12.0 * (offset / pattern.theta_3db_deg).powi(2);
    pattern.max_gain_dbi - rolloff.min(pattern.front_to_back_db)
}

/// Builds the reuse relation from the layout's frequency groups.
pub fn build_interference_matrix(
    layout: &[EnbConfig],
    reuse_factor: u8,
) -> Result<InterferenceMatrix, NetError> {
    let n = layout.len();
    for cell in layout {
        if cell.frequency_group >= reuse_factor {
            return Err(NetError::Config(format!(
                "cell {}: frequency_group {} out of range for reuse factor {}",
                cell.id, cell.frequency_group, reuse_factor
            )));
        }
    }
    let mut a = vec![false; n * n];
    for k in 0..n {
        for i in 0..n {
            a[k * n + i] = k != i && layout[k].frequency_group == layout[i].frequency_group;
        }
    }
    Ok(InterferenceMatrix { n, a })
}

/// Average downlink interference seen from serving cell `k`'s user, in mW:
/// sum over co-channel cells of load · power · net channel gain.
pub fn interference_mw(
    k: usize,
    gains: &[LinkGain],
    loads: &[f64],
    a: &InterferenceMatrix,
    powers_mw: &[f64],
) -> Result<f64, NetError> {
    let n = a.n_cells();
    if gains.len() != n || loads.len() != n || powers_mw.len() != n || k >= n {
        return Err(NetError::InvalidInput(format!(
            "dimension mismatch: {} cells, {} gains, {} loads, {} powers, k = {k}",
            n,
            gains.len(),
            loads.len(),
            powers_mw.len()
        )));
    }
    let mut total = 0.0;
    for i in 0..n {
        if a.co_channel(k, i) {
            total += loads[i] * powers_mw[i] * gains[i].net_linear();
        }
    }
    Ok(total)
}

/// SINR in dB for a user of cell `k`: signal over (interference + thermal
/// noise), all at PRB bandwidth.
pub fn sinr_db(
    k: usize,
    gains: &[LinkGain],
    powers_mw: &[f64],
    interference_mw: f64,
    constants: &RadioConstants,
) -> Result<f64, NetError> {
    if k >= gains.len() || k >= powers_mw.len() {
        return Err(NetError::InvalidInput(format!("cell index {k} out of range")));
    }
    if !(interference_mw >= 0.0) {
        return Err(NetError::InvalidInput(format!("interference {interference_mw} mW < 0")));
    }
    let signal_mw = powers_mw[k] * gains[k].net_linear();
    Ok(lin_to_db(signal_mw / (interference_mw + constants.noise_mw())))
}

/// Attenuated Shannon efficiency in bits/s/Hz: zero below the decode floor,
/// min(cap, α·log₂(1 + sinr)) above it.
pub fn spectral_efficiency(sinr_db: f64, map: &EfficiencyMap) -> f64 {
    if sinr_db < map.sinr_min_db {
        return 0.0;
    }
    (map.alpha * (1.0 + db_to_lin(sinr_db)).log2()).min(map.cap_bps_hz)
}

/// Immutable radio model for one scenario: layout, constants, and the
/// precomputed reuse relation and per-cell power vectors.
#[derive(Debug, Clone)]
pub struct RadioModel {
    pub cells: Vec<EnbConfig>,
    pub constants: RadioConstants,
    pub antenna: AntennaPattern,
    pub efficiency: EfficiencyMap,
    matrix: InterferenceMatrix,
    powers_mw: Vec<f64>,
    noise_mw: f64,
}

impl RadioModel {
    pub fn new(
        cells: Vec<EnbConfig>,
        constants: RadioConstants,
        antenna: AntennaPattern,
        efficiency: EfficiencyMap,
        reuse_factor: u8,
    ) -> Result<Self, NetError> {
        if cells.is_empty() {
            return Err(NetError::Config("layout has no cells".into()));
        }
        constants.validate()?;
        antenna.validate()?;
        efficiency.validate()?;
        for cell in &cells {
            cell.validate(reuse_factor)?;
        }
        let matrix = build_interference_matrix(&cells, reuse_factor)?;
        let powers_mw = cells.iter().map(|c| dbm_to_mw(c.prb_tx_power_dbm)).collect();
        let noise_mw = constants.noise_mw();
        Ok(RadioModel { cells, constants, antenna, efficiency, matrix, powers_mw, noise_mw })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn matrix(&self) -> &InterferenceMatrix {
        &self.matrix
    }

    pub fn powers_mw(&self) -> &[f64] {
        &self.powers_mw
    }

    pub fn noise_mw(&self) -> f64 {
        self.noise_mw
    }

    /// Channel from cell `k` to a user at `pos` with that user's frozen
    /// shadowing draw for cell `k`.
    pub fn link_gain(&self, k: usize, pos: &Point, shadowing_db: f64) -> Result<LinkGain, NetError> {
        let cell = &self.cells[k];
        let dist_km = cell.position.distance(pos) / 1000.0;
        Ok(LinkGain {
            antenna_gain_db: antenna_gain_db(cell, pos, &self.antenna),
            path_loss_db: path_loss_db(dist_km, &self.constants)?,
            shadowing_db,
        })
    }

    /// Received pilot power from cell `k` in dBm over the given link.
    pub fn received_pilot_dbm(&self, k: usize, gain: &LinkGain) -> f64 {
        self.cells[k].pilot_power_dbm + gain.net_db()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat_gain(net_db: f64) -> LinkGain {
        LinkGain { antenna_gain_db: net_db, path_loss_db: 0.0, shadowing_db: 0.0 }
    }

    fn cell(id: u32, x: f64, y: f64, az: f64, group: u8) -> EnbConfig {
        EnbConfig {
            id,
            position: Point::new(x, y),
            azimuth_deg: az,
            frequency_group: group,
            prb_count: 15,
            prb_tx_power_dbm: 32.0,
            pilot_power_dbm: 32.0,
        }
    }

    #[test]
    fn path_loss_reference_points() {
        let c = RadioConstants::default();
        assert!((path_loss_db(1.0, &c).unwrap() - 128.0).abs() < 1e-12);
        assert!((path_loss_db(10.0, &c).unwrap() - 165.6).abs() < 1e-12);
        assert!((path_loss_db(0.1, &c).unwrap() - 90.4).abs() < 1e-12);
    }

    #[test]
    fn path_loss_clamps_near_field() {
        let c = RadioConstants::default();
        let at_clamp = path_loss_db(0.035, &c).unwrap();
        assert_eq!(path_loss_db(0.001, &c).unwrap(), at_clamp);
        assert_eq!(path_loss_db(0.0, &c).unwrap(), at_clamp);
    }

    #[test]
    fn path_loss_rejects_bad_distance() {
        let c = RadioConstants::default();
        assert!(path_loss_db(f64::NAN, &c).is_err());
        assert!(path_loss_db(f64::INFINITY, &c).is_err());
        let no_clamp = RadioConstants { min_distance_clamp_m: 0.0, ..c };
        assert!(path_loss_db(0.0, &no_clamp).is_err());
    }

    #[test]
    fn path_loss_slope_is_exact() {
        let c = RadioConstants::default();
        let (r1, r2) = (0.7, 5.3);
        let diff = path_loss_db(r2, &c).unwrap() - path_loss_db(r1, &c).unwrap();
        assert!((diff - 37.6 * (r2 / r1).log10()).abs() < 1e-12);
    }

    #[test]
    fn antenna_boresight_and_beamwidth() {
        let p = AntennaPattern::default();
        let e = cell(0, 0.0, 0.0, 0.0, 0);
        let boresight = antenna_gain_db(&e, &Point::new(100.0, 0.0), &p);
        assert!((boresight - 15.0).abs() < 1e-12);

        // Target at exactly theta_3db off boresight: 12 dB down by definition.
        let theta = 65f64.to_radians();
        let off = Point::new(100.0 * theta.cos(), 100.0 * theta.sin());
        assert!((antenna_gain_db(&e, &off, &p) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn antenna_back_lobe_clamps() {
        let p = AntennaPattern::default();
        let e = cell(0, 0.0, 0.0, 0.0, 0);
        let back = antenna_gain_db(&e, &Point::new(-100.0, 0.0), &p);
        assert!((back - (15.0 - 25.0)).abs() < 1e-12);
    }

    #[test]
    fn antenna_pattern_symmetric_in_offset() {
        let p = AntennaPattern::default();
        let e = cell(0, 0.0, 0.0, 30.0, 0);
        for deg in [5.0, 40.0, 90.0, 170.0] {
            let up = (30f64 + deg).to_radians();
            let down = (30f64 - deg).to_radians();
            let g_up = antenna_gain_db(&e, &Point::new(up.cos(), up.sin()), &p);
            let g_down = antenna_gain_db(&e, &Point::new(down.cos(), down.sin()), &p);
            assert!((g_up - g_down).abs() < 1e-9, "asymmetric at {deg}");
        }
    }

    #[test]
    fn reuse_matrix_examples() {
        let all_same = vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 1.0, 0.0, 0.0, 0)];
        let m = build_interference_matrix(&all_same, 1).unwrap();
        assert!(m.co_channel(0, 1) && m.co_channel(1, 0));
        assert!(!m.co_channel(0, 0) && !m.co_channel(1, 1));

        let split = vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 1.0, 0.0, 0.0, 1)];
        let m = build_interference_matrix(&split, 3).unwrap();
        assert!(!m.co_channel(0, 1) && !m.co_channel(1, 0));

        assert!(build_interference_matrix(&split, 1).is_err());
    }

    #[test]
    fn interference_zero_cases() {
        let cells = vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 1.0, 0.0, 0.0, 0)];
        let a = build_interference_matrix(&cells, 3).unwrap();
        let gains = vec![flat_gain(-100.0), flat_gain(-110.0)];
        let powers = vec![dbm_to_mw(32.0); 2];

        let idle = interference_mw(0, &gains, &[0.0, 0.0], &a, &powers).unwrap();
        assert_eq!(idle, 0.0);

        let disjoint = vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 1.0, 0.0, 0.0, 1)];
        let a0 = build_interference_matrix(&disjoint, 3).unwrap();
        let none = interference_mw(0, &gains, &[1.0, 1.0], &a0, &powers).unwrap();
        assert_eq!(none, 0.0);
    }

    // Independent term-by-term transcription of the interference sum, kept
    // deliberately naive so it cannot share bugs with the implementation.
    fn interference_oracle(
        k: usize,
        gains: &[LinkGain],
        loads: &[f64],
        a: &InterferenceMatrix,
        powers_dbm: &[f64],
    ) -> f64 {
        let mut sum = 0.0;
        for i in 0..gains.len() {
            if i == k || !a.co_channel(k, i) {
                continue;
            }
            let p_mw = 10f64.powf(powers_dbm[i] / 10.0);
            let g_lin = 10f64
                .powf((gains[i].antenna_gain_db + gains[i].shadowing_db) / 10.0);
            let q_lin = 10f64.powf(gains[i].path_loss_db / 10.0);
            sum += loads[i] * p_mw * g_lin / q_lin;
        }
        sum
    }

    #[test]
    fn interference_three_cell_oracle() {
        let cells =
            vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 900.0, 0.0, 0.0, 0), cell(2, 0.0, 1200.0, 0.0, 0)];
        let a = build_interference_matrix(&cells, 3).unwrap();
        let gains = vec![
            LinkGain { antenna_gain_db: 15.0, path_loss_db: 120.0, shadowing_db: 2.0 },
            LinkGain { antenna_gain_db: 9.0, path_loss_db: 131.0, shadowing_db: -4.5 },
            LinkGain { antenna_gain_db: -10.0, path_loss_db: 140.0, shadowing_db: 7.0 },
        ];
        let loads = [0.0, 0.5, 1.0];
        let powers_dbm = [32.0, 32.0, 30.0];
        let powers_mw: Vec<f64> = powers_dbm.iter().map(|&p| dbm_to_mw(p)).collect();

        let got = interference_mw(0, &gains, &loads, &a, &powers_mw).unwrap();
        let want = interference_oracle(0, &gains, &loads, &a, &powers_dbm);
        assert!((got - want).abs() / want < 1e-12);
    }

    #[test]
    fn interference_rejects_dimension_mismatch() {
        let cells = vec![cell(0, 0.0, 0.0, 0.0, 0), cell(1, 1.0, 0.0, 0.0, 0)];
        let a = build_interference_matrix(&cells, 3).unwrap();
        let gains = vec![flat_gain(-100.0)];
        let powers = vec![1.0, 1.0];
        assert!(interference_mw(0, &gains, &[0.0, 0.0], &a, &powers).is_err());
    }

    #[test]
    fn sinr_noise_limited_and_doubling() {
        let c = RadioConstants::default();
        let gains = vec![flat_gain(-120.0)];
        let powers = vec![dbm_to_mw(32.0)];

        let clean = sinr_db(0, &gains, &powers, 0.0, &c).unwrap();
        // I = 0 reduces to signal over thermal noise exactly.
        let noise_dbm = -174.0 + 10.0 * 180_000f64.log10();
        assert!((clean - (32.0 - 120.0 - noise_dbm)).abs() < 1e-9);

        // Interference equal to noise doubles the denominator: -3.01 dB.
        let loaded = sinr_db(0, &gains, &powers, c.noise_mw(), &c).unwrap();
        assert!((clean - loaded - 10.0 * 2f64.log10()).abs() < 1e-9);
    }

    #[test]
    fn sinr_rejects_negative_interference() {
        let c = RadioConstants::default();
        let gains = vec![flat_gain(-120.0)];
        let powers = vec![1.0];
        assert!(sinr_db(0, &gains, &powers, -1e-9, &c).is_err());
    }

    #[test]
    fn efficiency_map_reference_points() {
        let m = EfficiencyMap::default();
        assert_eq!(spectral_efficiency(-7.5, &m), 0.0);
        assert_eq!(spectral_efficiency(60.0, &m), 4.8);
        let at_10db = spectral_efficiency(10.0, &m);
        assert!((at_10db - 0.75 * 11f64.log2()).abs() < 1e-12);
        assert!((at_10db - 2.595).abs() < 1e-3);
    }

    #[test]
    fn noise_floor_value() {
        let c = RadioConstants::default();
        let noise_dbm = 10.0 * c.noise_mw().log10();
        assert!((noise_dbm - (-121.4472)).abs() < 1e-3);
    }

    #[test]
    fn model_rejects_bad_configs() {
        let ok = vec![cell(0, 0.0, 0.0, 0.0, 0)];
        assert!(RadioModel::new(
            ok.clone(),
            RadioConstants::default(),
            AntennaPattern::default(),
            EfficiencyMap::default(),
            3
        )
        .is_ok());
        assert!(RadioModel::new(
            vec![],
            RadioConstants::default(),
            AntennaPattern::default(),
            EfficiencyMap::default(),
            3
        )
        .is_err());
        let bad_group = vec![cell(0, 0.0, 0.0, 0.0, 5)];
        assert!(RadioModel::new(
            bad_group,
            RadioConstants::default(),
            AntennaPattern::default(),
            EfficiencyMap::default(),
            3
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn interference_linear_in_each_load(
            net_db in proptest::collection::vec(-60.0f64..20.0, 4),
            loads in proptest::collection::vec(0.0f64..1.0, 4),
            bump in 0.0f64..0.5,
            idx in 1usize..4,
        ) {
            let cells: Vec<EnbConfig> = (0..4).map(|i| cell(i, i as f64, 0.0, 0.0, 0)).collect();
            let a = build_interference_matrix(&cells, 3).unwrap();
            let gains: Vec<LinkGain> = net_db.iter().map(|&g| flat_gain(g)).collect();
            let powers = vec![dbm_to_mw(32.0); 4];

            let base = interference_mw(0, &gains, &loads, &a, &powers).unwrap();
            let mut bumped = loads.clone();
            bumped[idx] += bump;
            let shifted = interference_mw(0, &gains, &bumped, &a, &powers).unwrap();
            let term = powers[idx] * gains[idx].net_linear();
            let expect = base + bump * term;
            prop_assert!((shifted - expect).abs() <= 1e-9 * expect.abs().max(1e-30));
        }

        #[test]
        fn sinr_decreases_with_interference(
            i1 in 0.0f64..1e-9,
            extra in 1e-15f64..1e-9,
        ) {
            let c = RadioConstants::default();
            let gains = vec![flat_gain(-120.0)];
            let powers = vec![dbm_to_mw(32.0)];
            let low = sinr_db(0, &gains, &powers, i1, &c).unwrap();
            let high = sinr_db(0, &gains, &powers, i1 + extra, &c).unwrap();
            prop_assert!(high < low);
        }

        #[test]
        fn matrix_symmetric_zero_diagonal(
            groups in proptest::collection::vec(0u8..3, 2..30),
        ) {
            let cells: Vec<EnbConfig> = groups
                .iter()
                .enumerate()
                .map(|(i, &g)| cell(i as u32, i as f64 * 100.0, 0.0, 0.0, g))
                .collect();
            let m = build_interference_matrix(&cells, 3).unwrap();
            for k in 0..cells.len() {
                prop_assert!(!m.co_channel(k, k));
                for i in 0..cells.len() {
                    prop_assert_eq!(m.co_channel(k, i), m.co_channel(i, k));
                    prop_assert_eq!(
                        m.co_channel(k, i),
                        k != i && groups[k] == groups[i]
                    );
                }
            }
        }

        #[test]
        fn efficiency_monotone(s1 in -20.0f64..40.0, s2 in -20.0f64..40.0) {
            let m = EfficiencyMap::default();
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            prop_assert!(spectral_efficiency(lo, &m) <= spectral_efficiency(hi, &m));
        }
    }
}
