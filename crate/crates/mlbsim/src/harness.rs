//! Campaign orchestration: binds the optimizer to the simulator. A campaign
//! runs the planning baseline, then (unless in baseline mode) wraps the
//! mode-appropriate fitness function around the swarm and collects the
//! archive, the evaluation log, and the baseline reference point.
//!
//! Seeding is hierarchical: every stream is derived from the campaign seed
//! with a tagged word list, so evaluations are order-independent and two
//! campaigns with equal configs are bit-identical. The default seed policy
//! reuses the same replication seeds for every candidate (common random
//! numbers): fitness differences then reflect controller differences rather
//! than traffic noise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{
    corners_to_coeffs, sample_hm_matrix, ControlError, DynamicSampler, ExpParams, HmMatrix,
    HmSurface, NeighborMap, SurfaceShape,
};
use crate::mopso::{run_swarm, MopsoError, ObjectiveVector, SwarmConfig, SwarmRun};
use crate::net::{NetError, RadioModel};
use crate::scenario::Scenario;
use crate::sim::{run, Controller, KpiReport, SimConfig, SimError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("campaign config: {0}")]
    Config(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mopso(#[from] MopsoError),
}

/// What the campaign optimizes, if anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Planning run only; no optimizer.
    Baseline,
    /// Surface sampled once at frozen baseline loads; constant margins.
    StaticOpt,
    /// Surface resampled from windowed loads every update period.
    DynamicOpt,
}

/// How evaluation seeds relate across the swarm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Every candidate sees the same replication seeds (common random
    /// numbers). Default.
    FixedPerCampaign,
    /// Seeds also depend on (iteration, particle); for robustness studies.
    PerParticle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Polynomial,
    Exponential,
}

/// Shape-specific campaign settings; the particle encoding depends on these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    /// Margin clamp range applied to every sampled value.
    pub hm_min_db: f64,
    pub hm_max_db: f64,
    /// Exponential only: freeze b at the planning margin and search (a1, a2).
    pub pin_b: bool,
    /// Dynamic mode: seconds between matrix resamples.
    pub update_period_s: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        SurfaceConfig {
            kind: SurfaceKind::Exponential,
            hm_min_db: crate::control::DEFAULT_HM_MIN_DB,
            hm_max_db: crate::control::DEFAULT_HM_MAX_DB,
            pin_b: true,
            update_period_s: 5.0,
        }
    }
}

impl SurfaceConfig {
    /// Dimension of the particle position vector under this encoding.
    pub fn dims(&self) -> usize {
        match (self.kind, self.pin_b) {
            (SurfaceKind::Polynomial, _) => 4,
            (SurfaceKind::Exponential, true) => 2,
            (SurfaceKind::Exponential, false) => 3,
        }
    }
}

/// Per-cell average loads from the planning run; the static mode samples its
/// candidate surfaces at these frozen values.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineLoads {
    pub loads: Vec<f64>,
}

/// Full description of one optimization campaign.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub scenario: Scenario,
    pub sim: SimConfig,
    pub mode: Mode,
    pub surface: SurfaceConfig,
    pub swarm: SwarmConfig,
    /// Planning margin: the baseline controller and the initial dynamic
    /// matrix both use this constant.
    pub hm0_db: f64,
    pub replications: u32,
    pub seed_policy: SeedPolicy,
    pub seed: u64,
}

impl Campaign {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: String| Err(HarnessError::Config(m));
        if self.replications == 0 {
            return err("replications must be >= 1".into());
        }
        if !self.hm0_db.is_finite() {
            return err(format!("hm0 {} must be finite", self.hm0_db));
        }
        if !(self.surface.hm_min_db < self.surface.hm_max_db) {
            return err(format!(
                "margin clamp range [{}, {}] is empty",
                self.surface.hm_min_db, self.surface.hm_max_db
            ));
        }
        if !(self.surface.update_period_s > 0.0) {
            return err(format!("update period {} must be > 0", self.surface.update_period_s));
        }
        if self.mode != Mode::Baseline && self.swarm.bounds.len() != self.surface.dims() {
            return err(format!(
                "search box has {} dimensions, surface encoding needs {}",
                self.swarm.bounds.len(),
                self.surface.dims()
            ));
        }
        self.sim.validate()?;
        Ok(())
    }
}

pub struct CampaignResult {
    pub mode: Mode,
    /// Planning run at replication seed 0.
    pub baseline_report: KpiReport,
    pub baseline_loads: BaselineLoads,
    /// Planning objectives averaged over the replication seeds, i.e. on the
    /// same footing as every fitness value.
    pub baseline_objectives: ObjectiveVector,
    /// None in baseline mode.
    pub swarm: Option<SwarmRun>,
    pub evaluations_total: usize,
    pub evaluations_iterated: usize,
}

/// Mixes `words` into `base` with a splitmix64-style finalizer per word.
/// Stream separation only needs decorrelation, not cryptography.
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut z = base;
    for &w in words {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(w.wrapping_mul(0xD134_2543_DE82_EF95));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

const STREAM_EVAL: u64 = 1;
const STREAM_EVAL_PER_PARTICLE: u64 = 2;
const STREAM_SWARM: u64 = 3;

/// Simulation seed for one fitness evaluation. Always a pure function of
/// (campaign seed, iteration, particle, replication); the fixed policy simply
/// ignores iteration and particle so all candidates share traffic.
pub fn eval_seed(
    campaign_seed: u64,
    policy: SeedPolicy,
    iteration: usize,
    particle: usize,
    replication: u32,
) -> u64 {
    match policy {
        SeedPolicy::FixedPerCampaign => {
            derive_seed(campaign_seed, &[STREAM_EVAL, replication as u64])
        }
        SeedPolicy::PerParticle => derive_seed(
            campaign_seed,
            &[STREAM_EVAL_PER_PARTICLE, replication as u64, iteration as u64, particle as u64],
        ),
    }
}

/// Baseline replication seeds always use the fixed-policy stream, so a flat
/// candidate under the default policy reproduces the baseline bit-exactly.
fn baseline_seed(campaign_seed: u64, replication: u32) -> u64 {
    derive_seed(campaign_seed, &[STREAM_EVAL, replication as u64])
}

/// Search box for the standard encodings. The polynomial box encodes the
/// qualitative tuning rules: the equal-load corners stay near the planning
/// margin, the loaded-serving corner may only advance handovers, and the
/// loaded-neighbor corner may only delay them. The exponential box spans
/// [0.5, 20] per parameter, covering both rising and falling branches.
pub fn default_bounds(surface: &SurfaceConfig, hm0_db: f64) -> Vec<(f64, f64)> {
    match surface.kind {
        SurfaceKind::Polynomial => vec![
            (hm0_db - 2.0, hm0_db + 2.0),
            (surface.hm_min_db, hm0_db),
            (hm0_db, surface.hm_max_db),
            (hm0_db - 2.0, hm0_db + 2.0),
        ],
        SurfaceKind::Exponential => {
            let mut b = vec![(0.5, 20.0), (0.5, 20.0)];
            if !surface.pin_b {
                b.push((0.5, 20.0));
            }
            b
        }
    }
}

/// Decodes a particle position into a margin surface.
///
/// Polynomial positions are the four corner margins (HM(0,0), HM(1,0),
/// HM(0,1), HM(1,1)); exponential positions are (a1, a2) with b pinned to the
/// planning margin, or (a1, a2, b) when unpinned.
pub fn position_to_surface(
    position: &[f64],
    surface: &SurfaceConfig,
    hm0_db: f64,
) -> Result<HmSurface, String> {
    let want = surface.dims();
    if position.len() != want {
        return Err(format!("position has {} dims, encoding needs {want}", position.len()));
    }
    let shape = match surface.kind {
        SurfaceKind::Polynomial => SurfaceShape::Polynomial(corners_to_coeffs(
            position[0],
            position[1],
            position[2],
            position[3],
        )),
        SurfaceKind::Exponential => {
            let b = if surface.pin_b { hm0_db } else { position[2] };
            SurfaceShape::Exponential(ExpParams { a1: position[0], a2: position[1], b })
        }
    };
    HmSurface::new(shape, surface.hm_min_db, surface.hm_max_db).map_err(|e| e.to_string())
}

fn objectives_of(report: &KpiReport) -> ObjectiveVector {
    ObjectiveVector::new(report.throughput_bps, report.p_access)
}

/// Constant planning matrix, with non-neighbor pairs disabled when the
/// scenario restricts handover targets.
fn planning_matrix(n: usize, hm0_db: f64, neighbors: Option<&NeighborMap>) -> HmMatrix {
    let mut m = HmMatrix::constant(n, hm0_db);
    if let Some(map) = neighbors {
        for k in 0..n {
            for i in 0..n {
                if k != i && !map.allows(k, i) {
                    m.set(k, i, f64::INFINITY);
                }
            }
        }
    }
    m
}

/// Runs the network once per replication seed with the constant planning
/// margin; returns the seed-0 report, its time-averaged loads, and the
/// replication-averaged objectives.
pub fn baseline_run(
    campaign: &Campaign,
) -> Result<(KpiReport, BaselineLoads, ObjectiveVector), HarnessError> {
    campaign.validate()?;
    let model = campaign.scenario.build_model()?;
    let neighbors = campaign.scenario.neighbor_map();
    let matrix = planning_matrix(model.n_cells(), campaign.hm0_db, neighbors.as_ref());

    let mut first: Option<KpiReport> = None;
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    for r in 0..campaign.replications {
        let report = run(
            &model,
            campaign.scenario.area,
            Controller::Fixed(matrix.clone()),
            &campaign.sim,
            baseline_seed(campaign.seed, r),
        )?;
        let o = objectives_of(&report);
        f1 += o.f1;
        f2 += o.f2;
        if first.is_none() {
            first = Some(report);
        }
    }
    let report = first.expect("replications >= 1");
    let loads = BaselineLoads { loads: report.cell_load_avg.clone() };
    debug_assert!(loads.loads.iter().all(|l| (0.0..=1.0).contains(l)));
    let n = campaign.replications as f64;
    Ok((report, loads, ObjectiveVector::new(f1 / n, f2 / n)))
}

fn averaged_runs(
    campaign: &Campaign,
    model: &RadioModel,
    make_controller: impl Fn() -> Controller,
    iteration: usize,
    particle: usize,
) -> Result<ObjectiveVector, String> {
    let mut f1 = 0.0;
    let mut f2 = 0.0;
    for r in 0..campaign.replications {
        let seed = eval_seed(campaign.seed, campaign.seed_policy, iteration, particle, r);
        let report = run(model, campaign.scenario.area, make_controller(), &campaign.sim, seed)
            .map_err(|e| e.to_string())?;
        let o = objectives_of(&report);
        f1 += o.f1;
        f2 += o.f2;
    }
    let n = campaign.replications as f64;
    Ok(ObjectiveVector::new(f1 / n, f2 / n))
}

/// Static-mode fitness: sample the candidate surface once at the frozen
/// baseline loads, then simulate with that constant matrix.
pub fn static_fitness(
    position: &[f64],
    baseline: &BaselineLoads,
    campaign: &Campaign,
    model: &RadioModel,
    iteration: usize,
    particle: usize,
) -> Result<ObjectiveVector, String> {
    let surface = position_to_surface(position, &campaign.surface, campaign.hm0_db)?;
    let neighbors = campaign.scenario.neighbor_map();
    let matrix = sample_hm_matrix(&surface, &baseline.loads, neighbors.as_ref());
    averaged_runs(campaign, model, || Controller::Fixed(matrix.clone()), iteration, particle)
}

/// Dynamic-mode fitness: the candidate surface is resampled from windowed
/// loads every update period, starting from the planning matrix.
pub fn dynamic_fitness(
    position: &[f64],
    campaign: &Campaign,
    model: &RadioModel,
    iteration: usize,
    particle: usize,
) -> Result<ObjectiveVector, String> {
    let surface = position_to_surface(position, &campaign.surface, campaign.hm0_db)?;
    let neighbors = campaign.scenario.neighbor_map();
    let initial = planning_matrix(model.n_cells(), campaign.hm0_db, neighbors.as_ref());
    averaged_runs(
        campaign,
        model,
        || {
            let sampler = DynamicSampler::new(
                surface.clone(),
                campaign.surface.update_period_s,
                initial.clone(),
                neighbors.clone(),
            )
            .expect("update period validated");
            Controller::Dynamic(sampler)
        },
        iteration,
        particle,
    )
}

/// Runs the baseline and, unless in baseline mode, the full swarm campaign.
pub fn run_campaign(campaign: &Campaign) -> Result<CampaignResult, HarnessError> {
    campaign.validate()?;
    let (baseline_report, baseline_loads, baseline_objectives) = baseline_run(campaign)?;
    if campaign.mode == Mode::Baseline {
        return Ok(CampaignResult {
            mode: campaign.mode,
            baseline_report,
            baseline_loads,
            baseline_objectives,
            swarm: None,
            evaluations_total: 0,
            evaluations_iterated: 0,
        });
    }

    let model = campaign.scenario.build_model()?;
    let mut swarm_cfg = campaign.swarm.clone();
    swarm_cfg.seed = derive_seed(campaign.seed, &[STREAM_SWARM]);

    let run = match campaign.mode {
        Mode::StaticOpt => {
            let baseline = baseline_loads.clone();
            run_swarm(&swarm_cfg, |iteration, particle, position| {
                static_fitness(position, &baseline, campaign, &model, iteration, particle)
            })?
        }
        Mode::DynamicOpt => run_swarm(&swarm_cfg, |iteration, particle, position| {
            dynamic_fitness(position, campaign, &model, iteration, particle)
        })?,
        Mode::Baseline => unreachable!(),
    };

    let total = swarm_cfg.population * (swarm_cfg.iterations + 1);
    let iterated = swarm_cfg.population * swarm_cfg.iterations;
    debug_assert_eq!(run.evals.len(), total);
    Ok(CampaignResult {
        mode: campaign.mode,
        baseline_report,
        baseline_loads,
        baseline_objectives,
        swarm: Some(run),
        evaluations_total: total,
        evaluations_iterated: iterated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::PolyCoeffs;
    use crate::mopso::dominates;
    use crate::scenario::presets;

    fn tiny_campaign(mode: Mode, kind: SurfaceKind) -> Campaign {
        let surface = SurfaceConfig { kind, ..SurfaceConfig::default() };
        let bounds = default_bounds(&surface, 6.0);
        Campaign {
            scenario: presets::desk_9(),
            sim: SimConfig {
                arrival_rate_per_s: 1.0,
                duration_s: 40.0,
                ..SimConfig::default()
            },
            mode,
            surface,
            swarm: SwarmConfig {
                population: 4,
                iterations: 2,
                bounds,
                ..SwarmConfig::default()
            },
            hm0_db: 6.0,
            replications: 1,
            seed_policy: SeedPolicy::FixedPerCampaign,
            seed: 99,
        }
    }

    #[test]
    fn derive_seed_separates_streams() {
        let s = 12345;
        assert_ne!(derive_seed(s, &[1, 0]), derive_seed(s, &[1, 1]));
        assert_ne!(derive_seed(s, &[1, 0]), derive_seed(s, &[2, 0]));
        assert_ne!(derive_seed(s, &[1, 0]), derive_seed(s + 1, &[1, 0]));
        assert_eq!(derive_seed(s, &[7, 7]), derive_seed(s, &[7, 7]));
        // Word boundaries matter: [1, 0] and [0, 1] are different streams.
        assert_ne!(derive_seed(s, &[1, 0]), derive_seed(s, &[0, 1]));
    }

    #[test]
    fn eval_seed_policies() {
        let s = 5;
        let fixed = SeedPolicy::FixedPerCampaign;
        // Fixed policy: iteration and particle are irrelevant.
        assert_eq!(eval_seed(s, fixed, 0, 0, 0), eval_seed(s, fixed, 7, 3, 0));
        assert_ne!(eval_seed(s, fixed, 0, 0, 0), eval_seed(s, fixed, 0, 0, 1));
        // Per-particle policy: every coordinate matters.
        let pp = SeedPolicy::PerParticle;
        assert_ne!(eval_seed(s, pp, 0, 0, 0), eval_seed(s, pp, 0, 1, 0));
        assert_ne!(eval_seed(s, pp, 0, 0, 0), eval_seed(s, pp, 1, 0, 0));
        assert_ne!(eval_seed(s, pp, 0, 0, 0), eval_seed(s, pp, 0, 0, 1));
        // The two policies never share a stream.
        assert_ne!(eval_seed(s, fixed, 0, 0, 0), eval_seed(s, pp, 0, 0, 0));
    }

    #[test]
    fn polynomial_position_is_corner_encoded() {
        let surface = SurfaceConfig { kind: SurfaceKind::Polynomial, ..SurfaceConfig::default() };
        // Corners (6, 2, 10, 6) are the interpolation form of coefficients
        // (6, -4, 4, 0).
        let s = position_to_surface(&[6.0, 2.0, 10.0, 6.0], &surface, 6.0).unwrap();
        let p = PolyCoeffs { b0: 6.0, b1: -4.0, b2: 4.0, b3: 0.0 };
        for (li, lj) in [(0.0, 0.0), (1.0, 0.0), (0.3, 0.8), (0.5, 0.5)] {
            let direct = (p.b0 + p.b1 * li + p.b2 * lj + p.b3 * li * lj).clamp(-10.0, 20.0);
            assert!((s.sample(li, lj) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_position_pins_b() {
        let pinned = SurfaceConfig { kind: SurfaceKind::Exponential, ..SurfaceConfig::default() };
        let s = position_to_surface(&[20.0, 20.0], &pinned, 6.0).unwrap();
        assert!((s.sample(0.5, 0.5) - 6.0).abs() < 1e-12, "b must equal the planning margin");

        let free = SurfaceConfig { pin_b: false, ..pinned };
        let s = position_to_surface(&[20.0, 20.0, 3.0], &free, 6.0).unwrap();
        assert!((s.sample(0.5, 0.5) - 3.0).abs() < 1e-12);

        assert!(position_to_surface(&[1.0], &free, 6.0).is_err());
        assert!(position_to_surface(&[1.0, 1.0, -2.0], &free, 6.0).is_err());
    }

    #[test]
    fn default_bounds_match_encoding_dims() {
        for kind in [SurfaceKind::Polynomial, SurfaceKind::Exponential] {
            for pin_b in [true, false] {
                let surface = SurfaceConfig { kind, pin_b, ..SurfaceConfig::default() };
                assert_eq!(default_bounds(&surface, 6.0).len(), surface.dims());
            }
        }
    }

    #[test]
    fn baseline_zero_traffic_has_zero_loads() {
        let mut c = tiny_campaign(Mode::Baseline, SurfaceKind::Exponential);
        c.sim.arrival_rate_per_s = 0.0;
        let (_, loads, obj) = baseline_run(&c).unwrap();
        assert!(loads.loads.iter().all(|&l| l == 0.0));
        assert_eq!(obj.f1, 0.0);
        assert_eq!(obj.f2, 1.0);
    }

    #[test]
    fn baseline_is_deterministic() {
        let c = tiny_campaign(Mode::Baseline, SurfaceKind::Exponential);
        let (r1, l1, o1) = baseline_run(&c).unwrap();
        let (r2, l2, o2) = baseline_run(&c).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(l1, l2);
        assert_eq!(o1, o2);
    }

    #[test]
    fn flat_static_candidate_reproduces_baseline() {
        let c = tiny_campaign(Mode::StaticOpt, SurfaceKind::Polynomial);
        let model = c.scenario.build_model().unwrap();
        let (report, loads, _) = baseline_run(&c).unwrap();
        // All four corners at the planning margin: the sampled matrix is the
        // planning matrix whatever the loads are.
        let flat = [6.0, 6.0, 6.0, 6.0];
        let obj = static_fitness(&flat, &loads, &c, &model, 0, 0).unwrap();
        assert_eq!(obj.f1, report.throughput_bps);
        assert_eq!(obj.f2, report.p_access);
    }

    #[test]
    fn replications_average_the_seeded_runs() {
        let mut c = tiny_campaign(Mode::StaticOpt, SurfaceKind::Exponential);
        c.replications = 2;
        let model = c.scenario.build_model().unwrap();
        let (_, loads, _) = baseline_run(&c).unwrap();
        let pos = [10.0, 3.0];
        let avg = static_fitness(&pos, &loads, &c, &model, 0, 0).unwrap();

        let mut single = c.clone();
        single.replications = 1;
        let a = static_fitness(&pos, &loads, &single, &model, 0, 0).unwrap();
        // Replication 1 alone: shift the stream by running it as rep 0 of a
        // campaign whose... there is no such shortcut; recompute directly.
        let surface = position_to_surface(&pos, &c.surface, c.hm0_db).unwrap();
        let matrix = sample_hm_matrix(&surface, &loads.loads, None);
        let seed1 = eval_seed(c.seed, c.seed_policy, 0, 0, 1);
        let r1 = run(&model, c.scenario.area, Controller::Fixed(matrix), &c.sim, seed1).unwrap();
        assert!((avg.f1 - (a.f1 + r1.throughput_bps) / 2.0).abs() < 1e-9);
        assert!((avg.f2 - (a.f2 + r1.p_access) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn dynamic_with_huge_period_degenerates_to_static() {
        let c = tiny_campaign(Mode::DynamicOpt, SurfaceKind::Exponential);
        let model = c.scenario.build_model().unwrap();
        let (_, loads, _) = baseline_run(&c).unwrap();
        let pos = [12.0, 2.0];
        let surface = position_to_surface(&pos, &c.surface, c.hm0_db).unwrap();
        let matrix = sample_hm_matrix(&surface, &loads.loads, None);
        let seed = eval_seed(c.seed, c.seed_policy, 0, 0, 0);

        // Update period beyond the horizon with the matrix pre-sampled at
        // baseline loads: a single sampling event, exactly the static case.
        let sampler =
            DynamicSampler::new(surface, 10_000.0, matrix.clone(), None).unwrap();
        let dynamic =
            run(&model, c.scenario.area, Controller::Dynamic(sampler), &c.sim, seed).unwrap();
        let fixed =
            run(&model, c.scenario.area, Controller::Fixed(matrix), &c.sim, seed).unwrap();
        assert_eq!(dynamic, fixed);
    }

    #[test]
    fn baseline_mode_runs_no_optimizer() {
        let c = tiny_campaign(Mode::Baseline, SurfaceKind::Exponential);
        let result = run_campaign(&c).unwrap();
        assert!(result.swarm.is_none());
        assert_eq!(result.evaluations_total, 0);
    }

    #[test]
    fn campaign_counts_and_determinism() {
        let c = tiny_campaign(Mode::DynamicOpt, SurfaceKind::Exponential);
        let a = run_campaign(&c).unwrap();
        assert_eq!(a.evaluations_total, 4 * 3);
        assert_eq!(a.evaluations_iterated, 4 * 2);
        let swarm_a = a.swarm.unwrap();
        assert_eq!(swarm_a.evals.len(), 12);

        let b = run_campaign(&c).unwrap();
        let swarm_b = b.swarm.unwrap();
        assert_eq!(swarm_a.archive, swarm_b.archive);
        assert_eq!(swarm_a.evals.len(), swarm_b.evals.len());
        for (x, y) in swarm_a.evals.iter().zip(swarm_b.evals.iter()) {
            assert_eq!(x.position, y.position);
            assert_eq!(x.objectives, y.objectives);
        }
    }

    #[test]
    fn campaign_archive_equals_brute_force_filter() {
        let c = tiny_campaign(Mode::StaticOpt, SurfaceKind::Exponential);
        let result = run_campaign(&c).unwrap();
        let swarm = result.swarm.unwrap();
        let points: Vec<ObjectiveVector> =
            swarm.evals.iter().filter_map(|e| e.objectives).collect();
        for e in swarm.archive.entries() {
            assert!(!points.iter().any(|p| dominates(p, &e.objectives)));
        }
        // Every evaluated point is dominated by or equal to an archive entry.
        for p in &points {
            let covered = swarm.archive.entries().iter().any(|e| {
                dominates(&e.objectives, p)
                    || (e.objectives.f1 >= p.f1 && e.objectives.f2 >= p.f2)
            });
            assert!(covered, "({}, {}) escaped the archive", p.f1, p.f2);
        }
    }

    #[test]
    fn campaign_rejects_bad_configs() {
        let mut c = tiny_campaign(Mode::StaticOpt, SurfaceKind::Exponential);
        c.replications = 0;
        assert!(matches!(run_campaign(&c), Err(HarnessError::Config(_))));

        let mut c = tiny_campaign(Mode::StaticOpt, SurfaceKind::Polynomial);
        c.swarm.bounds = vec![(0.5, 20.0); 2]; // polynomial needs 4 dims
        assert!(matches!(run_campaign(&c), Err(HarnessError::Config(_))));
    }
}
