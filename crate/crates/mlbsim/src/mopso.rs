//! Multi-objective particle swarm with constriction coefficients, fixed
//! random neighborhoods, Pareto dominance, an external non-dominated archive,
//! and a 2-D hypervolume indicator.
//!
//! The optimizer maximizes both objectives. Fitness evaluation is delegated
//! to a callback; evaluations within one batch may run in parallel and the
//! result is identical either way because all state updates are applied after
//! the batch completes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MopsoError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// A bi-objective fitness value; both components are maximized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveVector {
    pub f1: f64,
    pub f2: f64,
}

impl ObjectiveVector {
    pub fn new(f1: f64, f2: f64) -> Self {
        ObjectiveVector { f1, f2 }
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite()
    }
}

/// Pareto dominance: `a` is no worse in both objectives and strictly better
/// in at least one.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    a.f1 >= b.f1 && a.f2 >= b.f2 && (a.f1 > b.f1 || a.f2 > b.f2)
}

/// Constriction coefficients from the single parameter φ ≥ 4:
/// χ = 2 / |2 − φ − √(φ² − 4φ)|, c1 = χ, c_max = χ·φ/2.
pub fn constriction_coefficients(phi: f64) -> Result<(f64, f64), MopsoError> {
    if !(phi >= 4.0) {
        return Err(MopsoError::Config(format!("phi = {phi} must be >= 4")));
    }
    let chi = 2.0 / (2.0 - phi - (phi * phi - 4.0 * phi).sqrt()).abs();
    Ok((chi, chi * phi / 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub population: usize,
    /// Iterations after the initial evaluation batch.
    pub iterations: usize,
    pub phi: f64,
    /// Per-dimension (min, max) search box.
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
    /// Evaluate each batch on a rayon pool instead of serially.
    pub parallel: bool,
    /// Redraw neighborhoods at the start of every iteration instead of
    /// freezing them at initialization.
    pub reseed_neighbors: bool,
}

impl Default for SwarmConfig {
    fn default() -> Self {
        SwarmConfig {
            population: 10,
            iterations: 30,
            phi: 4.14,
            bounds: Vec::new(),
            seed: 0,
            parallel: false,
            reseed_neighbors: false,
        }
    }
}

impl SwarmConfig {
    pub fn validate(&self) -> Result<(), MopsoError> {
        if self.population < 4 {
            return Err(MopsoError::Config(format!(
                "population {} too small to draw 3 distinct neighbors",
                self.population
            )));
        }
        if !(self.phi >= 4.0) {
            return Err(MopsoError::Config(format!("phi = {} must be >= 4", self.phi)));
        }
        if self.bounds.is_empty() {
            return Err(MopsoError::Config("bounds must have at least one dimension".into()));
        }
        for &(lo, hi) in &self.bounds {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(MopsoError::Config(format!("bad bound ({lo}, {hi})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    /// Personal best position; starts at the initial position.
    pub best_position: Vec<f64>,
    /// Objectives of the personal best; None until its first successful
    /// evaluation.
    pub best_objectives: Option<ObjectiveVector>,
    /// Three distinct other particles, sorted ascending.
    pub neighbors: [usize; 3],
}

/// One (parameters, objectives) pair on the non-dominated front.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub position: Vec<f64>,
    pub objectives: ObjectiveVector,
}

/// Unbounded external archive keeping mutually non-dominated entries only.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

/// Equality up to 1e-12 relative tolerance; the archive's duplicate test.
pub(crate) fn rel_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= 1e-12 * x.abs().max(y.abs())
}

impl ParetoArchive {
    pub fn new() -> Self {
        ParetoArchive::default()
    }

    /// Offers a candidate: rejected if dominated by, or duplicating (to
    /// 1e-12 relative in both objectives), an existing entry; otherwise
    /// inserted, evicting everything it dominates. Returns whether inserted.
    pub fn insert(&mut self, position: Vec<f64>, objectives: ObjectiveVector) -> bool {
        for e in &self.entries {
            if dominates(&e.objectives, &objectives) {
                return false;
            }
            if rel_eq(e.objectives.f1, objectives.f1) && rel_eq(e.objectives.f2, objectives.f2) {
                return false;
            }
        }
        self.entries.retain(|e| !dominates(&objectives, &e.objectives));
        self.entries.push(ArchiveEntry { position, objectives });
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn objectives(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives).collect()
    }
}

/// One fitness evaluation in the run log.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    /// 0 for the initial batch, then 1..=iterations.
    pub iteration: usize,
    pub particle: usize,
    pub position: Vec<f64>,
    /// None when the evaluation failed or returned non-finite values.
    pub objectives: Option<ObjectiveVector>,
    pub error: Option<String>,
}

/// Archive plus full evaluation log from one swarm run.
#[derive(Debug, Clone)]
pub struct SwarmRun {
    pub archive: ParetoArchive,
    pub evals: Vec<EvalRecord>,
    /// Archive objective snapshot after each evaluation batch (initial batch
    /// first, so length = iterations + 1).
    pub iteration_fronts: Vec<Vec<ObjectiveVector>>,
}

/// First neighbor (in index order) whose personal best is not dominated by
/// any other neighbor's; neighbors without evaluated bests are skipped.
pub fn neighborhood_best(particle: &Particle, swarm: &[Particle]) -> Option<usize> {
    let evaluated: Vec<usize> = particle
        .neighbors
        .iter()
        .copied()
        .filter(|&j| swarm[j].best_objectives.is_some())
        .collect();
    'outer: for &j in &evaluated {
        let fj = swarm[j].best_objectives.as_ref().unwrap();
        for &k in &evaluated {
            if k != j && dominates(swarm[k].best_objectives.as_ref().unwrap(), fj) {
                continue 'outer;
            }
        }
        return Some(j);
    }
    None
}

/// Replaces the personal best iff the new objectives strictly dominate the
/// stored ones; incomparable or equal keeps the old best.
pub fn update_personal_best(particle: &mut Particle, position: &[f64], objectives: ObjectiveVector) {
    let replace = match &particle.best_objectives {
        None => true,
        Some(old) => dominates(&objectives, old),
    };
    if replace {
        particle.best_position = position.to_vec();
        particle.best_objectives = Some(objectives);
    }
}

/// Constriction velocity/position update. Per dimension d, with two
/// independent uniform draws u1 then u2:
/// v ← c1·v + c_max·u1·(q_d − p_d) + c_max·u2·(g_d − p_d); p ← p + v.
/// Positions clamp to bounds with the velocity zeroed on clamped dimensions.
pub fn update_particle(
    particle: &mut Particle,
    g: &[f64],
    c1: f64,
    c_max: f64,
    bounds: &[(f64, f64)],
    rng: &mut impl Rng,
) {
    for d in 0..particle.position.len() {
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        let p = particle.position[d];
        particle.velocity[d] = c1 * particle.velocity[d]
            + c_max * u1 * (particle.best_position[d] - p)
            + c_max * u2 * (g[d] - p);
        let mut next = p + particle.velocity[d];
        let (lo, hi) = bounds[d];
        if next < lo {
            next = lo;
            particle.velocity[d] = 0.0;
        } else if next > hi {
            next = hi;
            particle.velocity[d] = 0.0;
        }
        particle.position[d] = next;
    }
}

fn draw_neighbors(rng: &mut impl Rng, population: usize, own: usize) -> [usize; 3] {
    let mut picks = [usize::MAX; 3];
    let mut filled = 0;
    while filled < 3 {
        let j = rng.random_range(0..population);
        if j != own && !picks[..filled].contains(&j) {
            picks[filled] = j;
            filled += 1;
        }
    }
    picks.sort_unstable();
    picks
}

/// Runs the swarm: an initial evaluation batch establishing personal bests,
/// then `iterations` rounds of (pick neighborhood best → move → evaluate →
/// archive offer → personal-best update). Failed evaluations are logged and
/// skipped; the particle keeps its previous best.
pub fn run_swarm<F>(config: &SwarmConfig, fitness: F) -> Result<SwarmRun, MopsoError>
where
    F: Fn(usize, usize, &[f64]) -> Result<ObjectiveVector, String> + Sync,
{
    config.validate()?;
    let (c1, c_max) = constriction_coefficients(config.phi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut particles: Vec<Particle> = (0..config.population)
        .map(|_| {
            let position: Vec<f64> = config
                .bounds
                .iter()
                .map(|&(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect();
            let velocity: Vec<f64> = config
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    let w = hi - lo;
                    -w + rng.random::<f64>() * 2.0 * w
                })
                .collect();
            Particle {
                best_position: position.clone(),
                position,
                velocity,
                best_objectives: None,
                neighbors: [0; 3],
            }
        })
        .collect();
    for i in 0..config.population {
        particles[i].neighbors = draw_neighbors(&mut rng, config.population, i);
    }

    let mut archive = ParetoArchive::new();
    let mut evals = Vec::with_capacity(config.population * (config.iterations + 1));
    let mut iteration_fronts = Vec::with_capacity(config.iterations + 1);

    let evaluate_batch = |iteration: usize,
                          positions: &[Vec<f64>]|
     -> Vec<Result<ObjectiveVector, String>> {
        if config.parallel {
            positions
                .par_iter()
                .enumerate()
                .map(|(i, p)| fitness(iteration, i, p))
                .collect()
        } else {
            positions.iter().enumerate().map(|(i, p)| fitness(iteration, i, p)).collect()
        }
    };

    let positions: Vec<Vec<f64>> = particles.iter().map(|p| p.position.clone()).collect();
    let results = evaluate_batch(0, &positions);
    absorb_batch(0, &mut particles, results, &mut archive, &mut evals);
    iteration_fronts.push(archive.objectives());

    for iter in 1..=config.iterations {
        if config.reseed_neighbors {
            for i in 0..config.population {
                particles[i].neighbors = draw_neighbors(&mut rng, config.population, i);
            }
        }
        // Neighborhood bests are resolved against pre-move state for the
        // whole batch, so evaluation order cannot leak into the update.
        let targets: Vec<Vec<f64>> = (0..config.population)
            .map(|i| match neighborhood_best(&particles[i], &particles) {
                Some(j) => particles[j].best_position.clone(),
                None => particles[i].best_position.clone(),
            })
            .collect();
        for i in 0..config.population {
            update_particle(&mut particles[i], &targets[i], c1, c_max, &config.bounds, &mut rng);
        }
        let positions: Vec<Vec<f64>> = particles.iter().map(|p| p.position.clone()).collect();
        let results = evaluate_batch(iter, &positions);
        absorb_batch(iter, &mut particles, results, &mut archive, &mut evals);
        iteration_fronts.push(archive.objectives());
    }

    Ok(SwarmRun { archive, evals, iteration_fronts })
}

fn absorb_batch(
    iteration: usize,
    particles: &mut [Particle],
    results: Vec<Result<ObjectiveVector, String>>,
    archive: &mut ParetoArchive,
    evals: &mut Vec<EvalRecord>,
) {
    for (i, result) in results.into_iter().enumerate() {
        let position = particles[i].position.clone();
        match result {
            Ok(obj) if obj.is_finite() => {
                archive.insert(position.clone(), obj);
                update_personal_best(&mut particles[i], &position, obj);
                evals.push(EvalRecord {
                    iteration,
                    particle: i,
                    position,
                    objectives: Some(obj),
                    error: None,
                });
            }
            Ok(obj) => {
                evals.push(EvalRecord {
                    iteration,
                    particle: i,
                    position,
                    objectives: None,
                    error: Some(format!("non-finite objectives ({}, {})", obj.f1, obj.f2)),
                });
            }
            Err(e) => {
                evals.push(EvalRecord {
                    iteration,
                    particle: i,
                    position,
                    objectives: None,
                    error: Some(e),
                });
            }
        }
    }
}

/// 2-D hypervolume of a maximization front against a reference point that
/// every point must weakly dominate. Computed by the sorted-staircase sum;
/// invariant under permutation and unaffected by dominated points.
pub fn hypervolume(points: &[ObjectiveVector], reference: &ObjectiveVector) -> Result<f64, MopsoError> {
    for p in points {
        if !p.is_finite() {
            return Err(MopsoError::InvalidInput(format!("non-finite point ({}, {})", p.f1, p.f2)));
        }
        if !dominates(p, reference) {
            return Err(MopsoError::InvalidInput(format!(
                "point ({}, {}) does not dominate reference ({}, {})",
                p.f1, p.f2, reference.f1, reference.f2
            )));
        }
    }
    let mut sorted: Vec<&ObjectiveVector> = points.iter().collect();
    sorted.sort_by(|a, b| b.f1.total_cmp(&a.f1).then(b.f2.total_cmp(&a.f2)));
    let mut covered_f2 = reference.f2;
    let mut hv = 0.0;
    for p in sorted {
        if p.f2 > covered_f2 {
            hv += (p.f1 - reference.f1) * (p.f2 - covered_f2);
            covered_f2 = p.f2;
        }
    }
    Ok(hv)
}
