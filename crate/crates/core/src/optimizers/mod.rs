//! Population-based optimizers over the order-server particle encoding.
//!
//! The flagship algorithm is an adaptive discrete PSO that replaces the
//! classic velocity update with genetic operators: an inertia-gated dual
//! mutation plus crossovers with the personal and global best particles.
//! Three baselines share the encoding: a continuous PSO with rounded
//! server slots, a generational GA with tournament selection and elitism,
//! and plain random search.

mod adpso;
mod ga;
mod pso;
mod random_search;

pub use adpso::adpso_run;
pub use ga::ga_run;
pub use pso::pso_run;
pub use random_search::rs_run;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::platform::ProblemInstance;
use crate::simulator::{decode_schedule, fitness_of_schedule, Fitness, Particle, SimError};
use crate::tfn::Tfn;

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid optimizer parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Shared parameter set for all optimizers. The GA baseline additionally
/// uses fixed crossover/mutation probabilities of 0.8 and 0.1.
#[derive(Debug, Clone, Copy)]
pub struct AdpsoParams {
    pub population_size: usize,
    pub max_iterations: usize,
    pub w_max: f64,
    pub w_min: f64,
    pub k_max: usize,
    pub k_min: usize,
    pub c1_start: f64,
    pub c1_end: f64,
    pub c2_start: f64,
    pub c2_end: f64,
    pub seed: u64,
}

impl AdpsoParams {
    /// Standard settings: inertia 0.9 to 0.4, mutation count 1 to
    /// `ceil(|V| / 10)`, cognitive coefficient 0.9 to 0.2, social
    /// coefficient 0.4 to 0.9.
    pub fn defaults(
        task_count: usize,
        population_size: usize,
        max_iterations: usize,
        seed: u64,
    ) -> Self {
        AdpsoParams {
            population_size,
            max_iterations,
            w_max: 0.9,
            w_min: 0.4,
            k_max: task_count.div_ceil(10).max(1),
            k_min: 1,
            c1_start: 0.9,
            c1_end: 0.2,
            c2_start: 0.4,
            c2_end: 0.9,
            seed,
        }
    }

    pub fn validate(&self, task_count: usize) -> Result<(), OptimizerError> {
        let fail = |msg: String| Err(OptimizerError::InvalidParams(msg));
        if self.population_size < 2 {
            return fail(format!(
                "population must be >= 2, got {}",
                self.population_size
            ));
        }
        if self.max_iterations < 1 {
            return fail("need at least one iteration".into());
        }
        if !(0.0 <= self.w_min && self.w_min < self.w_max && self.w_max <= 1.0) {
            return fail(format!(
                "need 0 <= w_min < w_max <= 1, got [{}, {}]",
                self.w_min, self.w_max
            ));
        }
        if !(1 <= self.k_min && self.k_min <= self.k_max && self.k_max <= task_count.max(1)) {
            return fail(format!(
                "need 1 <= k_min <= k_max <= |V| = {task_count}, got [{}, {}]",
                self.k_min, self.k_max
            ));
        }
        for (name, c) in [
            ("c1_start", self.c1_start),
            ("c1_end", self.c1_end),
            ("c2_start", self.c2_start),
            ("c2_end", self.c2_end),
        ] {
            if !(0.0..=1.0).contains(&c) {
                return fail(format!("{name} must be within [0, 1], got {c}"));
            }
        }
        Ok(())
    }
}

/// Per-iteration snapshot of the incumbent best particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Defuzzified total cost of the best particle so far.
    pub best_cost: f64,
    /// Upper completion time of the best particle so far.
    pub best_upper_time: f64,
    /// Whether a deadline-respecting particle has been found.
    pub feasible_found: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizerResult {
    pub best_particle: Particle,
    pub best_fitness: Fitness,
    pub best_cost: Tfn,
    pub best_makespan: Tfn,
    pub feasible: bool,
    pub trace: Vec<TracePoint>,
}

/// Decoded summary the optimizers track per particle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Evaluation {
    pub fitness: Fitness,
    pub cost: Tfn,
    pub makespan: Tfn,
}

pub(crate) fn evaluate(inst: &ProblemInstance, p: &Particle) -> Result<Evaluation, SimError> {
    let s = decode_schedule(inst, p)?;
    Ok(Evaluation {
        fitness: fitness_of_schedule(&s, inst.fuzz.eta),
        cost: s.total_cost,
        makespan: s.makespan,
    })
}

pub(crate) fn trace_point(eta: f64, best: &Evaluation) -> TracePoint {
    TracePoint {
        best_cost: best.cost.defuzzify(eta),
        best_upper_time: best.makespan.upper(),
        feasible_found: best.fitness.feasible,
    }
}

pub(crate) fn result_from(
    best_particle: Particle,
    best: Evaluation,
    trace: Vec<TracePoint>,
) -> OptimizerResult {
    OptimizerResult {
        best_particle,
        best_fitness: best.fitness,
        best_cost: best.cost,
        best_makespan: best.makespan,
        feasible: best.fitness.feasible,
        trace,
    }
}

/// Index of the best evaluation; ties keep the lowest index.
pub(crate) fn argmin_fitness(evals: &[Evaluation]) -> usize {
    let mut best = 0;
    for i in 1..evals.len() {
        if evals[i].fitness < evals[best].fitness {
            best = i;
        }
    }
    best
}

/// Random population: order values uniform in `[0, |V|)`, server indices
/// uniform in `[0, |S|)`.
pub fn init_population<R: Rng + ?Sized>(
    inst: &ProblemInstance,
    size: usize,
    rng: &mut R,
) -> Vec<Particle> {
    let n = inst.task_count();
    let s = inst.server_count();
    (0..size)
        .map(|_| Particle {
            order: (0..n)
                .map(|_| rng.gen_range(0.0..n.max(1) as f64))
                .collect(),
            servers: (0..n).map(|_| rng.gen_range(0..s)).collect(),
        })
        .collect()
}

/// Inertia weight from the particle's divergence against the global best:
/// `w = w_max - (w_max - w_min) * exp(d / (d - 1.01))` where `d` is the
/// fraction of differing encoding slots. Identical particles get `w_min`;
/// fully diverged ones approach `w_max`.
///
/// Panics if the particles have different shapes.
pub fn adaptive_inertia(p: &Particle, gbest: &Particle, w_max: f64, w_min: f64) -> f64 {
    assert_eq!(
        p.order.len(),
        gbest.order.len(),
        "particle shapes must match"
    );
    assert_eq!(
        p.servers.len(),
        gbest.servers.len(),
        "particle shapes must match"
    );
    let slots = 2 * p.order.len();
    if slots == 0 {
        return w_min;
    }
    let d = p.divergence(gbest) as f64 / slots as f64;
    w_max - (w_max - w_min) * (d / (d - 1.01)).exp()
}

/// Mutation count grows linearly with the inertia weight, rounded to the
/// nearest integer and clamped to `[k_min, k_max]`.
pub fn mutation_count(w: f64, w_max: f64, w_min: f64, k_max: usize, k_min: usize) -> usize {
    let ratio = ((w - w_min) / (w_max - w_min)).clamp(0.0, 1.0);
    let k = k_min as f64 + (k_max as f64 - k_min as f64) * ratio;
    (k.round() as usize).clamp(k_min, k_max)
}

/// Linear acceleration coefficient schedules over the run: the cognitive
/// coefficient decays from `c1_start` to `c1_end` while the social one
/// rises from `c2_start` to `c2_end`.
pub fn accel_coefficients(
    iteration: usize,
    max_iterations: usize,
    params: &AdpsoParams,
) -> (f64, f64) {
    let f = iteration as f64 / max_iterations.max(1) as f64;
    (
        params.c1_start + (params.c1_end - params.c1_start) * f,
        params.c2_start + (params.c2_end - params.c2_start) * f,
    )
}

const PERMS3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Dual mutation: rearrange the order values at three random positions
/// (one of the six arrangements picked uniformly), then redraw the server
/// index at `k` random positions. Workflows with fewer than three tasks
/// permute all available order slots. The input is left unmodified.
pub fn dual_mutation<R: Rng + ?Sized>(
    p: &Particle,
    k: usize,
    server_count: usize,
    rng: &mut R,
) -> Particle {
    assert!(k >= 1, "mutation count must be at least 1");
    let mut out = p.clone();
    let n = out.order.len();

    // Neighborhood mutation on order values.
    if n >= 3 {
        let mut pos = index::sample(rng, n, 3).into_vec();
        pos.sort_unstable();
        let vals = [out.order[pos[0]], out.order[pos[1]], out.order[pos[2]]];
        let perm = PERMS3[rng.gen_range(0..PERMS3.len())];
        for (slot, &take) in pos.iter().zip(perm.iter()) {
            out.order[*slot] = vals[take];
        }
    } else if n == 2 && rng.gen_range(0..2) == 1 {
        out.order.swap(0, 1);
    }

    // Adaptive multi-point mutation on server indices.
    let k = k.min(n);
    if k > 0 {
        let mut pos = index::sample(rng, n, k).into_vec();
        pos.sort_unstable();
        for slot in pos {
            out.servers[slot] = rng.gen_range(0..server_count);
        }
    }
    out
}

/// Two-point crossover: both the order and the server slot of every task
/// position in a random inclusive range `[l1, l2]` are replaced with `b`'s.
/// The parents are left unmodified.
///
/// Panics if the particles have different shapes.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &Particle, b: &Particle, rng: &mut R) -> Particle {
    assert_eq!(a.order.len(), b.order.len(), "particle shapes must match");
    assert_eq!(
        a.servers.len(),
        b.servers.len(),
        "particle shapes must match"
    );
    let n = a.order.len();
    let mut out = a.clone();
    if n == 0 {
        return out;
    }
    let p1 = rng.gen_range(0..n);
    let p2 = rng.gen_range(0..n);
    let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
    out.order[lo..=hi].copy_from_slice(&b.order[lo..=hi]);
    out.servers[lo..=hi].copy_from_slice(&b.servers[lo..=hi]);
    out
}
