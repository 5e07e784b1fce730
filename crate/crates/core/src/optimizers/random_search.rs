//! Random search baseline: every iteration draws a fresh population and
//! only the best particle ever seen is retained.

use crate::platform::ProblemInstance;
use crate::rng::{self, tag};

use super::{
    argmin_fitness, evaluate, init_population, result_from, trace_point, AdpsoParams, Evaluation,
    OptimizerError, OptimizerResult,
};

/// Run the random search baseline. Iterations do not interact; the trace
/// records the incumbent best after each fresh population.
pub fn rs_run(
    inst: &ProblemInstance,
    params: &AdpsoParams,
) -> Result<OptimizerResult, OptimizerError> {
    params.validate(inst.task_count())?;
    let pop_size = params.population_size;
    let iters = params.max_iterations;
    let seed = params.seed;
    let eta = inst.fuzz.eta;

    let mut best: Option<(usize, Evaluation, Vec<crate::simulator::Particle>)> = None;
    let mut trace = Vec::with_capacity(iters);
    for t in 0..iters {
        let mut draw_rng = rng::substream(seed, &[tag::RS_OPS, t as u64]);
        let population = init_population(inst, pop_size, &mut draw_rng);
        let mut evals = Vec::with_capacity(pop_size);
        for p in &population {
            evals.push(evaluate(inst, p)?);
        }
        let idx = argmin_fitness(&evals);
        let replace = match &best {
            None => true,
            Some((_, incumbent, _)) => evals[idx].fitness < incumbent.fitness,
        };
        if replace {
            best = Some((idx, evals[idx], population));
        }
        let (_, incumbent, _) = best.as_ref().unwrap();
        trace.push(trace_point(eta, incumbent));
    }

    let (idx, eval, population) = best.expect("at least one iteration ran");
    Ok(result_from(population[idx].clone(), eval, trace))
}
