//! Adaptive discrete PSO: inertia-gated dual mutation plus crossovers
//! with the personal and global best particles.

use rand::Rng;

use crate::platform::ProblemInstance;
use crate::rng::{self, tag};
use crate::simulator::Particle;

use super::{
    accel_coefficients, adaptive_inertia, argmin_fitness, dual_mutation, evaluate, init_population,
    mutation_count, result_from, trace_point, two_point_crossover, AdpsoParams, Evaluation,
    OptimizerError, OptimizerResult,
};

/// Run the adaptive discrete PSO.
///
/// Each iteration updates every particle in three gated steps: with
/// probability equal to its adaptive inertia weight it undergoes the dual
/// mutation (the mutation count also follows the weight), then with the
/// scheduled cognitive probability it crosses with its personal best, and
/// with the scheduled social probability it crosses with the global best.
/// Personal and global bests only move on strict improvement; the global
/// best is refreshed once per iteration.
pub fn adpso_run(
    inst: &ProblemInstance,
    params: &AdpsoParams,
) -> Result<OptimizerResult, OptimizerError> {
    params.validate(inst.task_count())?;
    let pop_size = params.population_size;
    let iters = params.max_iterations;
    let seed = params.seed;
    let eta = inst.fuzz.eta;

    let mut population = init_population(
        inst,
        pop_size,
        &mut rng::substream(seed, &[tag::POPULATION_INIT]),
    );
    let mut evals: Vec<Evaluation> = Vec::with_capacity(pop_size);
    for p in &population {
        evals.push(evaluate(inst, p)?);
    }

    let mut personal_best: Vec<Particle> = population.clone();
    let mut personal_eval: Vec<Evaluation> = evals.clone();
    let best_idx = argmin_fitness(&evals);
    let mut global_best = population[best_idx].clone();
    let mut global_eval = evals[best_idx];

    let mut trace = Vec::with_capacity(iters);
    for t in 0..iters {
        let (c1, c2) = accel_coefficients(t, iters, params);

        for i in 0..pop_size {
            let mut op_rng = rng::substream(seed, &[tag::ADPSO_OPS, t as u64, i as u64]);
            let w = adaptive_inertia(&population[i], &global_best, params.w_max, params.w_min);
            let r: f64 = op_rng.gen_range(0.0..1.0);
            if r < w {
                let k = mutation_count(w, params.w_max, params.w_min, params.k_max, params.k_min);
                population[i] = dual_mutation(&population[i], k, inst.server_count(), &mut op_rng);
            }
            let r1: f64 = op_rng.gen_range(0.0..1.0);
            if r1 < c1 {
                population[i] = two_point_crossover(&population[i], &personal_best[i], &mut op_rng);
            }
            let r2: f64 = op_rng.gen_range(0.0..1.0);
            if r2 < c2 {
                population[i] = two_point_crossover(&population[i], &global_best, &mut op_rng);
            }
            evals[i] = evaluate(inst, &population[i])?;
            // Bests move immediately, so later particles in the same sweep
            // already chase the refreshed incumbents.
            if evals[i].fitness < personal_eval[i].fitness {
                personal_best[i] = population[i].clone();
                personal_eval[i] = evals[i];
            }
            if evals[i].fitness < global_eval.fitness {
                global_best = population[i].clone();
                global_eval = evals[i];
            }
        }
        trace.push(trace_point(eta, &global_eval));
    }

    Ok(result_from(global_best, global_eval, trace))
}
