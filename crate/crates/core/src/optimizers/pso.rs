//! Continuous PSO baseline on the same encoding.
//!
//! Positions and velocities live in a `2|V|`-dimensional continuous space,
//! one order slot and one server slot per task. Order slots feed the
//! decoder as-is; server slots are rounded and clamped to a valid server
//! index. The inertia weight falls linearly from `w_max` to `w_min` and
//! the acceleration coefficients follow the same schedules as the
//! adaptive variant.

use rand::Rng;

use crate::platform::ProblemInstance;
use crate::rng::{self, tag};
use crate::simulator::Particle;

use super::{
    accel_coefficients, argmin_fitness, evaluate, result_from, trace_point, AdpsoParams,
    Evaluation, OptimizerError, OptimizerResult,
};

fn decode_position(position: &[f64], n: usize, server_count: usize) -> Particle {
    let order = position[..n].to_vec();
    let servers = position[n..]
        .iter()
        .map(|&x| {
            let idx = x.round();
            if idx < 0.0 {
                0
            } else if idx >= server_count as f64 {
                server_count - 1
            } else {
                idx as usize
            }
        })
        .collect();
    Particle { order, servers }
}

/// Run the continuous PSO baseline.
pub fn pso_run(
    inst: &ProblemInstance,
    params: &AdpsoParams,
) -> Result<OptimizerResult, OptimizerError> {
    params.validate(inst.task_count())?;
    let pop_size = params.population_size;
    let iters = params.max_iterations;
    let seed = params.seed;
    let n = inst.task_count();
    let s_count = inst.server_count();
    let dims = 2 * n;
    let eta = inst.fuzz.eta;

    // Initial positions mirror the discrete initializer's ranges; initial
    // velocities are zero.
    let mut init_rng = rng::substream(seed, &[tag::POPULATION_INIT]);
    let mut positions: Vec<Vec<f64>> = (0..pop_size)
        .map(|_| {
            let mut x = Vec::with_capacity(dims);
            for _ in 0..n {
                x.push(init_rng.gen_range(0.0..n.max(1) as f64));
            }
            for _ in 0..n {
                x.push(init_rng.gen_range(0.0..s_count as f64));
            }
            x
        })
        .collect();
    let mut velocities: Vec<Vec<f64>> = vec![vec![0.0; dims]; pop_size];

    let mut evals: Vec<Evaluation> = Vec::with_capacity(pop_size);
    for x in &positions {
        evals.push(evaluate(inst, &decode_position(x, n, s_count))?);
    }
    let mut personal_best: Vec<Vec<f64>> = positions.clone();
    let mut personal_eval: Vec<Evaluation> = evals.clone();
    let best_idx = argmin_fitness(&evals);
    let mut global_best = positions[best_idx].clone();
    let mut global_eval = evals[best_idx];

    let mut trace = Vec::with_capacity(iters);
    for t in 0..iters {
        let w = params.w_max - (params.w_max - params.w_min) * t as f64 / iters as f64;
        let (c1, c2) = accel_coefficients(t, iters, params);
        let gb = global_best.clone();

        for i in 0..pop_size {
            let mut op_rng = rng::substream(seed, &[tag::PSO_OPS, t as u64, i as u64]);
            for d in 0..dims {
                let r1: f64 = op_rng.gen_range(0.0..1.0);
                let r2: f64 = op_rng.gen_range(0.0..1.0);
                velocities[i][d] = w * velocities[i][d]
                    + c1 * r1 * (personal_best[i][d] - positions[i][d])
                    + c2 * r2 * (gb[d] - positions[i][d]);
                positions[i][d] += velocities[i][d];
            }
            evals[i] = evaluate(inst, &decode_position(&positions[i], n, s_count))?;
            if evals[i].fitness < personal_eval[i].fitness {
                personal_best[i] = positions[i].clone();
                personal_eval[i] = evals[i];
            }
        }

        let best_idx = argmin_fitness(&evals);
        if evals[best_idx].fitness < global_eval.fitness {
            global_best = positions[best_idx].clone();
            global_eval = evals[best_idx];
        }
        trace.push(trace_point(eta, &global_eval));
    }

    Ok(result_from(
        decode_position(&global_best, n, s_count),
        global_eval,
        trace,
    ))
}
