//! Generational GA baseline: binary tournament selection, two-point
//! crossover at probability 0.8, single-point dual mutation at
//! probability 0.1, and one elite copied into every generation.

use rand::Rng;

use crate::platform::ProblemInstance;
use crate::rng::{self, tag};

use super::{
    argmin_fitness, dual_mutation, evaluate, init_population, result_from, trace_point,
    two_point_crossover, AdpsoParams, Evaluation, OptimizerError, OptimizerResult,
};

pub const GA_CROSSOVER_PROB: f64 = 0.8;
pub const GA_MUTATION_PROB: f64 = 0.1;

/// Run the GA baseline. Population size and iteration count come from the
/// shared parameter set; the mutation operator always redraws one server
/// slot.
pub fn ga_run(
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
    let best_idx = argmin_fitness(&evals);
    let mut best_particle = population[best_idx].clone();
    let mut best_eval = evals[best_idx];

    let mut trace = Vec::with_capacity(iters);
    for g in 0..iters {
        let mut gen_rng = rng::substream(seed, &[tag::GA_OPS, g as u64]);

        let elite_idx = argmin_fitness(&evals);
        let elite = population[elite_idx].clone();
        let elite_eval = evals[elite_idx];

        // Binary tournament fills the mating pool; ties keep the first
        // contender drawn.
        let mut pool = Vec::with_capacity(pop_size);
        for _ in 0..pop_size {
            let a = gen_rng.gen_range(0..pop_size);
            let b = gen_rng.gen_range(0..pop_size);
            let winner = if evals[b].fitness < evals[a].fitness {
                b
            } else {
                a
            };
            pool.push(population[winner].clone());
        }

        for pair in pool.chunks_mut(2) {
            if pair.len() == 2 && gen_rng.gen_range(0.0..1.0) < GA_CROSSOVER_PROB {
                let first = two_point_crossover(&pair[0], &pair[1], &mut gen_rng);
                let second = two_point_crossover(&pair[1], &pair[0], &mut gen_rng);
                pair[0] = first;
                pair[1] = second;
            }
        }

        for ind in &mut pool {
            if gen_rng.gen_range(0.0..1.0) < GA_MUTATION_PROB {
                *ind = dual_mutation(ind, 1, inst.server_count(), &mut gen_rng);
            }
        }

        let mut pool_evals = Vec::with_capacity(pop_size);
        for p in &pool {
            pool_evals.push(evaluate(inst, p)?);
        }

        // Elitism: the previous elite replaces the worst child.
        let mut worst = 0;
        for i in 1..pool_evals.len() {
            if pool_evals[i].fitness >= pool_evals[worst].fitness {
                worst = i;
            }
        }
        pool[worst] = elite;
        pool_evals[worst] = elite_eval;

        population = pool;
        evals = pool_evals;

        let best_idx = argmin_fitness(&evals);
        if evals[best_idx].fitness < best_eval.fitness {
            best_particle = population[best_idx].clone();
            best_eval = evals[best_idx];
        }
        trace.push(trace_point(eta, &best_eval));
    }

    Ok(result_from(best_particle, best_eval, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::{build_problem_instance, build_reference_platform, InstanceConfig};
    use crate::tfn::FuzzificationParams;
    use crate::workflow::parse_fixture_text;

    fn instance(seed: u64) -> ProblemInstance {
        let w = parse_fixture_text(
            "task a 30\ntask b 45\ntask c 25\ntask d 60\n\
             edge a c 4000000\nedge b c 2500000\nedge c d 1000000\n",
        )
        .unwrap();
        let (servers, bw) = build_reference_platform();
        let cfg = InstanceConfig {
            fuzz: FuzzificationParams::new(0.85, 1.2, 1.0).unwrap(),
            billing_quantum_secs: 60.0,
            seed,
            crisp_transfer_cost: false,
        };
        build_problem_instance(&w, &servers, &bw, &cfg)
            .unwrap()
            .with_deadline(2500.0)
    }

    #[test]
    fn elite_fitness_never_worsens() {
        let inst = instance(1);
        let params = AdpsoParams::defaults(inst.task_count(), 14, 30, 4);
        let res = ga_run(&inst, &params).unwrap();
        assert_eq!(res.trace.len(), 30);
        for pair in res.trace.windows(2) {
            if pair[0].feasible_found {
                assert!(pair[1].feasible_found);
                assert!(pair[1].best_cost <= pair[0].best_cost + 1e-12);
            } else if !pair[1].feasible_found {
                assert!(pair[1].best_upper_time <= pair[0].best_upper_time + 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_reproduces_run() {
        let inst = instance(6);
        let params = AdpsoParams::defaults(inst.task_count(), 10, 15, 12);
        let a = ga_run(&inst, &params).unwrap();
        let b = ga_run(&inst, &params).unwrap();
        assert_eq!(a.best_particle, b.best_particle);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn best_matches_fresh_decode() {
        let inst = instance(9);
        let params = AdpsoParams::defaults(inst.task_count(), 8, 12, 3);
        let res = ga_run(&inst, &params).unwrap();
        let again = evaluate(&inst, &res.best_particle).unwrap();
        assert_eq!(res.best_fitness, again.fitness);
    }
}
