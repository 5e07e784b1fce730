//! Shared test support: an independent crisp list-scheduling simulator,
//! random crisp problem setups, and an exhaustive brute-force optimizer.
//!
//! The crisp simulator re-implements the scheduling rules from scratch on
//! plain floats (no fuzzy types) so it can serve as an oracle for the
//! fuzzy decoder's crisp degeneration.

// Each integration test target compiles this module separately and uses
// a different subset of it.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use fuzzsched::platform::{build_reference_platform, Bandwidths, ProblemInstance, Server, Tier};
use fuzzsched::simulator::{evaluate_fitness, Fitness, Particle};
use fuzzsched::workflow::{DataDependency, Task, Workflow};

/// Crisp problem data for the oracle simulator, derived directly from the
/// workflow and platform description rather than from any fuzzy table.
pub struct CrispSetup {
    pub workflow: Workflow,
    pub servers: Vec<Server>,
    pub bandwidths: Bandwidths,
}

impl CrispSetup {
    pub fn proc_time(&self, task: usize, server: usize) -> f64 {
        self.workflow.tasks[task].reference_runtime / self.servers[server].capacity_ratio
    }

    pub fn transfer_time(&self, edge: usize, from: usize, to: usize) -> f64 {
        if from == to {
            return 0.0;
        }
        let class = self
            .bandwidths
            .class(self.servers[from].tier, self.servers[to].tier);
        (self.workflow.edges[edge].size_bytes as f64 / 1e6) / class.mb_per_sec
    }
}

/// Independent crisp list scheduler: same queueing rules, plain floats.
/// Returns the makespan.
pub fn crisp_list_makespan(setup: &CrispSetup, order: &[f64], servers: &[usize]) -> f64 {
    let n = setup.workflow.task_count();
    let s_count = setup.servers.len();
    let parents = setup.workflow.parents();
    let children = setup.workflow.children();

    let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    let mut pending: Vec<Vec<(usize, u64)>> = vec![Vec::new(); s_count];
    let mut seq = 0u64;
    let mut ready = vec![0.0f64; n];
    let mut end = vec![0.0f64; n];
    let mut running: Vec<Option<usize>> = vec![None; s_count];
    let mut available = vec![0.0f64; s_count];
    let mut used = vec![false; s_count];
    let mut completed = 0usize;

    for t in 0..n {
        if indegree[t] == 0 {
            pending[servers[t]].push((t, seq));
            seq += 1;
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn start_idle(
        s_count: usize,
        order: &[f64],
        pending: &mut [Vec<(usize, u64)>],
        running: &mut [Option<usize>],
        available: &mut [f64],
        used: &mut [bool],
        ready: &[f64],
        end: &mut [f64],
        proc: impl Fn(usize, usize) -> f64,
    ) {
        for srv in 0..s_count {
            if running[srv].is_some() || pending[srv].is_empty() {
                continue;
            }
            let best = pending[srv]
                .iter()
                .enumerate()
                .max_by(|(_, (ta, sa)), (_, (tb, sb))| {
                    order[*ta].total_cmp(&order[*tb]).then_with(|| sb.cmp(sa))
                })
                .map(|(pos, _)| pos)
                .unwrap();
            let (task, _) = pending[srv].remove(best);
            if !used[srv] {
                used[srv] = true;
                available[srv] = ready[task];
            }
            let start = ready[task].max(available[srv]);
            end[task] = start + proc(task, srv);
            available[srv] = end[task];
            running[srv] = Some(task);
        }
    }

    start_idle(
        s_count,
        order,
        &mut pending,
        &mut running,
        &mut available,
        &mut used,
        &ready,
        &mut end,
        |t, s| setup.proc_time(t, s),
    );

    while completed < n {
        let (srv, task) = running
            .iter()
            .enumerate()
            .filter_map(|(srv, t)| t.map(|t| (srv, t)))
            .min_by(|(_, a), (_, b)| end[*a].total_cmp(&end[*b]).then_with(|| a.cmp(b)))
            .expect("progress while tasks remain");
        running[srv] = None;
        completed += 1;
        for &(child, _) in &children[task] {
            indegree[child] -= 1;
            if indegree[child] > 0 {
                continue;
            }
            let mut max_ready = 0.0f64;
            for &(p, edge) in &parents[child] {
                let arrival = end[p] + setup.transfer_time(edge, servers[p], servers[child]);
                max_ready = max_ready.max(arrival);
            }
            ready[child] = max_ready;
            pending[servers[child]].push((child, seq));
            seq += 1;
        }
        start_idle(
            s_count,
            order,
            &mut pending,
            &mut running,
            &mut available,
            &mut used,
            &ready,
            &mut end,
            |t, s| setup.proc_time(t, s),
        );
    }

    end.iter().fold(0.0f64, |a, &b| a.max(b))
}

/// Random small DAG on a random 2-3 server platform, crisp-friendly.
/// `max_edge_mb` bounds the dataset sizes: large values make transfers
/// dominate and the fitness landscape deceptive, small values keep it
/// connected for optimizer-vs-oracle checks.
pub fn random_crisp_setup(
    rng: &mut ChaCha8Rng,
    min_tasks: usize,
    max_tasks: usize,
    max_servers: usize,
    max_edge_mb: f64,
) -> CrispSetup {
    let n = rng.gen_range(min_tasks..=max_tasks);
    let tasks = (0..n)
        .map(|i| Task {
            id: format!("t{i}"),
            index: i,
            reference_runtime: rng.gen_range(5.0..50.0f64).round(),
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_range(0.0..1.0) < 0.4 {
                edges.push(DataDependency {
                    from: i,
                    to: j,
                    size_bytes: rng.gen_range(0.0..max_edge_mb * 1e6) as u64,
                });
            }
        }
    }
    let workflow = Workflow {
        name: format!("rand{n}"),
        tasks,
        edges,
    };
    workflow.validate().unwrap();

    let s_count = rng.gen_range(2..=max_servers);
    let ratios = [1.0, 0.5, 0.25, 0.125];
    let servers = (0..s_count)
        .map(|index| {
            let ratio = ratios[rng.gen_range(0..ratios.len())];
            Server {
                index,
                tier: if rng.gen_range(0..2) == 0 {
                    Tier::Cloud
                } else {
                    Tier::Edge
                },
                capacity_ratio: ratio,
                cost_per_hour: 15.5 * ratio,
                billing_quantum_secs: 60.0,
            }
        })
        .collect();
    let (_, bandwidths) = build_reference_platform();
    CrispSetup {
        workflow,
        servers,
        bandwidths,
    }
}

/// Exhaustive optimum over every server assignment and every priority
/// permutation, evaluated through the instance under test.
pub fn brute_force_best_fitness(inst: &ProblemInstance) -> Fitness {
    let n = inst.task_count();
    let s = inst.server_count();
    let mut assignment = vec![0usize; n];
    let mut best: Option<Fitness> = None;
    loop {
        // All n! priority vectors for this assignment.
        let mut order: Vec<usize> = (0..n).collect();
        permute(&mut order, 0, &mut |perm| {
            let particle = Particle {
                order: perm.iter().map(|&r| r as f64).collect(),
                servers: assignment.clone(),
            };
            let fitness = evaluate_fitness(inst, &particle).unwrap();
            if best.is_none_or(|b| fitness < b) {
                best = Some(fitness);
            }
        });
        // Next assignment in mixed-radix order.
        let mut i = 0;
        loop {
            if i == n {
                return best.expect("non-empty search space");
            }
            assignment[i] += 1;
            if assignment[i] < s {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
