//! Decode particles into fuzzy schedules and score them.
//!
//! A particle assigns every task an order value and a server. Decoding
//! replays the workflow as an event-driven simulation over fuzzy time:
//! a task enters its server's pending queue once all of its parents have
//! finished, each idle server picks the pending task with the largest
//! order value (ties go to the earlier queue entry), and the task starts
//! at the fuzzy max of its data readiness and the server's availability.
//! The decoder then prices server busy spans in whole billing quanta and
//! adds cross-server transfer costs.

use serde::Serialize;
use thiserror::Error;

use crate::platform::ProblemInstance;
use crate::tfn::Tfn;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("particle shape {orders} orders / {servers} servers does not match |V|={tasks}, |S|={server_count}")]
    ShapeMismatch {
        orders: usize,
        servers: usize,
        tasks: usize,
        server_count: usize,
    },
}

/// Candidate solution: one `(order value, server)` pair per task.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub order: Vec<f64>,
    pub servers: Vec<usize>,
}

impl Particle {
    pub fn task_count(&self) -> usize {
        self.order.len()
    }

    /// Number of differing encoding slots against `other`, counted over
    /// all `2|V|` slots (order and server separately).
    pub fn divergence(&self, other: &Particle) -> usize {
        self.order
            .iter()
            .zip(&other.order)
            .filter(|(a, b)| a != b)
            .count()
            + self
                .servers
                .iter()
                .zip(&other.servers)
                .filter(|(a, b)| a != b)
                .count()
    }

    fn check_shape(&self, inst: &ProblemInstance) -> Result<(), SimError> {
        let ok = self.order.len() == inst.task_count()
            && self.servers.len() == inst.task_count()
            && self.servers.iter().all(|&s| s < inst.server_count())
            && self.order.iter().all(|o| o.is_finite());
        if ok {
            Ok(())
        } else {
            Err(SimError::ShapeMismatch {
                orders: self.order.len(),
                servers: self.servers.len(),
                tasks: inst.task_count(),
                server_count: inst.server_count(),
            })
        }
    }
}

/// Busy interval of a server that executed at least one task. `booted` is
/// when the server came up (the readiness of its first task, or zero for
/// an entry task); `shutdown` is the componentwise latest task end.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BusyInterval {
    pub booted: Tfn,
    pub shutdown: Tfn,
}

/// A decoded schedule with fuzzy timing, pricing, and feasibility.
#[derive(Debug, Clone)]
pub struct FuzzySchedule {
    /// Task to server mapping.
    pub assignment: Vec<usize>,
    pub start: Vec<Tfn>,
    pub end: Vec<Tfn>,
    /// Busy interval per server; `None` when unused.
    pub busy: Vec<Option<BusyInterval>>,
    pub makespan: Tfn,
    pub compute_cost: Tfn,
    pub transfer_cost: Tfn,
    pub total_cost: Tfn,
    pub feasible: bool,
}

/// Scalar score of a schedule: defuzzified total cost when the deadline is
/// met, otherwise the upper completion time. Any feasible score beats any
/// infeasible one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub feasible: bool,
    pub value: f64,
}

impl Eq for Fitness {}

impl Ord for Fitness {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self.feasible, other.feasible) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            _ => self.value.total_cmp(&other.value),
        }
    }
}

impl PartialOrd for Fitness {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Score a decoded schedule.
pub fn fitness_of_schedule(schedule: &FuzzySchedule, eta: f64) -> Fitness {
    if schedule.feasible {
        Fitness {
            feasible: true,
            value: schedule.total_cost.defuzzify(eta),
        }
    } else {
        Fitness {
            feasible: false,
            value: schedule.makespan.upper(),
        }
    }
}

/// Decode a particle and score it in one step.
pub fn evaluate_fitness(inst: &ProblemInstance, particle: &Particle) -> Result<Fitness, SimError> {
    Ok(fitness_of_schedule(
        &decode_schedule(inst, particle)?,
        inst.fuzz.eta,
    ))
}

/// Replay the workflow under the particle's assignment and ordering.
pub fn decode_schedule(
    inst: &ProblemInstance,
    particle: &Particle,
) -> Result<FuzzySchedule, SimError> {
    particle.check_shape(inst)?;
    let n = inst.task_count();
    let s_count = inst.server_count();
    let parents = inst.parents();
    let children = inst.children();

    let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
    // Pending queue per server: (task, queue entry sequence number).
    let mut pending: Vec<Vec<(usize, u64)>> = vec![Vec::new(); s_count];
    let mut seq: u64 = 0;
    let mut ready: Vec<Tfn> = vec![Tfn::ZERO; n];
    let mut start: Vec<Tfn> = vec![Tfn::ZERO; n];
    let mut end: Vec<Tfn> = vec![Tfn::ZERO; n];
    let mut done: Vec<bool> = vec![false; n];
    // Per server: task currently executing.
    let mut running: Vec<Option<usize>> = vec![None; s_count];
    // Availability: end time of the last task the server started.
    let mut available: Vec<Tfn> = vec![Tfn::ZERO; s_count];
    let mut booted: Vec<Option<Tfn>> = vec![None; s_count];
    // Componentwise-latest end per server, for billing.
    let mut latest_end: Vec<Tfn> = vec![Tfn::ZERO; s_count];
    let mut completed = 0usize;

    for t in 0..n {
        if indegree[t] == 0 {
            pending[particle.servers[t]].push((t, seq));
            seq += 1;
        }
    }

    // Every idle server with pending work starts its best candidate:
    // largest order value first, earlier queue entry on ties.
    let start_idle = |pending: &mut Vec<Vec<(usize, u64)>>,
                      running: &mut Vec<Option<usize>>,
                      available: &mut Vec<Tfn>,
                      booted: &mut Vec<Option<Tfn>>,
                      start: &mut Vec<Tfn>,
                      end: &mut Vec<Tfn>,
                      ready: &Vec<Tfn>| {
        for srv in 0..s_count {
            if running[srv].is_some() || pending[srv].is_empty() {
                continue;
            }
            let best = pending[srv]
                .iter()
                .enumerate()
                .max_by(|(_, (ta, sa)), (_, (tb, sb))| {
                    particle.order[*ta]
                        .total_cmp(&particle.order[*tb])
                        .then_with(|| sb.cmp(sa))
                })
                .map(|(pos, _)| pos)
                .unwrap();
            let (task, _) = pending[srv].remove(best);
            if booted[srv].is_none() {
                booted[srv] = Some(ready[task]);
                available[srv] = ready[task];
            }
            let t_start = ready[task].max(available[srv]);
            let t_end = t_start + inst.proc_time(task, srv);
            start[task] = t_start;
            end[task] = t_end;
            available[srv] = t_end;
            running[srv] = Some(task);
        }
    };

    start_idle(
        &mut pending,
        &mut running,
        &mut available,
        &mut booted,
        &mut start,
        &mut end,
        &ready,
    );

    while completed < n {
        // Earliest completion among running tasks; ties by task index.
        let (srv, task) = running
            .iter()
            .enumerate()
            .filter_map(|(srv, t)| t.map(|t| (srv, t)))
            .min_by(|(_, a), (_, b)| end[*a].rank_cmp(&end[*b]).then_with(|| a.cmp(b)))
            .expect("acyclic workflow always has a running task while incomplete");
        running[srv] = None;
        done[task] = true;
        completed += 1;
        let lat = latest_end[srv];
        latest_end[srv] = Tfn::new(
            lat.lower().max(end[task].lower()),
            lat.modal().max(end[task].modal()),
            lat.upper().max(end[task].upper()),
        )
        .expect("componentwise max of valid triples is valid");

        for &(child, _) in &children[task] {
            indegree[child] -= 1;
            if indegree[child] > 0 {
                continue;
            }
            let child_srv = particle.servers[child];
            let mut max_ready = Tfn::ZERO;
            for &(p, edge) in &parents[child] {
                let arrival = end[p] + inst.transfer_time(edge, particle.servers[p], child_srv);
                max_ready = max_ready.max(arrival);
            }
            ready[child] = max_ready;
            pending[child_srv].push((child, seq));
            seq += 1;
        }

        start_idle(
            &mut pending,
            &mut running,
            &mut available,
            &mut booted,
            &mut start,
            &mut end,
            &ready,
        );
    }

    let mut makespan = Tfn::ZERO;
    for &task_end in &end {
        makespan = makespan.max(task_end);
    }

    let mut compute_cost = Tfn::ZERO;
    let mut busy = vec![None; s_count];
    for srv in 0..s_count {
        let Some(boot) = booted[srv] else { continue };
        let span = latest_end[srv]
            .sub_componentwise(boot)
            .expect("latest end dominates boot time on a used server");
        busy[srv] = Some(BusyInterval {
            booted: boot,
            shutdown: latest_end[srv],
        });
        let server = &inst.servers[srv];
        let quanta = span
            .ceil_div(server.billing_quantum_secs)
            .expect("billing quantum validated positive");
        let per_quantum = server.cost_per_hour * server.billing_quantum_secs / 3600.0;
        compute_cost = compute_cost + quanta.scale(per_quantum).expect("price is non-negative");
    }

    let mut transfer_cost = Tfn::ZERO;
    for (edge_idx, edge) in inst.workflow.edges.iter().enumerate() {
        let from_srv = particle.servers[edge.from];
        let to_srv = particle.servers[edge.to];
        if from_srv != to_srv {
            transfer_cost = transfer_cost + inst.transfer_cost(edge_idx, from_srv, to_srv);
        }
    }

    let total_cost = compute_cost + transfer_cost;
    let feasible = makespan.upper() <= inst.deadline_secs;

    Ok(FuzzySchedule {
        assignment: particle.servers.clone(),
        start,
        end,
        busy,
        makespan,
        compute_cost,
        transfer_cost,
        total_cost,
        feasible,
    })
}

/// JSON export: one record per task plus a summary block.
#[derive(Debug, Serialize)]
pub struct ScheduleExport {
    pub tasks: Vec<TaskExport>,
    pub summary: ScheduleSummary,
}

#[derive(Debug, Serialize)]
pub struct TaskExport {
    pub task: String,
    pub server: usize,
    pub start: [f64; 3],
    pub end: [f64; 3],
}

#[derive(Debug, Serialize)]
pub struct ScheduleSummary {
    pub makespan: [f64; 3],
    pub cost: [f64; 3],
    pub fitness: f64,
    pub feasible: bool,
}

fn triple(t: Tfn) -> [f64; 3] {
    [t.lower(), t.modal(), t.upper()]
}

impl ScheduleExport {
    pub fn new(inst: &ProblemInstance, schedule: &FuzzySchedule) -> Self {
        let fitness = fitness_of_schedule(schedule, inst.fuzz.eta);
        ScheduleExport {
            tasks: inst
                .workflow
                .tasks
                .iter()
                .map(|t| TaskExport {
                    task: t.id.clone(),
                    server: schedule.assignment[t.index],
                    start: triple(schedule.start[t.index]),
                    end: triple(schedule.end[t.index]),
                })
                .collect(),
            summary: ScheduleSummary {
                makespan: triple(schedule.makespan),
                cost: triple(schedule.total_cost),
                fitness: fitness.value,
                feasible: schedule.feasible,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule export serializes")
    }
}

/// Gantt-ready CSV: one row per task using modal times.
pub fn gantt_csv(inst: &ProblemInstance, schedule: &FuzzySchedule) -> String {
    let mut out = String::from("task,server,start_modal,end_modal\n");
    for t in &inst.workflow.tasks {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.id,
            schedule.assignment[t.index],
            schedule.start[t.index].modal(),
            schedule.end[t.index].modal(),
        ));
    }
    out
}
