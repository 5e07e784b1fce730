//! Crisp HEFT list scheduler, used solely to derive workflow deadlines.
//!
//! The deadline of a workflow is 1.5 times the makespan HEFT achieves on
//! the crisp (modal) processing and transfer times: upward ranks over
//! average computation and communication costs, tasks placed in rank
//! order on the server with the earliest insertion-based finish time.

use crate::platform::{transfer_time_crisp, Bandwidths, PlatformError, Server, TierPair};
use crate::workflow::Workflow;

pub const DEADLINE_FACTOR: f64 = 1.5;

/// Crisp view of a scheduling problem: modal processing times per task and
/// server, and modal transfer times per edge and tier pair.
#[derive(Debug, Clone)]
pub struct CrispInstance {
    pub workflow: Workflow,
    pub servers: Vec<Server>,
    /// `proc[task][server]` seconds.
    pub proc: Vec<Vec<f64>>,
    /// `transfer[edge][tier pair]` seconds; same-server transfers are free.
    pub transfer: Vec<[f64; 3]>,
}

impl CrispInstance {
    pub fn build(
        workflow: &Workflow,
        servers: &[Server],
        bandwidths: &Bandwidths,
    ) -> Result<Self, PlatformError> {
        workflow.validate()?;
        if servers.is_empty() {
            return Err(PlatformError::BadConfig("need at least one server".into()));
        }
        let proc = workflow
            .tasks
            .iter()
            .map(|t| {
                servers
                    .iter()
                    .map(|s| t.reference_runtime / s.capacity_ratio)
                    .collect()
            })
            .collect();
        let transfer = workflow
            .edges
            .iter()
            .map(|e| {
                let mut row = [0.0; 3];
                for pair in TierPair::ALL {
                    row[pair as usize] =
                        transfer_time_crisp(e.size_bytes, bandwidths.class_of_pair(pair));
                }
                row
            })
            .collect();
        Ok(CrispInstance {
            workflow: workflow.clone(),
            servers: servers.to_vec(),
            proc,
            transfer,
        })
    }

    fn transfer_between(&self, edge: usize, from: usize, to: usize) -> f64 {
        if from == to {
            return 0.0;
        }
        let pair = TierPair::of(self.servers[from].tier, self.servers[to].tier);
        self.transfer[edge][pair as usize]
    }

    /// Average transfer time of an edge over all unordered pairs of
    /// distinct servers, used by the upward rank.
    fn avg_transfer(&self, edge: usize) -> f64 {
        let n = self.servers.len();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut pairs = 0usize;
        for a in 0..n {
            for b in (a + 1)..n {
                total += self.transfer_between(edge, a, b);
                pairs += 1;
            }
        }
        total / pairs as f64
    }
}

/// Makespan of the HEFT schedule on the crisp instance.
pub fn heft_makespan(inst: &CrispInstance) -> Result<f64, PlatformError> {
    let n = inst.workflow.task_count();
    if n == 0 {
        return Ok(0.0);
    }
    let order = inst.workflow.topological_order()?;
    let children = inst.workflow.children();
    let parents = inst.workflow.parents();
    let s_count = inst.servers.len();

    let avg_comp: Vec<f64> = (0..n)
        .map(|t| inst.proc[t].iter().sum::<f64>() / s_count as f64)
        .collect();

    let mut rank = vec![0.0f64; n];
    for &t in order.iter().rev() {
        let tail = children[t]
            .iter()
            .map(|&(c, e)| inst.avg_transfer(e) + rank[c])
            .fold(0.0f64, f64::max);
        rank[t] = avg_comp[t] + tail;
    }

    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by(|&a, &b| rank[b].total_cmp(&rank[a]).then_with(|| a.cmp(&b)));

    // Insertion-based placement: per server a sorted list of (start, end).
    let mut slots: Vec<Vec<(f64, f64)>> = vec![Vec::new(); s_count];
    let mut placed_server = vec![usize::MAX; n];
    let mut end_time = vec![0.0f64; n];

    for &task in &by_rank {
        let mut best: Option<(f64, f64, usize)> = None; // (eft, start, server)
        #[allow(clippy::needless_range_loop)] // srv indexes several tables
        for srv in 0..s_count {
            let ready = parents[task]
                .iter()
                .map(|&(p, e)| end_time[p] + inst.transfer_between(e, placed_server[p], srv))
                .fold(0.0f64, f64::max);
            let duration = inst.proc[task][srv];
            let start = earliest_slot(&slots[srv], ready, duration);
            let eft = start + duration;
            let better = match &best {
                None => true,
                Some((best_eft, _, _)) => eft < *best_eft,
            };
            if better {
                best = Some((eft, start, srv));
            }
        }
        let (eft, start, srv) = best.expect("at least one server");
        let pos = slots[srv].partition_point(|&(s, _)| s < start);
        slots[srv].insert(pos, (start, eft));
        placed_server[task] = srv;
        end_time[task] = eft;
    }

    Ok(end_time.iter().fold(0.0f64, |a, &b| a.max(b)))
}

/// Earliest start at or after `ready` where `duration` fits between the
/// occupied slots.
fn earliest_slot(slots: &[(f64, f64)], ready: f64, duration: f64) -> f64 {
    let mut candidate = ready;
    for &(start, end) in slots {
        if candidate + duration <= start {
            return candidate;
        }
        candidate = candidate.max(end);
    }
    candidate
}

/// Deadline rule: 1.5 times the HEFT makespan.
pub fn deadline(inst: &CrispInstance) -> Result<f64, PlatformError> {
    Ok(DEADLINE_FACTOR * heft_makespan(inst)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::platform::{build_reference_platform, BandwidthClass, Bandwidths, Tier};
    use crate::workflow::parse_fixture_text;
    use approx::assert_relative_eq;

    fn two_server_platform() -> (Vec<Server>, Bandwidths) {
        let servers = vec![
            Server {
                index: 0,
                tier: Tier::Cloud,
                capacity_ratio: 1.0,
                cost_per_hour: 1.0,
                billing_quantum_secs: 60.0,
            },
            Server {
                index: 1,
                tier: Tier::Cloud,
                capacity_ratio: 0.5,
                cost_per_hour: 1.0,
                billing_quantum_secs: 60.0,
            },
        ];
        let bw = Bandwidths::from_classes(&[
            BandwidthClass {
                tiers: (Tier::Cloud, Tier::Cloud),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.4,
            },
            BandwidthClass {
                tiers: (Tier::Cloud, Tier::Edge),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.16,
            },
            BandwidthClass {
                tiers: (Tier::Edge, Tier::Edge),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.8,
            },
        ])
        .unwrap();
        (servers, bw)
    }

    #[test]
    fn single_task_takes_the_faster_server() {
        // Runtimes 10 s and 20 s; HEFT finishes in 10 s.
        let w = parse_fixture_text("task a 10\n").unwrap();
        let (servers, bw) = two_server_platform();
        // ratio 1.0 -> 10 s on server 0; ratio 0.5 -> 20 s on server 1
        let ci = CrispInstance::build(&w, &servers, &bw).unwrap();
        assert_relative_eq!(heft_makespan(&ci).unwrap(), 10.0);
    }

    #[test]
    fn zero_size_chain_on_one_server_serializes() {
        let w = parse_fixture_text("task a 10\ntask b 20\nedge a b 0\n").unwrap();
        let (servers, bw) = two_server_platform();
        let ci = CrispInstance::build(&w, &servers[..1], &bw).unwrap();
        assert_relative_eq!(heft_makespan(&ci).unwrap(), 30.0);
    }

    /// Hand-traced diamond: ranks order the tasks a, b, c, d; a and b land
    /// on server 0, c on server 1, and d finishes on server 1 at t = 39.
    #[test]
    fn diamond_fixture_matches_manual_trace() {
        let w = parse_fixture_text(
            "task a 1\ntask b 1\ntask c 1\ntask d 1\n\
             edge a b 5000000\nedge a c 4000000\nedge b d 6000000\nedge c d 3000000\n",
        )
        .unwrap();
        let servers = vec![
            Server {
                index: 0,
                tier: Tier::Cloud,
                capacity_ratio: 1.0,
                cost_per_hour: 1.0,
                billing_quantum_secs: 60.0,
            },
            Server {
                index: 1,
                tier: Tier::Cloud,
                capacity_ratio: 1.0,
                cost_per_hour: 1.0,
                billing_quantum_secs: 60.0,
            },
        ];
        let bw = Bandwidths::from_classes(&[
            BandwidthClass {
                tiers: (Tier::Cloud, Tier::Cloud),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.4,
            },
            BandwidthClass {
                tiers: (Tier::Cloud, Tier::Edge),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.16,
            },
            BandwidthClass {
                tiers: (Tier::Edge, Tier::Edge),
                mb_per_sec: 1.0,
                dollars_per_gb: 0.8,
            },
        ])
        .unwrap();
        let mut ci = CrispInstance::build(&w, &servers, &bw).unwrap();
        // Hand-picked processing matrix for the trace.
        ci.proc = vec![
            vec![10.0, 14.0],
            vec![13.0, 19.0],
            vec![9.0, 17.0],
            vec![11.0, 8.0],
        ];
        let h = heft_makespan(&ci).unwrap();
        assert_relative_eq!(h, 39.0, epsilon = 1e-9);
        assert_relative_eq!(deadline(&ci).unwrap(), 58.5, epsilon = 1e-9);
    }

    #[test]
    fn deadline_scales_linearly() {
        let w = parse_fixture_text("task a 1000\n").unwrap();
        let (servers, bw) = two_server_platform();
        let ci = CrispInstance::build(&w, &servers, &bw).unwrap();
        assert_relative_eq!(heft_makespan(&ci).unwrap(), 1000.0);
        assert_relative_eq!(deadline(&ci).unwrap(), 1500.0);
    }

    #[test]
    fn empty_workflow_has_zero_deadline() {
        let w = Workflow {
            name: "empty".into(),
            tasks: vec![],
            edges: vec![],
        };
        let (servers, bw) = two_server_platform();
        let ci = CrispInstance::build(&w, &servers, &bw).unwrap();
        assert_eq!(deadline(&ci).unwrap(), 0.0);
    }

    #[test]
    fn makespan_bounded_by_critical_path_and_serial_time() {
        let w = parse_fixture_text(
            "task a 30\ntask b 40\ntask c 50\ntask d 20\ntask e 25\n\
             edge a b 2000000\nedge a c 1000000\nedge b d 500000\nedge c d 800000\nedge d e 0\n",
        )
        .unwrap();
        let (servers, bw) = build_reference_platform();
        let ci = CrispInstance::build(&w, &servers, &bw).unwrap();
        let h = heft_makespan(&ci).unwrap();
        // Critical path on the fastest server ignores all communication.
        let order = w.topological_order().unwrap();
        let parents = w.parents();
        let mut dist = vec![0.0f64; w.task_count()];
        for &t in &order {
            let base = parents[t]
                .iter()
                .map(|&(p, _)| dist[p])
                .fold(0.0f64, f64::max);
            dist[t] = base + w.tasks[t].reference_runtime;
        }
        let critical = dist.iter().fold(0.0f64, |a, &b| a.max(b));
        let serial: f64 = w.tasks.iter().map(|t| t.reference_runtime).sum();
        assert!(h >= critical - 1e-9, "H={h} < critical path {critical}");
        assert!(h <= serial + 1e-9, "H={h} > serial time {serial}");
    }

    #[test]
    fn insertion_fills_idle_gaps() {
        // Low-rank task slots into the gap left while a high-rank child
        // waits for its transfer.
        let slots = vec![(0.0, 10.0), (20.0, 30.0)];
        assert_eq!(earliest_slot(&slots, 0.0, 10.0), 10.0);
        assert_eq!(earliest_slot(&slots, 0.0, /*duration=*/ 12.0), 30.0);
        assert_eq!(earliest_slot(&slots, 12.0, 5.0), 12.0);
        assert_eq!(earliest_slot(&[], 7.0, 5.0), 7.0);
    }
}
