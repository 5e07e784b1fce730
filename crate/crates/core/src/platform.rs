//! Edge-cloud infrastructure model and problem instance construction.
//!
//! Servers have a processing capacity relative to a reference server, a
//! billing rate, a billing quantum, and a tier (cloud or edge). Bandwidth
//! and transfer pricing are classes over tier pairs. A [`ProblemInstance`]
//! freezes one fuzzification realization of every processing time,
//! transfer time, and transfer cost, so fitness evaluation is a pure
//! function of the particle.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, tag};
use crate::tfn::{FuzzificationParams, Tfn, TfnError};
use crate::workflow::{Workflow, WorkflowError};

pub const MB: f64 = 1e6;
pub const GB: f64 = 1e9;

#[derive(Debug, Error)]
pub enum PlatformError {
    #[error("invalid platform configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Tfn(#[from] TfnError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Cloud,
    Edge,
}

/// A compute node. `capacity_ratio` is relative to the reference server:
/// a task's crisp processing time is `reference_runtime / capacity_ratio`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub index: usize,
    pub tier: Tier,
    pub capacity_ratio: f64,
    pub cost_per_hour: f64,
    pub billing_quantum_secs: f64,
}

/// Bandwidth and transfer pricing between two tiers (unordered pair).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthClass {
    pub tiers: (Tier, Tier),
    pub mb_per_sec: f64,
    pub dollars_per_gb: f64,
}

/// The three unordered tier pairs, used to index cached transfer tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TierPair {
    CloudCloud = 0,
    CloudEdge = 1,
    EdgeEdge = 2,
}

impl TierPair {
    pub fn of(a: Tier, b: Tier) -> TierPair {
        match (a, b) {
            (Tier::Cloud, Tier::Cloud) => TierPair::CloudCloud,
            (Tier::Edge, Tier::Edge) => TierPair::EdgeEdge,
            _ => TierPair::CloudEdge,
        }
    }

    pub const ALL: [TierPair; 3] = [
        TierPair::CloudCloud,
        TierPair::CloudEdge,
        TierPair::EdgeEdge,
    ];
}

/// Resolved per-tier-pair link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bandwidths {
    classes: [BandwidthClass; 3],
}

impl Bandwidths {
    pub fn from_classes(classes: &[BandwidthClass]) -> Result<Self, PlatformError> {
        let mut slots: [Option<BandwidthClass>; 3] = [None; 3];
        for c in classes {
            if !(c.mb_per_sec > 0.0) {
                return Err(PlatformError::BadConfig(format!(
                    "bandwidth rate must be positive, got {}",
                    c.mb_per_sec
                )));
            }
            if !(c.dollars_per_gb >= 0.0) {
                return Err(PlatformError::BadConfig(format!(
                    "transfer cost must be non-negative, got {}",
                    c.dollars_per_gb
                )));
            }
            let pair = TierPair::of(c.tiers.0, c.tiers.1);
            if slots[pair as usize].replace(*c).is_some() {
                return Err(PlatformError::BadConfig(format!(
                    "duplicate bandwidth class {pair:?}"
                )));
            }
        }
        let classes = [
            slots[0].ok_or_else(|| PlatformError::BadConfig("missing cloud-cloud class".into()))?,
            slots[1].ok_or_else(|| PlatformError::BadConfig("missing cloud-edge class".into()))?,
            slots[2].ok_or_else(|| PlatformError::BadConfig("missing edge-edge class".into()))?,
        ];
        Ok(Bandwidths { classes })
    }

    pub fn class(&self, a: Tier, b: Tier) -> &BandwidthClass {
        &self.classes[TierPair::of(a, b) as usize]
    }

    pub fn class_of_pair(&self, pair: TierPair) -> &BandwidthClass {
        &self.classes[pair as usize]
    }
}

/// Crisp seconds to ship `size_bytes` over a link class; zero bytes take
/// zero time. Sizes are bytes internally; the class rate is MB/s with
/// MB = 1e6 bytes.
pub fn transfer_time_crisp(size_bytes: u64, class: &BandwidthClass) -> f64 {
    (size_bytes as f64 / MB) / class.mb_per_sec
}

/// The documented default platform: three cloud servers at capacity ratios
/// 1/2, 1/4, and 1 (the reference, 15.5 $/h, with costs proportional to
/// capacity) plus two edge servers at 1/8 and 1/10.
pub fn build_reference_platform() -> (Vec<Server>, Bandwidths) {
    let specs: [(Tier, f64); 5] = [
        (Tier::Cloud, 0.5),
        (Tier::Cloud, 0.25),
        (Tier::Cloud, 1.0),
        (Tier::Edge, 0.125),
        (Tier::Edge, 0.1),
    ];
    let servers = specs
        .iter()
        .enumerate()
        .map(|(index, &(tier, capacity_ratio))| Server {
            index,
            tier,
            capacity_ratio,
            cost_per_hour: 15.5 * capacity_ratio,
            billing_quantum_secs: 60.0,
        })
        .collect();
    let bandwidths = Bandwidths::from_classes(&[
        BandwidthClass {
            tiers: (Tier::Cloud, Tier::Cloud),
            mb_per_sec: 2.5,
            dollars_per_gb: 0.4,
        },
        BandwidthClass {
            tiers: (Tier::Cloud, Tier::Edge),
            mb_per_sec: 1.0,
            dollars_per_gb: 0.16,
        },
        BandwidthClass {
            tiers: (Tier::Edge, Tier::Edge),
            mb_per_sec: 12.5,
            dollars_per_gb: 0.8,
        },
    ])
    .expect("reference platform is well formed");
    (servers, bandwidths)
}

/// Construction options for [`build_problem_instance`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceConfig {
    pub fuzz: FuzzificationParams,
    pub billing_quantum_secs: f64,
    pub seed: u64,
    /// Keep transfer costs crisp instead of fuzzifying them; useful for
    /// sensitivity studies.
    pub crisp_transfer_cost: bool,
}

/// One frozen scheduling problem: a workflow, a platform, and cached fuzzy
/// tables for every processing time, transfer time, and transfer cost.
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub workflow: Workflow,
    pub servers: Vec<Server>,
    pub bandwidths: Bandwidths,
    pub fuzz: FuzzificationParams,
    pub seed: u64,
    /// Fuzzy completion-time bound; infinity means unconstrained until the
    /// deadline derivation fills it in.
    pub deadline_secs: f64,
    /// `proc_time[task][server]`
    proc_time: Vec<Vec<Tfn>>,
    /// `transfer_time[edge][tier pair]`; same-server transfers are zero.
    transfer_time: Vec<[Tfn; 3]>,
    /// `transfer_cost[edge][tier pair]`; same-server transfers cost nothing.
    transfer_cost: Vec<[Tfn; 3]>,
    /// Parent adjacency `(parent, edge index)` per task.
    parents: Vec<Vec<(usize, usize)>>,
    /// Child adjacency `(child, edge index)` per task.
    children: Vec<Vec<(usize, usize)>>,
}

impl ProblemInstance {
    pub fn task_count(&self) -> usize {
        self.workflow.task_count()
    }

    pub fn server_count(&self) -> usize {
        self.servers.len()
    }

    pub fn with_deadline(mut self, deadline_secs: f64) -> Self {
        self.deadline_secs = deadline_secs;
        self
    }

    /// Fuzzy processing time of `task` on `server`.
    pub fn proc_time(&self, task: usize, server: usize) -> Tfn {
        self.proc_time[task][server]
    }

    /// Fuzzy transfer time of `edge` between two placed servers; exactly
    /// zero when both endpoints share a server.
    pub fn transfer_time(&self, edge: usize, from_server: usize, to_server: usize) -> Tfn {
        if from_server == to_server {
            return Tfn::ZERO;
        }
        let pair = TierPair::of(self.servers[from_server].tier, self.servers[to_server].tier);
        self.transfer_time[edge][pair as usize]
    }

    /// Fuzzy transfer cost of `edge` between two placed servers; zero on a
    /// shared server.
    pub fn transfer_cost(&self, edge: usize, from_server: usize, to_server: usize) -> Tfn {
        if from_server == to_server {
            return Tfn::ZERO;
        }
        let pair = TierPair::of(self.servers[from_server].tier, self.servers[to_server].tier);
        self.transfer_cost[edge][pair as usize]
    }

    pub fn parents(&self) -> &[Vec<(usize, usize)>] {
        &self.parents
    }

    pub fn children(&self) -> &[Vec<(usize, usize)>] {
        &self.children
    }
}

/// Freeze one fuzzification realization of the whole problem.
///
/// Crisp values are derived first (`reference_runtime / capacity_ratio`
/// for processing, dataset size over the class rate for transfers, size in
/// GB times the class price for costs) and then fuzzified once, in a fixed
/// table order, from a substream of `cfg.seed`. The deadline is left
/// unconstrained; derive it separately and attach with `with_deadline`.
pub fn build_problem_instance(
    workflow: &Workflow,
    servers: &[Server],
    bandwidths: &Bandwidths,
    cfg: &InstanceConfig,
) -> Result<ProblemInstance, PlatformError> {
    workflow.validate()?;
    if servers.is_empty() {
        return Err(PlatformError::BadConfig("need at least one server".into()));
    }
    for s in servers {
        if !(s.capacity_ratio > 0.0) {
            return Err(PlatformError::BadConfig(format!(
                "server {} capacity ratio must be positive",
                s.index
            )));
        }
        if !(s.cost_per_hour >= 0.0) {
            return Err(PlatformError::BadConfig(format!(
                "server {} cost must be non-negative",
                s.index
            )));
        }
    }
    if !(cfg.billing_quantum_secs > 0.0) {
        return Err(PlatformError::BadConfig(
            "billing quantum must be positive".into(),
        ));
    }
    let servers: Vec<Server> = servers
        .iter()
        .enumerate()
        .map(|(index, s)| Server {
            index,
            billing_quantum_secs: cfg.billing_quantum_secs,
            ..s.clone()
        })
        .collect();

    let mut rng = rng::substream(cfg.seed, &[tag::INSTANCE_FUZZ]);
    let proc_time = workflow
        .tasks
        .iter()
        .map(|t| {
            servers
                .iter()
                .map(|s| {
                    cfg.fuzz
                        .fuzzify(t.reference_runtime / s.capacity_ratio, &mut rng)
                })
                .collect()
        })
        .collect();

    let mut transfer_time = Vec::with_capacity(workflow.edges.len());
    let mut transfer_cost = Vec::with_capacity(workflow.edges.len());
    for e in &workflow.edges {
        let mut times = [Tfn::ZERO; 3];
        let mut costs = [Tfn::ZERO; 3];
        for pair in TierPair::ALL {
            let class = bandwidths.class_of_pair(pair);
            let crisp_time = transfer_time_crisp(e.size_bytes, class);
            times[pair as usize] = cfg.fuzz.fuzzify(crisp_time, &mut rng);
            let crisp_cost = (e.size_bytes as f64 / GB) * class.dollars_per_gb;
            costs[pair as usize] = if cfg.crisp_transfer_cost {
                // Consume the draws anyway so the flag does not shift the
                // processing-time realization.
                let _ = cfg.fuzz.fuzzify(crisp_cost, &mut rng);
                Tfn::crisp(crisp_cost)
            } else {
                cfg.fuzz.fuzzify(crisp_cost, &mut rng)
            };
        }
        transfer_time.push(times);
        transfer_cost.push(costs);
    }

    Ok(ProblemInstance {
        parents: workflow.parents(),
        children: workflow.children(),
        workflow: workflow.clone(),
        servers,
        bandwidths: *bandwidths,
        fuzz: cfg.fuzz,
        seed: cfg.seed,
        deadline_secs: f64::INFINITY,
        proc_time,
        transfer_time,
        transfer_cost,
    })
}

/// Platform description as read from a JSON configuration file. The
/// reference platform is the documented default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlatformConfig {
    pub servers: Vec<ServerSpec>,
    pub bandwidth_classes: Vec<BandwidthClassSpec>,
    pub fuzzification: FuzzificationSpec,
    pub quantum_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ServerSpec {
    pub id: usize,
    pub tier: Tier,
    pub capacity_ratio: f64,
    pub cost_per_hour: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BandwidthClassSpec {
    pub tiers: (Tier, Tier),
    pub mb_per_sec: f64,
    #[serde(rename = "dollarsPerGB")]
    pub dollars_per_gb: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzificationSpec {
    pub delta1: f64,
    pub delta2: f64,
    pub eta: f64,
}

impl PlatformConfig {
    /// The reference platform rendered as a configuration value.
    pub fn reference() -> Self {
        let (servers, _) = build_reference_platform();
        PlatformConfig {
            servers: servers
                .iter()
                .map(|s| ServerSpec {
                    id: s.index,
                    tier: s.tier,
                    capacity_ratio: s.capacity_ratio,
                    cost_per_hour: s.cost_per_hour,
                })
                .collect(),
            bandwidth_classes: vec![
                BandwidthClassSpec {
                    tiers: (Tier::Cloud, Tier::Cloud),
                    mb_per_sec: 2.5,
                    dollars_per_gb: 0.4,
                },
                BandwidthClassSpec {
                    tiers: (Tier::Cloud, Tier::Edge),
                    mb_per_sec: 1.0,
                    dollars_per_gb: 0.16,
                },
                BandwidthClassSpec {
                    tiers: (Tier::Edge, Tier::Edge),
                    mb_per_sec: 12.5,
                    dollars_per_gb: 0.8,
                },
            ],
            fuzzification: FuzzificationSpec {
                delta1: 0.85,
                delta2: 1.2,
                eta: 1.0,
            },
            quantum_seconds: 60.0,
        }
    }

    pub fn from_json(json: &str) -> Result<Self, PlatformError> {
        serde_json::from_str(json).map_err(|e| PlatformError::BadConfig(e.to_string()))
    }

    /// Resolve the configuration into servers plus bandwidth classes,
    /// ordered by server id.
    pub fn resolve(&self) -> Result<(Vec<Server>, Bandwidths, FuzzificationParams), PlatformError> {
        let mut specs = self.servers.clone();
        specs.sort_by_key(|s| s.id);
        let servers = specs
            .iter()
            .enumerate()
            .map(|(index, s)| Server {
                index,
                tier: s.tier,
                capacity_ratio: s.capacity_ratio,
                cost_per_hour: s.cost_per_hour,
                billing_quantum_secs: self.quantum_seconds,
            })
            .collect();
        let classes: Vec<BandwidthClass> = self
            .bandwidth_classes
            .iter()
            .map(|c| BandwidthClass {
                tiers: c.tiers,
                mb_per_sec: c.mb_per_sec,
                dollars_per_gb: c.dollars_per_gb,
            })
            .collect();
        let bandwidths = Bandwidths::from_classes(&classes)?;
        let fuzz = FuzzificationParams::new(
            self.fuzzification.delta1,
            self.fuzzification.delta2,
            self.fuzzification.eta,
        )?;
        Ok((servers, bandwidths, fuzz))
    }
}
