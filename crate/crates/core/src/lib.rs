//! Deadline-constrained workflow scheduling on edge-cloud platforms under
//! time uncertainty.
//!
//! Task processing and data transfer times are triangular fuzzy numbers;
//! the scheduler searches for a task-to-server mapping whose fuzzy total
//! cost (computation billed in whole quanta plus cross-server transfer
//! fees) is minimal while the upper bound of the fuzzy completion time
//! stays within a HEFT-derived deadline.
//!
//! Crate layout:
//! - [`tfn`]: triangular fuzzy numbers, ranking, defuzzification,
//!   fuzzification of crisp estimates.
//! - [`workflow`]: DAG model, Pegasus DAX ingestion, validation.
//! - [`platform`]: servers, tier-based bandwidth classes, frozen problem
//!   instances.
//! - [`simulator`]: particle decoding into fuzzy schedules, fitness.
//! - [`optimizers`]: the adaptive discrete PSO and the PSO/GA/random
//!   search baselines.
//! - [`deadline`]: crisp HEFT makespan and the deadline rule.
//! - [`bench`]: seeded experiment campaigns, stability tables, reporting.
//! - [`fixtures`]: synthetic scientific-workflow gallery for tests and
//!   demos.

// Validation guards are written as `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod deadline;
pub mod fixtures;
pub mod optimizers;
pub mod platform;
pub mod rng;
pub mod simulator;
pub mod tfn;
pub mod workflow;

pub use bench::{run_experiment, Algorithm, ExperimentConfig, RunRecord};
pub use optimizers::{AdpsoParams, OptimizerResult};
pub use platform::{build_problem_instance, InstanceConfig, ProblemInstance};
pub use simulator::{decode_schedule, evaluate_fitness, Fitness, FuzzySchedule, Particle};
pub use tfn::{FuzzificationParams, Tfn};
pub use workflow::Workflow;
