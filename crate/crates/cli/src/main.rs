//! Command-line interface for the fuzzsched workflow scheduling toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fuzzsched::bench::{
    emit_outputs, load_workflow, run_experiment, Algorithm, BenchError, ExperimentConfig,
};
use fuzzsched::deadline::{deadline, heft_makespan, CrispInstance};
use fuzzsched::optimizers::AdpsoParams;
use fuzzsched::platform::{
    build_problem_instance, build_reference_platform, Bandwidths, InstanceConfig, PlatformConfig,
    Server,
};
use fuzzsched::simulator::{decode_schedule, gantt_csv, ScheduleExport};
use fuzzsched::tfn::FuzzificationParams;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "FUZZSCHED_OUT";

#[derive(Parser)]
#[command(
    name = "fuzzsched",
    about = "Cost-driven workflow scheduling on edge-cloud platforms under fuzzy time uncertainty",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one workflow and write the schedule JSON plus a Gantt CSV.
    ///
    /// Exits with a non-zero status when no deadline-respecting schedule
    /// was found.
    Schedule {
        /// Workflow file (Pegasus DAX v3 XML, or the line-oriented text format)
        dax: PathBuf,
        /// Platform configuration JSON; defaults to the reference platform
        #[arg(long)]
        platform: Option<PathBuf>,
        /// Optimizer to run
        #[arg(long, default_value = "adpso")]
        algo: Algorithm,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Iteration count
        #[arg(long, default_value_t = 1000)]
        iters: usize,
        /// Population size
        #[arg(long, default_value_t = 100)]
        pop: usize,
        /// Billing quantum in seconds
        #[arg(long)]
        quantum: Option<f64>,
        /// Output directory (falls back to $FUZZSCHED_OUT, then `.`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a full experiment campaign described by a JSON configuration.
    Bench {
        /// Experiment configuration JSON
        config: PathBuf,
    },
    /// Print the HEFT makespan and the derived deadline of a workflow.
    Deadline {
        dax: PathBuf,
        #[arg(long)]
        platform: Option<PathBuf>,
    },
    /// Check that a workflow file parses and is a well-formed DAG.
    Validate { dax: PathBuf },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

type Platform = (Vec<Server>, Bandwidths, FuzzificationParams, f64);

fn load_platform(path: &Option<PathBuf>) -> Result<Platform, BenchError> {
    match path {
        None => {
            let (servers, bw) = build_reference_platform();
            let fuzz = FuzzificationParams::new(0.85, 1.2, 1.0).expect("reference parameters");
            Ok((servers, bw, fuzz, 60.0))
        }
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| BenchError::FileNotFound {
                path: p.clone(),
                source,
            })?;
            let cfg = PlatformConfig::from_json(&text).map_err(BenchError::Platform)?;
            let quantum = cfg.quantum_seconds;
            let (servers, bw, fuzz) = cfg.resolve().map_err(BenchError::Platform)?;
            Ok((servers, bw, fuzz, quantum))
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    match cli.command {
        Command::Validate { dax } => {
            let workflow = load_workflow(&dax)?;
            println!(
                "{}: ok ({} tasks, {} edges)",
                workflow.name,
                workflow.task_count(),
                workflow.edges.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Deadline { dax, platform } => {
            let workflow = load_workflow(&dax)?;
            let (servers, bw, _, _) = load_platform(&platform)?;
            let crisp = CrispInstance::build(&workflow, &servers, &bw)?;
            let h = heft_makespan(&crisp)?;
            let d = deadline(&crisp)?;
            println!("workflow: {}", workflow.name);
            println!("heft_makespan_secs: {h}");
            println!("deadline_secs: {d}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Schedule {
            dax,
            platform,
            algo,
            seed,
            iters,
            pop,
            quantum,
            out,
        } => {
            let workflow = load_workflow(&dax)?;
            let (servers, bw, fuzz, platform_quantum) = load_platform(&platform)?;
            let quantum = quantum.unwrap_or(platform_quantum);
            let crisp = CrispInstance::build(&workflow, &servers, &bw)?;
            let d = deadline(&crisp)?;
            let icfg = InstanceConfig {
                fuzz,
                billing_quantum_secs: quantum,
                seed,
                crisp_transfer_cost: false,
            };
            let inst = build_problem_instance(&workflow, &servers, &bw, &icfg)?.with_deadline(d);
            let params = AdpsoParams::defaults(workflow.task_count(), pop, iters, seed);
            let result = algo.run(&inst, &params)?;
            let schedule = decode_schedule(&inst, &result.best_particle)
                .expect("optimizer returns a decodable particle");

            let dir = out_dir(out);
            std::fs::create_dir_all(&dir)?;
            let stem = workflow.name.clone();
            let json_path = dir.join(format!("{stem}_schedule.json"));
            std::fs::write(&json_path, ScheduleExport::new(&inst, &schedule).to_json())?;
            let gantt_path = dir.join(format!("{stem}_gantt.csv"));
            std::fs::write(&gantt_path, gantt_csv(&inst, &schedule))?;

            println!("workflow: {stem} ({} tasks)", workflow.task_count());
            println!("algorithm: {algo}");
            println!("deadline_secs: {d}");
            println!("makespan: {}", schedule.makespan);
            println!("cost: {}", schedule.total_cost);
            println!("fitness: {}", result.best_fitness.value);
            println!("feasible: {}", schedule.feasible);
            println!("schedule: {}", json_path.display());
            println!("gantt: {}", gantt_path.display());

            if schedule.feasible {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
        Command::Bench { config } => {
            let cfg = ExperimentConfig::from_json_file(&config)?;
            let started = std::time::Instant::now();
            let records = run_experiment(&cfg)?;
            emit_outputs(&records, &cfg)?;
            let feasible = records.iter().filter(|r| r.feasible).count();
            println!(
                "{} runs ({} feasible) in {:.1}s; outputs in {}",
                records.len(),
                feasible,
                started.elapsed().as_secs_f64(),
                cfg.out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
