use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use kwcseg::experiment::{run_experiment, ExperimentName, ExperimentSpec, RunRecord, SUMMARY_FILE};
use kwcseg::run::{self, RunPlan};
use kwcseg::{generate_signal, io, plot, HarnessError, SignalSpec};
use kwcseg_core::exact::{
    critical_lambda, energy_of_m, equal_jump_verdict, jump_bounds, transition_lambda,
};
use kwcseg_core::flow::FlowParams;
use kwcseg_core::kernel::{check_conditions, derive_constants, DEFAULT_GRID_RESOLUTION};
use kwcseg_core::oracle::{self, OracleProblem};
use kwcseg_core::JumpKernel;
use serde::Deserialize;

/// Numerics and experiments for KWC-type total variation segmentation of 1D signals.
#[derive(Parser)]
#[command(name = "kwcseg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form results for linear data.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Brute-force global minimizer over piecewise-constant functions.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Gradient-flow solvers.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Runs a named experiment.
    Experiment(ExperimentArgs),
    /// Re-renders the SVG plots of an experiment directory.
    Plot {
        /// Experiment directory containing summary.json.
        dir: PathBuf,
    },
    /// Derived constants and sampled condition verdicts of a kernel.
    CheckKernel(CheckKernelArgs),
}

#[derive(Args)]
struct KernelArgs {
    /// Kernel kind: kwc, linear or potts.
    #[arg(long, default_value = "kwc")]
    kind: String,
    /// Parameter of the rational kernel ρ/(1+κρ).
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Height of the Potts kernel.
    #[arg(long, default_value_t = 1.0)]
    height: f64,
}

impl KernelArgs {
    fn kernel(&self) -> anyhow::Result<JumpKernel> {
        let k = match self.kind.as_str() {
            "kwc" => JumpKernel::kwc(self.kappa)?,
            "linear" => JumpKernel::Linear,
            "potts" => JumpKernel::potts(self.height)?,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown kernel kind `{other}` (expected kwc, linear or potts)"
                ))
                .into())
            }
        };
        Ok(k)
    }
}

#[derive(Subcommand)]
enum ExactCommand {
    /// The weight at which one and two jumps cost the same on (0, L).
    CriticalLambda {
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
    },
    /// The weight at which m and m+1 jumps cost the same.
    Transition {
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
    },
    /// CSV table `m,E` of the staircase energy per unit length.
    EnergyTable {
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 10)]
        m_max: usize,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Jump-count bounds on (a, b).
    Bounds {
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long)]
        lambda: f64,
        /// Oscillation bound of the data.
        #[arg(long = "M")]
        range: f64,
        #[command(flatten)]
        kernel: KernelArgs,
    },
    /// Whether two adjacent jumps over linear data are forced to be equal.
    EqualJumps {
        /// Half-width of the cell.
        #[arg(long)]
        c: f64,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        kernel: KernelArgs,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Solves the problem described by a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Restrict to exactly this many jumps.
        #[arg(long)]
        jumps: Option<usize>,
        /// Write the result here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Runs one flow; writes trace.csv, final.csv and result.json into the output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    name: ExperimentName,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to runs/<name>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON experiment spec whose fields override the named defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CheckKernelArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long = "M", default_value_t = 1.0)]
    range: f64,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
}

fn default_threshold() -> f64 {
    1e-2
}

/// Input of `flow run`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowRunConfig {
    params: FlowParams,
    data: SignalSpec,
    /// Initial `u`; the data itself when absent.
    #[serde(default)]
    initial: Option<SignalSpec>,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_threshold")]
    census_threshold: f64,
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn exact(cmd: ExactCommand) -> anyhow::Result<()> {
    match cmd {
        ExactCommand::CriticalLambda { length } => print_json(&critical_lambda(length)?),
        ExactCommand::Transition { length, m, kappa } => print_json(&serde_json::json!({
            "L": length,
            "m": m,
            "kappa": kappa,
            "lambda": transition_lambda(length, m, kappa)?,
        })),
        ExactCommand::EnergyTable {
            length,
            lambda,
            m_max,
            kernel,
        } => {
            let kernel = kernel.kernel()?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["m", "E"])?;
            for m in 1..=m_max {
                let e = energy_of_m(length, m, lambda, &kernel)?;
                w.write_record([m.to_string(), e.to_string()])?;
            }
            w.flush()?;
            Ok(())
        }
        ExactCommand::Bounds {
            a,
            b,
            lambda,
            range,
            kernel,
        } => print_json(&jump_bounds(&kernel.kernel()?, a, b, lambda, range)?),
        ExactCommand::EqualJumps { c, lambda, kernel } => {
            print_json(&equal_jump_verdict(&kernel.kernel()?, c, lambda)?)
        }
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        HarnessError::Config(format!("{}: {e}", path.display())).into()
    })
}

fn oracle_solve(config: &Path, jumps: Option<usize>, out: Option<&Path>) -> anyhow::Result<()> {
    let problem: OracleProblem = read_config(config)?;
    let result = match jumps {
        Some(m) => oracle::best_with_m_jumps(&problem, m)?,
        None => oracle::solve(&problem)?,
    };
    match out {
        Some(path) => Ok(io::write_json(path, &result)?),
        None => print_json(&result),
    }
}

fn flow_run(config: &Path, out: &Path) -> anyhow::Result<()> {
    let cfg: FlowRunConfig = read_config(config)?;
    cfg.params.validate()?;
    let g = generate_signal(&cfg.data, cfg.params.n, cfg.seed)?;
    let u0 = match &cfg.initial {
        Some(spec) => generate_signal(spec, cfg.params.n, cfg.seed)?,
        None => g.clone(),
    };
    let data = cfg.data.data_function(&g)?;
    let plan = RunPlan {
        label: String::new(),
        params: cfg.params,
        u0,
    };
    io::create_dir(out)?;
    let result = run::execute(out, &plan, &g, &data, cfg.census_threshold)?;
    eprintln!(
        "steady: {}, steps: {}, jumps: {}",
        result.steady,
        result.steps,
        result.census.jumps.len()
    );
    Ok(())
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let mut spec = match &args.config {
        Some(path) => {
            let spec: ExperimentSpec = read_config(path)?;
            if spec.name != args.name {
                return Err(HarnessError::Config(format!(
                    "config is for {}, not {}",
                    spec.name.as_str(),
                    args.name.as_str()
                ))
                .into());
            }
            spec
        }
        None => ExperimentSpec::named(args.name),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from("runs").join(args.name.as_str()));
    let record = run_experiment(&spec, &out)?;
    plot::plot(&record, &out)?;
    for c in &record.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    eprintln!("summary: {}", out.join(SUMMARY_FILE).display());
    record.check_bounds()?;
    Ok(())
}

fn replot(dir: &Path) -> anyhow::Result<()> {
    let record: RunRecord = io::read_json(&dir.join(SUMMARY_FILE))?;
    for path in plot::plot(&record, dir)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn check_kernel(args: CheckKernelArgs) -> anyhow::Result<()> {
    let kernel = args.kernel.kernel()?;
    let report = check_conditions(&kernel, args.range, args.samples)?;
    let constants = match derive_constants(&kernel, args.range, DEFAULT_GRID_RESOLUTION) {
        Ok(c) => serde_json::to_value(c)?,
        Err(kwcseg_core::Error::ConditionK2Fails { infimum, .. }) => serde_json::json!({
            "error": "condition (K2) fails",
            "infimum": infimum,
        }),
        Err(e) => return Err(e.into()),
    };
    print_json(&serde_json::json!({ "conditions": report, "constants": constants }))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(h) = err.downcast_ref::<HarnessError>() {
        return h.exit_code() as u8;
    }
    if let Some(e) = err.downcast_ref::<kwcseg_core::Error>() {
        return kwcseg::error::core_exit_code(e) as u8;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Exact(cmd) => exact(cmd),
        Command::Oracle(OracleCommand::Solve { config, jumps, out }) => {
            oracle_solve(&config, jumps, out.as_deref())
        }
        Command::Flow(FlowCommand::Run { config, out }) => flow_run(&config, &out),
        Command::Experiment(args) => experiment(args),
        Command::Plot { dir } => replot(&dir),
        Command::CheckKernel(args) => check_kernel(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
