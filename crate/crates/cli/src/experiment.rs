//! Named experiment protocols.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kwcseg_core::exact::{
    critical_lambda, jump_bounds, optimal_jump_count, transition_lambda, uniform_step_minimizer,
    BoundReport,
};
use kwcseg_core::flow::{BoundaryCondition, FlowParams, Model};
use kwcseg_core::oracle::{self, OracleProblem};
use kwcseg_core::{DataFunction, GridSignal, JumpKernel, PiecewiseConstant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io;
use crate::run::{self, RunPlan, RunResult};
use crate::signal::{generate_signal, SignalSpec};

pub const DATA_FILE: &str = "data.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Largest jump count considered when picking the energy-optimal staircase.
const MAX_STAIRCASE_JUMPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    /// Linear data from a naive start and from the predicted staircase.
    #[value(name = "linear_steady", alias = "linear-steady")]
    LinearSteady,
    /// Two blended starts at the critical fidelity weight.
    #[value(name = "nonuniqueness")]
    Nonuniqueness,
    /// `sin(3πx)` under all three models.
    #[value(name = "sine_segmentation", alias = "sine-segmentation")]
    SineSegmentation,
    /// A noisy three-plateau signal under all three models.
    #[value(name = "noisy_steps", alias = "noisy-steps")]
    NoisySteps,
    /// Explicit data, models and parameters.
    #[value(name = "custom")]
    Custom,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::LinearSteady => "linear_steady",
            ExperimentName::Nonuniqueness => "nonuniqueness",
            ExperimentName::SineSegmentation => "sine_segmentation",
            ExperimentName::NoisySteps => "noisy_steps",
            ExperimentName::Custom => "custom",
        }
    }
}

/// Field-by-field overrides of [`FlowParams`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc_u: Option<BoundaryCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_gap_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_stride: Option<usize>,
}

impl FlowOverrides {
    fn apply(&self, p: &mut FlowParams) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(n, dt, sigma, epsilon, lambda, t_max, steady_tol, bc_u, cp_iters, cp_gap_tol, output_stride);
        if self.cp_tau.is_some() {
            p.cp_tau = self.cp_tau;
        }
        if self.cp_s.is_some() {
            p.cp_s = self.cp_s;
        }
    }
}

/// What to run. Named experiments fill in everything left unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<SignalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<Model>>,
    #[serde(default)]
    pub params: FlowOverrides,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub census_threshold: Option<f64>,
}

impl ExperimentSpec {
    pub fn named(name: ExperimentName) -> Self {
        Self {
            name,
            data: None,
            models: None,
            params: FlowOverrides::default(),
            seed: 0,
            census_threshold: None,
        }
    }
}

/// A structural check evaluated on the outcome, with its threshold spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Global minimizer of the discretized problem for comparison with the flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub cells: usize,
    pub levels: usize,
    pub jump_count: usize,
    pub energy: f64,
    pub minimizer: PiecewiseConstant,
    /// Jump counts of other candidates tied with the optimum.
    pub tied_jump_counts: Vec<usize>,
}

/// Everything an experiment produced; saved as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: ExperimentSpec,
    pub lambda: f64,
    pub census_threshold: f64,
    /// Data samples, relative to the experiment directory.
    pub data_file: PathBuf,
    pub runs: Vec<RunResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    /// Jump-count bounds for `K(ρ) = ρ/(1+ρ)` with `M` the data oscillation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundReport>,
    /// Whether the monotone (rather than the general) bound applies.
    pub monotone_data: bool,
    pub bound_violations: Vec<String>,
    pub checks: Vec<Check>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn run(&self, label: &str) -> Option<&RunResult> {
        self.runs.iter().find(|r| r.label == label)
    }

    /// Fails when an observed jump count exceeds the applicable bound.
    pub fn check_bounds(&self) -> Result<()> {
        if self.bound_violations.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invariant(self.bound_violations.join("; ")))
        }
    }
}

/// Fidelity weight in the middle of the window where `m` equal jumps are optimal.
pub fn staircase_lambda(m: usize) -> Result<f64> {
    let hi = transition_lambda(1.0, m, 1.0)?;
    if m == 1 {
        return Ok(0.5 * hi);
    }
    let lo = transition_lambda(1.0, m - 1, 1.0)?;
    Ok((lo * hi).sqrt())
}

/// Default staircase size of the linear experiment.
pub const LINEAR_STAIRCASE_JUMPS: usize = 3;

struct Protocol {
    data: SignalSpec,
    base: FlowParams,
    runs: Vec<RunSpec>,
    threshold: f64,
    monotone: bool,
    oracle: Option<(usize, usize, bool)>,
}

struct RunSpec {
    label: String,
    model: Model,
    start: Start,
    pre_relax: bool,
    /// Run to `t_max` without the steady-state stop.
    full_horizon: bool,
}

impl RunSpec {
    fn new(label: &str, model: Model, start: Start) -> Self {
        Self {
            label: label.into(),
            model,
            start,
            pre_relax: false,
            full_horizon: false,
        }
    }
}

#[derive(Clone, Copy)]
enum Start {
    Data,
    Staircase(usize),
    Blend(usize),
}

fn kwc_only(spec: &ExperimentSpec) -> Result<()> {
    match &spec.models {
        Some(m) if m.as_slice() != [Model::Kwc] => Err(HarnessError::Config(format!(
            "{} runs the KWC model only",
            spec.name.as_str()
        ))),
        _ => Ok(()),
    }
}

fn linear_data(spec: &ExperimentSpec) -> Result<SignalSpec> {
    match &spec.data {
        None => Ok(SignalSpec::identity()),
        Some(d) if *d == SignalSpec::identity() => Ok(d.clone()),
        Some(_) => Err(HarnessError::Config(format!(
            "{} is defined for g(x) = x only",
            spec.name.as_str()
        ))),
    }
}

fn all_models(spec: &ExperimentSpec) -> Vec<Model> {
    spec.models
        .clone()
        .unwrap_or_else(|| vec![Model::Rof, Model::At, Model::Kwc])
}

fn from_data(models: &[Model]) -> Vec<RunSpec> {
    models
        .iter()
        .map(|&m| RunSpec::new(&m.name().to_lowercase(), m, Start::Data))
        .collect()
}

fn protocol(spec: &ExperimentSpec) -> Result<Protocol> {
    let mut base = FlowParams::new(Model::Kwc, 0.0);
    let p = match spec.name {
        ExperimentName::LinearSteady => {
            kwc_only(spec)?;
            base.bc_u = BoundaryCondition::Dirichlet;
            base.lambda = staircase_lambda(LINEAR_STAIRCASE_JUMPS)?;
            spec.params.apply(&mut base);
            let (m, _) = optimal_jump_count(1.0, base.lambda, &JumpKernel::KWC, MAX_STAIRCASE_JUMPS)?;
            Protocol {
                data: linear_data(spec)?,
                base,
                runs: vec![
                    RunSpec {
                        full_horizon: true,
                        ..RunSpec::new("naive", Model::Kwc, Start::Data)
                    },
                    RunSpec {
                        pre_relax: true,
                        ..RunSpec::new("theoretical", Model::Kwc, Start::Staircase(m))
                    },
                ],
                threshold: 0.05,
                monotone: true,
                oracle: Some((240, 121, true)),
            }
        }
        ExperimentName::Nonuniqueness => {
            kwc_only(spec)?;
            base.bc_u = BoundaryCondition::Dirichlet;
            base.lambda = critical_lambda(1.0)?.lambda;
            spec.params.apply(&mut base);
            Protocol {
                data: linear_data(spec)?,
                base,
                runs: vec![
                    RunSpec::new("blend_m1", Model::Kwc, Start::Blend(1)),
                    RunSpec::new("blend_m2", Model::Kwc, Start::Blend(2)),
                ],
                threshold: 0.05,
                monotone: true,
                oracle: Some((240, 121, true)),
            }
        }
        ExperimentName::SineSegmentation => {
            base.bc_u = BoundaryCondition::Neumann;
            base.lambda = 150.0;
            spec.params.apply(&mut base);
            Protocol {
                data: spec.data.clone().unwrap_or_else(SignalSpec::sine),
                base,
                runs: from_data(&all_models(spec)),
                threshold: 1e-3,
                monotone: false,
                oracle: Some((500, 201, false)),
            }
        }
        ExperimentName::NoisySteps => {
            base.bc_u = BoundaryCondition::Neumann;
            base.lambda = 50.0;
            spec.params.apply(&mut base);
            Protocol {
                data: spec.data.clone().unwrap_or_else(SignalSpec::noisy_steps),
                base,
                runs: from_data(&all_models(spec)),
                threshold: 0.1,
                monotone: false,
                oracle: Some((0, 101, false)),
            }
        }
        ExperimentName::Custom => {
            let data = spec
                .data
                .clone()
                .ok_or_else(|| HarnessError::Config("custom experiments need `data`".into()))?;
            let models = spec
                .models
                .clone()
                .ok_or_else(|| HarnessError::Config("custom experiments need `models`".into()))?;
            if spec.params.lambda.is_none() {
                return Err(HarnessError::Config("custom experiments need `params.lambda`".into()));
            }
            spec.params.apply(&mut base);
            Protocol {
                data,
                base,
                runs: from_data(&models),
                threshold: 1e-2,
                monotone: false,
                oracle: None,
            }
        }
    };
    Ok(Protocol {
        threshold: spec.census_threshold.unwrap_or(p.threshold),
        ..p
    })
}

fn initial(start: Start, g: &GridSignal) -> Result<GridSignal> {
    let n = g.len();
    Ok(match start {
        Start::Data => g.clone(),
        Start::Staircase(m) => uniform_step_minimizer(1.0, m)?.sample(n)?,
        Start::Blend(m) => {
            let um = uniform_step_minimizer(1.0, m)?.sample(n)?;
            let s = g
                .samples()
                .iter()
                .zip(um.samples())
                .map(|(a, b)| 0.5 * a + 0.5 * b)
                .collect();
            g.with_samples(s)?
        }
    })
}

fn oracle_check(
    data: &DataFunction,
    g: &GridSignal,
    (cells, levels, pinned): (usize, usize, bool),
    lambda: f64,
) -> Result<OracleCheck> {
    let mut problem = match data {
        DataFunction::Sampled(_) => OracleProblem::new(data.clone(), JumpKernel::KWC, lambda),
        _ => OracleProblem::analytic(data.clone(), (0.0, 1.0), cells, JumpKernel::KWC, lambda),
    }
    .with_level_count(levels);
    if pinned {
        let n = g.len();
        problem = problem.with_endpoint_pin(g.samples()[0], g.samples()[n - 1]);
    }
    let r = oracle::solve(&problem)?;
    Ok(OracleCheck {
        cells: r.cells,
        levels: r.levels,
        jump_count: r.jump_count,
        energy: r.energy.total,
        minimizer: r.minimizer,
        tied_jump_counts: r.ties.iter().map(|t| t.jump_count).collect(),
    })
}

/// Runs the protocol, writing `data.csv`, one directory per run and `summary.json` to `out`.
///
/// Runs execute in parallel. A diverged run keeps its partial artifacts and the error is
/// returned after every run has finished.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<RunRecord> {
    let started = Instant::now();
    let proto = protocol(spec)?;
    proto.base.validate()?;
    if proto.threshold.is_nan() || proto.threshold <= 0.0 {
        return Err(HarnessError::Config("census threshold must be positive".into()));
    }
    io::create_dir(out)?;
    let g = generate_signal(&proto.data, proto.base.n, spec.seed)?;
    io::write_signal_csv(&out.join(DATA_FILE), &g)?;
    let data = proto.data.data_function(&g)?;

    let plans = proto
        .runs
        .iter()
        .map(|r| {
            let mut params = proto.base.clone();
            params.model = r.model;
            params.pre_relax = r.pre_relax;
            if r.full_horizon {
                params.steady_tol = 0.0;
            }
            Ok(RunPlan {
                label: r.label.clone(),
                params,
                u0: initial(r.start, &g)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<Result<RunResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = plans
            .iter()
            .map(|plan| s.spawn(|| run::execute(out, plan, &g, &data, proto.threshold)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("flow run panicked"))
            .collect()
    });
    let runs = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let lambda = proto.base.lambda;
    let oracle = match proto.oracle {
        Some(cfg) => Some(oracle_check(&data, &g, cfg, lambda)?),
        None => None,
    };
    let bounds = if proto.base.sigma == 1.0 {
        let osc = g.max() - g.min();
        if osc > 0.0 {
            Some(jump_bounds(&JumpKernel::KWC, 0.0, 1.0, lambda, osc)?)
        } else {
            None
        }
    } else {
        None
    };
    let bound_violations = violations(&runs, oracle.as_ref(), bounds.as_ref(), proto.monotone);
    let checks = checks(spec.name, &proto, &runs, &g, lambda)?;

    let record = RunRecord {
        spec: spec.clone(),
        lambda,
        census_threshold: proto.threshold,
        data_file: PathBuf::from(DATA_FILE),
        runs,
        oracle,
        bounds,
        monotone_data: proto.monotone,
        bound_violations,
        checks,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    io::write_json(&out.join(SUMMARY_FILE), &record)?;
    Ok(record)
}

fn violations(
    runs: &[RunResult],
    oracle: Option<&OracleCheck>,
    bounds: Option<&BoundReport>,
    monotone: bool,
) -> Vec<String> {
    let Some(b) = bounds else {
        return Vec::new();
    };
    let Some(limit) = (if monotone { b.m_monotone } else { b.m_general }) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for r in runs.iter().filter(|r| r.model == Model::Kwc) {
        let m = r.census.jumps.len() as u64;
        if m > limit {
            out.push(format!("run {}: {m} jumps exceed the bound {limit}", r.label));
        }
    }
    if let Some(o) = oracle {
        for m in std::iter::once(o.jump_count).chain(o.tied_jump_counts.iter().copied()) {
            if m as u64 > limit {
                out.push(format!("oracle minimizer: {m} jumps exceed the bound {limit}"));
            }
        }
    }
    out
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn checks(
    name: ExperimentName,
    proto: &Protocol,
    runs: &[RunResult],
    g: &GridSignal,
    lambda: f64,
) -> Result<Vec<Check>> {
    let find = |label: &str| runs.iter().find(|r| r.label == label);
    let mut out = Vec::new();
    match name {
        ExperimentName::LinearSteady => {
            if let Some(r) = find("theoretical") {
                let (m, _) = optimal_jump_count(1.0, lambda, &JumpKernel::KWC, MAX_STAIRCASE_JUMPS)?;
                out.extend(staircase_checks(r, m, g.spacing()));
                if let Some(naive) = find("naive") {
                    out.push(check(
                        "naive_start_above_staircase",
                        naive.fit_energy > r.fit_energy,
                        format!(
                            "fit energies: naive {:.10} with {} jumps, staircase {:.10}",
                            naive.fit_energy,
                            naive.census.jumps.len(),
                            r.fit_energy
                        ),
                    ));
                }
            }
        }
        ExperimentName::Nonuniqueness => {
            if let (Some(a), Some(b)) = (find("blend_m1"), find("blend_m2")) {
                let rel = (a.fit_energy - b.fit_energy).abs() / a.fit_energy.abs().max(b.fit_energy.abs());
                out.push(check(
                    "steady",
                    a.steady && b.steady,
                    format!("steady: {} and {}", a.steady, b.steady),
                ));
                out.push(check(
                    "equal_energies",
                    rel < 1e-2,
                    format!(
                        "fit energies {:.10} and {:.10}, relative difference {rel:.3e} (threshold 1e-2)",
                        a.fit_energy, b.fit_energy
                    ),
                ));
                out.push(check(
                    "distinct_jump_counts",
                    a.census.jumps.len() == 1 && b.census.jumps.len() == 2,
                    format!("jump counts {} and {} (expected 1 and 2)", a.census.jumps.len(), b.census.jumps.len()),
                ));
            }
        }
        ExperimentName::SineSegmentation => {
            if let Some(r) = find("kwc") {
                let worst = r.census.plateau_variations.iter().cloned().fold(0.0, f64::max);
                let plateaus = r.census.plateau_count();
                out.push(check(
                    "kwc_flat_blocks",
                    r.steady && plateaus <= 6 && worst < 1e-3,
                    format!(
                        "{plateaus} plateaus (threshold ≤ 6), largest internal variation {worst:.3e} (threshold 1e-3), census threshold {}",
                        proto.threshold
                    ),
                ));
            }
            if let Some(r) = find("rof") {
                let m = r.census.jumps.len();
                out.push(check(
                    "rof_micro_jumps",
                    m > 20,
                    format!("{m} censused jumps (threshold > 20) at census threshold {}", proto.threshold),
                ));
            }
        }
        ExperimentName::NoisySteps => {
            if let Some(r) = find("kwc") {
                let truth = match &proto.data {
                    SignalSpec::NoisySteps { breakpoints, .. } => breakpoints.clone(),
                    _ => Vec::new(),
                };
                let positions: Vec<f64> = r.census.jumps.iter().map(|j| j.position).collect();
                let located = positions.len() == truth.len()
                    && positions.iter().zip(&truth).all(|(p, t)| (p - t).abs() <= 0.02);
                out.push(check(
                    "kwc_edges",
                    r.steady && located,
                    format!(
                        "jumps at {positions:?}, expected {} within 0.02 of {truth:?}, census threshold {}",
                        truth.len(),
                        proto.threshold
                    ),
                ));
            }
        }
        ExperimentName::Custom => {}
    }
    for r in runs {
        out.push(check(
            &format!("{}_energy_descent", r.label),
            r.max_energy_ascent <= 1e-8,
            format!("largest relative ascent {:.3e} (threshold 1e-8)", r.max_energy_ascent),
        ));
    }
    Ok(out)
}

/// Same `m` jumps, sizes equal within 2%, boundary plateaus of half width within a cell.
pub fn staircase_checks(r: &RunResult, m: usize, h: f64) -> Vec<Check> {
    let jumps = &r.census.jumps;
    let sizes: Vec<f64> = jumps.iter().map(|j| j.size).collect();
    let mean = sizes.iter().sum::<f64>() / sizes.len().max(1) as f64;
    let spread = sizes
        .iter()
        .map(|s| (s - mean).abs() / mean.abs())
        .fold(0.0, f64::max);
    let d = 1.0 / m as f64;
    let (first, last) = (
        jumps.first().map_or(f64::NAN, |j| j.position),
        jumps.last().map_or(f64::NAN, |j| j.position),
    );
    let edge_error = (first - 0.5 * d).abs().max((1.0 - last - 0.5 * d).abs());
    vec![
        check(
            "staircase_preserved",
            r.steady && jumps.len() == m,
            format!("steady: {}, {} jumps (expected {m})", r.steady, jumps.len()),
        ),
        check(
            "uniform_jump_sizes",
            jumps.len() == m && spread <= 0.02,
            format!("sizes {sizes:?}, largest relative deviation {spread:.3e} (threshold 0.02)"),
        ),
        check(
            "half_width_boundary_plateaus",
            jumps.len() == m && edge_error <= h,
            format!(
                "outer jumps at {first} and {last}, expected {} and {}, error {edge_error:.3e} (threshold one cell, {h:.3e})",
                0.5 * d,
                1.0 - 0.5 * d
            ),
        ),
    ]
}
