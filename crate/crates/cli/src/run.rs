//! One flow run with its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use kwcseg_core::flow::census::{jump_census, piecewise_fit, plateau_variations, Jump};
use kwcseg_core::flow::{self, FlowParams, FlowResult, FlowState, Model};
use kwcseg_core::pwc::energy;
use kwcseg_core::{DataFunction, GridSignal, JumpKernel, PiecewiseConstant};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io;

pub const TRACE_FILE: &str = "trace.csv";
pub const FINAL_FILE: &str = "final.csv";
pub const RESULT_FILE: &str = "result.json";

/// Inner-solver settings as actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpSettingsUsed {
    pub tau: f64,
    pub s: f64,
    pub max_iters: usize,
    pub gap_tol: f64,
}

impl CpSettingsUsed {
    pub fn of(params: &FlowParams) -> Self {
        let (tau, s) = params.cp_steps(params.spacing());
        Self {
            tau,
            s,
            max_iters: params.cp_iters,
            gap_tol: params.cp_gap_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub threshold: f64,
    pub jumps: Vec<Jump>,
    pub plateau_variations: Vec<f64>,
}

impl Census {
    pub fn of(u: &GridSignal, threshold: f64) -> Result<Self> {
        let jumps = jump_census(u, threshold)?;
        let plateau_variations = plateau_variations(u, &jumps);
        Ok(Self {
            threshold,
            jumps,
            plateau_variations,
        })
    }

    pub fn plateau_count(&self) -> usize {
        self.jumps.len() + 1
    }
}

/// Contents of `result.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub label: String,
    pub model: Model,
    pub steady: bool,
    pub steps: usize,
    pub t: f64,
    pub energy: f64,
    pub max_energy_ascent: f64,
    pub max_cp_gap: f64,
    pub cp_iterations: usize,
    pub census: Census,
    /// Piecewise-constant fit of the final `u` on the censused jumps.
    pub fit: PiecewiseConstant,
    /// `TV_K + F` of the fit with `K(ρ) = ρ/(1+ρ)`.
    pub fit_energy: f64,
    pub params: FlowParams,
    pub cp: CpSettingsUsed,
    pub wall_time_s: f64,
    /// Paths of the run's files, relative to the experiment directory.
    pub files: Vec<PathBuf>,
}

/// Initial condition of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub label: String,
    pub params: FlowParams,
    pub u0: GridSignal,
}

/// Runs the flow and writes `trace.csv`, `final.csv` and `result.json` to `root/label`.
/// On divergence the last finite state is written before the error is returned.
pub fn execute(
    root: &Path,
    plan: &RunPlan,
    g: &GridSignal,
    data: &DataFunction,
    threshold: f64,
) -> Result<RunResult> {
    let dir = root.join(&plan.label);
    io::create_dir(&dir)?;
    let started = Instant::now();
    let result = match flow::run(g, &plan.u0, &plan.params) {
        Ok(r) => r,
        Err(kwcseg_core::Error::Divergence { step, t, last }) => {
            write_state(&dir, &last)?;
            io::write_json(
                &dir.join(RESULT_FILE),
                &serde_json::json!({ "label": plan.label, "diverged": true, "step": step, "t": t }),
            )?;
            return Err(kwcseg_core::Error::Divergence { step, t, last }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let summary = summarize(plan, &result, data, threshold, started.elapsed().as_secs_f64())?;
    write_state(&dir, &result.state)?;
    io::write_json(&dir.join(RESULT_FILE), &summary)?;
    Ok(summary)
}

fn write_state(dir: &Path, state: &FlowState) -> Result<()> {
    io::write_trace_csv(&dir.join(TRACE_FILE), &state.energy_trace)?;
    io::write_state_csv(&dir.join(FINAL_FILE), &state.u, state.v.as_ref())
}

fn summarize(
    plan: &RunPlan,
    r: &FlowResult,
    data: &DataFunction,
    threshold: f64,
    wall_time_s: f64,
) -> Result<RunResult> {
    let u = &r.state.u;
    let census = Census::of(u, threshold)?;
    let fit = piecewise_fit(u, threshold)?;
    let fit_energy = energy(&fit, data, &JumpKernel::KWC, plan.params.lambda)?.total;
    let energy = r
        .state
        .energy_trace
        .last()
        .map(|e| e.energy)
        .ok_or_else(|| HarnessError::Invariant("empty energy trace".into()))?;
    let files = [TRACE_FILE, FINAL_FILE, RESULT_FILE]
        .iter()
        .map(|f| Path::new(&plan.label).join(f))
        .collect();
    Ok(RunResult {
        label: plan.label.clone(),
        model: plan.params.model,
        steady: r.steady,
        steps: r.steps,
        t: r.state.t,
        energy,
        max_energy_ascent: r.max_energy_ascent,
        max_cp_gap: r.max_cp_gap,
        cp_iterations: r.cp_iterations,
        census,
        fit,
        fit_energy,
        params: plan.params.clone(),
        cp: CpSettingsUsed::of(&plan.params),
        wall_time_s,
        files,
    })
}
