//! L² gradient flows for the ROF, Ambrosio–Tortorelli and phase-field KWC energies.
//!
//! `u` lives on the `n` nodes of a uniform grid with spacing `h`, integrated with
//! trapezoid weights. The phase field `v` lives on the `n − 1` edge midpoints, so that
//! `v²` weights each difference `u_{i+1} − u_i` directly. The discrete energies are
//!
//! * ROF: `σ Σ |Δu| + F(u)`,
//! * AT: `σ Σ v² (Δu)²/h + W(v) + F(u)`,
//! * KWC: `σ Σ v² |Δu| + W(v) + F(u)`,
//!
//! with `W(v) = (ε/2) Σ (Δv)²/h + (1/2ε) Σ h (v − 1)²` and `F(u) = (λ/2) Σ w (u − g)²`.
//! Each time step minimizes the energy plus `(1/2Δt)‖· − ·ᵏ‖²` in `u` with `v` frozen,
//! then in `v` with `u` frozen, so every sub-step is a descent step.

pub mod census;
mod cp;
mod tridiag;

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

// Supplies the float math methods when std is not linked.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSignal;

pub use census::{jump_census, piecewise_fit, plateau_variations, Jump};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    #[serde(alias = "rof")]
    Rof,
    #[serde(alias = "at")]
    At,
    #[serde(alias = "kwc")]
    Kwc,
}

impl Model {
    pub fn has_phase_field(self) -> bool {
        !matches!(self, Model::Rof)
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Rof => "ROF",
            Model::At => "AT",
            Model::Kwc => "KWC",
        }
    }
}

/// Boundary condition for `u`. The phase field always has homogeneous Neumann conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `u` keeps the data values at both ends.
    Dirichlet,
    Neumann,
}

fn d_n() -> usize {
    1000
}
fn d_dt() -> f64 {
    0.01
}
fn d_sigma() -> f64 {
    1.0
}
fn d_epsilon() -> f64 {
    0.005
}
fn d_t_max() -> f64 {
    100.0
}
fn d_steady_tol() -> f64 {
    1e-9
}
fn d_bc() -> BoundaryCondition {
    BoundaryCondition::Neumann
}
fn d_cp_iters() -> usize {
    DEFAULT_CP_ITERS
}
fn d_cp_gap_tol() -> f64 {
    DEFAULT_CP_GAP_TOL
}
fn d_stride() -> usize {
    1
}

/// Duality-gap target of the inner primal–dual solve.
pub const DEFAULT_CP_GAP_TOL: f64 = 1e-10;

/// Cap on primal–dual iterations per time step.
pub const DEFAULT_CP_ITERS: usize = 50_000;

/// Default ratio of the primal step to `h/2`; the dual step is `h/2` divided by it.
pub const DEFAULT_CP_STEP_RATIO: f64 = 0.1;

/// Solver parameters. Every field except `model` and `lambda` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub model: Model,
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_sigma")]
    pub sigma: f64,
    #[serde(default = "d_epsilon")]
    pub epsilon: f64,
    pub lambda: f64,
    #[serde(default = "d_t_max")]
    pub t_max: f64,
    /// Relative sup-norm change of `u`, and of `v` when present, per unit time below which
    /// the flow is steady.
    #[serde(default = "d_steady_tol")]
    pub steady_tol: f64,
    #[serde(default = "d_bc")]
    pub bc_u: BoundaryCondition,
    /// Maximum primal–dual iterations per time step.
    #[serde(default = "d_cp_iters")]
    pub cp_iters: usize,
    /// Primal step; defaults to `0.1·h/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_tau: Option<f64>,
    /// Dual step; defaults to `h/(2·0.1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp_s: Option<f64>,
    /// The inner solve stops early once its duality gap is below this value.
    #[serde(default = "d_cp_gap_tol")]
    pub cp_gap_tol: f64,
    #[serde(default)]
    pub pre_relax: bool,
    /// Energy is recorded every `output_stride` steps.
    #[serde(default = "d_stride")]
    pub output_stride: usize,
}

impl FlowParams {
    pub fn new(model: Model, lambda: f64) -> Self {
        Self {
            model,
            n: d_n(),
            dt: d_dt(),
            sigma: d_sigma(),
            epsilon: d_epsilon(),
            lambda,
            t_max: d_t_max(),
            steady_tol: d_steady_tol(),
            bc_u: d_bc(),
            cp_iters: d_cp_iters(),
            cp_tau: None,
            cp_s: None,
            cp_gap_tol: d_cp_gap_tol(),
            pre_relax: false,
            output_stride: d_stride(),
        }
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n.max(2) - 1) as f64
    }

    /// Primal and dual step sizes for grid spacing `h`.
    pub fn cp_steps(&self, h: f64) -> (f64, f64) {
        (
            self.cp_tau.unwrap_or(0.5 * h * DEFAULT_CP_STEP_RATIO),
            self.cp_s.unwrap_or(0.5 * h / DEFAULT_CP_STEP_RATIO),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.n < 3 {
            return bad("n must be at least 3");
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad("sigma must be non-negative");
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return bad("t_max must be non-negative");
        }
        if !(self.steady_tol >= 0.0) {
            return bad("steady_tol must be non-negative");
        }
        if self.output_stride == 0 {
            return bad("output_stride must be positive");
        }
        Ok(())
    }

    fn validate_steps(&self, h: f64) -> Result<()> {
        let (tau, s) = self.cp_steps(h);
        if !(tau > 0.0 && s > 0.0) {
            return Err(Error::Config("primal-dual steps must be positive".into()));
        }
        if tau * s * 4.0 / (h * h) > 1.0 + 1e-12 {
            return Err(Error::Config(alloc::format!(
                "primal-dual steps violate tau*s*4/h^2 <= 1 (tau = {tau}, s = {s}, h = {h})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub energy: f64,
    /// `sup|uᵏ⁺¹ − uᵏ|` of the step that produced this record.
    pub sup_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub u: GridSignal,
    /// Phase field on the edge midpoints, for AT and KWC.
    pub v: Option<GridSignal>,
    pub energy_trace: Vec<TraceRecord>,
}

impl FlowState {
    /// `u = u0`, and `v ≡ 1` when the model has a phase field.
    pub fn initial(u0: GridSignal, model: Model) -> Result<Self> {
        let v = if model.has_phase_field() {
            Some(edge_grid(&u0, vec![1.0; u0.len() - 1])?)
        } else {
            None
        };
        Ok(Self {
            t: 0.0,
            u: u0,
            v,
            energy_trace: Vec::new(),
        })
    }
}

/// A signal on the edge midpoints of `u`'s grid.
pub fn edge_grid(u: &GridSignal, samples: Vec<f64>) -> Result<GridSignal> {
    let (a, b) = u.domain();
    let h = u.spacing();
    GridSignal::new(a + 0.5 * h, b - 0.5 * h, samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub state: FlowState,
    pub steady: bool,
    pub steps: usize,
    /// Largest per-step relative energy increase.
    pub max_energy_ascent: f64,
    /// Largest duality gap left by an inner primal–dual solve.
    pub max_cp_gap: f64,
    pub cp_iterations: usize,
}

/// Discrete model energy of `(u, v)` against `g`.
pub fn model_energy(
    params: &FlowParams,
    g: &GridSignal,
    u: &GridSignal,
    v: Option<&GridSignal>,
) -> Result<f64> {
    check_shapes(g, u)?;
    let w = g.trapezoid_weights();
    let v = match (params.model.has_phase_field(), v) {
        (true, Some(v)) if v.len() + 1 == u.len() => Some(v.samples()),
        (true, _) => return Err(Error::Config("phase field missing or misshapen".into())),
        (false, _) => None,
    };
    Ok(energy_raw(params, g.samples(), &w, u.spacing(), u.samples(), v))
}

fn energy_raw(p: &FlowParams, g: &[f64], w: &[f64], h: f64, u: &[f64], v: Option<&[f64]>) -> f64 {
    let fid: f64 = u
        .iter()
        .zip(g)
        .zip(w)
        .map(|((u, g), w)| w * (u - g) * (u - g))
        .sum();
    let fid = 0.5 * p.lambda * fid;
    let du = u.windows(2).map(|x| x[1] - x[0]);
    let Some(v) = v else {
        return p.sigma * du.map(f64::abs).sum::<f64>() + fid;
    };
    let coupling: f64 = match p.model {
        Model::At => du.zip(v).map(|(d, v)| v * v * d * d / h).sum(),
        _ => du.zip(v).map(|(d, v)| v * v * d.abs()).sum(),
    };
    let grad: f64 = v.windows(2).map(|x| (x[1] - x[0]).powi(2) / h).sum();
    let well: f64 = v.iter().map(|v| h * (v - 1.0) * (v - 1.0)).sum();
    p.sigma * coupling + 0.5 * p.epsilon * grad + well / (2.0 * p.epsilon) + fid
}

fn check_shapes(g: &GridSignal, u: &GridSignal) -> Result<()> {
    if g.len() != u.len() || g.domain() != u.domain() {
        return Err(Error::Config(alloc::format!(
            "u ({} nodes on {:?}) and g ({} nodes on {:?}) must share a grid",
            u.len(),
            u.domain(),
            g.len(),
            g.domain()
        )));
    }
    Ok(())
}

/// Per-run workspace: data, weights, dual warm start and statistics.
pub struct Flow<'a> {
    params: &'a FlowParams,
    g: &'a GridSignal,
    weights: Vec<f64>,
    h: f64,
    dual: Vec<f64>,
    scratch: Vec<f64>,
    bounds: Vec<f64>,
    target: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    max_cp_gap: f64,
    cp_iterations: usize,
}

impl<'a> Flow<'a> {
    pub fn new(g: &'a GridSignal, params: &'a FlowParams) -> Result<Self> {
        params.validate()?;
        if g.len() != params.n {
            return Err(Error::Config(alloc::format!(
                "data has {} nodes but n = {}",
                g.len(),
                params.n
            )));
        }
        let h = g.spacing();
        params.validate_steps(h)?;
        let n = g.len();
        Ok(Self {
            params,
            g,
            weights: g.trapezoid_weights(),
            h,
            dual: vec![0.0; n - 1],
            scratch: vec![0.0; 2 * n],
            bounds: vec![0.0; n - 1],
            target: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            max_cp_gap: 0.0,
            cp_iterations: 0,
        })
    }

    fn pins(&self) -> Option<(f64, f64)> {
        match self.params.bc_u {
            BoundaryCondition::Dirichlet => {
                let s = self.g.samples();
                Some((s[0], s[s.len() - 1]))
            }
            BoundaryCondition::Neumann => None,
        }
    }

    /// Implicit `u` step with `v` frozen (`None` means `v ≡ 1`).
    fn step_u(&mut self, u: &mut [f64], v: Option<&[f64]>) -> Result<()> {
        let p = self.params;
        let g = self.g.samples();
        let n = u.len();
        let inv_dt = 1.0 / p.dt;
        match p.model {
            Model::At => {
                let v = v.ok_or_else(|| Error::Config("AT step needs a phase field".into()))?;
                for i in 0..n {
                    let w = self.weights[i];
                    let left = if i > 0 { 2.0 * p.sigma * v[i - 1] * v[i - 1] / self.h } else { 0.0 };
                    let right = if i + 1 < n { 2.0 * p.sigma * v[i] * v[i] / self.h } else { 0.0 };
                    self.lower[i] = -left;
                    self.upper[i] = -right;
                    self.diag[i] = w * (inv_dt + p.lambda) + left + right;
                    self.target[i] = w * (u[i] * inv_dt + p.lambda * g[i]);
                }
                if let Some((a, b)) = self.pins() {
                    for (i, val) in [(0, a), (n - 1, b)] {
                        self.lower[i] = 0.0;
                        self.upper[i] = 0.0;
                        self.diag[i] = 1.0;
                        self.target[i] = val;
                    }
                }
                if !tridiag::solve(&self.lower, &self.diag, &self.upper, &mut self.target) {
                    return Err(Error::Config("singular u system".into()));
                }
                u.copy_from_slice(&self.target);
            }
            Model::Rof | Model::Kwc => {
                let alpha = p.lambda + inv_dt;
                for i in 0..n {
                    self.target[i] = (p.lambda * g[i] + u[i] * inv_dt) / alpha;
                }
                for e in 0..n - 1 {
                    let ve = v.map_or(1.0, |v| v[e]);
                    self.bounds[e] = p.sigma * ve * ve;
                }
                let prob = cp::ProxProblem {
                    weights: &self.weights,
                    bounds: &self.bounds,
                    h: self.h,
                    alpha,
                    target: &self.target,
                    pinned: self.pins(),
                };
                let (tau, s) = p.cp_steps(self.h);
                let settings = cp::CpSettings {
                    tau,
                    s,
                    max_iters: p.cp_iters,
                    gap_tol: p.cp_gap_tol,
                };
                let out = cp::solve(&prob, u, &mut self.dual, &settings, &mut self.scratch);
                self.max_cp_gap = self.max_cp_gap.max(out.gap);
                self.cp_iterations += out.iterations;
            }
        }
        Ok(())
    }

    /// Implicit `v` step with `u` frozen; Neumann at both ends, clipped to `[0, 1]`.
    fn step_v(&mut self, u: &[f64], v: &mut [f64]) -> Result<()> {
        let p = self.params;
        update_v(p, self.h, u, v, &mut self.lower, &mut self.diag, &mut self.upper)
    }

    /// One alternating time step.
    pub fn step(&mut self, state: &FlowState) -> Result<FlowState> {
        let mut u = state.u.samples().to_vec();
        let mut v = state.v.as_ref().map(|v| v.samples().to_vec());
        if self.params.model.has_phase_field() && v.is_none() {
            return Err(Error::Config("phase-field model needs v".into()));
        }
        self.step_u(&mut u, v.as_deref())?;
        if let Some(v) = v.as_mut() {
            self.step_v(&u, v)?;
        }
        Ok(FlowState {
            t: state.t + self.params.dt,
            u: state.u.with_samples(u)?,
            v: match v {
                Some(v) => Some(state.v.as_ref().unwrap().with_samples(v)?),
                None => None,
            },
            energy_trace: Vec::new(),
        })
    }

    pub fn energy(&self, state: &FlowState) -> f64 {
        energy_raw(
            self.params,
            self.g.samples(),
            &self.weights,
            self.h,
            state.u.samples(),
            state.v.as_ref().map(|v| v.samples()),
        )
    }
}

fn update_v(
    p: &FlowParams,
    h: f64,
    u: &[f64],
    v: &mut [f64],
    lower: &mut [f64],
    diag: &mut [f64],
    upper: &mut [f64],
) -> Result<()> {
    let m = v.len();
    let inv_dt = 1.0 / p.dt;
    let couple = p.epsilon / h;
    for e in 0..m {
        let d = u[e + 1] - u[e];
        let load = match p.model {
            Model::At => 2.0 * p.sigma * d * d / h,
            _ => 2.0 * p.sigma * d.abs(),
        };
        let left = if e > 0 { couple } else { 0.0 };
        let right = if e + 1 < m { couple } else { 0.0 };
        lower[e] = -left;
        upper[e] = -right;
        diag[e] = h * inv_dt + h / p.epsilon + load + left + right;
        v[e] = h * v[e] * inv_dt + h / p.epsilon;
    }
    if !tridiag::solve(&lower[..m], &diag[..m], &upper[..m], v) {
        return Err(Error::Config("singular v system".into()));
    }
    for x in v.iter_mut() {
        *x = x.clamp(0.0, 1.0);
    }
    Ok(())
}

fn check_model(params: &FlowParams, model: Model) -> Result<()> {
    if params.model != model {
        return Err(Error::Config(alloc::format!(
            "parameters are for {}, not {}",
            params.model.name(),
            model.name()
        )));
    }
    Ok(())
}

/// One ROF step from a cold dual start.
pub fn step_rof(state: &FlowState, g: &GridSignal, params: &FlowParams) -> Result<FlowState> {
    check_model(params, Model::Rof)?;
    Flow::new(g, params)?.step(state)
}

/// One Ambrosio–Tortorelli step.
pub fn step_at(state: &FlowState, g: &GridSignal, params: &FlowParams) -> Result<FlowState> {
    check_model(params, Model::At)?;
    Flow::new(g, params)?.step(state)
}

/// One phase-field KWC step from a cold dual start.
pub fn step_kwc(state: &FlowState, g: &GridSignal, params: &FlowParams) -> Result<FlowState> {
    check_model(params, Model::Kwc)?;
    Flow::new(g, params)?.step(state)
}

const PRE_RELAX_MAX_STEPS: usize = 1_000_000;

/// Relaxes `v` with `u` frozen until its relative sup-norm change per unit time drops
/// below `steady_tol`.
pub fn pre_relax_v(state: &FlowState, params: &FlowParams) -> Result<FlowState> {
    params.validate()?;
    if !params.model.has_phase_field() {
        return Err(Error::Config("pre-relaxation needs a phase-field model".into()));
    }
    let u = state.u.samples();
    let h = state.u.spacing();
    let mut v = match &state.v {
        Some(v) if v.len() + 1 == u.len() => v.samples().to_vec(),
        _ => vec![1.0; u.len() - 1],
    };
    let m = v.len();
    let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut prev = v.clone();
    for _ in 0..PRE_RELAX_MAX_STEPS {
        update_v(params, h, u, &mut v, &mut lower, &mut diag, &mut upper)?;
        let change = sup_diff(&v, &prev);
        let scale = sup_abs(&v).max(1e-12);
        if change / (params.dt * scale) < params.steady_tol {
            break;
        }
        prev.copy_from_slice(&v);
    }
    Ok(FlowState {
        t: state.t,
        u: state.u.clone(),
        v: Some(edge_grid(&state.u, v)?),
        energy_trace: state.energy_trace.clone(),
    })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sup_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn all_finite(s: &FlowState) -> bool {
    s.u.samples().iter().all(|x| x.is_finite())
        && s.v.as_ref().is_none_or(|v| v.samples().iter().all(|x| x.is_finite()))
}

/// Time steps from `u0` until `t ≥ t_max` or the flow is steady.
///
/// With Dirichlet conditions the end values of `u0` are replaced by those of `g`.
pub fn run(g: &GridSignal, u0: &GridSignal, params: &FlowParams) -> Result<FlowResult> {
    check_shapes(g, u0)?;
    let mut flow = Flow::new(g, params)?;
    let mut u0 = u0.clone();
    if params.bc_u == BoundaryCondition::Dirichlet {
        let n = u0.len();
        let (a, b) = (g.samples()[0], g.samples()[n - 1]);
        let s = u0.samples_mut();
        s[0] = a;
        s[n - 1] = b;
    }
    let mut state = FlowState::initial(u0, params.model)?;
    if params.pre_relax && params.model.has_phase_field() {
        state = pre_relax_v(&state, params)?;
    }
    let mut energy = flow.energy(&state);
    state.energy_trace.push(TraceRecord {
        t: 0.0,
        energy,
        sup_change: 0.0,
    });

    let mut steps = 0;
    let mut steady = false;
    let mut max_ascent: f64 = 0.0;
    let total_steps = ((params.t_max / params.dt) - 1e-9).ceil().max(0.0) as usize;
    while steps < total_steps {
        let mut next = flow.step(&state)?;
        steps += 1;
        if !all_finite(&next) {
            return Err(Error::Divergence {
                step: steps,
                t: next.t,
                last: Box::new(state),
            });
        }
        let change = state.u.sup_distance(&next.u);
        let e = flow.energy(&next);
        max_ascent = max_ascent.max((e - energy) / energy.abs().max(1e-300));
        energy = e;
        next.energy_trace = core::mem::take(&mut state.energy_trace);
        let mut rel = change / (params.dt * sup_abs(next.u.samples()).max(1e-12));
        if let (Some(old), Some(new)) = (&state.v, &next.v) {
            let dv = sup_diff(old.samples(), new.samples());
            rel = rel.max(dv / (params.dt * sup_abs(new.samples()).max(1e-12)));
        }
        let done = rel < params.steady_tol;
        if steps % params.output_stride == 0 || done || steps == total_steps {
            next.energy_trace.push(TraceRecord {
                t: next.t,
                energy,
                sup_change: change,
            });
        }
        state = next;
        if done {
            steady = true;
            break;
        }
    }
    Ok(FlowResult {
        state,
        steady,
        steps,
        max_energy_ascent: max_ascent,
        max_cp_gap: flow.max_cp_gap,
        cp_iterations: flow.cp_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_step(n: usize) -> GridSignal {
        GridSignal::from_fn(0.0, 1.0, n, |x| if x > 0.5 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn constant_data_is_fixed_point() {
        for model in [Model::Rof, Model::At, Model::Kwc] {
            let mut p = FlowParams::new(model, 10.0);
            p.n = 50;
            p.t_max = 1.0;
            let g = GridSignal::from_fn(0.0, 1.0, 50, |_| 0.7).unwrap();
            let r = run(&g, &g, &p).unwrap();
            assert!(r.steady, "{model:?}");
            assert!(r.state.u.sup_distance(&g) < 1e-12);
            if let Some(v) = r.state.v {
                assert!(v.samples().iter().all(|&x| (x - 1.0).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn rejects_bad_steps() {
        let mut p = FlowParams::new(Model::Rof, 1.0);
        p.n = 11;
        p.cp_tau = Some(0.1);
        p.cp_s = Some(0.1);
        let g = unit_step(11);
        assert!(matches!(Flow::new(&g, &p), Err(Error::Config(_))));
    }

    #[test]
    fn at_without_coupling_relaxes_to_data() {
        let mut p = FlowParams::new(Model::At, 5.0);
        p.n = 101;
        p.sigma = 0.0;
        p.dt = 0.1;
        p.t_max = 50.0;
        let g = GridSignal::from_fn(0.0, 1.0, 101, |x| (3.0 * x).sin()).unwrap();
        let u0 = GridSignal::from_fn(0.0, 1.0, 101, |_| 0.0).unwrap();
        let r = run(&g, &u0, &p).unwrap();
        assert!(r.state.u.sup_distance(&g) < 1e-8);
    }

    #[test]
    fn model_serde_names() {
        assert_eq!(serde_json::to_string(&Model::Kwc).unwrap(), "\"KWC\"");
        let m: Model = serde_json::from_str("\"rof\"").unwrap();
        assert_eq!(m, Model::Rof);
        let p: FlowParams = serde_json::from_str(r#"{"model":"AT","lambda":2.0}"#).unwrap();
        assert_eq!(p.n, 1000);
        assert_eq!(p.dt, 0.01);
        assert_eq!(p.bc_u, BoundaryCondition::Neumann);
    }
}
