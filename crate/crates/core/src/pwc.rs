//! Piecewise-constant functions and exact evaluation of `TV`, `TV_K` and the fidelity.
//!
//! A [`PiecewiseConstant`] on `(a, b)` is stored as its interior jump locations
//! `a₁ < … < a_m` and plateau values `h₀, …, h_m`. Plateaus are left-continuous:
//! `u(x) = h_k` for `x ∈ (a_k, a_{k+1}]`. Only values on sets of positive measure
//! enter the energies, so the convention matters for sampling only.

use alloc::vec::Vec;
use core::f64::consts::PI;

// Supplies the float math methods when std is not linked.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::grid::GridSignal;
use crate::kernel::JumpKernel;
use crate::quad::adaptive_simpson;

/// Absolute tolerance of the per-plateau quadrature used for sine data.
pub const SINE_QUADRATURE_TOL: f64 = 1e-10;

/// A step function on an interval. Zero-size jumps are merged away on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseConstant {
    domain: (f64, f64),
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    domain: (f64, f64),
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawPiecewise> for PiecewiseConstant {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        PiecewiseConstant::new(raw.domain, raw.breakpoints, raw.values)
    }
}

impl PiecewiseConstant {
    pub fn new(domain: (f64, f64), breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(domain_err!("domain ({a}, {b}) must satisfy a < b"));
        }
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::Invalid(alloc::format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("plateau values must be finite".into()));
        }
        let mut prev = a;
        for &x in &breakpoints {
            if !(x > prev) {
                return Err(Error::Invalid(alloc::format!(
                    "breakpoints must be strictly increasing and inside ({a}, {b}); {x} follows {prev}"
                )));
            }
            prev = x;
        }
        if !(prev < b) && !breakpoints.is_empty() {
            return Err(Error::Invalid(alloc::format!(
                "breakpoint {prev} is not inside ({a}, {b})"
            )));
        }

        let mut merged_bp = Vec::with_capacity(breakpoints.len());
        let mut merged_val = Vec::with_capacity(values.len());
        merged_val.push(values[0]);
        for (x, v) in breakpoints.into_iter().zip(values.into_iter().skip(1)) {
            if v != *merged_val.last().unwrap() {
                merged_bp.push(x);
                merged_val.push(v);
            }
        }
        Ok(Self {
            domain,
            breakpoints: merged_bp,
            values: merged_val,
        })
    }

    pub fn constant(a: f64, b: f64, value: f64) -> Result<Self> {
        Self::new((a, b), Vec::new(), alloc::vec![value])
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn jump_count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Signed jump sizes `ρ_i = h_i − h_{i−1}`.
    pub fn jumps(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.jumps().all(|r| r >= 0.0)
    }

    /// Plateaus as `(left, right, value)`.
    pub fn plateaus(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let (a, b) = self.domain;
        (0..self.values.len()).map(move |k| {
            let lo = if k == 0 { a } else { self.breakpoints[k - 1] };
            let hi = if k == self.breakpoints.len() {
                b
            } else {
                self.breakpoints[k]
            };
            (lo, hi, self.values[k])
        })
    }

    /// Left-continuous point evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&bp| bp < x);
        self.values[k]
    }

    /// Samples at `n` uniform nodes of the domain.
    pub fn sample(&self, n: usize) -> Result<GridSignal> {
        let (a, b) = self.domain;
        GridSignal::from_fn(a, b, n, |x| self.eval(x))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// The data `g` of the fidelity term.
///
/// Serialized with a `form` tag, e.g. `{"form": "linear", "slope": 1.0, "intercept": 0.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DataFunction {
    /// `g(x) = slope·x + intercept`.
    Linear { slope: f64, intercept: f64 },
    /// `g(x) = amplitude·sin(2π·frequency·x)`.
    Sine { amplitude: f64, frequency: f64 },
    /// A step function.
    Steps(PiecewiseConstant),
    /// Samples on a uniform grid; piecewise-linear between nodes.
    Sampled(GridSignal),
}

impl DataFunction {
    /// `g(x) = x`.
    pub const IDENTITY: DataFunction = DataFunction::Linear {
        slope: 1.0,
        intercept: 0.0,
    };

    pub fn value(&self, x: f64) -> f64 {
        match self {
            DataFunction::Linear { slope, intercept } => slope * x + intercept,
            DataFunction::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * x).sin(),
            DataFunction::Steps(u) => u.eval(x),
            DataFunction::Sampled(s) => s.interpolate(x),
        }
    }

    /// The interval the data lives on, for forms that carry one.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            DataFunction::Steps(u) => Some(u.domain()),
            DataFunction::Sampled(s) => Some(s.domain()),
            _ => None,
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, DataFunction::Steps(_))
    }

    fn check_domain(&self, domain: (f64, f64)) -> Result<()> {
        if let Some((c, d)) = self.domain() {
            let scale = (domain.1 - domain.0).abs().max(1.0);
            if (c - domain.0).abs() > 1e-12 * scale || (d - domain.1).abs() > 1e-12 * scale {
                return Err(Error::DomainMismatch(domain.0, domain.1, c, d));
            }
        }
        Ok(())
    }

    /// `∫_lo^hi g` and `∫_lo^hi g²`, exact for the analytic forms.
    pub fn moments(&self, lo: f64, hi: f64) -> (f64, f64) {
        let w = hi - lo;
        match self {
            DataFunction::Linear { slope, .. } => {
                let gm = self.value(0.5 * (lo + hi));
                (w * gm, w * gm * gm + slope * slope * w * w * w / 12.0)
            }
            DataFunction::Sine {
                amplitude,
                frequency,
            } => {
                let k = 2.0 * PI * frequency;
                if k == 0.0 {
                    return (0.0, 0.0);
                }
                let first = amplitude * ((k * lo).cos() - (k * hi).cos()) / k;
                let second = amplitude
                    * amplitude
                    * (0.5 * w - ((2.0 * k * hi).sin() - (2.0 * k * lo).sin()) / (4.0 * k));
                (first, second)
            }
            DataFunction::Steps(g) => {
                let mut first = 0.0;
                let mut second = 0.0;
                for (l, r, v) in g.plateaus() {
                    let len = (r.min(hi) - l.max(lo)).max(0.0);
                    first += len * v;
                    second += len * v * v;
                }
                (first, second)
            }
            DataFunction::Sampled(s) => {
                let f1 = adaptive_simpson(&|x| s.interpolate(x), lo, hi, 1e-12);
                let f2 = adaptive_simpson(&|x| s.interpolate(x).powi(2), lo, hi, 1e-12);
                (f1, f2)
            }
        }
    }

    /// `∫_lo^hi (c − g)²` for a plateau of value `c`.
    fn plateau_l2(&self, lo: f64, hi: f64, c: f64) -> f64 {
        let w = hi - lo;
        match self {
            DataFunction::Linear { slope, .. } => {
                let e = c - self.value(0.5 * (lo + hi));
                w * e * e + slope * slope * w * w * w / 12.0
            }
            DataFunction::Sine { .. } => {
                adaptive_simpson(&|x| (c - self.value(x)).powi(2), lo, hi, SINE_QUADRATURE_TOL)
            }
            DataFunction::Steps(g) => g
                .plateaus()
                .map(|(l, r, v)| (r.min(hi) - l.max(lo)).max(0.0) * (c - v) * (c - v))
                .sum(),
            DataFunction::Sampled(s) => {
                adaptive_simpson(&|x| (c - s.interpolate(x)).powi(2), lo, hi, 1e-12)
            }
        }
    }
}

/// `TV_K(u)`, each term with its plain value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub tv_k: f64,
    pub fidelity: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(tv_k: f64, fidelity: f64) -> Self {
        Self {
            tv_k,
            fidelity,
            total: tv_k + fidelity,
        }
    }
}

/// Total variation: the sum of absolute jump sizes.
pub fn tv(u: &PiecewiseConstant) -> f64 {
    u.jumps().map(f64::abs).sum()
}

/// `Σ K(|ρ_i|)`.
pub fn tv_k(u: &PiecewiseConstant, kernel: &JumpKernel) -> f64 {
    u.jumps().map(|r| kernel.cost(r)).sum()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(domain_err!("fidelity weight must be finite and non-negative, got {lambda}"));
    }
    Ok(())
}

/// `(λ/2) ∫ |u − g|²`.
///
/// Linear and step data are integrated in closed form per plateau, sine data by adaptive
/// Simpson quadrature, and sampled data by the trapezoid rule on its own nodes.
pub fn fidelity(u: &PiecewiseConstant, g: &DataFunction, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    g.check_domain(u.domain())?;
    let integral: f64 = match g {
        DataFunction::Sampled(s) => s
            .trapezoid_weights()
            .iter()
            .zip(s.nodes().zip(s.samples()))
            .map(|(w, (x, gv))| w * (u.eval(x) - gv).powi(2))
            .sum(),
        _ => u
            .plateaus()
            .map(|(lo, hi, c)| g.plateau_l2(lo, hi, c))
            .sum(),
    };
    Ok(0.5 * lambda * integral)
}

/// Fidelity of `u` against an arbitrary function by per-plateau adaptive quadrature.
pub fn fidelity_quadrature(
    u: &PiecewiseConstant,
    g: &dyn Fn(f64) -> f64,
    lambda: f64,
    tol: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let integral: f64 = u
        .plateaus()
        .map(|(lo, hi, c)| adaptive_simpson(&|x| (c - g(x)).powi(2), lo, hi, tol))
        .sum();
    Ok(0.5 * lambda * integral)
}

/// `TV_{Kg}(u) = TV_K(u) + F(u)`.
pub fn energy(
    u: &PiecewiseConstant,
    g: &DataFunction,
    kernel: &JumpKernel,
    lambda: f64,
) -> Result<EnergyBreakdown> {
    Ok(EnergyBreakdown::new(tv_k(u, kernel), fidelity(u, g, lambda)?))
}

const QUANTIZE_SCAN: usize = 4096;

/// Level-set quantization `u^η(x) = kη` where `kη ≤ g(x) < (k+1)η`.
///
/// Level crossings are bracketed on a uniform scan and refined by bisection, so plateaus
/// narrower than the scan spacing can be missed. Plateaus of (numerically) zero width,
/// such as a level touched at a single point, are dropped.
pub fn quantize(g: &DataFunction, domain: (f64, f64), eta: f64) -> Result<PiecewiseConstant> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(domain_err!("quantization step must be positive, got {eta}"));
    }
    let (a, b) = domain;
    if !(a < b) {
        return Err(domain_err!("domain ({a}, {b}) must satisfy a < b"));
    }
    g.check_domain(domain)?;
    let level = |x: f64| (g.value(x) / eta).floor();

    if let DataFunction::Steps(u) = g {
        let values = u.values().iter().map(|v| (v / eta).floor() * eta).collect();
        return PiecewiseConstant::new(domain, u.breakpoints().to_vec(), values);
    }

    let tol = 1e-13 * (b - a);
    // Segments as (start, level index).
    let mut segments: Vec<(f64, f64)> = alloc::vec![(a, level(a))];
    let step = (b - a) / QUANTIZE_SCAN as f64;
    let mut lo = a;
    let mut klo = level(a);
    for j in 1..=QUANTIZE_SCAN {
        let hi = if j == QUANTIZE_SCAN { b } else { a + j as f64 * step };
        let khi = level(hi);
        refine_crossings(&level, lo, hi, klo, khi, tol, &mut segments);
        lo = hi;
        klo = khi;
    }

    let min_width = 4.0 * tol;
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(segments.len());
    for (i, &(start, k)) in segments.iter().enumerate() {
        let end = segments.get(i + 1).map_or(b, |s| s.0);
        if end - start > min_width {
            kept.push((start, k));
        }
    }
    if kept.is_empty() {
        kept.push((a, level(0.5 * (a + b))));
    }
    let breakpoints = kept.iter().skip(1).map(|s| s.0).collect();
    let values = kept.iter().map(|s| s.1 * eta).collect();
    PiecewiseConstant::new(domain, breakpoints, values)
}

fn refine_crossings(
    level: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    klo: f64,
    khi: f64,
    tol: f64,
    out: &mut Vec<(f64, f64)>,
) {
    if klo == khi {
        return;
    }
    if hi - lo <= tol {
        out.push((0.5 * (lo + hi), khi));
        return;
    }
    let mid = 0.5 * (lo + hi);
    let kmid = level(mid);
    refine_crossings(level, lo, mid, klo, kmid, tol, out);
    refine_crossings(level, mid, hi, kmid, khi, tol, out);
}

/// Truncates the plateau values to `[lo, hi]`.
pub fn clamp(u: &PiecewiseConstant, lo: f64, hi: f64) -> Result<PiecewiseConstant> {
    if !(lo <= hi) {
        return Err(domain_err!("clamp bounds must satisfy lo ≤ hi, got [{lo}, {hi}]"));
    }
    let values = u.values().iter().map(|v| v.clamp(lo, hi)).collect();
    PiecewiseConstant::new(u.domain(), u.breakpoints().to_vec(), values)
}

/// Jump dispersion `s² − Σρᵢ² + (ρ − s)²` with `s = Σρᵢ`, for non-decreasing `u`.
///
/// It vanishes exactly when `u` has a single jump and that jump has size `ρ`.
pub fn dispersion(u: &PiecewiseConstant, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(domain_err!("dispersion needs a finite ρ ≥ 0, got {rho}"));
    }
    if !u.is_non_decreasing() {
        return Err(domain_err!("dispersion is defined for non-decreasing functions only"));
    }
    let sum: f64 = u.jumps().sum();
    let squares: f64 = u.jumps().map(|r| r * r).sum();
    Ok(sum * sum - squares + (rho - sum) * (rho - sum))
}
