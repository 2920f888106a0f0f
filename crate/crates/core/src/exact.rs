//! Closed-form results for monotone data.
//!
//! For `g(x) = x` on `(0, L)` with the endpoint values pinned, the uniform staircase with
//! `m` equal jumps has energy `L·E(m)` where
//! `E(m) = 1/(κL/m + 1) + (λ/24)(L/m)²` for the rational kernel. Non-increasing data is
//! handled by the reflection `g ↦ −g`.

use alloc::vec::Vec;

// Supplies the float math methods when std is not linked.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::kernel::{derive_constants, JumpKernel, KernelConstants, DEFAULT_GRID_RESOLUTION};
use crate::pwc::{energy, DataFunction, PiecewiseConstant};

/// Bisection tolerance in `x` for [`optimal_jump_location`].
pub const LOCATION_TOL: f64 = 1e-12;

/// Default number of grid points on `(0, c]` for [`equal_jump_verdict`].
pub const VERDICT_GRID_POINTS: usize = 10_000;

const MONOTONE_PROBES: usize = 1024;

/// The point where `g` crosses the average of its endpoint values on `[α, β]`.
///
/// For non-decreasing `g` this is `inf{x : g(x) ≥ (g(α) + g(β))/2}`, which is where a
/// single jump between the two plateau values must sit. Non-increasing data is handled
/// by negation. Monotonicity is probed on a uniform grid and, for sampled data, on every
/// node inside the interval.
pub fn optimal_jump_location(g: &DataFunction, alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
        return Err(domain_err!("need α < β, got [{alpha}, {beta}]"));
    }
    let sign = if g.value(beta) < g.value(alpha) { -1.0 } else { 1.0 };
    let f = |x: f64| sign * g.value(x);

    let mut prev = f(alpha);
    let mut check = |x: f64| -> Result<()> {
        let y = f(x);
        if y < prev - 1e-14 * prev.abs().max(1.0) {
            return Err(Error::NonMonotone(alpha, beta));
        }
        prev = y;
        Ok(())
    };
    if let DataFunction::Sampled(s) = g {
        for x in s.nodes().filter(|&x| x > alpha && x < beta) {
            check(x)?;
        }
        check(beta)?;
    } else {
        for j in 1..=MONOTONE_PROBES {
            check(alpha + (beta - alpha) * j as f64 / MONOTONE_PROBES as f64)?;
        }
    }

    let target = 0.5 * (f(alpha) + f(beta));
    if f(alpha) >= target {
        return Ok(alpha);
    }
    let (mut lo, mut hi) = (alpha, beta);
    while hi - lo > LOCATION_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_length(length: f64) -> Result<()> {
    if !(length.is_finite() && length > 0.0) {
        return Err(domain_err!("interval length must be positive, got {length}"));
    }
    Ok(())
}

/// The staircase `u_m(x) = kd` on `((k − ½)d, (k + ½)d]`, `d = L/m`, on `(0, L)`.
///
/// All `m` jumps have size `d`; the two boundary plateaus have half the interior width.
pub fn uniform_step_minimizer(length: f64, m: usize) -> Result<PiecewiseConstant> {
    check_length(length)?;
    if m == 0 {
        return Err(domain_err!("the staircase needs at least one jump"));
    }
    let d = length / m as f64;
    let breakpoints = (1..=m).map(|k| (k as f64 - 0.5) * d).collect();
    let values = (0..=m).map(|k| if k == m { length } else { k as f64 * d }).collect();
    PiecewiseConstant::new((0.0, length), breakpoints, values)
}

/// Energy per unit length of [`uniform_step_minimizer`] against `g(x) = x`.
///
/// Closed form for the rational kernel; other kernels are evaluated through
/// [`crate::pwc::energy`].
pub fn energy_of_m(length: f64, m: usize, lambda: f64, kernel: &JumpKernel) -> Result<f64> {
    check_length(length)?;
    if m == 0 {
        return Err(domain_err!("E(m) needs m ≥ 1"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(domain_err!("fidelity weight must be non-negative, got {lambda}"));
    }
    let kernel = kernel.validated()?;
    match kernel {
        JumpKernel::KwcRational { kappa } => {
            let d = length / m as f64;
            Ok(1.0 / (kappa * d + 1.0) + lambda * d * d / 24.0)
        }
        _ => {
            let u = uniform_step_minimizer(length, m)?;
            Ok(energy(&u, &DataFunction::IDENTITY, &kernel, lambda)?.total / length)
        }
    }
}

/// The fidelity weight at which one and two jumps cost the same on `(0, L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLambda {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "lambda_crit")]
    pub lambda: f64,
    pub m_pair: (usize, usize),
}

/// `λ = 32 / (L(L+1)(L+2))`, where `E(1) = E(2)` for `K(ρ) = ρ/(1+ρ)`.
pub fn critical_lambda(length: f64) -> Result<CriticalLambda> {
    check_length(length)?;
    Ok(CriticalLambda {
        length,
        lambda: 32.0 / (length * (length + 1.0) * (length + 2.0)),
        m_pair: (1, 2),
    })
}

/// The fidelity weight at which `E(m) = E(m + 1)` for the rational kernel with parameter `κ`.
///
/// Below it `m` jumps are cheaper, above it `m + 1`.
pub fn transition_lambda(length: f64, m: usize, kappa: f64) -> Result<f64> {
    check_length(length)?;
    if m == 0 {
        return Err(domain_err!("transition needs m ≥ 1"));
    }
    JumpKernel::kwc(kappa)?;
    let (m, kl) = (m as f64, kappa * length);
    Ok(24.0 * kappa * m * m * (m + 1.0) * (m + 1.0)
        / (length * (2.0 * m + 1.0) * (kl + m) * (kl + m + 1.0)))
}

/// The `m ∈ 1..=m_max` minimizing `E(m)`, smallest first on exact ties, with its energy.
pub fn optimal_jump_count(
    length: f64,
    lambda: f64,
    kernel: &JumpKernel,
    m_max: usize,
) -> Result<(usize, f64)> {
    let mut best = (0, f64::INFINITY);
    for m in 1..=m_max.max(1) {
        let e = energy_of_m(length, m, lambda, kernel)?;
        if e < best.1 {
            best = (m, e);
        }
    }
    Ok(best)
}

/// Upper bounds on the number of jumps of a minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kernel: JumpKernel,
    pub interval: (f64, f64),
    pub lambda: f64,
    #[serde(rename = "M")]
    pub range: f64,
    /// `⌊(b−a)λ/A_M⌋ + 1`, for general data.
    pub m_general: Option<u64>,
    /// `⌊(b−a)λ/(2C_M)⌋ + 1`, for monotone data.
    pub m_monotone: Option<u64>,
    pub constants: Option<KernelConstants>,
    /// Set when the kernel violates (K3), so the bounds only hold among
    /// piecewise-constant competitors.
    pub restricted_class: bool,
    /// Set when the kernel violates (K2) and no bound is available.
    pub k2_fails: bool,
}

/// `⌊r⌋ + 1`, robust to `r` landing a rounding error below an integer.
fn integer_part_plus_one(r: f64) -> u64 {
    (r + 1e-9 * r.max(1.0)).floor() as u64 + 1
}

/// Jump-count bounds on `(a, b)` with data oscillation at most `M`.
pub fn jump_bounds(
    kernel: &JumpKernel,
    a: f64,
    b: f64,
    lambda: f64,
    range: f64,
) -> Result<BoundReport> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain_err!("need a < b, got ({a}, {b})"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(domain_err!("fidelity weight must be non-negative, got {lambda}"));
    }
    let kernel = kernel.validated()?;
    let restricted_class = matches!(kernel, JumpKernel::Potts { .. });
    let mut report = BoundReport {
        kernel,
        interval: (a, b),
        lambda,
        range,
        m_general: None,
        m_monotone: None,
        constants: None,
        restricted_class,
        k2_fails: false,
    };
    match derive_constants(&kernel, range, DEFAULT_GRID_RESOLUTION) {
        Ok(c) => {
            let len = b - a;
            report.m_general = Some(integer_part_plus_one(len * lambda / c.jump_constant));
            report.m_monotone = Some(integer_part_plus_one(len * lambda / (2.0 * c.concavity)));
            report.constants = Some(c);
        }
        Err(Error::ConditionK2Fails { .. }) => report.k2_fails = true,
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Outcome of the two-jump cell analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The cell energy is minimized only by equal jumps or by merging into one jump.
    EqualJumpsForced,
    Inconclusive,
}

/// Sign pattern of `E′` on `(0, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    Positive,
    PositiveThenNegative,
    Negative,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EqualJumpReport {
    pub verdict: Verdict,
    pub pattern: SignPattern,
    pub grid_points: usize,
}

/// [`equal_jump_verdict_with`] on [`VERDICT_GRID_POINTS`] points.
pub fn equal_jump_verdict(kernel: &JumpKernel, c: f64, lambda: f64) -> Result<EqualJumpReport> {
    equal_jump_verdict_with(kernel, c, lambda, VERDICT_GRID_POINTS)
}

/// Numerical certificate that two adjacent jumps over linear data are equal.
///
/// On the cell `(−c, c)` with `g(x) = x` and outer values `±c`, a middle plateau at
/// height `z` costs `E(z) = Q_c(z) + (λ/2)(c³/6 + c z²/2)`, so
/// `E′(z) = (λ/2)c z + Q′_c(z)`. `E` is even, and when `E′` on `(0, c]` is positive,
/// negative, or positive then negative, its minimum sits at `z = 0` (equal jumps) or at
/// `|z| = c` (one jump). Any other pattern is inconclusive.
pub fn equal_jump_verdict_with(
    kernel: &JumpKernel,
    c: f64,
    lambda: f64,
    grid_points: usize,
) -> Result<EqualJumpReport> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(domain_err!("fidelity weight must be non-negative, got {lambda}"));
    }
    if grid_points < 2 {
        return Err(Error::Config("verdict grid needs at least 2 points".into()));
    }
    let kernel = kernel.validated()?;
    check_c(c)?;
    Ok(classify_cell(c, lambda, grid_points, &|z| {
        kernel.q_derivative(c, z).unwrap_or(f64::NAN)
    }))
}

fn check_c(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain_err!("half-width c must be positive, got {c}"));
    }
    Ok(())
}

/// Sign classification of `E′(z) = (λ/2)c z + q′(z)` on `grid_points` points of `(0, c]`,
/// for an arbitrary split-cost derivative `q′`.
pub fn classify_cell(
    c: f64,
    lambda: f64,
    grid_points: usize,
    q_prime: &dyn Fn(f64) -> f64,
) -> EqualJumpReport {
    let n = grid_points.max(2);
    let signs: Vec<bool> = (1..=n)
        .map(|j| {
            let z = if j == n { c } else { c * j as f64 / n as f64 };
            0.5 * lambda * c * z + q_prime(z) > 0.0
        })
        .collect();
    let turn = signs.iter().position(|&s| !s).unwrap_or(signs.len());
    let monotone_split = signs[turn..].iter().all(|&s| !s);
    let pattern = match (turn, monotone_split) {
        (t, _) if t == signs.len() => SignPattern::Positive,
        (0, true) => SignPattern::Negative,
        (_, true) => SignPattern::PositiveThenNegative,
        _ => SignPattern::Other,
    };
    let verdict = if pattern == SignPattern::Other {
        Verdict::Inconclusive
    } else {
        Verdict::EqualJumpsForced
    };
    EqualJumpReport {
        verdict,
        pattern,
        grid_points: n,
    }
}
