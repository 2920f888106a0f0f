//! Exhaustive global minimization of a discretized `TV_K + F` by dynamic programming.
//!
//! Candidates are piecewise constant with jumps only at cell boundaries and plateau values
//! on a finite level set. The objective
//! `Σ_cells (λ/2)∫_cell (u − g)² + Σ_boundaries K(|Δu|)` is minimized exactly over that
//! class in `O(N·L²)`, which certifies global optimality within the class and nothing
//! beyond it.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::kernel::JumpKernel;
use crate::pwc::{energy, DataFunction, EnergyBreakdown, PiecewiseConstant};

pub const MAX_CELLS: usize = 2000;
pub const MAX_LEVELS: usize = 400;
pub const MAX_FIXED_JUMPS: usize = 10;
pub const DEFAULT_LEVEL_COUNT: usize = 101;
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Extra jump counts above the optimum that are searched for ties.
const TIE_COUNT_MARGIN: usize = 2;

fn default_level_count() -> usize {
    DEFAULT_LEVEL_COUNT
}

fn default_tie_tolerance() -> f64 {
    DEFAULT_TIE_TOLERANCE
}

/// A discretized minimization problem.
///
/// Sampled data uses one cell per node (trapezoid-style cells centred on the nodes, with
/// the sample as the cell value). Analytic data needs `domain` (unless it carries one) and
/// `cells` uniform cells, on which `∫g` and `∫g²` are integrated exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleProblem {
    pub g: DataFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<usize>,
    pub kernel: JumpKernel,
    pub lambda: f64,
    /// Admissible plateau values. Defaults to `level_count` uniform values on `[min g, max g]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(default = "default_level_count")]
    pub level_count: usize,
    /// Values forced on the first and last cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_pin: Option<(f64, f64)>,
    #[serde(default = "default_tie_tolerance")]
    pub tie_tolerance: f64,
}

impl OracleProblem {
    pub fn new(g: DataFunction, kernel: JumpKernel, lambda: f64) -> Self {
        Self {
            g,
            domain: None,
            cells: None,
            kernel,
            lambda,
            levels: None,
            level_count: DEFAULT_LEVEL_COUNT,
            endpoint_pin: None,
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
        }
    }

    /// Analytic data on `cells` uniform cells of `domain`.
    pub fn analytic(
        g: DataFunction,
        domain: (f64, f64),
        cells: usize,
        kernel: JumpKernel,
        lambda: f64,
    ) -> Self {
        Self {
            domain: Some(domain),
            cells: Some(cells),
            ..Self::new(g, kernel, lambda)
        }
    }

    pub fn with_level_count(mut self, count: usize) -> Self {
        self.level_count = count;
        self
    }

    pub fn with_levels(mut self, levels: Vec<f64>) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn with_endpoint_pin(mut self, left: f64, right: f64) -> Self {
        self.endpoint_pin = Some((left, right));
        self
    }
}

/// A minimizer within the discrete class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub minimizer: PiecewiseConstant,
    pub energy: EnergyBreakdown,
    pub jump_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub minimizer: PiecewiseConstant,
    pub energy: EnergyBreakdown,
    pub jump_count: usize,
    /// Best candidates with other jump counts whose energy is within the tie tolerance.
    pub ties: Vec<Candidate>,
    pub cells: usize,
    pub levels: usize,
}

/// Cell geometry and data moments.
struct Discretization {
    boundaries: Vec<f64>,
    widths: Vec<f64>,
    first: Vec<f64>,
    second: Vec<f64>,
    levels: Vec<f64>,
    pin: Option<(usize, usize)>,
}

impl Discretization {
    fn build(p: &OracleProblem) -> Result<Self> {
        if !(p.lambda.is_finite() && p.lambda >= 0.0) {
            return Err(domain_err!("fidelity weight must be non-negative, got {}", p.lambda));
        }
        if !(p.tie_tolerance >= 0.0) {
            return Err(Error::Config("tie tolerance must be non-negative".into()));
        }
        let (boundaries, widths, first, second, lo, hi) = match &p.g {
            DataFunction::Sampled(s) => {
                let n = s.len();
                let h = s.spacing();
                let (a, b) = s.domain();
                let mut bounds = Vec::with_capacity(n + 1);
                bounds.push(a);
                bounds.extend((0..n - 1).map(|i| s.x(i) + 0.5 * h));
                bounds.push(b);
                let widths = s.trapezoid_weights();
                let first = widths.iter().zip(s.samples()).map(|(w, g)| w * g).collect();
                let second = widths.iter().zip(s.samples()).map(|(w, g)| w * g * g).collect();
                (bounds, widths, first, second, s.min(), s.max())
            }
            g => {
                let (a, b) = p
                    .domain
                    .or_else(|| g.domain())
                    .ok_or_else(|| Error::Config("analytic data needs a domain".into()))?;
                if !(a < b) {
                    return Err(domain_err!("domain ({a}, {b}) must satisfy a < b"));
                }
                let n = p
                    .cells
                    .ok_or_else(|| Error::Config("analytic data needs a cell count".into()))?;
                if n == 0 {
                    return Err(Error::Config("cell count must be positive".into()));
                }
                let h = (b - a) / n as f64;
                let bounds: Vec<f64> =
                    (0..=n).map(|k| if k == n { b } else { a + k as f64 * h }).collect();
                let widths = bounds.windows(2).map(|w| w[1] - w[0]).collect();
                let (first, second): (Vec<f64>, Vec<f64>) =
                    bounds.windows(2).map(|w| g.moments(w[0], w[1])).unzip();
                let (lo, hi) = data_range(g, &bounds);
                (bounds, widths, first, second, lo, hi)
            }
        };
        let n = widths.len();
        if n > MAX_CELLS {
            return Err(Error::TooLarge(alloc::format!(
                "{n} cells exceed the limit of {MAX_CELLS}; use a coarser grid"
            )));
        }

        let mut levels = match &p.levels {
            Some(v) => {
                if v.is_empty() {
                    return Err(Error::Config("level set is empty".into()));
                }
                if v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config("levels must be finite and strictly increasing".into()));
                }
                let slack = 1e-12 * (hi - lo).abs().max(1.0);
                if v[0] < lo - slack || v[v.len() - 1] > hi + slack {
                    return Err(Error::Config(alloc::format!(
                        "levels must lie within the data range [{lo}, {hi}]"
                    )));
                }
                v.clone()
            }
            None => uniform_levels(lo, hi, p.level_count)?,
        };
        if levels.len() > MAX_LEVELS {
            return Err(Error::TooLarge(alloc::format!(
                "{} levels exceed the limit of {MAX_LEVELS}; use coarser levels",
                levels.len()
            )));
        }
        let pin = match p.endpoint_pin {
            Some((left, right)) => {
                let l = insert_level(&mut levels, left)?;
                let r = insert_level(&mut levels, right)?;
                // Inserting `right` may shift `left`.
                let l = if levels[l] == left { l } else { l + 1 };
                Some((l, r))
            }
            None => None,
        };
        Ok(Self {
            boundaries,
            widths,
            first,
            second,
            levels,
            pin,
        })
    }

    fn cells(&self) -> usize {
        self.widths.len()
    }

    /// `cost[i * L + l]`: fidelity of level `l` on cell `i`.
    fn fidelity_table(&self, lambda: f64) -> Vec<f64> {
        let nl = self.levels.len();
        let mut cost = vec![0.0; self.cells() * nl];
        for i in 0..self.cells() {
            for (l, &u) in self.levels.iter().enumerate() {
                let raw = self.widths[i] * u * u - 2.0 * u * self.first[i] + self.second[i];
                cost[i * nl + l] = 0.5 * lambda * raw.max(0.0);
            }
        }
        if let Some((left, right)) = self.pin {
            let last = self.cells() - 1;
            for l in 0..nl {
                if l != left {
                    cost[l] = f64::INFINITY;
                }
                if l != right {
                    cost[last * nl + l] = f64::INFINITY;
                }
            }
        }
        cost
    }

    fn transition_table(&self, kernel: &JumpKernel) -> Vec<f64> {
        let nl = self.levels.len();
        let mut t = vec![0.0; nl * nl];
        for (p, &a) in self.levels.iter().enumerate() {
            for (q, &b) in self.levels.iter().enumerate() {
                t[p * nl + q] = kernel.cost(b - a);
            }
        }
        t
    }

    fn to_function(&self, path: &[usize]) -> Result<PiecewiseConstant> {
        let n = self.cells();
        let mut breakpoints = Vec::new();
        let mut values = vec![self.levels[path[0]]];
        for i in 1..n {
            if path[i] != path[i - 1] {
                breakpoints.push(self.boundaries[i]);
                values.push(self.levels[path[i]]);
            }
        }
        PiecewiseConstant::new((self.boundaries[0], self.boundaries[n]), breakpoints, values)
    }
}

fn data_range(g: &DataFunction, bounds: &[f64]) -> (f64, f64) {
    if let DataFunction::Steps(u) = g {
        return (u.min_value(), u.max_value());
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for w in bounds.windows(2) {
        for k in 0..=8 {
            let y = g.value(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
            lo = lo.min(y);
            hi = hi.max(y);
        }
    }
    (lo, hi)
}

fn uniform_levels(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Config("level count must be positive".into()));
    }
    if count == 1 || hi == lo {
        return Ok(vec![0.5 * (lo + hi)]);
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k + 1 == count { hi } else { lo + k as f64 * step })
        .collect())
}

fn insert_level(levels: &mut Vec<f64>, value: f64) -> Result<usize> {
    if !value.is_finite() {
        return Err(domain_err!("pinned value must be finite, got {value}"));
    }
    let k = levels.partition_point(|&x| x < value);
    if levels.get(k) != Some(&value) {
        levels.insert(k, value);
    }
    Ok(k)
}

/// Plain DP: optimal path over level sequences.
fn best_path(fid: &[f64], trans: &[f64], n: usize, nl: usize, end: Option<usize>) -> Vec<usize> {
    let mut back = vec![0u32; n * nl];
    let mut prev: Vec<f64> = fid[..nl].to_vec();
    let mut cur = vec![0.0; nl];
    for i in 1..n {
        for l in 0..nl {
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for (q, &pv) in prev.iter().enumerate() {
                let c = pv + trans[q * nl + l];
                if c < best {
                    best = c;
                    arg = q;
                }
            }
            cur[l] = best + fid[i * nl + l];
            back[i * nl + l] = arg as u32;
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    let last = end.unwrap_or_else(|| argmin(&prev));
    let mut path = vec![0; n];
    path[n - 1] = last;
    for i in (1..n).rev() {
        path[i - 1] = back[i * nl + path[i]] as usize;
    }
    path
}

fn argmin(v: &[f64]) -> usize {
    let mut arg = 0;
    for (k, &x) in v.iter().enumerate() {
        if x < v[arg] {
            arg = k;
        }
    }
    arg
}

/// DP with the number of level changes in the state, for counts `0..=max_jumps`.
///
/// Returns, per count, the optimal path with exactly that many changes (if feasible).
fn paths_by_count(
    fid: &[f64],
    trans: &[f64],
    n: usize,
    nl: usize,
    max_jumps: usize,
    end: Option<usize>,
) -> Vec<Option<Vec<usize>>> {
    let nj = max_jumps + 1;
    let idx = |j: usize, l: usize| j * nl + l;
    // Backpointer: previous level, with the count implied by whether it changed.
    let mut back = vec![0u32; n * nj * nl];
    let mut prev = vec![f64::INFINITY; nj * nl];
    prev[..nl].copy_from_slice(&fid[..nl]);
    let mut cur = vec![f64::INFINITY; nj * nl];
    for i in 1..n {
        for j in 0..nj {
            for l in 0..nl {
                let mut best = prev[idx(j, l)];
                let mut arg = l;
                if j > 0 {
                    for q in 0..nl {
                        if q == l {
                            continue;
                        }
                        let c = prev[idx(j - 1, q)] + trans[q * nl + l];
                        if c < best {
                            best = c;
                            arg = q;
                        }
                    }
                }
                cur[idx(j, l)] = best + fid[i * nl + l];
                back[(i * nj + j) * nl + l] = arg as u32;
            }
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    (0..nj)
        .map(|j| {
            let last = match end {
                Some(e) => e,
                None => argmin(&prev[idx(j, 0)..idx(j, 0) + nl]),
            };
            if !prev[idx(j, last)].is_finite() {
                return None;
            }
            let mut path = vec![0; n];
            path[n - 1] = last;
            let mut jj = j;
            for i in (1..n).rev() {
                let q = back[(i * nj + jj) * nl + path[i]] as usize;
                if q != path[i] {
                    jj -= 1;
                }
                path[i - 1] = q;
            }
            Some(path)
        })
        .collect()
}

fn candidate(p: &OracleProblem, d: &Discretization, path: &[usize]) -> Result<Candidate> {
    let minimizer = d.to_function(path)?;
    let energy = energy(&minimizer, &p.g, &p.kernel, p.lambda)?;
    Ok(Candidate {
        jump_count: minimizer.jump_count(),
        minimizer,
        energy,
    })
}

/// Global minimizer with ties among other jump counts.
///
/// Ties are the best candidates for each jump count up to two above the optimum whose
/// energy is within `tie_tolerance` (relative) of the optimum. Within one jump count only
/// the best candidate is reported.
pub fn solve(problem: &OracleProblem) -> Result<OracleResult> {
    let kernel = problem.kernel.validated()?;
    let d = Discretization::build(problem)?;
    let (n, nl) = (d.cells(), d.levels.len());
    let fid = d.fidelity_table(problem.lambda);
    let trans = d.transition_table(&kernel);
    let end = d.pin.map(|p| p.1);

    let path = best_path(&fid, &trans, n, nl, end);
    let best = candidate(problem, &d, &path)?;

    let cap = (best.jump_count + TIE_COUNT_MARGIN).min(n.saturating_sub(1));
    let mut ties = Vec::new();
    let threshold = best.energy.total + problem.tie_tolerance * best.energy.total.abs().max(1e-300);
    for (j, path) in paths_by_count(&fid, &trans, n, nl, cap, end).into_iter().enumerate() {
        if j == best.jump_count {
            continue;
        }
        if let Some(path) = path {
            let c = candidate(problem, &d, &path)?;
            if c.jump_count == j && c.energy.total <= threshold {
                ties.push(c);
            }
        }
    }
    Ok(OracleResult {
        minimizer: best.minimizer,
        energy: best.energy,
        jump_count: best.jump_count,
        ties,
        cells: n,
        levels: nl,
    })
}

/// Optimum among candidates with exactly `m` level changes.
pub fn best_with_m_jumps(problem: &OracleProblem, m: usize) -> Result<OracleResult> {
    let kernel = problem.kernel.validated()?;
    if m > MAX_FIXED_JUMPS {
        return Err(Error::TooLarge(alloc::format!(
            "jump count {m} exceeds the limit of {MAX_FIXED_JUMPS}"
        )));
    }
    let d = Discretization::build(problem)?;
    let (n, nl) = (d.cells(), d.levels.len());
    if m >= n {
        return Err(Error::Config(alloc::format!("{m} jumps do not fit into {n} cells")));
    }
    let fid = d.fidelity_table(problem.lambda);
    let trans = d.transition_table(&kernel);
    let paths = paths_by_count(&fid, &trans, n, nl, m, d.pin.map(|p| p.1));
    let path = paths
        .into_iter()
        .nth(m)
        .flatten()
        .ok_or_else(|| Error::Config(alloc::format!("no admissible candidate with {m} jumps")))?;
    let c = candidate(problem, &d, &path)?;
    Ok(OracleResult {
        jump_count: c.jump_count,
        minimizer: c.minimizer,
        energy: c.energy,
        ties: Vec::new(),
        cells: n,
        levels: nl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GridSignal;

    #[test]
    fn constant_data() {
        let g = GridSignal::from_fn(0.0, 1.0, 50, |_| 0.3).unwrap();
        let p = OracleProblem::new(DataFunction::Sampled(g), JumpKernel::KWC, 5.0);
        let r = solve(&p).unwrap();
        assert_eq!(r.minimizer.values(), &[0.3]);
        assert_eq!(r.energy.total, 0.0);
    }

    #[test]
    fn large_lambda_recovers_step() {
        let step = PiecewiseConstant::new((0.0, 1.0), vec![0.5], vec![0.0, 1.0]).unwrap();
        let p = OracleProblem::analytic(
            DataFunction::Steps(step.clone()),
            (0.0, 1.0),
            100,
            JumpKernel::KWC,
            1e3,
        )
        .with_level_count(11);
        let r = solve(&p).unwrap();
        assert_eq!(r.minimizer, step);
        assert!((r.energy.total - 0.5).abs() < 1e-12);
    }

    #[test]
    fn best_constant_is_nearest_level_to_mean() {
        let p = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), 40, JumpKernel::KWC, 2.0)
            .with_levels(vec![0.0, 0.3, 0.45, 0.8, 1.0]);
        let r = best_with_m_jumps(&p, 0).unwrap();
        assert_eq!(r.minimizer.values(), &[0.45]);
        assert!(best_with_m_jumps(&p, 40).is_err());
        assert!(best_with_m_jumps(&p, 11).is_err());
    }

    #[test]
    fn size_limits() {
        let p = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), 2001, JumpKernel::KWC, 1.0);
        assert!(matches!(solve(&p), Err(Error::TooLarge(_))));
        let p = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), 10, JumpKernel::KWC, 1.0)
            .with_level_count(401);
        assert!(matches!(solve(&p), Err(Error::TooLarge(_))));
    }

    #[test]
    fn pinned_values_are_inserted() {
        let p = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), 20, JumpKernel::KWC, 50.0)
            .with_levels(vec![0.25, 0.5, 0.75])
            .with_endpoint_pin(0.1, 0.9);
        let r = solve(&p).unwrap();
        assert_eq!(r.minimizer.values()[0], 0.1);
        assert_eq!(*r.minimizer.values().last().unwrap(), 0.9);
    }
}
