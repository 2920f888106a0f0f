//! Chambolle–Pock solver for the weighted-TV proximal problem of one time step.
//!
//! Solves `min_u Σ_e b_e |u_{e+1} − u_e| + (α/2) Σ_i w_i (u_i − f_i)²`, optionally with
//! the end values fixed. The primal space carries the inner product weighted by `w`,
//! the dual space the one weighted by `h`, and `D = Δ/h`, so `‖D‖² ≤ 4/h²`. Steps are
//! fixed and the extrapolation parameter is `θ = 1`.

pub(crate) struct ProxProblem<'a> {
    /// Node weights `w_i`.
    pub weights: &'a [f64],
    /// Dual bounds `b_e ≥ 0` per edge.
    pub bounds: &'a [f64],
    pub h: f64,
    pub alpha: f64,
    pub target: &'a [f64],
    pub pinned: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CpSettings {
    pub tau: f64,
    pub s: f64,
    pub max_iters: usize,
    pub gap_tol: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CpOutcome {
    pub iterations: usize,
    pub gap: f64,
}

const GAP_CHECK_EVERY: usize = 10;

impl ProxProblem<'_> {
    fn primal(&self, u: &[f64]) -> f64 {
        let tv: f64 = u
            .windows(2)
            .zip(self.bounds)
            .map(|(w, b)| b * (w[1] - w[0]).abs())
            .sum();
        let fid: f64 = u
            .iter()
            .zip(self.target)
            .zip(self.weights)
            .map(|((u, f), w)| w * (u - f) * (u - f))
            .sum();
        tv + 0.5 * self.alpha * fid
    }

    /// Dual objective of a feasible `p`, minimizing the Lagrangian over `u` in closed form.
    fn dual(&self, p: &[f64]) -> f64 {
        let n = self.weights.len();
        let mut total = 0.0;
        for i in 0..n {
            let q = divergence(p, i, n);
            let (w, f) = (self.weights[i], self.target[i]);
            let pin = match self.pinned {
                Some((left, _)) if i == 0 => Some(left),
                Some((_, right)) if i == n - 1 => Some(right),
                _ => None,
            };
            total += match pin {
                Some(b) => q * b + 0.5 * self.alpha * w * (b - f) * (b - f),
                None => q * f - q * q / (2.0 * self.alpha * w),
            };
        }
        total
    }

    /// Duality gap of the pair `(u, p)`.
    pub fn gap(&self, u: &[f64], p: &[f64]) -> f64 {
        self.primal(u) - self.dual(p)
    }

    fn prox_primal(&self, u: &mut [f64], tau: f64) {
        let ta = tau * self.alpha;
        for (ui, fi) in u.iter_mut().zip(self.target) {
            *ui = (*ui + ta * fi) / (1.0 + ta);
        }
        if let Some((left, right)) = self.pinned {
            u[0] = left;
            let last = u.len() - 1;
            u[last] = right;
        }
    }
}

/// `p_{i−1} − p_i` with `p_{−1} = p_{n−1} = 0`, i.e. `w_i (D*p)_i`.
#[inline]
fn divergence(p: &[f64], i: usize, n: usize) -> f64 {
    let left = if i > 0 { p[i - 1] } else { 0.0 };
    let right = if i + 1 < n { p[i] } else { 0.0 };
    left - right
}

/// Runs the primal–dual iteration from the warm start `(u, p)`.
///
/// Stops once the duality gap, checked every ten iterations, falls below `gap_tol`, or
/// after `max_iters` iterations. At least one check period always runs, so a warm start
/// keeps improving across time steps even when it already meets the tolerance. `p` must
/// have one entry per edge.
pub(crate) fn solve(
    prob: &ProxProblem<'_>,
    u: &mut [f64],
    p: &mut [f64],
    settings: &CpSettings,
    scratch: &mut [f64],
) -> CpOutcome {
    let n = u.len();
    debug_assert_eq!(p.len() + 1, n);
    debug_assert_eq!(scratch.len(), 2 * n);
    for (pe, b) in p.iter_mut().zip(prob.bounds) {
        *pe = pe.clamp(-b, *b);
    }
    prob.prox_primal(u, 0.0);

    let mut gap = f64::INFINITY;
    let (ubar, uold) = scratch.split_at_mut(n);
    ubar.copy_from_slice(u);
    let (tau, s) = (settings.tau, settings.s);
    let inv_h = 1.0 / prob.h;

    let mut it = 0;
    while it < settings.max_iters {
        for e in 0..n - 1 {
            let b = prob.bounds[e];
            p[e] = (p[e] + s * (ubar[e + 1] - ubar[e]) * inv_h).clamp(-b, b);
        }
        uold.copy_from_slice(u);
        for i in 0..n {
            u[i] -= tau * divergence(p, i, n) / prob.weights[i];
        }
        prob.prox_primal(u, tau);
        for i in 0..n {
            ubar[i] = 2.0 * u[i] - uold[i];
        }
        it += 1;
        if it % GAP_CHECK_EVERY == 0 || it == settings.max_iters {
            gap = prob.gap(u, p);
            if gap <= settings.gap_tol {
                break;
            }
        }
    }
    CpOutcome {
        iterations: it,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn weights(n: usize, h: f64) -> Vec<f64> {
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }

    #[test]
    fn converges_on_step_with_small_gap() {
        let n = 200;
        let h = 1.0 / (n - 1) as f64;
        let w = weights(n, h);
        let f: Vec<f64> = (0..n).map(|i| if i < n / 2 { 0.0 } else { 1.0 }).collect();
        let bounds = vec![0.01; n - 1];
        let prob = ProxProblem {
            weights: &w,
            bounds: &bounds,
            h,
            alpha: 1.0,
            target: &f,
            pinned: None,
        };
        let mut u = f.clone();
        let mut p = vec![0.0; n - 1];
        let mut scratch = vec![0.0; 2 * n];
        let settings = CpSettings {
            tau: h / 2.0,
            s: h / 2.0,
            max_iters: 100_000,
            gap_tol: 1e-12,
        };
        let out = solve(&prob, &mut u, &mut p, &settings, &mut scratch);
        assert!(out.gap <= 1e-12, "{out:?}");
        // Two plateaus: shift 2·b/(α·½) toward each other.
        assert!((u[0] - 0.02).abs() < 1e-5, "{}", u[0]);
        assert!((u[n - 1] - 0.98).abs() < 1e-5);
    }

    #[test]
    fn zero_bounds_reduce_to_fidelity() {
        let n = 10;
        let h = 1.0 / 9.0;
        let w = weights(n, h);
        let f: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let bounds = vec![0.0; n - 1];
        let prob = ProxProblem {
            weights: &w,
            bounds: &bounds,
            h,
            alpha: 3.0,
            target: &f,
            pinned: None,
        };
        let mut u = vec![0.0; n];
        let mut p = vec![0.0; n - 1];
        let mut scratch = vec![0.0; 2 * n];
        let settings = CpSettings {
            tau: h / 2.0,
            s: h / 2.0,
            max_iters: 10_000,
            gap_tol: 1e-14,
        };
        solve(&prob, &mut u, &mut p, &settings, &mut scratch);
        for (a, b) in u.iter().zip(&f) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
