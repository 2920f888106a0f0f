//! Jump extraction from grid functions.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};
use crate::grid::GridSignal;
use crate::pwc::PiecewiseConstant;

/// A jump found on a grid: centroid position and signed total size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub position: f64,
    pub size: f64,
    /// Index of the first and last edge merged into this jump.
    pub edges: (usize, usize),
}

/// Edges with `|u_{i+1} − u_i| > threshold`; runs of adjacent such edges merge into one
/// jump with the summed size, placed at the `|Δu|`-weighted centroid of the edge midpoints.
pub fn jump_census(u: &GridSignal, threshold: f64) -> Result<Vec<Jump>> {
    if !(threshold > 0.0) {
        return Err(domain_err!("census threshold must be positive, got {threshold}"));
    }
    let h = u.spacing();
    let s = u.samples();
    let mut jumps: Vec<Jump> = Vec::new();
    let mut run: Option<(usize, f64, f64, f64)> = None; // (first edge, size, Σ|d|x, Σ|d|)
    for e in 0..s.len() - 1 {
        let d = s[e + 1] - s[e];
        if d.abs() > threshold {
            let x = u.x(e) + 0.5 * h;
            let r = run.get_or_insert((e, 0.0, 0.0, 0.0));
            r.1 += d;
            r.2 += d.abs() * x;
            r.3 += d.abs();
        } else if let Some((first, size, mx, m)) = run.take() {
            jumps.push(Jump {
                position: mx / m,
                size,
                edges: (first, e - 1),
            });
        }
    }
    if let Some((first, size, mx, m)) = run {
        jumps.push(Jump {
            position: mx / m,
            size,
            edges: (first, s.len() - 2),
        });
    }
    Ok(jumps)
}

/// Plateaus between censused jumps, as `(first node, last node)` index ranges.
pub fn plateau_ranges(u: &GridSignal, jumps: &[Jump]) -> Vec<(usize, usize)> {
    let mut ranges = Vec::with_capacity(jumps.len() + 1);
    let mut start = 0;
    for j in jumps {
        ranges.push((start, j.edges.0));
        start = j.edges.1 + 1;
    }
    ranges.push((start, u.len() - 1));
    ranges
}

/// `max − min` of `u` over the nodes of each plateau between censused jumps.
pub fn plateau_variations(u: &GridSignal, jumps: &[Jump]) -> Vec<f64> {
    let s = u.samples();
    plateau_ranges(u, jumps)
        .into_iter()
        .map(|(a, b)| {
            let seg = &s[a..=b];
            let hi = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = seg.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect()
}

/// Piecewise-constant fit: breakpoints at the censused positions, plateau values the
/// trapezoid-weighted means of `u` over the nodes of each plateau.
pub fn piecewise_fit(u: &GridSignal, threshold: f64) -> Result<PiecewiseConstant> {
    let jumps = jump_census(u, threshold)?;
    let w = u.trapezoid_weights();
    let s = u.samples();
    let values = plateau_ranges(u, &jumps)
        .into_iter()
        .map(|(a, b)| {
            let mass: f64 = w[a..=b].iter().sum();
            let sum: f64 = (a..=b).map(|i| w[i] * s[i]).sum();
            sum / mass
        })
        .collect();
    let breakpoints = jumps.iter().map(|j| j.position).collect();
    PiecewiseConstant::new(u.domain(), breakpoints, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_sampled_steps() {
        let pc = PiecewiseConstant::new((0.0, 1.0), alloc::vec![0.3, 0.7], alloc::vec![0.0, 1.0, 0.4])
            .unwrap();
        let u = pc.sample(1001).unwrap();
        let jumps = jump_census(&u, 0.05).unwrap();
        assert_eq!(jumps.len(), 2);
        assert!((jumps[0].position - 0.3).abs() <= u.spacing());
        assert!((jumps[0].size - 1.0).abs() < 1e-15);
        assert!((jumps[1].position - 0.7).abs() <= u.spacing());
        assert!((jumps[1].size + 0.6).abs() < 1e-15);
        let fit = piecewise_fit(&u, 0.05).unwrap();
        for (a, b) in fit.values().iter().zip([0.0, 1.0, 0.4]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_signal_has_no_jumps() {
        let u = GridSignal::from_fn(0.0, 1.0, 1000, |x| x * x).unwrap();
        assert!(jump_census(&u, 0.01).unwrap().is_empty());
        assert!(jump_census(&u, 0.0).is_err());
    }

    #[test]
    fn adjacent_edges_merge() {
        let u = GridSignal::new(0.0, 1.0, alloc::vec![0.0, 0.0, 0.5, 1.0, 1.0]).unwrap();
        let jumps = jump_census(&u, 0.1).unwrap();
        assert_eq!(jumps.len(), 1);
        assert_eq!(jumps[0].size, 1.0);
        assert!((jumps[0].position - 0.5).abs() < 1e-15);
        assert_eq!(jumps[0].edges, (1, 2));
    }
}
