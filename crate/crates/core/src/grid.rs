//! Uniformly sampled functions on an interval.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};

/// Samples of a function at `n` uniform nodes `x_i = a + i h`, `h = (b - a) / (n - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSignal {
    domain: (f64, f64),
    samples: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    domain: (f64, f64),
    samples: Vec<f64>,
}

impl TryFrom<RawGrid> for GridSignal {
    type Error = Error;

    fn try_from(raw: RawGrid) -> Result<Self> {
        GridSignal::new(raw.domain.0, raw.domain.1, raw.samples)
    }
}

impl GridSignal {
    pub fn new(a: f64, b: f64, samples: Vec<f64>) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(domain_err!("grid domain ({a}, {b}) must satisfy a < b"));
        }
        if samples.len() < 2 {
            return Err(Error::Invalid(alloc::format!(
                "grid signal needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        Ok(Self {
            domain: (a, b),
            samples,
        })
    }

    /// Samples `f` at `n` uniform nodes of `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(alloc::format!(
                "grid signal needs at least 2 samples, got {n}"
            )));
        }
        let h = (b - a) / (n - 1) as f64;
        let samples = (0..n).map(|i| f(node(a, b, h, n, i))).collect();
        Self::new(a, b, samples)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.domain.1 - self.domain.0) / (self.len() - 1) as f64
    }

    /// Position of node `i`; the last node is exactly `b`.
    pub fn x(&self, i: usize) -> f64 {
        node(self.domain.0, self.domain.1, self.spacing(), self.len(), i)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Same grid, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(Error::Invalid(alloc::format!(
                "expected {} samples, got {}",
                self.len(),
                samples.len()
            )));
        }
        Self::new(self.domain.0, self.domain.1, samples)
    }

    /// Trapezoid quadrature weights: `h/2` at both ends, `h` inside.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let n = self.len();
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Piecewise-linear interpolation, constant extrapolation outside the domain.
    pub fn interpolate(&self, x: f64) -> f64 {
        let (a, b) = self.domain;
        let n = self.len();
        if x <= a {
            return self.samples[0];
        }
        if x >= b {
            return self.samples[n - 1];
        }
        let t = (x - a) / self.spacing();
        let i = (t as usize).min(n - 2);
        let frac = t - i as f64;
        self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac
    }

    /// Largest absolute difference to another signal on the same grid.
    pub fn sup_distance(&self, other: &GridSignal) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    /// `true` if the samples never decrease.
    pub fn is_non_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1] >= w[0])
    }
}

fn node(a: f64, b: f64, h: f64, n: usize, i: usize) -> f64 {
    if i + 1 == n {
        b
    } else {
        a + i as f64 * h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn nodes_and_weights() {
        let g = GridSignal::from_fn(0.0, 1.0, 5, |x| x).unwrap();
        assert_eq!(g.samples(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let w = g.trapezoid_weights();
        assert_eq!(w, vec![0.125, 0.25, 0.25, 0.25, 0.125]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSignal::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(GridSignal::new(1.0, 1.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn interpolation_is_linear_between_nodes() {
        let g = GridSignal::new(0.0, 2.0, vec![0.0, 1.0, 4.0]).unwrap();
        assert_eq!(g.interpolate(0.5), 0.5);
        assert_eq!(g.interpolate(1.5), 2.5);
        assert_eq!(g.interpolate(-1.0), 0.0);
        assert_eq!(g.interpolate(3.0), 4.0);
    }
}
