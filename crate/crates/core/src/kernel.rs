//! Jump-cost kernels `K(ρ)` and the constants that control jump counts.
//!
//! A kernel assigns a cost to a jump of size `ρ ≥ 0`. The structural
//! conditions used throughout the crate are
//!
//! * (K1) `K(0) = 0` and `K` non-decreasing,
//! * (K2) `K(ρ₁) + K(ρ₂) ≥ K(ρ₁ + ρ₂) + C_M ρ₁ ρ₂` for `ρ₁ + ρ₂ ≤ M`, with `C_M > 0`,
//! * (K3) `K(ρ)/ρ → 1` as `ρ → 0`,
//! * (K3w) `K(ρ) ≥ c_M ρ` on `[0, M]` with `c_M > 0`.
//!
//! Verdicts here are sampled on grids, not proved.

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};

/// Default per-axis resolution of the `(ρ₁, ρ₂)` triangle used for `C_M`.
pub const DEFAULT_GRID_RESOLUTION: usize = 2000;

/// Smallest `ρ` probed when estimating `lim K(ρ)/ρ`.
const SMALL_RHO: f64 = 1e-8;

/// A concave-type jump cost.
///
/// Serialized as `{"kind": "kwc", "kappa": 1.0}`, `{"kind": "linear"}` or
/// `{"kind": "potts", "height": 1.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JumpKernel {
    /// `K(ρ) = ρ / (1 + κ ρ)`.
    #[serde(rename = "kwc")]
    KwcRational { kappa: f64 },
    /// `K(ρ) = ρ`, i.e. plain total variation.
    Linear,
    /// `K(0) = 0`, `K(ρ) = height` for `ρ > 0`.
    Potts { height: f64 },
}

impl JumpKernel {
    /// The kernel `ρ/(1+ρ)` obtained as the singular limit of the KWC energy.
    pub const KWC: JumpKernel = JumpKernel::KwcRational { kappa: 1.0 };

    pub fn kwc(kappa: f64) -> Result<Self> {
        JumpKernel::KwcRational { kappa }.validated()
    }

    pub fn potts(height: f64) -> Result<Self> {
        JumpKernel::Potts { height }.validated()
    }

    /// Checks the kernel parameters.
    pub fn validated(self) -> Result<Self> {
        match self {
            JumpKernel::KwcRational { kappa } if !(kappa.is_finite() && kappa > 0.0) => {
                Err(domain_err!("kwc kernel needs kappa > 0, got {kappa}"))
            }
            JumpKernel::Potts { height } if !(height.is_finite() && height > 0.0) => {
                Err(domain_err!("potts kernel needs height > 0, got {height}"))
            }
            k => Ok(k),
        }
    }

    /// `K(ρ)`, rejecting negative or non-finite `ρ`.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) || rho.is_infinite() {
            return Err(domain_err!("kernel argument must be a finite ρ ≥ 0, got {rho}"));
        }
        Ok(self.cost(rho))
    }

    /// Cost of a jump with signed size `delta`, i.e. `K(|delta|)`.
    #[inline]
    pub fn cost(&self, delta: f64) -> f64 {
        let rho = delta.abs();
        match *self {
            JumpKernel::KwcRational { kappa } => rho / (1.0 + kappa * rho),
            JumpKernel::Linear => rho,
            JumpKernel::Potts { height } => {
                if rho > 0.0 {
                    height
                } else {
                    0.0
                }
            }
        }
    }

    /// Limit of the (K2) ratio `[K(ρ₁)+K(ρ₂)−K(ρ₁+ρ₂)]/(ρ₁ρ₂)` at the origin, where known.
    fn corner_limit(&self) -> Option<f64> {
        match *self {
            JumpKernel::KwcRational { kappa } => Some(2.0 * kappa),
            JumpKernel::Linear => Some(0.0),
            JumpKernel::Potts { .. } => None,
        }
    }

    /// Closed form of `C_M` for the rational kernel: the (K2) ratio at `ρ₁ = ρ₂ = M/2`,
    /// `4κ / ((2 + κM)(1 + κM))`.
    pub fn closed_form_concavity(&self, range: f64) -> Option<f64> {
        match *self {
            JumpKernel::KwcRational { kappa } => {
                let km = kappa * range;
                Some(4.0 * kappa / ((2.0 + km) * (1.0 + km)))
            }
            _ => None,
        }
    }

    /// `Q_c(z) = K(c − z) + K(c + z)` on `[−c, c]`.
    pub fn q_function(&self, c: f64, z: f64) -> Result<f64> {
        check_q_args(c, z)?;
        Ok(self.cost(c - z) + self.cost(c + z))
    }

    /// `Q'_c(z)`. Closed form for the rational kernel, central differences otherwise.
    ///
    /// With `c' = c + 1/κ` the rational kernel gives
    /// `Q'_c(z) = −4 c' z / (κ² (c'² − z²)²)`.
    pub fn q_derivative(&self, c: f64, z: f64) -> Result<f64> {
        check_q_args(c, z)?;
        Ok(match *self {
            JumpKernel::KwcRational { kappa } => {
                let cp = c + 1.0 / kappa;
                let den = cp * cp - z * z;
                -4.0 * cp * z / (kappa * kappa * den * den)
            }
            _ => self.q_finite_difference(c, z),
        })
    }

    fn q_finite_difference(&self, c: f64, z: f64) -> f64 {
        let step = 1e-6 * c.max(1e-3);
        let lo = (z - step).max(-c);
        let hi = (z + step).min(c);
        (self.cost(c - hi) + self.cost(c + hi) - self.cost(c - lo) - self.cost(c + lo)) / (hi - lo)
    }
}

fn check_q_args(c: f64, z: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        return Err(domain_err!("Q_c needs c > 0, got {c}"));
    }
    if !(z.abs() <= c) {
        return Err(domain_err!("Q_c is defined for |z| ≤ c = {c}, got z = {z}"));
    }
    Ok(())
}

/// Constants of a kernel on the range `[0, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    /// `M`, the bound on total jump mass.
    #[serde(rename = "M")]
    pub range: f64,
    /// `C_M`, the modulus in (K2).
    #[serde(rename = "C_M")]
    pub concavity: f64,
    /// `c_M`, the slope in (K3w).
    #[serde(rename = "c_M")]
    pub slope: f64,
    /// `A_M = min(c_M / M, C_M)`.
    #[serde(rename = "A_M")]
    pub jump_constant: f64,
    /// Per-axis resolution of the sampling grid.
    pub grid_resolution: usize,
    /// For the rational kernel, the closed-form `C_M` for cross-checking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_concavity: Option<f64>,
}

/// Grid infima of the (K2) ratio and of `K(ρ)/ρ` on `[0, M]`.
#[derive(Debug, Clone, Copy)]
struct GridInfima {
    concavity: f64,
    slope: f64,
}

fn grid_infima(kernel: &JumpKernel, range: f64, n: usize) -> GridInfima {
    let step = range / n as f64;
    let rho = |i: usize| if i == n { range } else { i as f64 * step };
    let values: alloc::vec::Vec<f64> = (0..=n).map(|i| kernel.cost(rho(i))).collect();

    let mut concavity = kernel.corner_limit().unwrap_or(f64::INFINITY);
    for i in 1..n {
        let ri = rho(i);
        for j in i..=(n - i) {
            let ratio = (values[i] + values[j] - values[i + j]) / (ri * rho(j));
            if ratio < concavity {
                concavity = ratio;
            }
        }
    }

    let mut slope = kernel.cost(SMALL_RHO) / SMALL_RHO;
    for i in 1..=n {
        slope = slope.min(values[i] / rho(i));
    }
    GridInfima { concavity, slope }
}

/// Computes `C_M`, `c_M` and `A_M` by grid minimization over `ρ₁, ρ₂ > 0`, `ρ₁ + ρ₂ ≤ M`.
///
/// The grid uses nodes `ρ = i M / n`, so the midpoint `ρ₁ = ρ₂ = M/2` is included for even
/// `n`. `C_M` is reported as failing when its infimum is not positive (relative to `c_M / M`).
pub fn derive_constants(
    kernel: &JumpKernel,
    range: f64,
    grid_resolution: usize,
) -> Result<KernelConstants> {
    let kernel = kernel.validated()?;
    if !(range.is_finite() && range > 0.0) {
        return Err(domain_err!("range M must be positive, got {range}"));
    }
    if grid_resolution < 100 {
        return Err(Error::Config(alloc::format!(
            "grid resolution must be at least 100, got {grid_resolution}"
        )));
    }
    let inf = grid_infima(&kernel, range, grid_resolution);
    if !(inf.concavity > K2_TOLERANCE * inf.slope / range) {
        return Err(Error::ConditionK2Fails {
            range,
            infimum: inf.concavity,
        });
    }
    Ok(KernelConstants {
        range,
        concavity: inf.concavity,
        slope: inf.slope,
        jump_constant: (inf.slope / range).min(inf.concavity),
        grid_resolution,
        closed_form_concavity: kernel.closed_form_concavity(range),
    })
}

/// `C_M` below this multiple of `c_M / M` counts as zero.
const K2_TOLERANCE: f64 = 1e-9;

/// Sampled verdicts on the kernel conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub kernel: JumpKernel,
    #[serde(rename = "M")]
    pub range: f64,
    /// Number of uniform samples of `[0, M]` (also the per-axis (K2) resolution).
    pub samples: usize,
    pub k1_monotone: bool,
    pub k2: bool,
    pub k3: bool,
    pub k3w: bool,
    pub subadditive: bool,
    /// Grid infimum of the (K2) ratio.
    #[serde(rename = "C_M")]
    pub concavity: f64,
    /// Grid infimum of `K(ρ)/ρ`.
    #[serde(rename = "c_M")]
    pub slope: f64,
    /// `K(ρ)/ρ` at `ρ = 1e-8`.
    pub small_rho_ratio: f64,
}

/// Evaluates (K1), (K2), (K3), (K3w) and subadditivity on `samples` grid points of `[0, M]`.
pub fn check_conditions(kernel: &JumpKernel, range: f64, samples: usize) -> Result<ConditionReport> {
    let kernel = kernel.validated()?;
    if !(range.is_finite() && range > 0.0) {
        return Err(domain_err!("range M must be positive, got {range}"));
    }
    let n = samples.max(100);
    let step = range / n as f64;
    let rho = |i: usize| if i == n { range } else { i as f64 * step };

    let k1_monotone =
        kernel.cost(0.0) == 0.0 && (0..n).all(|i| kernel.cost(rho(i + 1)) >= kernel.cost(rho(i)));

    let inf = grid_infima(&kernel, range, n);
    let k2 = inf.concavity > K2_TOLERANCE * inf.slope / range;

    let small_rho_ratio = kernel.cost(SMALL_RHO) / SMALL_RHO;
    let k3 = (small_rho_ratio - 1.0).abs() <= 1e-4;
    let k3w = inf.slope > 0.0 && inf.slope.is_finite();

    let mut subadditive = true;
    'outer: for i in 1..n {
        for j in i..=(n - i) {
            let lhs = kernel.cost(rho(i)) + kernel.cost(rho(j));
            let rhs = kernel.cost(rho(i + j));
            if lhs < rhs - 1e-12 * rhs.abs().max(1.0) {
                subadditive = false;
                break 'outer;
            }
        }
    }

    Ok(ConditionReport {
        kernel,
        range,
        samples: n,
        k1_monotone,
        k2,
        k3,
        k3w,
        subadditive,
        concavity: inf.concavity,
        slope: inf.slope,
        small_rho_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let k = JumpKernel::KWC;
        assert_eq!(k.eval(1.0).unwrap(), 0.5);
        assert_eq!(k.eval(3.0).unwrap(), 0.75);
        for kernel in [JumpKernel::KWC, JumpKernel::Linear, JumpKernel::Potts { height: 2.0 }] {
            assert_eq!(kernel.eval(0.0).unwrap(), 0.0);
        }
        assert!(k.eval(-1e-3).is_err());
        assert!(k.eval(f64::NAN).is_err());
    }

    #[test]
    fn kwc_bounded_by_inverse_kappa() {
        let k = JumpKernel::kwc(2.0).unwrap();
        for i in 0..200 {
            let rho = i as f64 * 0.5;
            assert!(k.cost(rho) < 0.5);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(JumpKernel::kwc(0.0).is_err());
        assert!(JumpKernel::potts(-1.0).is_err());
    }

    #[test]
    fn constants_for_kwc() {
        let c = derive_constants(&JumpKernel::KWC, 2.0, 2000).unwrap();
        assert!((c.concavity - 1.0 / 3.0).abs() < 1e-12, "{}", c.concavity);
        assert!((c.closed_form_concavity.unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let c = derive_constants(&JumpKernel::KWC, 1.0, 2000).unwrap();
        assert!((c.slope - 0.5).abs() < 1e-15);
        assert!((c.concavity - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c.jump_constant, (c.slope / c.range).min(c.concavity));
    }

    #[test]
    fn linear_fails_k2() {
        for m in [0.5, 1.0, 3.0] {
            match derive_constants(&JumpKernel::Linear, m, 400) {
                Err(Error::ConditionK2Fails { .. }) => {}
                other => panic!("expected (K2) failure, got {other:?}"),
            }
        }
    }

    #[test]
    fn resolution_and_range_are_checked() {
        assert!(derive_constants(&JumpKernel::KWC, 1.0, 99).is_err());
        assert!(derive_constants(&JumpKernel::KWC, 0.0, 200).is_err());
    }

    #[test]
    fn condition_verdicts() {
        let r = check_conditions(&JumpKernel::KWC, 2.0, 400).unwrap();
        assert!(r.k1_monotone && r.k2 && r.k3 && r.k3w && r.subadditive);

        let r = check_conditions(&JumpKernel::Potts { height: 1.0 }, 2.0, 400).unwrap();
        assert!(!r.k3);
        assert!(r.k1_monotone && r.k3w && r.k2);

        let r = check_conditions(&JumpKernel::Linear, 2.0, 400).unwrap();
        assert!(!r.k2);
        assert!(r.k3 && r.k1_monotone && r.subadditive);
    }

    #[test]
    fn q_function_examples() {
        let k = JumpKernel::KWC;
        assert_eq!(k.q_function(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(k.q_derivative(1.0, 0.0).unwrap(), 0.0);
        // c' = 2: −4·2·0.5 / (4 − 0.25)²
        let d = k.q_derivative(1.0, 0.5).unwrap();
        assert!((d + 4.0 / 14.0625).abs() < 1e-15);
        let p = |z: f64| -k.q_derivative(1.0, z).unwrap();
        assert!(p(0.25) < 0.5 * p(0.5));
        assert!(k.q_function(1.0, 1.5).is_err());
        assert!(k.q_derivative(0.0, 0.0).is_err());
    }

    #[test]
    fn serde_shapes() {
        let json = serde_json::to_string(&JumpKernel::KWC).unwrap();
        assert_eq!(json, r#"{"kind":"kwc","kappa":1.0}"#);
        let k: JumpKernel = serde_json::from_str(r#"{"kind":"potts","height":2.5}"#).unwrap();
        assert_eq!(k, JumpKernel::Potts { height: 2.5 });
        let k: JumpKernel = serde_json::from_str(r#"{"kind":"linear"}"#).unwrap();
        assert_eq!(k, JumpKernel::Linear);
    }
}
