use kwcseg_core::kernel::{check_conditions, derive_constants, DEFAULT_GRID_RESOLUTION};
use kwcseg_core::{Error, JumpKernel};
use proptest::prelude::*;

use std::sync::OnceLock;

const KAPPAS: [f64; 3] = [0.5, 1.0, 2.0];
const RANGES: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

fn constants(kappa: f64, range: f64) -> f64 {
    derive_constants(&JumpKernel::kwc(kappa).unwrap(), range, 400).unwrap().concavity
}

/// Grid-derived `C_M` at the default resolution, indexed by `(κ, M)`.
fn derived_table() -> &'static [[f64; 4]; 3] {
    static TABLE: OnceLock<[[f64; 4]; 3]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0.0; 4]; 3];
        for (i, &kappa) in KAPPAS.iter().enumerate() {
            for (j, &range) in RANGES.iter().enumerate() {
                let k = JumpKernel::kwc(kappa).unwrap();
                t[i][j] = derive_constants(&k, range, DEFAULT_GRID_RESOLUTION).unwrap().concavity;
            }
        }
        t
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn strengthened_subadditivity_on_pairs(
        ki in 0usize..3,
        ri in 0usize..4,
        s in 0.0f64..1.0,
        t in 1e-6f64..1.0,
    ) {
        let (kappa, range) = (KAPPAS[ki], RANGES[ri]);
        let k = JumpKernel::kwc(kappa).unwrap();
        let c = derived_table()[ki][ri];
        let total = t * range;
        let (r1, r2) = (s * total, (1.0 - s) * total);
        let lhs = k.cost(r1) + k.cost(r2);
        let rhs = k.cost(r1 + r2) + c * r1 * r2;
        prop_assert!(lhs >= rhs - 1e-14 * lhs.max(1.0), "{lhs} < {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn strengthened_subadditivity_on_tuples(
        ki in 0usize..3,
        ri in 0usize..4,
        raw in prop::collection::vec(0.0f64..1.0, 2..=10),
        fill in 0.0f64..1.0,
    ) {
        let (kappa, range) = (KAPPAS[ki], RANGES[ri]);
        let k = JumpKernel::kwc(kappa).unwrap();
        let c = derived_table()[ki][ri];
        let sum: f64 = raw.iter().sum();
        prop_assume!(sum > 0.0);
        let rho: Vec<f64> = raw.iter().map(|r| r / sum * fill * range).collect();
        let total: f64 = rho.iter().sum();
        let mut cross = 0.0;
        for i in 0..rho.len() {
            for l in i + 1..rho.len() {
                cross += rho[i] * rho[l];
            }
        }
        let lhs: f64 = rho.iter().map(|&r| k.cost(r)).sum();
        let rhs = k.cost(total) + c * cross;
        prop_assert!(lhs >= rhs - 1e-13 * lhs.max(1.0), "{lhs} < {rhs}");
    }

    #[test]
    fn split_derivative_is_superlinear(
        kappa in 0.1f64..5.0,
        c in 0.05f64..5.0,
        t in 1e-3f64..1.0,
        mu in 1e-3f64..0.999,
    ) {
        let k = JumpKernel::kwc(kappa).unwrap();
        let z = t * c;
        let small = -k.q_derivative(c, mu * z).unwrap();
        let large = -k.q_derivative(c, z).unwrap();
        prop_assert!(small <= mu * large * (1.0 + 1e-12), "{small} > {mu}·{large}");
    }

    #[test]
    fn split_derivative_matches_finite_difference(
        kappa in prop::sample::select(vec![0.5, 1.0, 2.0]),
        c in 0.1f64..3.0,
        t in -0.9f64..0.9,
    ) {
        let k = JumpKernel::kwc(kappa).unwrap();
        let z = t * c;
        let step = 1e-5 * c;
        let fd = (k.q_function(c, z + step).unwrap() - k.q_function(c, z - step).unwrap())
            / (2.0 * step);
        let exact = k.q_derivative(c, z).unwrap();
        let scale = exact.abs().max(1e-3);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd} vs {exact}");
    }
}

#[test]
fn grid_constant_matches_closed_form() {
    for kappa in KAPPAS {
        let k = JumpKernel::kwc(kappa).unwrap();
        let c = constants(kappa, 2.0);
        let closed = k.closed_form_concavity(2.0).unwrap();
        assert!((c - closed).abs() <= 1e-12 * closed, "{c} vs {closed}");
    }
}

#[test]
fn small_jump_slope_is_unity() {
    for kappa in [0.5, 1.0, 2.0] {
        let k = JumpKernel::kwc(kappa).unwrap();
        for rho in [1e-1, 1e-3, 1e-6] {
            let ratio = k.cost(rho) / rho;
            assert!((ratio - 1.0).abs() <= kappa * rho, "κ={kappa}, ρ={rho}");
        }
    }
}

#[test]
fn linear_and_potts_verdicts() {
    assert!(matches!(
        derive_constants(&JumpKernel::Linear, 1.0, DEFAULT_GRID_RESOLUTION),
        Err(Error::ConditionK2Fails { .. })
    ));
    let linear = check_conditions(&JumpKernel::Linear, 1.0, 500).unwrap();
    assert!(!linear.k2 && linear.k3);
    let potts = check_conditions(&JumpKernel::potts(1.0).unwrap(), 1.0, 500).unwrap();
    assert!(!potts.k3 && potts.k3w);
    let kwc = check_conditions(&JumpKernel::KWC, 2.0, 500).unwrap();
    assert!(kwc.k1_monotone && kwc.k2 && kwc.k3 && kwc.k3w && kwc.subadditive);
}
