use kwcseg_core::exact::{
    critical_lambda, energy_of_m, optimal_jump_location, uniform_step_minimizer,
};
use kwcseg_core::oracle::{best_with_m_jumps, OracleProblem};
use kwcseg_core::pwc::{
    clamp, dispersion, energy, fidelity, fidelity_quadrature, quantize, tv, tv_k,
};
use kwcseg_core::{DataFunction, JumpKernel, PiecewiseConstant};
use proptest::prelude::*;

fn staircase() -> impl Strategy<Value = PiecewiseConstant> {
    (1usize..8).prop_flat_map(|k| {
        (
            prop::collection::vec(0.01f64..1.0, k + 1),
            prop::collection::vec(-2.0f64..2.0, k + 1),
        )
            .prop_map(|(widths, values)| {
                let total: f64 = widths.iter().sum();
                let mut acc = 0.0;
                let bp = widths[..widths.len() - 1]
                    .iter()
                    .map(|w| {
                        acc += w / total;
                        acc
                    })
                    .collect();
                PiecewiseConstant::new((0.0, 1.0), bp, values).unwrap()
            })
    })
}

/// One-jump midpoint competitor and the three-plateau competitor with middle value
/// `δ` for `g(x) = x` on `(0, 1)`.
fn competitors(delta: f64) -> (PiecewiseConstant, PiecewiseConstant) {
    let one = PiecewiseConstant::new((0.0, 1.0), vec![0.5], vec![0.0, 1.0]).unwrap();
    let three = PiecewiseConstant::new(
        (0.0, 1.0),
        vec![0.5 * delta, 0.5 * (1.0 + delta)],
        vec![0.0, delta, 1.0],
    )
    .unwrap();
    (one, three)
}

proptest! {
    #[test]
    fn linear_kernel_reproduces_tv(u in staircase()) {
        prop_assert!((tv_k(&u, &JumpKernel::Linear) - tv(&u)).abs() <= 1e-14 * tv(&u).max(1.0));
    }

    #[test]
    fn clamping_never_increases_tv_k(u in staircase(), lo in -1.0f64..0.0, width in 0.0f64..2.0) {
        let c = clamp(&u, lo, lo + width).unwrap();
        prop_assert!(tv_k(&c, &JumpKernel::KWC) <= tv_k(&u, &JumpKernel::KWC) + 1e-14);
        prop_assert!(tv(&c) <= tv(&u) + 1e-14);
    }

    #[test]
    fn fidelity_paths_agree_on_linear_data(
        u in staircase(),
        slope in -3.0f64..3.0,
        intercept in -1.0f64..1.0,
        lambda in 0.0f64..100.0,
    ) {
        let g = DataFunction::Linear { slope, intercept };
        let exact = fidelity(&u, &g, lambda).unwrap();
        let quad = fidelity_quadrature(&u, &|x| g.value(x), lambda, 1e-13).unwrap();
        prop_assert!((exact - quad).abs() <= 1e-10 * exact.max(1.0), "{exact} vs {quad}");
    }

    #[test]
    fn three_plateau_fidelity_gain_is_bounded(delta in 0.0f64..1.0, lambda in 0.1f64..50.0) {
        let g = DataFunction::IDENTITY;
        let (one, three) = competitors(delta);
        let gain = fidelity(&one, &g, lambda).unwrap() - fidelity(&three, &g, lambda).unwrap();
        prop_assert!(gain <= 0.5 * lambda * delta * (1.0 - delta) + 1e-14);
    }

    #[test]
    fn three_plateau_energy_gap(delta in 0.0f64..1.0, lambda in 0.01f64..1.3) {
        // On (0, 1) with ρ = M = 1 the modulus is 2/3, so the gap constant is positive.
        let k = JumpKernel::KWC;
        let c_star = k.closed_form_concavity(1.0).unwrap() - 0.5 * lambda;
        prop_assume!(c_star > 0.0);
        let g = DataFunction::IDENTITY;
        let (one, three) = competitors(delta);
        let gap = energy(&three, &g, &k, lambda).unwrap().total - energy(&one, &g, &k, lambda).unwrap().total;
        prop_assert!(gap >= c_star * delta * (1.0 - delta) - 1e-14, "{gap}");
    }

    #[test]
    fn two_jump_competitors_obey_dispersion_bound(
        h in 0.0f64..1.0,
        x1 in 0.0f64..1.0,
        x2 in 0.0f64..1.0,
    ) {
        let (lambda, k) = (0.5, JumpKernel::KWC);
        let c_star = k.closed_form_concavity(1.0).unwrap() - 0.5 * lambda;
        let (a, b) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        prop_assume!(a > 1e-6 && b - a > 1e-6 && b < 1.0 - 1e-6);
        let v = PiecewiseConstant::new((0.0, 1.0), vec![a, b], vec![0.0, h, 1.0]).unwrap();
        let g = DataFunction::IDENTITY;
        let u0 = PiecewiseConstant::new((0.0, 1.0), vec![0.5], vec![0.0, 1.0]).unwrap();
        let lhs = energy(&v, &g, &k, lambda).unwrap().total;
        let rhs = energy(&u0, &g, &k, lambda).unwrap().total
            + 0.5 * c_star * dispersion(&v, 1.0).unwrap();
        prop_assert!(lhs >= rhs - 1e-13, "{lhs} < {rhs}");
    }

    #[test]
    fn midpoint_rule_on_linear_data(alpha in -2.0f64..2.0, width in 0.01f64..3.0) {
        let beta = alpha + width;
        let x = optimal_jump_location(&DataFunction::IDENTITY, alpha, beta).unwrap();
        prop_assert!((x - 0.5 * (alpha + beta)).abs() <= 1e-12 * beta.abs().max(1.0));
    }
}

#[test]
fn closed_form_matches_piecewise_energy_on_grid() {
    for length in [0.5, 1.0, 2.0, 3.0, 5.0] {
        for m in [1, 2, 3, 5, 8] {
            for lambda in [0.0, 1.0, 16.0 / 3.0, 20.0, 150.0] {
                let closed = energy_of_m(length, m, lambda, &JumpKernel::KWC).unwrap();
                let u = uniform_step_minimizer(length, m).unwrap();
                let direct = energy(&u, &DataFunction::IDENTITY, &JumpKernel::KWC, lambda)
                    .unwrap()
                    .total
                    / length;
                assert!(
                    (closed - direct).abs() <= 1e-12 * closed.abs(),
                    "L={length} m={m} λ={lambda}: {closed} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn critical_weight_is_a_unique_tie() {
    for length in [0.5, 1.0, 2.0, 5.0] {
        let lambda = critical_lambda(length).unwrap().lambda;
        let e = |m| energy_of_m(length, m, lambda, &JumpKernel::KWC).unwrap();
        assert!((e(1) - e(2)).abs() <= 1e-12, "L={length}");
        for m in 3..=20 {
            assert!(e(m) > e(1), "L={length} m={m}");
        }
    }
}

#[test]
fn step_energy_is_convex_in_spacing() {
    for lambda in [1.0, 16.0 / 3.0, 50.0] {
        let f = |d: f64| 1.0 / (d + 1.0) + lambda * d * d / 24.0;
        let step = 1e-3;
        for i in 1..2000 {
            let d = i as f64 * step;
            assert!(f(d - step) - 2.0 * f(d) + f(d + step) > 0.0);
        }
    }
}

#[test]
fn staircase_jumps_sit_at_data_midpoints() {
    for m in 1..=10 {
        let u = uniform_step_minimizer(1.0, m).unwrap();
        let v = u.values();
        for (i, &a) in u.breakpoints().iter().enumerate() {
            assert!((a - 0.5 * (v[i] + v[i + 1])).abs() <= 1e-15, "m={m}");
        }
    }
}

#[test]
fn quantization_defect_shrinks() {
    let g = DataFunction::IDENTITY;
    let defects: Vec<f64> = [0.2, 0.1, 0.05, 0.01]
        .iter()
        .map(|&eta| {
            let q = quantize(&g, (0.0, 1.0), eta).unwrap();
            (tv_k(&q, &JumpKernel::KWC) - 1.0).abs()
        })
        .collect();
    for w in defects.windows(2) {
        assert!(w[1] < w[0], "{defects:?}");
    }
    assert!(defects[3] < 0.02);
}

#[test]
fn pinned_two_jump_optimum_obeys_dispersion_bound() {
    let (lambda, k) = (0.5, JumpKernel::KWC);
    let c_star = k.closed_form_concavity(1.0).unwrap() - 0.5 * lambda;
    let problem = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), 200, k, lambda)
        .with_endpoint_pin(0.0, 1.0);
    let best = best_with_m_jumps(&problem, 2).unwrap();
    let u0 = PiecewiseConstant::new((0.0, 1.0), vec![0.5], vec![0.0, 1.0]).unwrap();
    let base = energy(&u0, &DataFunction::IDENTITY, &k, lambda).unwrap().total;
    let spread = dispersion(&best.minimizer, 1.0).unwrap();
    assert!(best.energy.total >= base + 0.5 * c_star * spread - 1e-12);
}
