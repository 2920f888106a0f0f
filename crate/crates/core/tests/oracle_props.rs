use kwcseg_core::exact::{jump_bounds, uniform_step_minimizer};
use kwcseg_core::oracle::{solve, OracleProblem};
use kwcseg_core::pwc::{energy, quantize};
use kwcseg_core::{DataFunction, GridSignal, JumpKernel};
use proptest::prelude::*;

fn monotone_data() -> impl Strategy<Value = GridSignal> {
    prop::collection::vec(0.0f64..1.0, 60).prop_map(|inc| {
        let mut acc = 0.0;
        let samples = inc
            .iter()
            .map(|d| {
                acc += d * d;
                acc
            })
            .collect();
        GridSignal::new(0.0, 1.0, samples).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_data_gives_bounded_monotone_minimizers(
        g in monotone_data(),
        lambda in prop::sample::select(vec![1.0, 5.0, 16.0 / 3.0, 20.0]),
    ) {
        let osc = g.max() - g.min();
        prop_assume!(osc > 1e-3);
        let problem = OracleProblem::new(DataFunction::Sampled(g.clone()), JumpKernel::KWC, lambda)
            .with_level_count(41);
        let r = solve(&problem).unwrap();
        let bound = jump_bounds(&JumpKernel::KWC, 0.0, 1.0, lambda, osc).unwrap();
        for c in std::iter::once(&r.minimizer).chain(r.ties.iter().map(|t| &t.minimizer)) {
            prop_assert!(c.is_non_decreasing());
            prop_assert!(c.min_value() >= g.min() - 1e-12 && c.max_value() <= g.max() + 1e-12);
            prop_assert!(c.jump_count() as u64 <= bound.m_monotone.unwrap());
        }
    }
}

#[test]
fn optimum_beats_explicit_competitors() {
    let g = DataFunction::IDENTITY;
    for lambda in [1.0, 16.0 / 3.0, 20.0] {
        let problem = OracleProblem::analytic(g.clone(), (0.0, 1.0), 400, JumpKernel::KWC, lambda);
        let best = solve(&problem).unwrap().energy.total;
        for m in [1, 2, 4, 5] {
            let u = uniform_step_minimizer(1.0, m).unwrap();
            let e = energy(&u, &g, &JumpKernel::KWC, lambda).unwrap().total;
            assert!(best <= e + 1e-12, "λ={lambda} m={m}: {best} > {e}");
        }
        let q = quantize(&g, (0.0, 1.0), 0.1).unwrap();
        let e = energy(&q, &g, &JumpKernel::KWC, lambda).unwrap().total;
        assert!(best <= e + 1e-12);
    }
}

#[test]
fn refinement_moves_energy_by_first_order() {
    let lambda = 16.0 / 3.0;
    let energy_at = |cells, levels| {
        let p = OracleProblem::analytic(DataFunction::IDENTITY, (0.0, 1.0), cells, JumpKernel::KWC, lambda)
            .with_level_count(levels)
            .with_endpoint_pin(0.0, 1.0);
        solve(&p).unwrap().energy.total
    };
    let coarse = energy_at(100, 26);
    let fine = energy_at(200, 51);
    let step = 1.0 / 100.0 + 1.0 / 25.0;
    assert!((coarse - fine).abs() <= step, "{coarse} vs {fine}");
    assert!(fine >= 13.0 / 18.0 - 1e-12);
}
