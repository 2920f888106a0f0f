use kwcseg_core::flow::census::jump_census;
use kwcseg_core::flow::{pre_relax_v, run, BoundaryCondition, Flow, FlowParams, FlowState, Model};
use kwcseg_core::GridSignal;
use proptest::prelude::*;

fn unit_step(n: usize) -> GridSignal {
    GridSignal::from_fn(0.0, 1.0, n, |x| if x > 0.5 { 1.0 } else { 0.0 }).unwrap()
}

fn frozen_jump_min_v(epsilon: f64, n: usize) -> f64 {
    let mut p = FlowParams::new(Model::Kwc, 1.0);
    p.n = n;
    p.epsilon = epsilon;
    let s = FlowState::initial(unit_step(n), Model::Kwc).unwrap();
    pre_relax_v(&s, &p).unwrap().v.unwrap().min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_never_increases(
        samples in prop::collection::vec(-1.0f64..1.0, 80),
        model in prop::sample::select(vec![Model::Rof, Model::At, Model::Kwc]),
        lambda in 1.0f64..100.0,
        dirichlet in any::<bool>(),
    ) {
        let g = GridSignal::new(0.0, 1.0, samples).unwrap();
        let mut p = FlowParams::new(model, lambda);
        p.n = 80;
        p.epsilon = 0.05;
        p.t_max = 0.5;
        if dirichlet {
            p.bc_u = BoundaryCondition::Dirichlet;
        }
        let r = run(&g, &g, &p).unwrap();
        prop_assert!(r.max_energy_ascent <= 1e-8, "{}", r.max_energy_ascent);
        for w in r.state.energy_trace.windows(2) {
            prop_assert!(w[1].energy <= w[0].energy * (1.0 + 1e-8) + 1e-14);
        }
    }
}

#[test]
fn dirichlet_ends_hold_every_step() {
    let n = 200;
    let g = GridSignal::from_fn(0.0, 1.0, n, |x| x * x).unwrap();
    let u0 = GridSignal::from_fn(0.0, 1.0, n, |_| 0.3).unwrap();
    for model in [Model::Rof, Model::At, Model::Kwc] {
        let mut p = FlowParams::new(model, 10.0);
        p.n = n;
        p.bc_u = BoundaryCondition::Dirichlet;
        let mut flow = Flow::new(&g, &p).unwrap();
        let mut s = FlowState::initial(u0.clone(), model).unwrap();
        s.u.samples_mut()[0] = 0.0;
        s.u.samples_mut()[n - 1] = 1.0;
        for _ in 0..20 {
            s = flow.step(&s).unwrap();
            assert_eq!(s.u.samples()[0], 0.0, "{model:?}");
            assert_eq!(s.u.samples()[n - 1], 1.0, "{model:?}");
        }
    }
}

#[test]
fn frozen_jump_field_approaches_kernel_value() {
    let mut errors = Vec::new();
    for epsilon in [0.01f64, 0.005, 0.0025] {
        let n = (999.0 * (0.005 / epsilon) * (0.005 / epsilon)).round() as usize + 1;
        let err = (frozen_jump_min_v(epsilon, n) - 0.5).abs() / 0.5;
        assert!(err < 0.03, "ε={epsilon}: {err}");
        errors.push(err);
    }
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
}

#[test]
fn field_decays_away_from_jump() {
    let mut p = FlowParams::new(Model::Kwc, 1.0);
    p.n = 1000;
    let s = FlowState::initial(unit_step(1000), Model::Kwc).unwrap();
    let v = pre_relax_v(&s, &p).unwrap().v.unwrap();
    let far = v.interpolate(0.25);
    let near = v.interpolate(0.5 + 2.0 * p.epsilon);
    assert!(far > 1.0 - 1e-9 && near < far && near > v.min());
}

#[test]
fn pre_relaxation_is_idempotent() {
    let mut p = FlowParams::new(Model::Kwc, 1.0);
    p.n = 500;
    let s = FlowState::initial(unit_step(500), Model::Kwc).unwrap();
    let once = pre_relax_v(&s, &p).unwrap();
    let twice = pre_relax_v(&once, &p).unwrap();
    let d = once.v.unwrap().sup_distance(&twice.v.unwrap());
    assert!(d < p.steady_tol, "{d}");
    assert_eq!(once.u, s.u);
}

#[test]
fn rof_refinement_is_consistent() {
    let steady = |n| {
        let mut p = FlowParams::new(Model::Rof, 50.0);
        p.n = n;
        let g = unit_step(n);
        let r = run(&g, &g, &p).unwrap();
        assert!(r.steady);
        r.state.u
    };
    let coarse = steady(500);
    let fine = steady(1000);
    let diff = (0..1000)
        .map(|i| {
            let x = fine.x(i);
            if (x - 0.5).abs() < 2e-3 {
                0.0
            } else {
                (fine.samples()[i] - coarse.interpolate(x)).abs()
            }
        })
        .fold(0.0, f64::max);
    assert!(diff < 5e-3, "{diff}");
}

#[test]
fn kwc_keeps_energy_optimal_staircase() {
    let n = 1000;
    let g = GridSignal::from_fn(0.0, 1.0, n, |x| x).unwrap();
    let u0 = kwcseg_core::exact::uniform_step_minimizer(1.0, 3).unwrap().sample(n).unwrap();
    let mut p = FlowParams::new(Model::Kwc, 18.85);
    p.bc_u = BoundaryCondition::Dirichlet;
    p.pre_relax = true;
    let r = run(&g, &u0, &p).unwrap();
    assert!(r.steady);
    let jumps = jump_census(&r.state.u, 0.05).unwrap();
    assert_eq!(jumps.len(), 3);
    for j in &jumps {
        assert!((j.size - 1.0 / 3.0).abs() < 1e-6);
    }
}
