use std::sync::Arc;

use galerkin_core::blowup::{default_rho_0, rho_max};
use galerkin_core::prelude::*;
use galerkin_core::problems::{clip_radial, RhsFn};
use galerkin_core::stepping::{step, uniform_nodes, weak_residual};
use proptest::prelude::*;

fn scalar(x: f64) -> Vector {
    Vector::from_vec(vec![x])
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::sample::select(vec![Scheme::Cg, Scheme::Dg])
}

/// `u' = A u + eps |u| u` in two components.
fn rotating(eps: f64) -> Problem {
    Problem::new("rotating", Vector::from_vec(vec![1.0, 0.5]), move |_, u| {
        Vector::from_vec(vec![-u[1], u[0]]) + u * (eps * u.norm())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accepted_steps_have_small_weak_residuals(
        s in scheme(),
        r in 0..=4usize,
        k in 0.01..0.2f64,
        eps in -0.5..0.5f64,
    ) {
        let problem = rotating(eps);
        let cfg = SolverConfig::default();
        let map = IntervalMap::new(0.3, k).unwrap();
        let res = step(s, &problem, &problem.u0, map, r, &cfg).unwrap();
        let residual = weak_residual(&problem, s, &problem.u0, &res, r, &cfg);
        prop_assert!(residual <= 10.0 * cfg.fp_tolerance, "{residual:e}");
    }

    #[test]
    fn picard_deltas_contract(s in scheme(), r in 0..=3usize, lambda in -1.0..1.0f64) {
        let problem = galerkin_core::problems::linear_test(lambda, 1.0);
        let map = IntervalMap::new(0.0, 0.1).unwrap();
        let res = step(s, &problem, &problem.u0, map, r, &SolverConfig::default()).unwrap();
        prop_assert!(res.deltas.windows(2).all(|w| w[1] <= w[0] * 0.5 || w[1] < 1e-14));
        prop_assert_eq!(res.residual, *res.deltas.last().unwrap());
    }

    #[test]
    fn cg_pieces_are_continuous(r in 0..=3usize, steps in 1..12usize, eps in -0.3..0.3f64) {
        let problem = rotating(eps);
        let nodes = uniform_nodes(0.0, 1.0, steps);
        let traj = solve_mesh(&problem, &nodes, &vec![r; steps], Scheme::Cg, &SolverConfig::default()).unwrap();
        for (m, w) in traj.pieces.windows(2).enumerate() {
            let gap = (w[0].traj.right_value() - w[1].traj.left_value()).norm();
            prop_assert!(gap <= 1e-10, "node {m}: {gap:e}");
        }
        prop_assert!((traj.pieces[0].traj.left_value() - &problem.u0).norm() <= 1e-12);
        for w in traj.pieces.windows(2) {
            prop_assert_eq!(w[0].traj.t_end(), w[1].traj.t_start());
        }
    }

    #[test]
    fn lipschitz_clipping(
        m in prop::sample::select(vec![1.0, 10.0]),
        x in prop::collection::vec(-30.0..30.0f64, 3),
        y in prop::collection::vec(-30.0..30.0f64, 3),
    ) {
        let f: RhsFn = Arc::new(|_, x: &Vector| x * x.norm());
        let g = clip_radial(f, m).unwrap();
        let (x, y) = (Vector::from_vec(x), Vector::from_vec(y));
        let lhs = (g(0.0, &x) - g(0.0, &y)).norm();
        prop_assert!(lhs <= 3.0 * m * (&x - &y).norm() * (1.0 + 1e-12));
    }
}

#[test]
fn theoretical_steps_keep_iterates_in_the_ball() {
    let problem = problems::example_blowup();
    let g = problem.growth.unwrap();
    let rho_0 = default_rho_0(&g).unwrap();
    let rho = rho_max(&g, 3.0, rho_0).unwrap();
    for s in [Scheme::Cg, Scheme::Dg] {
        for r in 0..=2 {
            let plan = StepPlan::new(rho, StepMode::Theoretical, s, rho_0);
            let res =
                blowup_run(&problem, &g, &plan, s, r, &SolverConfig::default(), 1e-6).unwrap();
            assert_eq!(res.ball_violations, 0, "{s} r={r}");
            assert_eq!(res.growth_violations, 0, "{s} r={r}");
            assert!(res.norms.windows(2).all(|w| w[1] > w[0]));
        }
    }
}

#[test]
fn estimate_is_the_sum_of_solved_steps() {
    let problem = problems::example_blowup();
    let g = problem.growth.unwrap();
    let plan = StepPlan::new(0.1, StepMode::Empirical, Scheme::Dg, 0.1);
    let res = blowup_run(
        &problem,
        &g,
        &plan,
        Scheme::Dg,
        1,
        &SolverConfig::default(),
        0.0,
    )
    .unwrap();
    assert_eq!(res.stopped_by, StopReason::Saturation);
    assert_eq!(res.step_sizes.len(), res.steps + 1);
    assert_eq!(res.norms.len(), res.steps + 1);
    let mut t = 0.0;
    for k in &res.step_sizes[..res.steps] {
        t += k;
    }
    assert_eq!(t, res.t_infinity_estimate);
    assert_eq!(*res.nodes().last().unwrap(), t);
    assert_eq!(t + res.step_sizes[res.steps], t);
}

#[test]
fn nodal_convergence_orders_on_linear_decay() {
    // cG of trial degree r + 1 is superconvergent of order 2r + 2 at the
    // nodes, dG of degree r of order 2r + 1.
    let problem = problems::linear_test(-1.0, 1.0);
    let exact = (-1.0f64).exp();
    let cfg = SolverConfig {
        fp_tolerance: 1e-15,
        ..SolverConfig::default()
    };
    for (s, r, order) in [
        (Scheme::Cg, 0, 2.0),
        (Scheme::Cg, 1, 4.0),
        (Scheme::Dg, 0, 1.0),
        (Scheme::Dg, 1, 3.0),
    ] {
        let err = |m: usize| {
            let t =
                solve_mesh(&problem, &uniform_nodes(0.0, 1.0, m), &vec![r; m], s, &cfg).unwrap();
            (t.end_value()[0] - exact).abs()
        };
        let observed = (err(8) / err(16)).log2();
        assert!((observed - order).abs() < 0.15, "{s} r={r}: {observed}");
    }
}

#[test]
fn dg_jump_is_zero_only_for_constant_data() {
    let problem = problems::zero(scalar(2.0));
    let nodes = uniform_nodes(0.0, 1.0, 4);
    let traj = solve_mesh(
        &problem,
        &nodes,
        &[1; 4],
        Scheme::Dg,
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(traj.jumps().iter().all(|j| j.norm() == 0.0));
    let decay = problems::linear_test(-1.0, 1.0);
    let traj = solve_mesh(
        &decay,
        &nodes,
        &[0; 4],
        Scheme::Dg,
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(traj.jumps().iter().all(|j| j.norm() > 1e-3));
}
