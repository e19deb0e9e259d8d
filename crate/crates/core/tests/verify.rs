use approx::assert_abs_diff_eq;
use lightcone_core::reduction::normalize_graph;
use lightcone_core::verify::{
    estimate_lipschitz, integrate_reduced_ode, verify_theorem, zmc_residual_scan, StateBox,
};
use lightcone_core::{Domain, Error, GraphHypersurface, Grid, OdeState, Verdict, VerifyOptions};

fn mink(f: &str, n: usize) -> GraphHypersurface {
    GraphHypersurface::minkowski(f, n).unwrap()
}

#[test]
fn zmc_scan_examples() {
    assert_eq!(
        zmc_residual_scan(&mink("xn", 2), &Grid::uniform(2, 11))
            .unwrap()
            .max,
        0.0
    );
    let tanh = mink("x1*tanh(x2)", 2)
        .with_domain(Domain::cube(2, 2.0))
        .unwrap();
    assert!(zmc_residual_scan(&tanh, &Grid::uniform(2, 41)).unwrap().max < 1e-8);
    let para = mink("x1^2/2", 2);
    let scan = zmc_residual_scan(&para, &Grid::uniform(2, 11)).unwrap();
    assert!(scan.max >= 1.0);
}

#[test]
fn plane_trajectory() {
    let s = mink("xn", 2);
    let traj =
        integrate_reduced_ode(&s, (0.0, 1.0), 100, &OdeState::degenerate_initial(2, 0.0)).unwrap();
    assert_eq!(traj.len(), 101);
    for st in &traj {
        assert_abs_diff_eq!(st.a, st.y, epsilon = 1e-12);
        assert_abs_diff_eq!(st.a_prime, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.b[0], 0.0, epsilon = 1e-12);
    }
    let fast = OdeState {
        a_prime: 1.1,
        ..OdeState::degenerate_initial(2, 0.0)
    };
    for st in integrate_reduced_ode(&s, (0.0, 1.0), 50, &fast).unwrap() {
        assert_abs_diff_eq!(st.a, 1.1 * st.y, epsilon = 1e-12);
        assert_eq!(st.a_prime, 1.1);
    }
    let singular = OdeState {
        b: vec![1.0],
        ..OdeState::degenerate_initial(2, 0.0)
    };
    assert!(matches!(
        integrate_reduced_ode(&s, (0.0, 1.0), 10, &singular),
        Err(Error::SingularC { y, .. }) if y == 0.0
    ));
}

#[test]
fn backward_integration() {
    let s = mink("xn + x1^2", 2);
    let traj =
        integrate_reduced_ode(&s, (0.0, -1.0), 200, &OdeState::degenerate_initial(2, 0.0)).unwrap();
    let last = traj.last().unwrap();
    assert_eq!(last.y, -1.0);
    assert_abs_diff_eq!(last.a, -1.0, epsilon = 1e-12);
}

#[test]
fn lipschitz_examples() {
    let center = OdeState::degenerate_initial(2, 0.0);
    let plane = mink("xn", 2);
    let unit = StateBox {
        center: center.clone(),
        half_width: 0.5,
    };
    // With vanishing c-blocks the plane still has P = -2 a' b b' / C, which is not constant.
    let l_plane = estimate_lipschitz(&plane, &unit, 200, 1).unwrap();
    assert!(l_plane.is_finite() && l_plane > 0.0);
    let st = OdeState {
        y: 0.0,
        a: 0.0,
        a_prime: 1.2,
        b: vec![0.3],
        b_prime: vec![-0.4],
    };
    let (p, q) = lightcone_core::reduction::ode_rhs(&plane, &st).unwrap();
    assert_abs_diff_eq!(p, -2.0 * 1.2 * 0.3 * -0.4 / (1.0 - 0.09), epsilon = 1e-14);
    assert!(q[0].is_finite());

    let s = mink("xn + x1^2*xn", 2);
    let small = StateBox {
        center: center.clone(),
        half_width: 0.1,
    };
    let l1 = estimate_lipschitz(&s, &small, 2000, 3).unwrap();
    let l2 = estimate_lipschitz(&s, &small, 4000, 3).unwrap();
    assert!(l1.is_finite() && l1 > 0.0);
    assert!((l2 - l1).abs() <= 0.2 * l1, "{l1} vs {l2}");
    // Same seed reproduces the same value.
    assert_eq!(l1, estimate_lipschitz(&s, &small, 2000, 3).unwrap());

    let wide = StateBox {
        center,
        half_width: 1.0,
    };
    assert!(matches!(
        estimate_lipschitz(&s, &wide, 100, 0),
        Err(Error::SingularC { .. })
    ));
}

#[test]
fn plane_passes() {
    for n in [2, 3] {
        let report = verify_theorem(&mink("xn", n), &VerifyOptions::new(n));
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        for r in [
            report.containment_max,
            report.geodesic_deviation,
            report.degeneracy_b_max,
            report.degeneracy_grad_max,
            report.ode_deviation,
        ] {
            assert!(r.unwrap() < 1e-12);
        }
        assert!(report.lipschitz_estimate.unwrap().is_finite());
    }
}

#[test]
fn curved_zmc_surfaces_pass() {
    for (f, n) in [
        ("xn + x1^2", 2),
        ("xn + x1^3 - x1^2", 2),
        ("x3 + (x1 - 2*x2)^2", 3),
    ] {
        let mut opts = VerifyOptions::new(n);
        opts.steps = 200;
        let report = verify_theorem(&mink(f, n), &opts);
        assert_eq!(report.verdict, Verdict::Pass, "{f}: {report:?}");
        assert!(report.lipschitz_estimate.unwrap() > 0.0);
    }
}

#[test]
fn normalized_null_plane_passes() {
    let s = mink("(x1 + x2)/sqrt(2)", 2);
    let v = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
    let t = normalize_graph(&s, &[0.2, 0.1], &v).unwrap();
    let mut opts = VerifyOptions::new(2);
    opts.steps = 100;
    opts.t_span = (-0.2, 0.2);
    opts.grid = Grid::uniform(2, 7);
    let report = verify_theorem(&t, &opts);
    assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
}

#[test]
fn paraboloid_inapplicable() {
    let report = verify_theorem(&mink("x1^2/2", 2), &VerifyOptions::new(2));
    assert!(matches!(report.verdict, Verdict::Inapplicable(_)));
    assert_eq!(report.degenerate_initial, None);
    assert!(report.zmc_residual_max >= 1.0);
}

#[test]
fn tanh_light_like_point_inapplicable() {
    let s = mink("x1*tanh(x2)", 2);
    let q = [1f64.cosh(), 1.0];
    let ff = s.first_fundamental(&q).unwrap();
    let v = [-ff.s[(0, 1)], ff.s[(0, 0)]];
    let t = normalize_graph(&s, &q, &v).unwrap();
    let mut opts = VerifyOptions::new(2);
    opts.grid = Grid::uniform(2, 5);
    let report = verify_theorem(&t, &opts);
    assert_eq!(report.degenerate_initial, Some(false), "{report:?}");
    assert!(matches!(report.verdict, Verdict::Inapplicable(_)));
}

#[test]
fn non_zmc_with_degenerate_origin_is_inapplicable() {
    // Degenerate along the axis but not zero mean curvature: the hypothesis check comes first.
    let report = verify_theorem(&mink("xn + x1^2*xn^2", 2), &VerifyOptions::new(2));
    assert!(matches!(report.verdict, Verdict::Inapplicable(_)));
}

#[test]
fn step_across_singularity_is_reported() {
    let s = mink("xn + x1^2*xn", 2);
    let init = OdeState {
        y: 0.0,
        a: 0.0,
        a_prime: 1.0,
        b: vec![0.9],
        b_prime: vec![1.0],
    };
    match integrate_reduced_ode(&s, (0.0, 1.0), 10, &init) {
        Err(Error::OdeBreakdown {
            partial, source, ..
        }) => {
            assert!(partial.len() >= 2);
            assert!(matches!(*source, Error::SingularC { .. }));
        }
        other => panic!("expected breakdown, got {other:?}"),
    }
}

mod plane_steps {
    use super::*;
    use lightcone_core::verify::integrate_reduced_ode;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn trivial_solution_for_any_step_count(steps in 10usize..400, n in 2usize..=4) {
            let traj = integrate_reduced_ode(&mink("xn", n), (0.0, 1.0), steps, &OdeState::degenerate_initial(n, 0.0)).unwrap();
            for st in traj {
                prop_assert!((st.a - st.y).abs() <= 1e-12);
                prop_assert!(st.b.iter().all(|b| b.abs() <= 1e-12));
            }
        }
    }
}
