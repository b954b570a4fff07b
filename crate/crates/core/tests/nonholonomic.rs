use proptest::prelude::*;
use varmech::nonholonomic::{
    discrete_constraint, dla_residual, dla_step, md_chart, md_coordinates, md_flow, md_point, simulate_dla, simulate_dla_partial,
};
use varmech::numkit::fd_jacobian;
use varmech::numkit::linalg::max_abs;
use varmech::systems::rolling_disk::{self, DEFAULT_H, INITIAL_CHART};
use varmech::{DiscreteLagrangian, DiscretizationRule, Error, Matrix, NewtonConfig, NonholonomicSystem, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn disk(rule: DiscretizationRule) -> NonholonomicSystem {
    rolling_disk::system(DEFAULT_H, rule).unwrap()
}

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

#[test]
fn midpoint_constraint_formula() {
    let sys = disk(DiscretizationRule::Midpoint);
    let h = DEFAULT_H;
    let q0 = v(&[0.5, 0.3, 1.0, 1.0]);
    let q1 = v(&[0.6, 0.5, 1.2, 0.9]);
    let w = sys.discrete_constraint(&q0, &q1).unwrap();
    let phi = 0.4f64;
    assert!((w[0] - (0.2 - phi.cos() * 0.1) / h).abs() < 1e-12);
    assert!((w[1] - (-0.1 - phi.sin() * 0.1) / h).abs() < 1e-12);
    assert_eq!(sys.discrete_constraint(&q0, &q0).unwrap(), Vector::zeros(2));
}

#[test]
fn euler_rules_evaluate_at_the_endpoints() {
    let sys = disk(DiscretizationRule::Midpoint);
    let h = DEFAULT_H;
    let q0 = v(&[0.5, 0.3, 1.0, 1.0]);
    let q1 = v(&[0.6, 0.5, 1.2, 0.9]);
    let a = discrete_constraint(&sys, DiscretizationRule::EulerA, &q0, &q1).unwrap();
    let b = discrete_constraint(&sys, DiscretizationRule::EulerB, &q0, &q1).unwrap();
    assert!((a[0] - (0.2 - 0.3f64.cos() * 0.1) / h).abs() < 1e-12);
    assert!((b[0] - (0.2 - 0.5f64.cos() * 0.1) / h).abs() < 1e-12);
    let t = discrete_constraint(&sys, DiscretizationRule::Trapezoidal, &q0, &q1).unwrap();
    assert!((t - (a + b) * 0.5).amax() < 1e-12);
}

#[test]
fn midpoint_step_from_the_initial_data() {
    let sys = disk(DiscretizationRule::Midpoint);
    let (q0, q1) = rolling_disk::initial(&sys).unwrap();
    let (q2, lambda) = dla_step(&sys, &q0, &q1, &cfg()).unwrap();
    assert!((q2[0] - 0.55).abs() < 1e-10);
    assert!((q2[1] - 0.32).abs() < 1e-10);
    assert!(sys.discrete_constraint(&q1, &q2).unwrap().amax() < 1e-10);
    assert!(dla_residual(&sys, &q0, &q1, &q2, &lambda).unwrap().amax() < 1e-10);
}

#[test]
fn euler_a_theta_recurrence() {
    let sys = disk(DiscretizationRule::EulerA);
    let (q0, q1) = rolling_disk::initial(&sys).unwrap();
    let sim = simulate_dla(&sys, &q0, &q1, 200, &[], &cfg()).unwrap();
    let p = &sim.simulation.trajectory.points;
    for k in 1..p.len() - 1 {
        let dt = p[k][0] - p[k - 1][0];
        let dp = p[k][1] - p[k - 1][1];
        let want = p[k][0] + dt / 2.0 * (1.0 + dp.cos());
        assert!((p[k + 1][0] - want).abs() < 1e-9, "step {k}");
    }
}

#[test]
fn rest_state_stays_at_rest() {
    let sys = disk(DiscretizationRule::Midpoint);
    let q = v(&[0.5, 0.3, 1.0, 1.0]);
    let (q2, lambda) = dla_step(&sys, &q, &q, &cfg()).unwrap();
    assert!((&q2 - &q).amax() < 1e-12);
    assert!(lambda.amax() < 1e-12);
}

#[test]
fn chart_completes_the_dependent_coordinates() {
    let sys = disk(DiscretizationRule::Midpoint);
    let z = v(&INITIAL_CHART);
    let (q0, q1) = md_point(&sys, &z, &cfg()).unwrap();
    let phi = (0.3f64 + 0.31) / 2.0;
    assert!((q1[2] - (1.0 + phi.cos() * 0.025)).abs() < 1e-12);
    assert!((q1[3] - (1.0 + phi.sin() * 0.025)).abs() < 1e-12);
    assert_eq!(md_coordinates(&sys, &q0, &q1).unwrap(), z);

    let chart = md_chart(&sys, &z, &cfg()).unwrap();
    assert_eq!(chart.jacobian.shape(), (8, 6));
    let fd = fd_jacobian(
        |z: &Vector| {
            let (a, b) = md_point(&sys, z, &cfg())?;
            Ok(Vector::from_iterator(8, a.iter().chain(b.iter()).copied()))
        },
        &z,
        &varmech::DiffConfig::richardson(),
    )
    .unwrap();
    assert!(max_abs(&(&chart.jacobian - fd)) < 1e-6);
    // The identity block for q0.
    assert_eq!(chart.jacobian.view((0, 0), (4, 4)).into_owned(), Matrix::identity(4, 4));
}

#[test]
fn flow_stays_on_the_chart() {
    let sys = disk(DiscretizationRule::Midpoint);
    let z = v(&INITIAL_CHART);
    let z1 = md_flow(&sys, &z, &cfg()).unwrap();
    let (q0, q1) = md_point(&sys, &z, &cfg()).unwrap();
    let (q2, _) = dla_step(&sys, &q0, &q1, &cfg()).unwrap();
    assert_eq!(z1.rows(0, 4).into_owned(), q1);
    assert!((z1[4] - q2[0]).abs() < 1e-14 && (z1[5] - q2[1]).abs() < 1e-14);
}

#[test]
fn rule_names_round_trip() {
    for r in [
        DiscretizationRule::Midpoint,
        DiscretizationRule::Trapezoidal,
        DiscretizationRule::EulerA,
        DiscretizationRule::EulerB,
        DiscretizationRule::alpha(0.25).unwrap(),
    ] {
        assert_eq!(r.to_string().parse::<DiscretizationRule>().unwrap(), r);
    }
    assert_eq!("Euler_A".parse::<DiscretizationRule>().unwrap(), DiscretizationRule::EulerA);
    assert!("alpha:1.5".parse::<DiscretizationRule>().is_err());
    assert!("simpson".parse::<DiscretizationRule>().is_err());
    assert!(DiscretizationRule::alpha(-0.1).is_err());
}

#[test]
fn failing_step_keeps_the_partial_trajectory() {
    let sys = disk(DiscretizationRule::Midpoint);
    let (q0, q1) = rolling_disk::initial(&sys).unwrap();
    let strict = NewtonConfig { max_iter: 1, ..cfg() };
    // A large jump cannot be resolved in a single Newton iteration.
    let q1 = &q1 + v(&[3.0, 2.0, 0.0, 0.0]);
    let (sim, err) = simulate_dla_partial(&sys, &q0, &q1, 10, &[], &strict).unwrap();
    assert!(matches!(err, Some(Error::StepFailed { step: 2, .. })));
    assert_eq!(sim.simulation.trajectory.points.len(), 2);
}

#[test]
fn simulation_records_multipliers_and_energies() {
    let sys = disk(DiscretizationRule::Midpoint);
    let (q0, q1) = rolling_disk::initial(&sys).unwrap();
    let sim = simulate_dla(&sys, &q0, &q1, 50, &rolling_disk::energies(DEFAULT_H), &cfg()).unwrap();
    assert_eq!(sim.lambdas.len(), 50);
    assert_eq!(sim.simulation.energies.len(), 3);
    assert_eq!(sim.simulation.energies[0].len(), 51);
}

fn planar_free(rule: DiscretizationRule) -> NonholonomicSystem {
    // Free particle in (x, y, φ) with ẏ = φ ẋ.
    let h = 0.1;
    let ld = DiscreteLagrangian::new(3, h, move |a: &Vector, b: &Vector| {
        let d = (b - a) / h;
        0.5 * h * d.dot(&d)
    })
    .unwrap();
    NonholonomicSystem::new(ld, 1, |q: &Vector| Matrix::from_row_slice(1, 3, &[-q[2], 1.0, 0.0]), rule)
        .unwrap()
        .with_dependent(vec![1])
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alpha_family_contains_midpoint_and_trapezoidal(
        q0 in prop::collection::vec(-1.0f64..1.0, 4),
        q1 in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let (q0, q1) = (v(&q0), v(&q1));
        let sys = disk(DiscretizationRule::Midpoint);
        let at = |r| discrete_constraint(&sys, r, &q0, &q1).unwrap();
        let mid = at(DiscretizationRule::Midpoint);
        let trap = at(DiscretizationRule::Trapezoidal);
        prop_assert!((at(DiscretizationRule::Alpha(0.5)) - &mid).amax() < 1e-12);
        prop_assert!((at(DiscretizationRule::Alpha(0.0)) - &trap).amax() < 1e-12);
        prop_assert!((at(DiscretizationRule::Alpha(1.0)) - &trap).amax() < 1e-12);
        let p = planar_free(DiscretizationRule::Midpoint);
        let (a, b) = (q0.rows(0, 3).into_owned(), q1.rows(0, 3).into_owned());
        let at = |r| discrete_constraint(&p, r, &a, &b).unwrap();
        prop_assert!((at(DiscretizationRule::Alpha(0.5)) - at(DiscretizationRule::Midpoint)).amax() < 1e-12);
        prop_assert!((at(DiscretizationRule::Alpha(1.0)) - at(DiscretizationRule::Trapezoidal)).amax() < 1e-12);
    }

    #[test]
    fn angle_increments_are_uniform_for_the_alpha_family(alpha in 0.0f64..1.0) {
        let sys = disk(DiscretizationRule::alpha(alpha).unwrap());
        let (q0, q1) = rolling_disk::initial(&sys).unwrap();
        let sim = simulate_dla(&sys, &q0, &q1, 40, &[], &cfg()).unwrap();
        let p = &sim.simulation.trajectory.points;
        for k in 1..p.len() {
            prop_assert!((p[k][0] - p[k - 1][0] - 0.025).abs() < 1e-9);
            prop_assert!((p[k][1] - p[k - 1][1] - 0.01).abs() < 1e-9);
            prop_assert!(sys.discrete_constraint(&p[k - 1], &p[k]).unwrap().amax() < 1e-9);
        }
    }

    #[test]
    fn dla_steps_satisfy_the_constraints(z in prop::collection::vec(0.0f64..1.0, 6), rule in 0usize..5) {
        let rule = [
            DiscretizationRule::Midpoint,
            DiscretizationRule::Trapezoidal,
            DiscretizationRule::EulerA,
            DiscretizationRule::EulerB,
            DiscretizationRule::Alpha(0.3),
        ][rule];
        let sys = disk(rule);
        let bx = rolling_disk::chart_box(1).unwrap();
        let z = Vector::from_iterator(6, (0..6).map(|i| bx.lo[i] + z[i] * (bx.hi[i] - bx.lo[i])));
        let (q0, q1) = md_point(&sys, &z, &cfg()).unwrap();
        prop_assert!(sys.discrete_constraint(&q0, &q1).unwrap().amax() < 1e-10);
        let (q2, lambda) = dla_step(&sys, &q0, &q1, &cfg()).unwrap();
        prop_assert!(sys.discrete_constraint(&q1, &q2).unwrap().amax() < 1e-9);
        prop_assert!(dla_residual(&sys, &q0, &q1, &q2, &lambda).unwrap().amax() < 1e-8);
    }
}
