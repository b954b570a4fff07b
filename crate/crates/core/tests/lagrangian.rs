use proptest::prelude::*;
use varmech::lagrangian::{
    del_residual, del_step, hamiltonian_map, lagrangian_two_form, legendre_minus, legendre_plus, simulate, simulate_partial,
};
use varmech::numkit::linalg::{canonical_symplectic, concat, max_abs, max_abs_vec};
use varmech::numkit::{fd_jacobian, DiffConfig};
use varmech::sode::{explicit_to_implicit, implicit_step, tangent_basis};
use varmech::systems::{harmonic, rolling_disk, toy};
use varmech::{DiscreteLagrangian, Error, ExplicitSOdE, ImplicitSOdE, Matrix, NewtonConfig, Vector};

fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

fn s(x: f64) -> Vector {
    Vector::from_element(1, x)
}

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

fn toy1(h: f64) -> DiscreteLagrangian {
    DiscreteLagrangian::new(1, h, move |a: &Vector, b: &Vector| {
        let d = (b[0] - a[0]) / h;
        0.5 * h * d * d
    })
    .unwrap()
}

#[test]
fn toy_del_residuals() {
    let l = toy1(0.1);
    assert!(del_residual(&l, &s(0.0), &s(1.0), &s(2.0)).unwrap()[0].abs() < 1e-8);
    assert!((del_residual(&l, &s(0.0), &s(1.0), &s(3.0)).unwrap()[0] + 10.0).abs() < 1e-6);
    assert!(del_residual(&l, &s(0.4), &s(0.4), &s(0.4)).unwrap()[0].abs() < 1e-12);
}

#[test]
fn toy_del_step() {
    let l = toy::lagrangian(0.1).unwrap();
    let q2 = del_step(&l, &v(&[0.0, 0.0]), &v(&[1.0, 2.0]), &cfg()).unwrap();
    assert!(max_abs_vec(&(q2 - v(&[2.0, 4.0]))) < 1e-12);
    let q = v(&[0.3, -0.1]);
    let q2 = del_step(&l, &q, &q, &cfg()).unwrap();
    assert!(max_abs_vec(&(q2 - &q)) < 1e-14);
}

#[test]
fn harmonic_del_step_follows_cosine() {
    let h = 0.1;
    let l = harmonic::ld1(h).unwrap();
    let x2 = del_step(&l, &s(1.0), &s(h.cos()), &cfg()).unwrap()[0];
    assert!((x2 - 0.2f64.cos()).abs() < 1e-10);
}

#[test]
fn legendre_maps() {
    let l = toy1(0.1);
    let (base, p) = legendre_minus(&l, &s(0.0), &s(1.0)).unwrap();
    assert_eq!(base[0], 0.0);
    assert!((p[0] - 10.0).abs() < 1e-8);
    let (_, p) = legendre_minus(&l, &s(0.7), &s(0.7)).unwrap();
    assert!(p[0].abs() < 1e-12);

    let h = 0.3;
    let l = harmonic::ld1(h).unwrap();
    let (x0, x1) = (0.4, -0.2);
    let (_, p) = legendre_minus(&l, &s(x0), &s(x1)).unwrap();
    assert!((p[0] - (x1 - x0 * h.cos()) / h.sin()).abs() < 1e-12);
    let (base, p) = legendre_plus(&l, &s(x0), &s(x1)).unwrap();
    assert_eq!(base[0], x1);
    assert!((p[0] - (x1 * h.cos() - x0) / h.sin()).abs() < 1e-12);
}

#[test]
fn harmonic_two_form_coefficient() {
    let h = std::f64::consts::PI / 6.0;
    let om = lagrangian_two_form(&harmonic::ld1(h).unwrap(), &s(0.3), &s(0.5)).unwrap();
    assert!((om[(0, 1)] + 2.0).abs() < 1e-12);
    assert!((om[(1, 0)] - 2.0).abs() < 1e-12);
    assert_eq!(om, -om.transpose());
}

#[test]
fn toy_two_form_blocks() {
    let h = 0.1;
    let om = lagrangian_two_form(&toy::lagrangian(h).unwrap(), &v(&[0.0, 1.0]), &v(&[0.2, 0.3])).unwrap();
    let i = Matrix::identity(2, 2);
    assert!(max_abs(&(om.view((0, 2), (2, 2)).into_owned() + &i / h)) < 1e-12);
    assert!(max_abs(&(om.view((2, 0), (2, 2)).into_owned() - &i / h)) < 1e-12);
    assert_eq!(max_abs(&om.view((0, 0), (2, 2)).into_owned()), 0.0);
}

#[test]
fn simulate_toy_is_linear() {
    let l = toy1(0.1);
    let sim = simulate(&l, &s(0.0), &s(1.0), 10, &[], &cfg()).unwrap();
    assert_eq!(sim.trajectory.len(), 12);
    for (k, q) in sim.trajectory.points.iter().enumerate() {
        assert!((q[0] - k as f64).abs() < 1e-10);
    }
    let sim = simulate(&l, &s(0.0), &s(1.0), 0, &[], &cfg()).unwrap();
    assert_eq!(sim.trajectory.len(), 2);
}

#[test]
fn simulate_harmonic_conserves_invariant() {
    let h = 0.1;
    let (q0, q1) = harmonic::initial(h);
    let sim = simulate(&harmonic::ld1(h).unwrap(), &q0, &q1, 10_000, &harmonic::energies(h), &cfg()).unwrap();
    let q = &sim.energies[0];
    assert_eq!(sim.energy_names[0], "Q");
    assert!((q[0] - h.sin().powi(2)).abs() < 1e-15);
    let drift = q.iter().map(|x| (x - q[0]).abs()).fold(0.0, f64::max) / q[0].abs();
    assert!(drift < 1e-10, "drift {drift}");
}

#[test]
fn failing_step_is_reported_with_partial_trajectory() {
    // DEL residual q₂ ↦ e^{q₂} + 1 has no real root after the first steps.
    let l =
        DiscreteLagrangian::new(1, 0.1, |a: &Vector, b: &Vector| if b[0] > 2.0 { f64::NAN } else { 0.5 * (b[0] - a[0]).powi(2) }).unwrap();
    let (sim, err) = simulate_partial(&l, &s(0.0), &s(1.0), 5, &[], &cfg()).unwrap();
    assert!(sim.trajectory.len() < 7);
    match err {
        Some(Error::StepFailed { step, .. }) => assert_eq!(step, sim.trajectory.len()),
        other => panic!("expected a step failure, got {other:?}"),
    }
}

#[test]
fn rejects_bad_step_and_singular_lagrangian() {
    assert!(DiscreteLagrangian::new(1, 0.0, |_: &Vector, _: &Vector| 0.0).is_err());
    let l = DiscreteLagrangian::new(1, 0.1, |a: &Vector, _: &Vector| a[0] * a[0]).unwrap();
    assert!(!l.is_regular(&s(0.1), &s(0.2)).unwrap());
    assert!(del_step(&l, &s(0.1), &s(0.2), &cfg()).is_err());
}

#[test]
fn analytic_derivatives_validate() {
    let probes: Vec<(Vector, Vector)> = (0..5).map(|k| (s(0.1 * k as f64), s(0.3 - 0.05 * k as f64))).collect();
    assert!(harmonic::ld1(0.2).unwrap().validate(&probes, 1e-6).is_ok());
    let wrong = DiscreteLagrangian::new(1, 0.1, |a: &Vector, b: &Vector| a[0] * b[0]).unwrap().with_d1(|_: &Vector, b: &Vector| b * 2.0);
    assert!(wrong.validate(&probes, 1e-6).is_err());
}

#[test]
fn implicit_steps() {
    let toy_implicit = ImplicitSOdE::new(1, |a: &Vector, b: &Vector, c: &Vector| c - b * 2.0 + a);
    let q2 = implicit_step(&toy_implicit, &s(0.0), &s(1.0), None, &cfg()).unwrap();
    assert!((q2[0] - 2.0).abs() < 1e-12);

    let h = 0.1;
    let back = ImplicitSOdE::new(1, move |a: &Vector, b: &Vector, c: &Vector| (c - b * 2.0 + a) / (h * h) + b);
    let q2 = implicit_step(&back, &s(0.0), &s(0.1), None, &cfg()).unwrap();
    assert!((q2[0] - 0.199).abs() < 1e-12);

    let expo = ImplicitSOdE::new(1, |a: &Vector, b: &Vector, c: &Vector| (c - b * 2.0 + a).map(|t| t.exp() - 1.0));
    let q2 = implicit_step(&expo, &s(0.0), &s(1.0), None, &cfg()).unwrap();
    assert!((q2[0] - 2.0).abs() < 1e-12);
}

#[test]
fn toy_tangent_basis_matches_hand_computation() {
    let toy_implicit = ImplicitSOdE::new(1, |a: &Vector, b: &Vector, c: &Vector| c - b * 2.0 + a);
    let t = tangent_basis(&toy_implicit, &s(0.0), &s(1.0), &s(2.0)).unwrap();
    assert!(max_abs(&(t.a - Matrix::from_row_slice(1, 3, &[1.0, 0.0, -1.0]))) < 1e-8);
    assert!(max_abs(&(t.b - Matrix::from_row_slice(1, 3, &[0.0, 1.0, 2.0]))) < 1e-8);
    assert!(tangent_basis(&toy_implicit, &s(0.0), &s(1.0), &s(2.5)).is_err());
}

#[test]
fn decoupled_tangent_basis_is_block_diagonal() {
    let phi =
        ImplicitSOdE::new(2, |a: &Vector, b: &Vector, c: &Vector| v(&[c[0] - 2.0 * b[0] + a[0], (c[1] - 2.0 * b[1] + a[1]).exp() - 1.0]));
    let (q0, q1, q2) = (v(&[0.0, 0.2]), v(&[1.0, 0.5]), v(&[2.0, 0.8]));
    let t = tangent_basis(&phi, &q0, &q1, &q2).unwrap();
    for m in [&t.a, &t.b] {
        for blk in 0..3 {
            assert!(m[(0, blk * 2 + 1)].abs() < 1e-8 && m[(1, blk * 2)].abs() < 1e-8);
        }
    }
}

#[test]
fn explicit_to_implicit_has_identity_c() {
    let g = harmonic::sode(0.1);
    let imp = explicit_to_implicit(&g);
    let (q0, q1) = (s(1.0), s(0.1f64.cos()));
    let q2 = s(0.2f64.cos());
    assert_eq!(imp.c(&q0, &q1, &q2).unwrap(), Matrix::identity(1, 1));
    assert!(imp.phi(&q0, &q1, &q2).unwrap()[0].abs() < 1e-15);
}

fn pair(dim: usize) -> impl Strategy<Value = (Vector, Vector)> {
    (prop::collection::vec(-1.0f64..1.0, dim), prop::collection::vec(-1.0f64..1.0, dim)).prop_map(|(a, b)| (v(&a), v(&b)))
}

fn symplectic_defect(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector) -> f64 {
    let n = l.dim();
    let (_, p0) = legendre_minus(l, q0, q1).unwrap();
    let j = fd_jacobian(
        |y: &Vector| {
            let (q, p) = hamiltonian_map(l, &y.rows(0, n).into_owned(), &y.rows(n, n).into_owned(), &cfg())?;
            Ok(concat(&[&q, &p]))
        },
        &concat(&[q0, &p0]),
        &DiffConfig::default(),
    )
    .unwrap();
    let om = canonical_symplectic(n);
    max_abs(&(j.transpose() * &om * &j - &om))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaled_lagrangian_scales_the_residual(c in 0.1f64..10.0, (q0, q1) in pair(1), q2 in -1.0f64..1.0) {
        let l = harmonic::ld1(0.2).unwrap();
        let r = del_residual(&l, &q0, &q1, &s(q2)).unwrap()[0];
        let rc = del_residual(&l.scaled(c), &q0, &q1, &s(q2)).unwrap()[0];
        prop_assert!((rc - c * r).abs() < 1e-9 * (1.0 + r.abs() * c));
    }

    #[test]
    fn rolling_disk_scaled_pair_has_the_same_step(
        (q0, q1) in pair(4),
    ) {
        let h = rolling_disk::DEFAULT_H;
        let l = rolling_disk::ld1(h).unwrap();
        let lb = rolling_disk::ld_bar(h).unwrap();
        // Near-rest data keeps the step inside the region where the pair is regular.
        let q1 = &q0 + (q1 - &q0) * 0.05;
        let a = del_step(&l, &q0, &q1, &cfg());
        let b = del_step(&lb, &q0, &q1, &cfg());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!(max_abs_vec(&(a - b)) < 1e-9);
        }
    }

    #[test]
    fn legendre_diagram_commutes((q0, q1) in pair(2)) {
        for l in [toy::lagrangian(0.1).unwrap(), DiscreteLagrangian::new(2, 0.1, |a: &Vector, b: &Vector| {
            let d = (b - a) / 0.1;
            0.05 * d.dot(&d) - 0.05 * (a[0] * a[0] + a[1].powi(4))
        }).unwrap()] {
            let q2 = del_step(&l, &q0, &q1, &cfg()).unwrap();
            let (b1, p1) = legendre_plus(&l, &q0, &q1).unwrap();
            let (b2, p2) = legendre_minus(&l, &q1, &q2).unwrap();
            prop_assert_eq!(b1, b2);
            prop_assert!(max_abs_vec(&(p1 - p2)) < 1e-8);
        }
    }

    #[test]
    fn legendre_pullback_equals_lagrangian_two_form((q0, q1) in pair(1)) {
        let l = harmonic::ld2(0.3).unwrap();
        let om = lagrangian_two_form(&l, &q0, &q1).unwrap();
        let j = fd_jacobian(|z: &Vector| {
            let (q, p) = legendre_minus(&l, &z.rows(0, 1).into_owned(), &z.rows(1, 1).into_owned())?;
            Ok(concat(&[&q, &p]))
        }, &concat(&[&q0, &q1]), &DiffConfig::richardson()).unwrap();
        let pull = j.transpose() * canonical_symplectic(1) * j;
        prop_assert!(max_abs(&(pull - om)) < 1e-6 * (1.0 + max_abs(&lagrangian_two_form(&l, &q0, &q1).unwrap())));
    }

    #[test]
    fn hamiltonian_map_is_symplectic((q0, q1) in pair(2), (r0, r1) in pair(1)) {
        prop_assert!(symplectic_defect(&toy::lagrangian(0.1).unwrap(), &q0, &q1) < 1e-6);
        prop_assert!(symplectic_defect(&harmonic::ld1(0.1).unwrap(), &r0, &r1) < 1e-6);
        let back = varmech::bridge::BackwardErrorCase::new(0.5).discrete_lagrangian(0.1).unwrap();
        prop_assert!(symplectic_defect(&back, &r0, &r1) < 1e-6);
    }

    #[test]
    fn implicit_step_agrees_with_gamma((q0, q1) in pair(1)) {
        let g: ExplicitSOdE = harmonic::sode(0.2);
        let imp = explicit_to_implicit(&g);
        let a = implicit_step(&imp, &q0, &q1, None, &cfg()).unwrap();
        prop_assert!(max_abs_vec(&(a - g.gamma(&q0, &q1).unwrap())) < 1e-12);
    }

    #[test]
    fn tangent_vectors_annihilate_dphi(x0 in -1.0f64..1.0, x1 in -1.0f64..1.0) {
        let phi = ImplicitSOdE::new(1, |a: &Vector, b: &Vector, c: &Vector| (c - b * 2.0 + a).map(|t| t.exp() - 1.0) + b * 0.1);
        let q2 = implicit_step(&phi, &s(x0), &s(x1), None, &cfg()).unwrap();
        let t = tangent_basis(&phi, &s(x0), &s(x1), &q2).unwrap();
        let dphi = fd_jacobian(|z: &Vector| phi.phi(&z.rows(0, 1).into_owned(), &z.rows(1, 1).into_owned(), &z.rows(2, 1).into_owned()),
            &v(&[x0, x1, q2[0]]), &DiffConfig::default()).unwrap();
        prop_assert!(max_abs(&(&dphi * t.a.transpose())) < 1e-8);
        prop_assert!(max_abs(&(&dphi * t.b.transpose())) < 1e-8);
    }
}
