//! `ẍ + x = 0` discretized through its exact flow, with two alternative
//! discrete Lagrangians.

use crate::bridge::ContinuousSystem;
use crate::error::Result;
use crate::helmholtz::{FiberKind, FiberMap, TwoFormField};
use crate::lagrangian::{DiscreteLagrangian, PairFunction};
use crate::numkit::linalg::{Matrix, Vector};
use crate::sode::ExplicitSOdE;

pub const DEFAULT_H: f64 = 0.1;

/// `x₁² − 2x₀x₁ cos h + x₀²`.
pub fn invariant(x0: f64, x1: f64, h: f64) -> f64 {
    x1 * x1 - 2.0 * x0 * x1 * h.cos() + x0 * x0
}

pub fn ld1(h: f64) -> Result<DiscreteLagrangian> {
    let (s, c) = h.sin_cos();
    Ok(DiscreteLagrangian::new(1, h, move |a: &Vector, b: &Vector| c / (2.0 * s) * (a[0] * a[0] + b[0] * b[0]) - a[0] * b[0] / s)?
        .with_d1(move |a: &Vector, b: &Vector| Vector::from_element(1, c / s * a[0] - b[0] / s))
        .with_d2(move |a: &Vector, b: &Vector| Vector::from_element(1, c / s * b[0] - a[0] / s))
        .with_d12(move |_: &Vector, _: &Vector| Matrix::from_element(1, 1, -1.0 / s)))
}

/// Quartic alternative, in expanded form.
pub fn ld2(h: f64) -> Result<DiscreteLagrangian> {
    let (s, c) = h.sin_cos();
    let cot = c / s;
    let csc = 1.0 / s;
    let quart = cot * (1.0 + cot * cot / 3.0);
    let (c3, cc2) = (csc.powi(3), cot * csc * csc);
    Ok(DiscreteLagrangian::new(1, h, move |a: &Vector, b: &Vector| {
        let (x0, x1) = (a[0], b[0]);
        quart * x1.powi(4) - 4.0 / 3.0 * x0 * x1.powi(3) * c3 + 2.0 * x0 * x0 * x1 * x1 * cc2 - 4.0 / 3.0 * x0.powi(3) * x1 * c3
            + quart * x0.powi(4)
    })?
    .with_d1(move |a: &Vector, b: &Vector| {
        let (x0, x1) = (a[0], b[0]);
        Vector::from_element(1, 4.0 * quart * x0.powi(3) - 4.0 / 3.0 * c3 * x1.powi(3) + 4.0 * cc2 * x0 * x1 * x1 - 4.0 * c3 * x0 * x0 * x1)
    })
    .with_d2(move |a: &Vector, b: &Vector| {
        let (x0, x1) = (a[0], b[0]);
        Vector::from_element(1, 4.0 * quart * x1.powi(3) - 4.0 * c3 * x0 * x1 * x1 + 4.0 * cc2 * x0 * x0 * x1 - 4.0 / 3.0 * c3 * x0.powi(3))
    })
    .with_d12(move |a: &Vector, b: &Vector| {
        let (x0, x1) = (a[0], b[0]);
        Matrix::from_element(1, 1, -4.0 * c3 * (x0 * x0 + x1 * x1) + 8.0 * cc2 * x0 * x1)
    }))
}

/// First displayed form of the quartic Lagrangian.
pub fn ld2_compact(x0: f64, x1: f64, h: f64) -> f64 {
    let (s, c) = h.sin_cos();
    let (cot, csc, sec, tan) = (c / s, 1.0 / s, 1.0 / c, s / c);
    x1.powi(4) * cot - 4.0 / 3.0 * x0 * x1.powi(3) * csc
        + x0.powi(4) * (2.0 * h).cos() * csc * sec / 3.0
        + (x1 * cot - x0 * csc).powi(4) * tan / 3.0
}

pub fn sode(h: f64) -> ExplicitSOdE {
    let c = h.cos();
    ExplicitSOdE::new(1, move |a: &Vector, b: &Vector| Vector::from_element(1, 2.0 * c * b[0] - a[0]))
}

fn velocity(x0: f64, x1: f64, h: f64) -> f64 {
    let (s, c) = h.sin_cos();
    (x1 - x0 * c) / s
}

/// `F₁ ∘ R^{e−}_h`.
pub fn fd1(h: f64) -> FiberMap {
    FiberMap::new(1, FiberKind::Minus, move |a: &Vector, b: &Vector| Vector::from_element(1, velocity(a[0], b[0], h)))
}

/// `F₂ ∘ R^{e−}_h` with `F₂(x, ẋ) = 4ẋ³/3 + 4x²ẋ`.
pub fn fd2(h: f64) -> FiberMap {
    FiberMap::new(1, FiberKind::Minus, move |a: &Vector, b: &Vector| {
        let p = velocity(a[0], b[0], h);
        Vector::from_element(1, 4.0 / 3.0 * p.powi(3) + 4.0 * a[0] * a[0] * p)
    })
}

fn scalar_form(c: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[0.0, c, -c, 0.0])
}

/// `Ω_{L_{d1}} = −1/sin h dx₀ ∧ dx₁`.
pub fn omega1(h: f64) -> TwoFormField {
    let s = h.sin();
    TwoFormField::new(2, 1, move |_: &Vector| Ok(scalar_form(-1.0 / s))).expect("valid block split")
}

/// `Ω_{L_{d2}} = −4Q/sin³h dx₀ ∧ dx₁`.
pub fn omega2(h: f64) -> TwoFormField {
    let s = h.sin();
    TwoFormField::new(2, 1, move |z: &Vector| Ok(scalar_form(-4.0 * invariant(z[0], z[1], h) / s.powi(3)))).expect("valid block split")
}

/// Closed-form recursion operator `4Q/sin²h · I`.
pub fn recursion_closed_form(x0: f64, x1: f64, h: f64) -> Matrix {
    Matrix::identity(2, 2) * (4.0 * invariant(x0, x1, h) / h.sin().powi(2))
}

pub fn continuous() -> ContinuousSystem {
    ContinuousSystem::new(1, |q: &Vector, _: &Vector| -q)
        .with_lagrangian(|q: &Vector, v: &Vector| 0.5 * (v[0] * v[0] - q[0] * q[0]))
        .with_flow(|q: &Vector, v: &Vector, t: f64| {
            let (s, c) = t.sin_cos();
            (Vector::from_element(1, q[0] * c + v[0] * s), Vector::from_element(1, v[0] * c - q[0] * s))
        })
}

pub fn energies(h: f64) -> Vec<PairFunction> {
    vec![
        PairFunction::new("Q", move |a: &Vector, b: &Vector| invariant(a[0], b[0], h)),
        PairFunction::new("TrA", move |a: &Vector, b: &Vector| recursion_closed_form(a[0], b[0], h).trace()),
    ]
}

pub fn initial(h: f64) -> (Vector, Vector) {
    (Vector::from_element(1, 1.0), Vector::from_element(1, h.cos()))
}
