//! Free particle in the plane: `x_{k+1} = 2x_k − x_{k−1}`, same for `y`.

use crate::bridge::ContinuousSystem;
use crate::error::Result;
use crate::helmholtz::FiberMap;
use crate::lagrangian::{DiscreteLagrangian, PairFunction};
use crate::numkit::linalg::{Matrix, Vector};
use crate::sode::ExplicitSOdE;

pub const DEFAULT_H: f64 = 0.1;

/// `L_d = (h/2)|(q₁ − q₀)/h|²`.
pub fn lagrangian(h: f64) -> Result<DiscreteLagrangian> {
    Ok(DiscreteLagrangian::new(2, h, move |a: &Vector, b: &Vector| {
        let d = (b - a) / h;
        0.5 * h * d.dot(&d)
    })?
    .with_d1(move |a: &Vector, b: &Vector| (a - b) / h)
    .with_d2(move |a: &Vector, b: &Vector| (b - a) / h)
    .with_d12(move |_: &Vector, _: &Vector| Matrix::identity(2, 2) * (-1.0 / h)))
}

pub fn sode() -> ExplicitSOdE {
    ExplicitSOdE::new(2, |a: &Vector, b: &Vector| b * 2.0 - a)
}

/// `𝔽⁻L_d(q₀, q₁) = (q₁ − q₀)/h`.
pub fn fiber_map(h: f64) -> FiberMap {
    FiberMap::new(2, crate::helmholtz::FiberKind::Minus, move |a: &Vector, b: &Vector| (b - a) / h)
}

pub fn continuous() -> ContinuousSystem {
    ContinuousSystem::new(2, |_: &Vector, _: &Vector| Vector::zeros(2))
        .with_lagrangian(|_: &Vector, v: &Vector| 0.5 * v.dot(v))
        .with_flow(|q: &Vector, v: &Vector, t: f64| (q + v * t, v.clone()))
}

pub fn energies(h: f64) -> Vec<PairFunction> {
    vec![PairFunction::new("kinetic", move |a: &Vector, b: &Vector| {
        let d = (b - a) / h;
        0.5 * d.dot(&d)
    })]
}

pub fn initial() -> (Vector, Vector) {
    (Vector::from_vec(vec![0.0, 1.0]), Vector::from_vec(vec![0.03, 0.98]))
}
