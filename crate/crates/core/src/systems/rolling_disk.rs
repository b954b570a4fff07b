//! Vertical rolling disk on `(θ, φ, x, y)` with the rolling constraints
//! `ẋ = cos φ θ̇`, `ẏ = sin φ θ̇`. Angles live on the universal cover.

use crate::error::Result;
use crate::helmholtz::{FiberKind, FiberMap, SampleBox};
use crate::lagrangian::{DiscreteLagrangian, PairFunction};
use crate::nonholonomic::{md_point, DiscretizationRule, NonholonomicSystem};
use crate::numkit::linalg::{Matrix, Vector};
use crate::numkit::newton::NewtonConfig;

pub const DEFAULT_H: f64 = 0.05;
/// `T = 500` at the default step.
pub const DEFAULT_STEPS: usize = 10_000;
/// `(θ₀, φ₀, x₀, y₀, θ₁, φ₁)`.
pub const INITIAL_CHART: [f64; 6] = [0.5, 0.3, 1.0, 1.0, 0.525, 0.31];

pub const LABELS: [&str; 4] = ["theta", "phi", "x", "y"];

/// Rows `w¹ = dx − cos φ dθ`, `w² = dy − sin φ dθ`.
pub fn forms(q: &Vector) -> Matrix {
    let (s, c) = q[1].sin_cos();
    Matrix::from_row_slice(2, 4, &[-c, 0.0, 1.0, 0.0, -s, 0.0, 0.0, 1.0])
}

/// `½Σ((q₁ − q₀)/h)²`, with no overall factor of `h`.
pub fn half_lagrangian(h: f64) -> Result<DiscreteLagrangian> {
    let h2 = h * h;
    Ok(DiscreteLagrangian::new(4, h, move |a: &Vector, b: &Vector| {
        let d = (b - a) / h;
        0.5 * d.dot(&d)
    })?
    .with_d1(move |a: &Vector, b: &Vector| (a - b) / h2)
    .with_d2(move |a: &Vector, b: &Vector| (b - a) / h2)
    .with_d12(move |_: &Vector, _: &Vector| Matrix::identity(4, 4) * (-1.0 / h2)))
}

pub fn continuous_lagrangian(_q: &Vector, v: &Vector) -> f64 {
    0.5 * v.dot(v)
}

pub fn system(h: f64, rule: DiscretizationRule) -> Result<NonholonomicSystem> {
    NonholonomicSystem::new(half_lagrangian(h)?, 2, forms, rule)?
        .with_dependent(vec![2, 3])?
        .with_labels(LABELS.iter().map(|s| s.to_string()).collect())
        .map(|s| s.with_continuous_lagrangian(continuous_lagrangian))
}

/// Initial pair with `(x₁, y₁)` solved from the rule's discrete constraints.
pub fn initial(sys: &NonholonomicSystem) -> Result<(Vector, Vector)> {
    md_point(sys, &Vector::from_row_slice(&INITIAL_CHART), &NewtonConfig::default())
}

fn delta(a: &Vector, b: &Vector) -> Vector {
    b - a
}

/// `(2Δθ/h, Δφ/h, 0, 0)` at `q_{k−1}`.
pub fn fd1(h: f64) -> FiberMap {
    FiberMap::new(4, FiberKind::Minus, move |a: &Vector, b: &Vector| {
        let d = delta(a, b);
        Vector::from_vec(vec![2.0 * d[0] / h, d[1] / h, 0.0, 0.0])
    })
}

/// `(2Δθ, Δφ, 0, 0)`.
pub fn fd1_bar() -> FiberMap {
    FiberMap::new(4, FiberKind::Minus, move |a: &Vector, b: &Vector| {
        let d = delta(a, b);
        Vector::from_vec(vec![2.0 * d[0], d[1], 0.0, 0.0])
    })
}

/// Midpoint discretization of the alternative immersion `F₂`.
pub fn fd2(h: f64) -> FiberMap {
    FiberMap::new(4, FiberKind::Minus, move |a: &Vector, b: &Vector| {
        let d = delta(a, b);
        let r = d[0] / d[1];
        let mu = 0.5 * (a[1] + b[1]);
        let p_phi = d[1] / h - d[0] * d[0] / (2.0 * d[1] * d[1]) * (1.0 + mu.cos() + mu.sin());
        Vector::from_vec(vec![r, p_phi, r, r])
    })
}

/// Lagrangian obtained by extending the `F_{d1}` isotropic submanifold
/// along the flows of the two displayed constraints.
pub fn extended_lagrangian(h: f64) -> Result<DiscreteLagrangian> {
    DiscreteLagrangian::new(4, h, move |a: &Vector, b: &Vector| {
        let d = delta(a, b);
        let (s, c) = (0.5 * (a[1] + b[1])).sin_cos();
        -0.5 * d[2] * d[2] - 0.5 * d[3] * d[3] + (1.0 / h - 0.5) * d[0] * d[0] + d[1] * d[1] / (2.0 * h) + d[0] * (c * d[2] + s * d[3])
    })
}

/// The four displayed DEL equations of [`extended_lagrangian`], in the order
/// `x, y, θ, φ`.
pub fn extended_del_equations(qp: &Vector, qk: &Vector, qn: &Vector, h: f64) -> [f64; 4] {
    let (th0, ph0, x0, y0) = (qp[0], qp[1], qp[2], qp[3]);
    let (th1, ph1, x1, y1) = (qk[0], qk[1], qk[2], qk[3]);
    let (th2, ph2, x2, y2) = (qn[0], qn[1], qn[2], qn[3]);
    let (sa, ca) = (0.5 * (ph0 + ph1)).sin_cos();
    let (sb, cb) = (0.5 * (ph1 + ph2)).sin_cos();
    let g = (h - 2.0) / h;
    [
        x0 - 2.0 * x1 + x2 + (th1 - th0) * ca - (th2 - th1) * cb,
        y0 - 2.0 * y1 + y2 + (th1 - th0) * sa - (th2 - th1) * sb,
        g * (th0 - th1) - g * (th1 - th2) + (x1 - x0) * ca + (x1 - x2) * cb + (y1 - y0) * sa + (y1 - y2) * sb,
        (ph1 - ph0) / h
            + (ph1 - ph2) / h
            + 0.5 * (th0 - th1) * ((y0 - y1) * ca + (x1 - x0) * sa)
            + 0.5 * (th1 - th2) * ((y1 - y2) * cb + (x2 - x1) * sb),
    ]
}

/// Midpoint discretization of `L₁` (the Lagrangian of the remark with the
/// `F₁` extension).
pub fn ld1(h: f64) -> Result<DiscreteLagrangian> {
    DiscreteLagrangian::new(4, h, move |a: &Vector, b: &Vector| {
        let mid = (a + b) * 0.5;
        l1(&mid, &((b - a) / h))
    })
}

/// `h² L_{d1}`.
pub fn ld_bar(h: f64) -> Result<DiscreteLagrangian> {
    Ok(ld1(h)?.scaled(h * h))
}

fn rolling_term(q: &Vector, v: &Vector) -> f64 {
    let (s, c) = q[1].sin_cos();
    v[0] * (c * v[2] + s * v[3])
}

pub fn l1(q: &Vector, v: &Vector) -> f64 {
    0.5 * (v[0] * v[0] + v[1] * v[1] - v[2] * v[2] - v[3] * v[3]) + rolling_term(q, v)
}

/// Singular where `φ̇ = 0`.
pub fn l2(q: &Vector, v: &Vector) -> f64 {
    let (s, c) = q[1].sin_cos();
    0.5 * (v[1] * v[1] - v[0] * v[0] - v[2] * v[2] - v[3] * v[3])
        + v[0] * v[0] / (2.0 * v[1]) * (1.0 - c - s)
        + v[0] * v[2] * (c + 1.0 / v[1])
        + v[0] * v[3] * (s + 1.0 / v[1])
}

pub fn l3(q: &Vector, v: &Vector, h: f64) -> f64 {
    h * h * (-0.5 * v[2] * v[2] - 0.5 * v[3] * v[3] + (1.0 / h - 0.5) * v[0] * v[0] + v[1] * v[1] / (2.0 * h) + rolling_term(q, v))
}

/// `K₁ = L₁`.
pub fn k1(q: &Vector, v: &Vector) -> f64 {
    l1(q, v)
}

pub fn k2(q: &Vector, v: &Vector) -> f64 {
    0.5 * (-v[0] * v[0] + v[1] * v[1] - v[2] * v[2] - v[3] * v[3]) + rolling_term(q, v)
}

/// `K₃ = L₃`.
pub fn k3(q: &Vector, v: &Vector, h: f64) -> f64 {
    l3(q, v, h)
}

/// Midpoint discretizations `K₁ᵈ, K₂ᵈ, K₃ᵈ`.
pub fn energies(h: f64) -> Vec<PairFunction> {
    let mid = move |a: &Vector, b: &Vector| ((a + b) * 0.5, (b - a) / h);
    vec![
        PairFunction::new("K1d", move |a: &Vector, b: &Vector| {
            let (q, v) = mid(a, b);
            k1(&q, &v)
        }),
        PairFunction::new("K2d", move |a: &Vector, b: &Vector| {
            let (q, v) = mid(a, b);
            k2(&q, &v)
        }),
        PairFunction::new("K3d", move |a: &Vector, b: &Vector| {
            let (q, v) = mid(a, b);
            k3(&q, &v, h)
        }),
    ]
}

/// Sampling box on the `M_d` chart `(θ₀, φ₀, x₀, y₀, θ₁, φ₁)`, kept away
/// from `φ₁ = φ₀`.
pub fn chart_box(count: usize) -> Result<SampleBox> {
    SampleBox::new(vec![0.3, 0.1, 0.5, 0.5, 0.8, 0.7], vec![0.7, 0.5, 1.5, 1.5, 1.2, 1.1], count)
}
