//! The implicit system `Φ = (e^{ẍ−x} − 1, ÿ − y)`, variational with
//! `L = ½(ẋ² + ẏ² + x² + y²)` although the classical conditions on `Φ`
//! fail.

use crate::error::Result;
use crate::helmholtz::Jet;
use crate::numkit::linalg::Vector;

pub fn phi(q: &Vector, _v: &Vector, a: &Vector) -> Result<Vector> {
    Ok(Vector::from_vec(vec![(a[0] - q[0]).exp() - 1.0, a[1] - q[1]]))
}

/// Legendre-map candidate `F = (ẋ, ẏ)`.
pub fn fiber(_q: &Vector, v: &Vector) -> Result<Vector> {
    Ok(v.clone())
}

/// The jet `x = 0, ẋ = 1, ẍ = 0, x⃛ = 0` (and zero `y` data), on the
/// solution manifold.
pub fn documented_jet() -> Jet {
    Jet::new(Vector::zeros(2), Vector::from_vec(vec![1.0, 0.0]), Vector::zeros(2), Vector::zeros(2)).expect("consistent dimensions")
}

/// Value of the `(1, 1)` entry of the third classical condition,
/// `−2 d/dt e^{ẍ−x} = −2e^{ẍ−x}(x⃛ − ẋ)`.
pub fn chc3_entry(jet: &Jet) -> f64 {
    -2.0 * (jet.qdd[0] - jet.q[0]).exp() * (jet.qddd[0] - jet.qd[0])
}

/// The same entry written as `−2e^{ẍ−x}(ẋ − x⃛)`.
pub fn chc3_entry_as_displayed(jet: &Jet) -> f64 {
    -2.0 * (jet.qdd[0] - jet.q[0]).exp() * (jet.qd[0] - jet.qddd[0])
}

/// On-manifold jet from `(x, y, ẋ, ẏ, x⃛, y⃛)`: `ẍ = x`, `ÿ = y`.
pub fn jet_from_sample(s: &Vector) -> Jet {
    let q = Vector::from_vec(vec![s[0], s[1]]);
    let v = Vector::from_vec(vec![s[2], s[3]]);
    let j = Vector::from_vec(vec![s[4], s[5]]);
    Jet::new(q.clone(), v, q, j).expect("consistent dimensions")
}
