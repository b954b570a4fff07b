//! Helmholtz conditions for second-order ODEs `Φ(q, q̇, q̈) = 0`.
//!
//! Total time derivatives of coefficient matrices are taken along a jet
//! `(q, q̇, q̈, q⃛)` as directional derivatives in `(q, q̇, q̈)` space with
//! direction `(q̇, q̈, q⃛)`.

use crate::error::{check_dim, Result};
use crate::numkit::diff::{fd_directional, fd_jacobian, DiffConfig};
use crate::numkit::linalg::{concat, max_abs, Lu, Matrix, Vector};
use crate::numkit::newton::{newton_solve, NewtonConfig};

/// A point of the third-order jet space.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub q: Vector,
    pub qd: Vector,
    pub qdd: Vector,
    pub qddd: Vector,
}

impl Jet {
    pub fn new(q: Vector, qd: Vector, qdd: Vector, qddd: Vector) -> Result<Self> {
        let n = q.len();
        check_dim(n, qd.len())?;
        check_dim(n, qdd.len())?;
        check_dim(n, qddd.len())?;
        Ok(Self { q, qd, qdd, qddd })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChcResiduals {
    /// `∂Φ/∂q̈` antisymmetrized.
    pub c1: Matrix,
    /// `∂Φ/∂q − (∂Φ/∂q)ᵀ − ½ d/dt(∂Φ/∂q̇ − (∂Φ/∂q̇)ᵀ)`.
    pub c2: Matrix,
    /// `∂Φ/∂q̇ + (∂Φ/∂q̇)ᵀ − d/dt(∂Φ/∂q̈ + (∂Φ/∂q̈)ᵀ)`.
    pub c3: Matrix,
}

impl ChcResiduals {
    pub fn max(&self) -> f64 {
        max_abs(&self.c1).max(max_abs(&self.c2)).max(max_abs(&self.c3))
    }
}

/// `(∂Φ/∂q, ∂Φ/∂q̇, ∂Φ/∂q̈)` at a packed state `x = (q, q̇, q̈)`.
fn phi_blocks<P>(phi: &P, x: &Vector, n: usize, diff: &DiffConfig) -> Result<[Matrix; 3]>
where
    P: Fn(&Vector, &Vector, &Vector) -> Result<Vector>,
{
    let j = fd_jacobian(|x: &Vector| phi(&x.rows(0, n).into_owned(), &x.rows(n, n).into_owned(), &x.rows(2 * n, n).into_owned()), x, diff)?;
    Ok([j.columns(0, n).into_owned(), j.columns(n, n).into_owned(), j.columns(2 * n, n).into_owned()])
}

/// Classical conditions for `Φ` at `jet`. Inner and outer derivatives both
/// use Richardson extrapolation.
pub fn chc_classical<P>(phi: P, jet: &Jet) -> Result<ChcResiduals>
where
    P: Fn(&Vector, &Vector, &Vector) -> Result<Vector>,
{
    let n = jet.dim();
    let diff = DiffConfig::richardson();
    let x = concat(&[&jet.q, &jet.qd, &jet.qdd]);
    let dir = concat(&[&jet.qd, &jet.qdd, &jet.qddd]);
    let [p0, p1, p2] = phi_blocks(&phi, &x, n, &diff)?;
    let dt_p1 = fd_directional(
        |x| {
            let b = phi_blocks(&phi, x, n, &diff)?;
            Ok(&b[1] - b[1].transpose())
        },
        &x,
        &dir,
        &diff,
    )?;
    let dt_p2 = fd_directional(
        |x| {
            let b = phi_blocks(&phi, x, n, &diff)?;
            Ok(&b[2] + b[2].transpose())
        },
        &x,
        &dir,
        &diff,
    )?;
    Ok(ChcResiduals { c1: &p2 - p2.transpose(), c2: &p0 - p0.transpose() - dt_p1 * 0.5, c3: &p1 + p1.transpose() - dt_p2 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IhcResiduals {
    /// Acceleration solving `Φ(q, q̇, q̈) = 0`.
    pub qdd: Vector,
    /// `∂F/∂q̇` antisymmetrized.
    pub i1: Matrix,
    /// `d/dt(∂F/∂q̇) + ∂F/∂q − (∂F/∂q)ᵀ − ∂F/∂q̇ C⁻¹ ∂Φ/∂q̇`.
    pub i2: Matrix,
    /// `X − Xᵀ` with `X = d/dt(∂F/∂q) − ∂F/∂q̇ C⁻¹ ∂Φ/∂q`.
    pub i3: Matrix,
}

impl IhcResiduals {
    pub fn max(&self) -> f64 {
        max_abs(&self.i1).max(max_abs(&self.i2)).max(max_abs(&self.i3))
    }
}

/// Conditions for `F(q, q̇)` to be the Legendre map of a Lagrangian whose
/// Euler–Lagrange field is `Φ = 0`, with `C = ∂Φ/∂q̈` regular. The
/// acceleration is solved at `(q, q̇)` starting from `guess` (zero by
/// default).
pub fn chc_implicit<F, P>(f: F, phi: P, q: &Vector, qd: &Vector, guess: Option<&Vector>, cfg: &NewtonConfig) -> Result<IhcResiduals>
where
    F: Fn(&Vector, &Vector) -> Result<Vector>,
    P: Fn(&Vector, &Vector, &Vector) -> Result<Vector>,
{
    let n = q.len();
    check_dim(n, qd.len())?;
    let g0 = guess.cloned().unwrap_or_else(|| Vector::zeros(n));
    check_dim(n, g0.len())?;
    let qdd = newton_solve(|a| phi(q, qd, a), &g0, cfg)?;

    let diff = DiffConfig::richardson();
    let x = concat(&[q, qd, &qdd]);
    let [phi_q, phi_v, c] = phi_blocks(&phi, &x, n, &diff)?;
    let lu = Lu::factor(&c)?;

    let fblocks = |s: &Vector| -> Result<(Matrix, Matrix)> {
        let j = fd_jacobian(|s: &Vector| f(&s.rows(0, n).into_owned(), &s.rows(n, n).into_owned()), s, &diff)?;
        Ok((j.columns(0, n).into_owned(), j.columns(n, n).into_owned()))
    };
    let s = concat(&[q, qd]);
    let dir = concat(&[qd, &qdd]);
    let (fq, fv) = fblocks(&s)?;
    let dt_fv = fd_directional(|s| Ok(fblocks(s)?.1), &s, &dir, &diff)?;
    let dt_fq = fd_directional(|s| Ok(fblocks(s)?.0), &s, &dir, &diff)?;

    let i2 = dt_fv + &fq - fq.transpose() - &fv * lu.solve_matrix(&phi_v)?;
    let x3 = dt_fq - &fv * lu.solve_matrix(&phi_q)?;
    Ok(IhcResiduals { qdd, i1: &fv - fv.transpose(), i2, i3: &x3 - x3.transpose() })
}
