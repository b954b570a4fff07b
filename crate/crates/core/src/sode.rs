//! Explicit and implicit second-order difference equations.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::lagrangian::REGULARITY_TOL;
use crate::numkit::diff::{fd_jacobian, DiffConfig};
use crate::numkit::linalg::{concat, is_regular, max_abs_vec, segment, Lu, Matrix, Vector};
use crate::numkit::newton::{newton_solve_with, NewtonConfig};

pub type PairMap = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;
pub type TripleMap = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync>;
pub type TripleMatrix = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Matrix + Send + Sync>;

/// Largest `‖Φ‖∞` accepted for a point to count as lying on `M`.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// Explicit SOdE `q₂ = Γ̃(q₀, q₁)` with flow `Φ_Γ(q₀, q₁) = (q₁, Γ̃(q₀, q₁))`.
#[derive(Clone)]
pub struct ExplicitSOdE {
    dim: usize,
    gamma: PairMap,
    pub diff: DiffConfig,
}

impl fmt::Debug for ExplicitSOdE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExplicitSOdE").field("dim", &self.dim).finish()
    }
}

impl ExplicitSOdE {
    pub fn new<F>(dim: usize, gamma: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        Self::fallible(dim, move |a: &Vector, b: &Vector| Ok(gamma(a, b)))
    }

    /// A map whose evaluation can fail, e.g. one defined by an inner solve.
    pub fn fallible<F>(dim: usize, gamma: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        Self { dim, gamma: Arc::new(gamma), diff: DiffConfig::default() }
    }

    pub fn with_diff(mut self, diff: DiffConfig) -> Self {
        self.diff = diff;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        check_dim(self.dim, q0.len())?;
        check_dim(self.dim, q1.len())?;
        let q2 = (self.gamma)(q0, q1)?;
        check_dim(self.dim, q2.len())?;
        if q2.iter().all(|v| v.is_finite()) {
            Ok(q2)
        } else {
            Err(Error::NonFinite { context: "second-order map" })
        }
    }

    /// Flow on the stacked chart `z = (q₀, q₁)`.
    pub fn flow(&self, z: &Vector) -> Result<Vector> {
        check_dim(2 * self.dim, z.len())?;
        let (q0, q1) = split(z, self.dim);
        let q2 = self.gamma(&q0, &q1)?;
        Ok(concat(&[&q1, &q2]))
    }

    /// `∂Γ̃/∂q₀`.
    pub fn d_gamma_0(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        fd_jacobian(|a| self.gamma(a, q1), q0, &self.diff)
    }

    /// `∂Γ̃/∂q₁`.
    pub fn d_gamma_1(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        fd_jacobian(|b| self.gamma(q0, b), q1, &self.diff)
    }

    /// Fails with `SingularJacobian` when `∂Γ̃/∂q₀` is not invertible.
    pub fn check_d_gamma_0(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        let d = self.d_gamma_0(q0, q1)?;
        Lu::factor(&d)?;
        Ok(d)
    }
}

pub(crate) fn split(z: &Vector, n: usize) -> (Vector, Vector) {
    (segment(z, 0, n), segment(z, n, n))
}

/// Implicit SOdE `Φ(q₀, q₁, q₂) = 0` with `C = ∂Φ/∂q₂` invertible.
#[derive(Clone)]
pub struct ImplicitSOdE {
    dim: usize,
    phi: TripleMap,
    c: Option<TripleMatrix>,
    pub diff: DiffConfig,
}

impl fmt::Debug for ImplicitSOdE {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitSOdE").field("dim", &self.dim).field("analytic_c", &self.c.is_some()).finish()
    }
}

impl ImplicitSOdE {
    pub fn new<F>(dim: usize, phi: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        Self { dim, phi: Arc::new(move |a: &Vector, b: &Vector, c: &Vector| Ok(phi(a, b, c))), c: None, diff: DiffConfig::default() }
    }

    pub fn with_c<F>(mut self, c: F) -> Self
    where
        F: Fn(&Vector, &Vector, &Vector) -> Matrix + Send + Sync + 'static,
    {
        self.c = Some(Arc::new(c));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
        for q in [q0, q1, q2] {
            check_dim(self.dim, q.len())?;
        }
        let v = (self.phi)(q0, q1, q2)?;
        check_dim(self.dim, v.len())?;
        if v.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(Error::NonFinite { context: "implicit second-order equation" })
        }
    }

    /// `C = ∂Φ/∂q₂`.
    pub fn c(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Matrix> {
        match &self.c {
            Some(c) => Ok(c(q0, q1, q2)),
            None => fd_jacobian(|z| self.phi(q0, q1, z), q2, &self.diff),
        }
    }

    pub fn d_phi_0(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Matrix> {
        fd_jacobian(|z| self.phi(z, q1, q2), q0, &self.diff)
    }

    pub fn d_phi_1(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Matrix> {
        fd_jacobian(|z| self.phi(q0, z, q2), q1, &self.diff)
    }

    pub fn is_regular(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<bool> {
        Ok(is_regular(&self.c(q0, q1, q2)?, REGULARITY_TOL))
    }

    /// Fails with `OffManifold` unless `‖Φ‖∞ ≤ 1e-9`.
    pub fn check_on_manifold(&self, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<()> {
        let r = max_abs_vec(&self.phi(q0, q1, q2)?);
        if r <= ON_MANIFOLD_TOL {
            Ok(())
        } else {
            Err(Error::OffManifold { residual: r })
        }
    }
}

/// Solve `Φ(q₀, q₁, q₂) = 0` for `q₂` by Newton, from `guess` or `2q₁ − q₀`.
pub fn implicit_step(s: &ImplicitSOdE, q0: &Vector, q1: &Vector, guess: Option<&Vector>, cfg: &NewtonConfig) -> Result<Vector> {
    let start = guess.cloned().unwrap_or_else(|| q1 * 2.0 - q0);
    let out = newton_solve_with(|q2: &Vector| s.phi(q0, q1, q2), |q2: &Vector| s.c(q0, q1, q2), &start, cfg)?;
    Ok(out.x)
}

/// Local frame of `TM` at a point of `M`, as rows in `(q₀, q₁, q₂)`
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentBasis {
    /// `A_i = ∂/∂q₀ⁱ − (C⁻¹ ∂Φ/∂q₀)ʳᵢ ∂/∂q₂ʳ`.
    pub a: Matrix,
    /// `B_i = ∂/∂q₁ⁱ − (C⁻¹ ∂Φ/∂q₁)ʳᵢ ∂/∂q₂ʳ`.
    pub b: Matrix,
    /// `C⁻¹ ∂Φ/∂q₀`.
    pub c_inv_phi0: Matrix,
    /// `C⁻¹ ∂Φ/∂q₁`.
    pub c_inv_phi1: Matrix,
}

pub fn tangent_basis(s: &ImplicitSOdE, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<TangentBasis> {
    s.check_on_manifold(q0, q1, q2)?;
    let n = s.dim();
    let lu = Lu::factor(&s.c(q0, q1, q2)?)?;
    let k0 = lu.solve_matrix(&s.d_phi_0(q0, q1, q2)?)?;
    let k1 = lu.solve_matrix(&s.d_phi_1(q0, q1, q2)?)?;
    let mut a = Matrix::zeros(n, 3 * n);
    let mut b = Matrix::zeros(n, 3 * n);
    for i in 0..n {
        a[(i, i)] = 1.0;
        b[(i, n + i)] = 1.0;
        for r in 0..n {
            a[(i, 2 * n + r)] = -k0[(r, i)];
            b[(i, 2 * n + r)] = -k1[(r, i)];
        }
    }
    Ok(TangentBasis { a, b, c_inv_phi0: k0, c_inv_phi1: k1 })
}

/// `Φ = q₂ − Γ̃(q₀, q₁)`, so `C` is the identity.
pub fn explicit_to_implicit(g: &ExplicitSOdE) -> ImplicitSOdE {
    let n = g.dim();
    let gm = g.clone();
    ImplicitSOdE {
        dim: n,
        phi: Arc::new(move |a: &Vector, b: &Vector, c: &Vector| Ok(c - gm.gamma(a, b)?)),
        c: Some(Arc::new(move |_: &Vector, _: &Vector, _: &Vector| Matrix::identity(n, n))),
        diff: g.diff,
    }
}
