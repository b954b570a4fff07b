use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Result};
use crate::lagrangian::DiscreteLagrangian;
use crate::numkit::diff::{fd_jacobian, DiffConfig};
use crate::numkit::linalg::{concat, max_abs, product_symplectic, Matrix, Vector};
use crate::sode::{split, ExplicitSOdE, ImplicitSOdE, PairMap};

/// Which projection of `Q × Q` a fiber map lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiberKind {
    /// Based at `q₀`.
    Minus,
    /// Based at `q₁`.
    Plus,
}

/// Candidate discrete Legendre map `F : Q × Q → T*Q`, stored as the fiber
/// part `F(q₀, q₁) ∈ ℝⁿ`.
#[derive(Clone)]
pub struct FiberMap {
    dim: usize,
    kind: FiberKind,
    f: PairMap,
    pub diff: DiffConfig,
}

impl fmt::Debug for FiberMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiberMap").field("dim", &self.dim).field("kind", &self.kind).finish()
    }
}

impl FiberMap {
    pub fn new<F>(dim: usize, kind: FiberKind, f: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        Self::fallible(dim, kind, move |a: &Vector, b: &Vector| Ok(f(a, b)))
    }

    pub fn fallible<F>(dim: usize, kind: FiberKind, f: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync + 'static,
    {
        Self { dim, kind, f: Arc::new(f), diff: DiffConfig::default() }
    }

    /// `𝔽⁻L_d = −D₁L_d`.
    pub fn legendre_minus(l: &DiscreteLagrangian) -> Self {
        let l = l.clone();
        Self::fallible(l.dim(), FiberKind::Minus, move |a: &Vector, b: &Vector| Ok(-l.d1(a, b)?))
    }

    /// `𝔽⁺L_d = D₂L_d`.
    pub fn legendre_plus(l: &DiscreteLagrangian) -> Self {
        let l = l.clone();
        Self::fallible(l.dim(), FiberKind::Plus, move |a: &Vector, b: &Vector| l.d2(a, b))
    }

    pub fn with_diff(mut self, diff: DiffConfig) -> Self {
        self.diff = diff;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FiberKind {
        self.kind
    }

    pub fn fiber(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        check_dim(self.dim, q0.len())?;
        check_dim(self.dim, q1.len())?;
        let p = (self.f)(q0, q1)?;
        check_dim(self.dim, p.len())?;
        Ok(p)
    }

    /// Point `(base, p)` of `T*Q`.
    pub fn point(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        let p = self.fiber(q0, q1)?;
        let base = match self.kind {
            FiberKind::Minus => q0,
            FiberKind::Plus => q1,
        };
        Ok(concat(&[base, &p]))
    }

    /// `∂F/∂Q₁`.
    pub fn d_slot1(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        fd_jacobian(|a| self.fiber(a, q1), q0, &self.diff)
    }

    /// `∂F/∂Q₂`.
    pub fn d_slot2(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        fd_jacobian(|b| self.fiber(q0, b), q1, &self.diff)
    }

    /// Rank test for the fiber derivative transverse to the base.
    pub fn is_local_diffeo(&self, q0: &Vector, q1: &Vector) -> Result<bool> {
        let d = match self.kind {
            FiberKind::Minus => self.d_slot2(q0, q1)?,
            FiberKind::Plus => self.d_slot1(q0, q1)?,
        };
        Ok(crate::numkit::linalg::is_regular(&d, crate::lagrangian::REGULARITY_TOL))
    }
}

/// Residual matrices of the explicit discrete Helmholtz conditions at
/// `(q₀, q₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DhcResiduals {
    /// `∂F/∂Q₁(q₀, q₁)` antisymmetrized (entries `Fᵢ,ⱼ − Fⱼ,ᵢ`).
    pub r1: Matrix,
    /// `∂Fᵢ/∂Q₂ʲ(q₀, q₁) + ∂Fⱼ/∂Q₂ˡ(q₁, Γ) ∂Γˡ/∂q₀ⁱ`.
    pub r2: Matrix,
    /// Reduced third condition: `N − Nᵀ` with `N = ∂F/∂Q₂(q₁, Γ) · ∂Γ/∂q₁`.
    pub r3: Matrix,
    /// Unreduced third condition, `(∂F/∂Q₁(q₁, Γ) + N)` antisymmetrized.
    pub r3_full: Matrix,
}

impl DhcResiduals {
    pub fn max(&self) -> f64 {
        max_abs(&self.r1).max(max_abs(&self.r2)).max(max_abs(&self.r3))
    }

    pub fn max_full(&self) -> f64 {
        max_abs(&self.r1).max(max_abs(&self.r2)).max(max_abs(&self.r3_full))
    }
}

fn asym(m: &Matrix) -> Matrix {
    m - m.transpose()
}

pub fn dhc_explicit(f: &FiberMap, g: &ExplicitSOdE, q0: &Vector, q1: &Vector) -> Result<DhcResiduals> {
    check_dim(f.dim(), g.dim())?;
    let q2 = g.gamma(q0, q1)?;
    let f1 = f.d_slot1(q0, q1)?;
    let f2 = f.d_slot2(q0, q1)?;
    let f1n = f.d_slot1(q1, &q2)?;
    let f2n = f.d_slot2(q1, &q2)?;
    let dg0 = g.d_gamma_0(q0, q1)?;
    let dg1 = g.d_gamma_1(q0, q1)?;
    let m = &f2n * dg0;
    let n = &f2n * dg1;
    Ok(DhcResiduals { r1: asym(&f1), r2: &f2 + m.transpose(), r3: asym(&n), r3_full: asym(&(f1n + n)) })
}

/// Residuals of the implicit discrete Helmholtz conditions on an on-manifold
/// triple: `ω̃(Aᵢ, Aⱼ)`, `ω̃(Aᵢ, Bⱼ)` and `ω̃(Bᵢ, Bⱼ)` in coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitDhcResiduals {
    /// `∂F/∂Q₁(q₀, q₁)` antisymmetrized.
    pub r_aa: Matrix,
    /// `∂Fᵢ/∂Q₂ʲ(q₀, q₁) − ∂Fⱼ/∂Q₂ᵏ(q₁, q₂)(C⁻¹ ∂Φ/∂q₀)ᵏᵢ`.
    pub r_ab: Matrix,
    /// `G − Gᵀ` with `G = ∂F/∂Q₁(q₁, q₂) − ∂F/∂Q₂(q₁, q₂) C⁻¹ ∂Φ/∂q₁`.
    pub r_bb: Matrix,
}

impl ImplicitDhcResiduals {
    pub fn max(&self) -> f64 {
        max_abs(&self.r_aa).max(max_abs(&self.r_ab)).max(max_abs(&self.r_bb))
    }
}

pub fn dhc_implicit(f: &FiberMap, s: &ImplicitSOdE, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<ImplicitDhcResiduals> {
    check_dim(f.dim(), s.dim())?;
    let basis = crate::sode::tangent_basis(s, q0, q1, q2)?;
    let f1 = f.d_slot1(q0, q1)?;
    let f2 = f.d_slot2(q0, q1)?;
    let f1n = f.d_slot1(q1, q2)?;
    let f2n = f.d_slot2(q1, q2)?;
    let g = f1n - &f2n * &basis.c_inv_phi1;
    let m = &f2n * &basis.c_inv_phi0;
    Ok(ImplicitDhcResiduals { r_aa: asym(&f1), r_ab: f2 - m.transpose(), r_bb: asym(&g) })
}

/// Pullback of an ambient form with matrix `ambient` along `embedding` at
/// `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyReport {
    /// `Jᵀ · ambient · J`, antisymmetric of size `m × m`.
    pub residual: Matrix,
    pub max_residual: f64,
    /// Dimension of the source chart.
    pub source_dim: usize,
    /// Dimension of the ambient symplectic manifold.
    pub ambient_dim: usize,
}

impl IsotropyReport {
    pub fn is_isotropic(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }

    /// Isotropic with half the ambient dimension.
    pub fn is_lagrangian(&self, tol: f64) -> bool {
        self.is_isotropic(tol) && 2 * self.source_dim == self.ambient_dim
    }
}

pub fn isotropy_pullback<E>(embedding: E, ambient: &Matrix, z: &Vector, diff: &DiffConfig) -> Result<IsotropyReport>
where
    E: Fn(&Vector) -> Result<Vector>,
{
    let j = fd_jacobian(embedding, z, diff)?;
    check_dim(ambient.nrows(), j.nrows())?;
    let residual = j.transpose() * ambient * &j;
    Ok(IsotropyReport { max_residual: max_abs(&residual), source_dim: z.len(), ambient_dim: ambient.nrows(), residual })
}

/// `γ_{F,Γ}(q₀, q₁) = (F(q₀, q₁), F(Φ_Γ(q₀, q₁)))` as a map from the stacked
/// chart into `T*Q × T*Q`.
pub fn gamma_embedding(f: &FiberMap, g: &ExplicitSOdE) -> impl Fn(&Vector) -> Result<Vector> + Clone {
    let f = f.clone();
    let g = g.clone();
    move |z: &Vector| {
        let (q0, q1) = split(z, f.dim());
        let q2 = g.gamma(&q0, &q1)?;
        Ok(concat(&[&f.point(&q0, &q1)?, &f.point(&q1, &q2)?]))
    }
}

/// Isotropy residual of `Im γ_{F,Γ}` in `(T*Q × T*Q, Ω_Q)` at `(q₀, q₁)`.
pub fn gamma_isotropy(f: &FiberMap, g: &ExplicitSOdE, q0: &Vector, q1: &Vector) -> Result<IsotropyReport> {
    let emb = gamma_embedding(f, g);
    let z = concat(&[q0, q1]);
    isotropy_pullback(emb, &product_symplectic(f.dim()), &z, &f.diff)
}

/// `F⁺ = F ∘ Φ_Γ`, based at `q₁`. Fails with `SingularJacobian` when
/// `∂Γ̃/∂q₀` is singular at `probe`.
pub fn plus_from_minus(f: &FiberMap, g: &ExplicitSOdE, probe: (&Vector, &Vector)) -> Result<FiberMap> {
    check_dim(f.dim(), g.dim())?;
    g.check_d_gamma_0(probe.0, probe.1)?;
    let fm = f.clone();
    let gm = g.clone();
    Ok(FiberMap::fallible(f.dim(), FiberKind::Plus, move |a: &Vector, b: &Vector| {
        let c = gm.gamma(a, b)?;
        fm.fiber(b, &c)
    })
    .with_diff(f.diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_embedding_is_isotropic() {
        let rep = isotropy_pullback(
            |_: &Vector| Ok(Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0])),
            &product_symplectic(1),
            &Vector::from_vec(vec![0.1, 0.2]),
            &DiffConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.max_residual, 0.0);
        assert!(rep.is_lagrangian(1e-12));
    }

    #[test]
    fn diagonal_of_first_condition_vanishes() {
        let f = FiberMap::new(2, FiberKind::Minus, |a: &Vector, b: &Vector| {
            Vector::from_vec(vec![a[0] * b[1] + a[1].sin(), a[0] * a[1] - b[0]])
        });
        let g = ExplicitSOdE::new(2, |a: &Vector, b: &Vector| b * 2.0 - a);
        let r = dhc_explicit(&f, &g, &Vector::from_vec(vec![0.3, 0.1]), &Vector::from_vec(vec![0.5, -0.2])).unwrap();
        for i in 0..2 {
            assert_eq!(r.r1[(i, i)], 0.0);
            assert_eq!(r.r3[(i, i)], 0.0);
        }
    }
}
