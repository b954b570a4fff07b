use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::numkit::diff::{fd_jacobian, fd_matrix_partials, DiffConfig};
use crate::numkit::linalg::{canonical_symplectic, det, max_abs, smallest_singular_value, Matrix, Vector};

use super::discrete::FiberMap;

type FieldFn = Arc<dyn Fn(&Vector) -> Result<Matrix> + Send + Sync>;

/// Coordinate field of a 2-form on an `m`-dimensional chart. Coordinates
/// with index `>= vertical_start` span the kernel of the projection to the
/// first factor.
#[derive(Clone)]
pub struct TwoFormField {
    dim: usize,
    vertical_start: usize,
    coeff: FieldFn,
}

impl fmt::Debug for TwoFormField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoFormField").field("dim", &self.dim).field("vertical_start", &self.vertical_start).finish()
    }
}

impl TwoFormField {
    pub fn new<F>(dim: usize, vertical_start: usize, coeff: F) -> Result<Self>
    where
        F: Fn(&Vector) -> Result<Matrix> + Send + Sync + 'static,
    {
        if vertical_start > dim {
            return Err(Error::Domain(format!("vertical block starts at {vertical_start} in a {dim}-dimensional chart")));
        }
        Ok(Self { dim, vertical_start, coeff: Arc::new(coeff) })
    }

    /// `F*ω` on `Q × Q` for the canonical `ω = dp ∧ dq`.
    pub fn from_fiber_map(f: &FiberMap) -> Self {
        let n = f.dim();
        let f = f.clone();
        let s = canonical_symplectic(n);
        Self {
            dim: 2 * n,
            vertical_start: n,
            coeff: Arc::new(move |z: &Vector| {
                let point = |z: &Vector| f.point(&z.rows(0, n).into_owned(), &z.rows(n, n).into_owned());
                let j = fd_jacobian(point, z, &f.diff)?;
                Ok(j.transpose() * &s * j)
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertical_start(&self) -> usize {
        self.vertical_start
    }

    pub fn eval(&self, z: &Vector) -> Result<Matrix> {
        check_dim(self.dim, z.len())?;
        let m = (self.coeff)(z)?;
        check_dim(self.dim, m.nrows())?;
        check_dim(self.dim, m.ncols())?;
        Ok(m)
    }
}

/// Residuals of the structural conditions on a 2-form at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormChecks {
    /// Largest `|∂ₐΩ_bc + ∂_bΩ_ca + ∂_cΩ_ab|`.
    pub closure: f64,
    /// Largest entry of the vertical-vertical block.
    pub vertical: f64,
    /// Largest entry of the horizontal-horizontal block (the variant with
    /// the other projection).
    pub vertical_alt: f64,
    /// `|Φ*Ω − Ω|` when a flow was supplied.
    pub discrete_lie: Option<f64>,
    pub det_abs: f64,
    /// Smallest singular value of `v ↦ i_v Ω` on vertical vectors.
    pub flat_injectivity: f64,
    pub antisymmetry: f64,
}

impl TwoFormChecks {
    /// Closed, vertical and invariant within `tol`, with a non-degenerate
    /// vertical flat map.
    pub fn all_hold(&self, tol: f64) -> bool {
        self.closure <= tol
            && self.vertical <= tol
            && self.discrete_lie.is_none_or(|r| r <= tol)
            && self.flat_injectivity > tol
            && self.antisymmetry <= tol
    }
}

pub fn two_form_checks<Fl>(omega: &TwoFormField, flow: Option<Fl>, z: &Vector) -> Result<TwoFormChecks>
where
    Fl: Fn(&Vector) -> Result<Vector>,
{
    let m = omega.dim();
    let v0 = omega.vertical_start();
    let om = omega.eval(z)?;
    let antisymmetry = max_abs(&(&om + om.transpose()));

    let partials = fd_matrix_partials(|x| omega.eval(x), z, &DiffConfig::richardson())?;
    let mut closure = 0.0_f64;
    for a in 0..m {
        for b in (a + 1)..m {
            for c in (b + 1)..m {
                let r = partials[a][(b, c)] + partials[b][(c, a)] + partials[c][(a, b)];
                closure = closure.max(r.abs());
            }
        }
    }

    let nv = m - v0;
    let vertical = max_abs(&om.view((v0, v0), (nv, nv)).into_owned());
    let vertical_alt = max_abs(&om.view((0, 0), (v0, v0)).into_owned());

    let discrete_lie = match flow {
        Some(fl) => {
            let j = fd_jacobian(&fl, z, &DiffConfig::default())?;
            let moved = omega.eval(&fl(z)?)?;
            Some(max_abs(&(j.transpose() * moved * &j - &om)))
        }
        None => None,
    };

    let flat_rows = om.view((v0, 0), (nv, m)).into_owned();
    Ok(TwoFormChecks {
        closure,
        vertical,
        vertical_alt,
        discrete_lie,
        det_abs: det(&om).abs(),
        flat_injectivity: smallest_singular_value(&flat_rows),
        antisymmetry,
    })
}
