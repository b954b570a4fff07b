use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Relative pivot threshold below which a matrix is treated as singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// LU factorisation with partial pivoting, `P A = L U`.
///
/// A pivot smaller than `PIVOT_TOL` times the infinity norm of its original
/// row is reported as [`Error::SingularJacobian`].
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.nrows();
        check_dim(n, a.ncols())?;
        let row_norms: Vec<f64> = (0..n).map(|i| a.row(i).iter().fold(0.0_f64, |m, v| m.max(v.abs()))).collect();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (p, pivot_abs) = (k..n).map(|i| (i, lu[(i, k)].abs())).fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !pivot_abs.is_finite() {
                return Err(Error::NonFinite { context: "LU factorisation" });
            }
            let scale = row_norms[perm[p]];
            if pivot_abs <= PIVOT_TOL * scale || pivot_abs == 0.0 {
                return Err(Error::SingularJacobian { row: k, pivot: pivot_abs });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= factor * v;
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        let n = self.dim();
        check_dim(n, b.len())?;
        let mut x = Vector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        check_dim(self.dim(), b.nrows())?;
        let mut out = Matrix::zeros(b.nrows(), b.ncols());
        for j in 0..b.ncols() {
            let col = self.solve(&b.column(j).into_owned())?;
            out.set_column(j, &col);
        }
        Ok(out)
    }

    pub fn det(&self) -> f64 {
        (0..self.dim()).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }
}

pub fn solve(a: &Matrix, b: &Vector) -> Result<Vector> {
    Lu::factor(a)?.solve(b)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    Lu::factor(a)?.solve_matrix(&Matrix::identity(a.nrows(), a.nrows()))
}

/// Determinant that returns 0 for singular input instead of failing.
pub fn det(a: &Matrix) -> f64 {
    a.clone().determinant()
}

/// `(M - Mᵀ) / 2`.
pub fn antisymmetrize(m: &Matrix) -> Matrix {
    (m - m.transpose()) * 0.5
}

pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Product of the infinity norms of the rows, used as the scale for
/// determinant-based regularity tests.
pub fn row_norm_product(m: &Matrix) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))).product()
}

/// `|det M| > tol * prod_i ||row_i||`.
pub fn is_regular(m: &Matrix, tol: f64) -> bool {
    let scale = row_norm_product(m);
    scale > 0.0 && det(m).abs() > tol * scale
}

/// Matrix of the canonical two-form on `T*Q` in `(q, p)` ordering, with
/// `ω(u, v) = uᵀ S v = u_p·v_q − u_q·v_p`.
pub fn canonical_symplectic(n: usize) -> Matrix {
    let mut s = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        s[(n + i, i)] = 1.0;
        s[(i, n + i)] = -1.0;
    }
    s
}

/// `diag(−S, S)`: the form `β*ω − α*ω` on `T*Q × T*Q` in
/// `(q₀, p₀, q₁, p₁)` ordering.
pub fn product_symplectic(n: usize) -> Matrix {
    let s = canonical_symplectic(n);
    let mut out = Matrix::zeros(4 * n, 4 * n);
    out.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(-&s));
    out.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&s);
    out
}

pub fn smallest_singular_value(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Concatenate vectors end to end.
pub fn concat(parts: &[&Vector]) -> Vector {
    let len = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(len);
    let mut off = 0;
    for p in parts {
        out.rows_mut(off, p.len()).copy_from(p);
        off += p.len();
    }
    out
}

pub fn segment(v: &Vector, start: usize, len: usize) -> Vector {
    v.rows(start, len).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 1.0, 4.0, -6.0, 0.0, -2.0, 7.0, 2.0]);
        let b = Vector::from_vec(vec![5.0, -2.0, 9.0]);
        let x = solve(&a, &b).unwrap();
        assert!((&a * &x - &b).amax() < 1e-12);
        let lu = Lu::factor(&a).unwrap();
        assert!((lu.det() - a.determinant()).abs() < 1e-10);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Lu::factor(&a), Err(Error::SingularJacobian { .. })));
        let z = Matrix::zeros(2, 2);
        assert!(matches!(Lu::factor(&z), Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn antisymmetrization_is_exact() {
        let m = Matrix::from_fn(4, 4, |i, j| (i as f64 + 0.3).sin() * (j as f64 * 1.7).cos());
        let a = antisymmetrize(&m);
        assert_eq!(a.clone() + a.transpose(), Matrix::zeros(4, 4));
    }

    #[test]
    fn symplectic_matrices_are_antisymmetric() {
        let s = canonical_symplectic(3);
        assert_eq!(s.transpose(), -&s);
        let p = product_symplectic(2);
        assert_eq!(p.transpose(), -&p);
        assert_eq!(det(&s), 1.0);
    }
}
