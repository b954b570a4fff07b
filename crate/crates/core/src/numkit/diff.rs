//! Finite-difference derivatives.
//!
//! Every routine perturbs one coordinate at a time with step
//! `step_scale * max(1, |x_i|)`. The Richardson scheme starts from a coarser
//! step and extrapolates a halving sequence of central differences; it is
//! used where a derivative of an already differentiated quantity is needed.

use crate::error::{Error, Result};
use crate::numkit::linalg::{Matrix, Vector};

/// Default central-difference step, `2^-17`.
pub const DEFAULT_STEP: f64 = 1.0 / 131_072.0;
/// Default starting step of the Richardson tableau, `2^-6`.
pub const DEFAULT_RICHARDSON_STEP: f64 = 1.0 / 64.0;
const RICHARDSON_LEVELS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Central,
    /// Central differences extrapolated over a halving step sequence.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    pub step_scale: f64,
    pub scheme: Scheme,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self { step_scale: DEFAULT_STEP, scheme: Scheme::Central }
    }
}

impl DiffConfig {
    pub fn richardson() -> Self {
        Self { step_scale: DEFAULT_RICHARDSON_STEP, scheme: Scheme::Richardson }
    }

    pub fn with_step(step_scale: f64) -> Result<Self> {
        if step_scale > 0.0 && step_scale.is_finite() {
            Ok(Self { step_scale, ..Self::default() })
        } else {
            Err(Error::Domain(format!("fd_step_scale must be positive, got {step_scale}")))
        }
    }

    fn step_for(&self, x: f64) -> f64 {
        self.step_scale * x.abs().max(1.0)
    }
}

fn all_finite(m: &Matrix) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Derivative at `t = 0` of a matrix-valued function of one real variable.
///
/// `scale` sets the magnitude used for the relative step; `coordinate` is
/// only used to label evaluation errors.
pub fn derivative_1d<G>(g: G, scale: f64, coordinate: usize, cfg: &DiffConfig) -> Result<Matrix>
where
    G: Fn(f64) -> Result<Matrix>,
{
    let central = |step: f64| -> Result<Matrix> {
        let plus = g(step)?;
        let minus = g(-step)?;
        if !all_finite(&plus) || !all_finite(&minus) {
            return Err(Error::Evaluation { coordinate });
        }
        Ok((plus - minus) / (2.0 * step))
    };
    let h0 = cfg.step_for(scale);
    match cfg.scheme {
        Scheme::Central => central(h0),
        Scheme::Richardson => {
            let mut prev: Vec<Matrix> = Vec::with_capacity(RICHARDSON_LEVELS);
            let mut step = h0;
            for level in 0..RICHARDSON_LEVELS {
                let mut row = vec![central(step)?];
                let mut factor = 1.0;
                for l in 1..=level {
                    factor *= 4.0;
                    let next = (&row[l - 1] * factor - &prev[l - 1]) / (factor - 1.0);
                    row.push(next);
                }
                prev = row;
                step *= 0.5;
            }
            Ok(prev.pop().expect("tableau has at least one entry"))
        }
    }
}

/// Jacobian `∂f_i/∂x_j` by central differences.
pub fn fd_jacobian<F>(f: F, x: &Vector, cfg: &DiffConfig) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let mut columns: Vec<Vector> = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let col = derivative_1d(
            |t| {
                let mut xp = x.clone();
                xp[j] += t;
                let v = f(&xp)?;
                Ok(Matrix::from_column_slice(v.len(), 1, v.as_slice()))
            },
            x[j],
            j,
            cfg,
        )?;
        columns.push(col.column(0).into_owned());
    }
    if columns.is_empty() {
        let m = f(x)?.len();
        return Ok(Matrix::zeros(m, 0));
    }
    Ok(Matrix::from_columns(&columns))
}

/// Gradient of a scalar function.
pub fn fd_gradient<F>(f: F, x: &Vector, cfg: &DiffConfig) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let jac = fd_jacobian(|y| Ok(Vector::from_element(1, f(y)?)), x, cfg)?;
    Ok(jac.row(0).transpose())
}

/// Partial derivatives of a matrix-valued field with respect to every
/// coordinate, `out[a] = ∂M/∂x_a`.
pub fn fd_matrix_partials<F>(f: F, x: &Vector, cfg: &DiffConfig) -> Result<Vec<Matrix>>
where
    F: Fn(&Vector) -> Result<Matrix>,
{
    (0..x.len())
        .map(|a| {
            derivative_1d(
                |t| {
                    let mut xp = x.clone();
                    xp[a] += t;
                    f(&xp)
                },
                x[a],
                a,
                cfg,
            )
        })
        .collect()
}

/// Directional derivative `d/ds M(x + s v)` at `s = 0`.
pub fn fd_directional<F>(f: F, x: &Vector, v: &Vector, cfg: &DiffConfig) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Matrix>,
{
    let scale = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let vnorm = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if vnorm == 0.0 {
        let m = f(x)?;
        return Ok(Matrix::zeros(m.nrows(), m.ncols()));
    }
    // Step in s is chosen so that s * |v| matches the coordinate step.
    let d = derivative_1d(|t| f(&(x + v * (t / vnorm))), scale, 0, cfg)?;
    Ok(d * vnorm)
}
