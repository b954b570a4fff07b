use crate::error::{check_dim, Error, Result};
use crate::numkit::diff::{fd_jacobian, DiffConfig};
use crate::numkit::linalg::{max_abs_vec, Lu, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `‖f(x)‖∞ ≤ abs_tol`.
    pub abs_tol: f64,
    pub max_iter: usize,
    /// Also stop once the update satisfies `‖dx‖∞ ≤ step_tol · max(1, ‖x‖∞)`.
    /// Set to 0 to disable.
    pub step_tol: f64,
    /// Also stop once the residual has stopped shrinking (less than a
    /// halving per iteration) while already below `stall_tol`: the noise
    /// floor of finite-difference residuals. Set to 0 to disable.
    pub stall_tol: f64,
    pub diff: DiffConfig,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-12, max_iter: 50, step_tol: 4.0 * f64::EPSILON, stall_tol: 1e-8, diff: DiffConfig::default() }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain(format!("abs_tol must be positive, got {}", self.abs_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.step_tol >= 0.0) {
            return Err(Error::Domain(format!("step_tol must be nonnegative, got {}", self.step_tol)));
        }
        if !(self.stall_tol >= 0.0) {
            return Err(Error::Domain(format!("stall_tol must be nonnegative, got {}", self.stall_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vector,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton's method with a finite-difference Jacobian.
pub fn newton_solve<F>(f: F, x0: &Vector, cfg: &NewtonConfig) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let diff = cfg.diff;
    newton_solve_with(&f, |x: &Vector| fd_jacobian(&f, x, &diff), x0, cfg).map(|o| o.x)
}

/// Newton's method with a caller-supplied Jacobian.
///
/// Besides the residual test, the iteration accepts a point once the update
/// has shrunk to roundoff relative to `x`. Residuals that carry a large
/// scale factor (e.g. `1/h²`) cannot always reach `abs_tol` in floating
/// point even at the exact root, and further iterations would not change
/// `x`.
pub fn newton_solve_with<F, J>(f: F, jac: J, x0: &Vector, cfg: &NewtonConfig) -> Result<NewtonOutcome>
where
    F: Fn(&Vector) -> Result<Vector>,
    J: Fn(&Vector) -> Result<Matrix>,
{
    cfg.validate()?;
    let mut x = x0.clone();
    let mut fx = f(&x)?;
    check_dim(x.len(), fx.len())?;
    let mut res = max_abs_vec(&fx);
    if !res.is_finite() {
        return Err(Error::NonFinite { context: "Newton residual" });
    }
    for it in 0..cfg.max_iter {
        if res <= cfg.abs_tol {
            return Ok(NewtonOutcome { x, residual: res, iterations: it });
        }
        let j = jac(&x)?;
        let dx = Lu::factor(&j)?.solve(&fx)?;
        x -= &dx;
        fx = f(&x)?;
        let prev = res;
        res = max_abs_vec(&fx);
        if !res.is_finite() {
            return Err(Error::NonFinite { context: "Newton residual" });
        }
        let scale = max_abs_vec(&x).max(1.0);
        if cfg.step_tol > 0.0 && max_abs_vec(&dx) <= cfg.step_tol * scale {
            return Ok(NewtonOutcome { x, residual: res, iterations: it + 1 });
        }
        if res <= cfg.stall_tol && res > 0.5 * prev {
            return Ok(NewtonOutcome { x, residual: res, iterations: it + 1 });
        }
    }
    if res <= cfg.abs_tol {
        return Ok(NewtonOutcome { x, residual: res, iterations: cfg.max_iter });
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual: res })
}
