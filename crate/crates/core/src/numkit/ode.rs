use crate::error::{Error, Result};
use crate::numkit::linalg::Vector;

/// Largest internal step used by [`rk4`].
pub const RK4_MAX_STEP: f64 = 1e-3;

/// Number of equal substeps needed to cover `t` with steps no larger than
/// `max_step`.
pub fn substeps(t: f64, max_step: f64) -> usize {
    ((t.abs() / max_step).ceil() as usize).max(1)
}

/// Classical fixed-step RK4 for the autonomous system `y' = f(y)` over time
/// `t` (may be negative), with internal step at most `max_step`.
pub fn rk4_with<F>(f: F, y0: &Vector, t: f64, max_step: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    if !(max_step > 0.0) {
        return Err(Error::Domain(format!("RK4 step must be positive, got {max_step}")));
    }
    let n = substeps(t, max_step);
    let dt = t / n as f64;
    let mut y = y0.clone();
    for _ in 0..n {
        let k1 = f(&y)?;
        let k2 = f(&(&y + &k1 * (0.5 * dt)))?;
        let k3 = f(&(&y + &k2 * (0.5 * dt)))?;
        let k4 = f(&(&y + &k3 * dt))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "RK4 propagation" });
    }
    Ok(y)
}

pub fn rk4<F>(f: F, y0: &Vector, t: f64) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    rk4_with(f, y0, t, RK4_MAX_STEP)
}

/// RK4 that also returns the state after every internal step, paired with
/// its time.
pub fn rk4_dense<F>(f: F, y0: &Vector, t: f64, max_step: f64) -> Result<Vec<(f64, Vector)>>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let n = substeps(t, max_step);
    let dt = t / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut y = y0.clone();
    out.push((0.0, y.clone()));
    for i in 0..n {
        y = rk4_with(&f, &y, dt, dt.abs() * 2.0)?;
        out.push(((i + 1) as f64 * dt, y.clone()));
    }
    Ok(out)
}
