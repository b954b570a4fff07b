//! Recursion operators built from two invariant two-forms and the constants
//! of motion they yield.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::helmholtz::TwoFormField;
use crate::lagrangian::{PairFunction, Trajectory};
use crate::numkit::linalg::{max_abs, Lu, Matrix, Vector};

/// Floor for the normalising mean in drift metrics.
pub const DRIFT_FLOOR: f64 = 1e-30;
pub const MAX_TRACE_POWER: usize = 8;

/// `A = Ω₁⁻¹ Ω₂`, i.e. `i_X Ω₂ = i_{A X} Ω₁` in coordinates.
pub fn recursion_operator(omega1: &TwoFormField, omega2: &TwoFormField, z: &Vector) -> Result<Matrix> {
    check_dim(omega1.dim(), omega2.dim())?;
    let o1 = omega1.eval(z)?;
    let o2 = omega2.eval(z)?;
    let a = Lu::factor(&o1)?.solve_matrix(&o2)?;
    let residual = max_abs(&(&o1 * &a - &o2));
    if !(residual <= 1e-10 * max_abs(&o2).max(1.0)) {
        return Err(Error::NonFinite { context: "recursion operator solve" });
    }
    Ok(a)
}

/// `(max − min) / max(mean |v|, DRIFT_FLOOR)`.
pub fn relative_drift(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let mean = values.iter().map(|v| v.abs()).sum::<f64>() / values.len() as f64;
    (hi - lo) / mean.max(DRIFT_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePowers {
    /// `values[k − 1][j] = Tr A(z_j)^k`.
    pub values: Vec<Vec<f64>>,
    /// Relative drift of each power over the orbit.
    pub drift: Vec<f64>,
}

impl TracePowers {
    pub fn max_drift(&self) -> f64 {
        self.drift.iter().copied().fold(0.0, f64::max)
    }
}

/// `Tr A^k` for `k = 1..=kmax` along the orbit `z_{j+1} = flow(z_j)`
/// (`steps + 1` points).
pub fn trace_powers<A, F>(a_field: A, flow: F, z0: &Vector, steps: usize, kmax: usize) -> Result<TracePowers>
where
    A: Fn(&Vector) -> Result<Matrix>,
    F: Fn(&Vector) -> Result<Vector>,
{
    if kmax == 0 || kmax > MAX_TRACE_POWER {
        return Err(Error::Domain(format!("kmax must be in 1..={MAX_TRACE_POWER}, got {kmax}")));
    }
    let mut values = vec![Vec::with_capacity(steps + 1); kmax];
    let mut z = z0.clone();
    for j in 0..=steps {
        let a = a_field(&z)?;
        let mut p = a.clone();
        for row in values.iter_mut() {
            row.push(p.trace());
            p = &p * &a;
        }
        if j < steps {
            z = flow(&z)?;
        }
    }
    let drift = values.iter().map(|v| relative_drift(v)).collect();
    Ok(TracePowers { values, drift })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedSeries {
    pub name: String,
    pub values: Vec<f64>,
    pub drift: f64,
}

/// Evaluates `f` on consecutive pairs of `trajectory`.
pub fn conserved_quantity(f: &PairFunction, trajectory: &Trajectory) -> ConservedSeries {
    let values: Vec<f64> = trajectory.pairs().map(|(a, b)| f.eval(a, b)).collect();
    ConservedSeries { name: f.name.clone(), drift: relative_drift(&values), values }
}
