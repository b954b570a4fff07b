//! Discrete Lagrangians, DEL stepping, discrete Legendre transforms and the
//! simulation driver.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::numkit::diff::{fd_gradient, fd_jacobian, DiffConfig};
use crate::numkit::linalg::{is_regular, max_abs, Matrix, Vector};
use crate::numkit::newton::{newton_solve_with, NewtonConfig};

pub type PairScalar = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
pub type PairCovector = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;
pub type PairMatrix = Arc<dyn Fn(&Vector, &Vector) -> Matrix + Send + Sync>;

/// Threshold for `|det D₁₂L_d|` relative to the product of its row norms.
pub const REGULARITY_TOL: f64 = 1e-12;
/// Step for the four-point mixed second difference used when neither slot
/// derivative is supplied.
const MIXED_STEP: f64 = 1.0 / 4096.0;

/// A scalar function `L_d(q₀, q₁)` with step size `h` and optional analytic
/// slot derivatives.
#[derive(Clone)]
pub struct DiscreteLagrangian {
    dim: usize,
    h: f64,
    value: PairScalar,
    d1: Option<PairCovector>,
    d2: Option<PairCovector>,
    d12: Option<PairMatrix>,
    pub diff: DiffConfig,
}

impl fmt::Debug for DiscreteLagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteLagrangian")
            .field("dim", &self.dim)
            .field("h", &self.h)
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .field("analytic_d12", &self.d12.is_some())
            .finish()
    }
}

impl DiscreteLagrangian {
    pub fn new<F>(dim: usize, h: f64, value: F) -> Result<Self>
    where
        F: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Domain(format!("step size must be positive, got {h}")));
        }
        if dim == 0 {
            return Err(Error::Domain("configuration dimension must be positive".into()));
        }
        Ok(Self { dim, h, value: Arc::new(value), d1: None, d2: None, d12: None, diff: DiffConfig::default() })
    }

    pub fn with_d1<F>(mut self, d1: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self
    }

    pub fn with_d2<F>(mut self, d2: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn with_d12<F>(mut self, d12: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> Matrix + Send + Sync + 'static,
    {
        self.d12 = Some(Arc::new(d12));
        self
    }

    pub fn with_diff(mut self, diff: DiffConfig) -> Self {
        self.diff = diff;
        self
    }

    /// `c · L_d`, carrying every analytic derivative along.
    pub fn scaled(&self, c: f64) -> Self {
        let v = self.value.clone();
        let mut out = Self { value: Arc::new(move |a: &Vector, b: &Vector| c * v(a, b)), ..self.clone() };
        if let Some(d) = self.d1.clone() {
            out.d1 = Some(Arc::new(move |a: &Vector, b: &Vector| d(a, b) * c));
        }
        if let Some(d) = self.d2.clone() {
            out.d2 = Some(Arc::new(move |a: &Vector, b: &Vector| d(a, b) * c));
        }
        if let Some(d) = self.d12.clone() {
            out.d12 = Some(Arc::new(move |a: &Vector, b: &Vector| d(a, b) * c));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn check(&self, q0: &Vector, q1: &Vector) -> Result<()> {
        check_dim(self.dim, q0.len())?;
        check_dim(self.dim, q1.len())
    }

    pub fn value(&self, q0: &Vector, q1: &Vector) -> Result<f64> {
        self.check(q0, q1)?;
        let v = (self.value)(q0, q1);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { context: "discrete Lagrangian" })
        }
    }

    /// `D₁L_d(q₀, q₁)`.
    pub fn d1(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        self.check(q0, q1)?;
        match &self.d1 {
            Some(d) => finite_vec(d(q0, q1), "D1 of discrete Lagrangian"),
            None => fd_gradient(|a| self.value(a, q1), q0, &self.diff),
        }
    }

    /// `D₂L_d(q₀, q₁)`.
    pub fn d2(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        self.check(q0, q1)?;
        match &self.d2 {
            Some(d) => finite_vec(d(q0, q1), "D2 of discrete Lagrangian"),
            None => fd_gradient(|b| self.value(q0, b), q1, &self.diff),
        }
    }

    /// `D₁₂L_d(q₀, q₁)` with entries `∂²L_d / ∂q₀ⁱ ∂q₁ʲ`.
    pub fn d12(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        self.check(q0, q1)?;
        if let Some(d) = &self.d12 {
            let m = d(q0, q1);
            if m.iter().all(|v| v.is_finite()) {
                return Ok(m);
            }
            return Err(Error::NonFinite { context: "D12 of discrete Lagrangian" });
        }
        if self.d1.is_some() {
            return fd_jacobian(|b| self.d1(q0, b), q1, &self.diff);
        }
        if self.d2.is_some() {
            return Ok(fd_jacobian(|a| self.d2(a, q1), q0, &self.diff)?.transpose());
        }
        self.mixed_hessian(q0, q1)
    }

    fn mixed_hessian(&self, q0: &Vector, q1: &Vector) -> Result<Matrix> {
        let n = self.dim;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            let s = MIXED_STEP * q0[i].abs().max(1.0);
            for j in 0..n {
                let t = MIXED_STEP * q1[j].abs().max(1.0);
                let eval = |si: f64, tj: f64| {
                    let mut a = q0.clone();
                    let mut b = q1.clone();
                    a[i] += si;
                    b[j] += tj;
                    self.value(&a, &b)
                };
                let v = eval(s, t)? - eval(s, -t)? - eval(-s, t)? + eval(-s, -t)?;
                out[(i, j)] = v / (4.0 * s * t);
            }
        }
        Ok(out)
    }

    /// `|det D₁₂L_d| > 1e-12 · ∏ ‖row‖∞`.
    pub fn is_regular(&self, q0: &Vector, q1: &Vector) -> Result<bool> {
        Ok(is_regular(&self.d12(q0, q1)?, REGULARITY_TOL))
    }

    /// Compare every analytic derivative with finite differences of the value
    /// at the given probes. Returns the largest discrepancy.
    pub fn validate(&self, probes: &[(Vector, Vector)], tol: f64) -> Result<f64> {
        let fd = Self { d1: None, d2: None, d12: None, ..self.clone() };
        let mut worst = 0.0_f64;
        for (q0, q1) in probes {
            if self.d1.is_some() {
                worst = worst.max((self.d1(q0, q1)? - fd.d1(q0, q1)?).amax());
            }
            if self.d2.is_some() {
                worst = worst.max((self.d2(q0, q1)? - fd.d2(q0, q1)?).amax());
            }
            if self.d12.is_some() {
                worst = worst.max(max_abs(&(self.d12(q0, q1)? - fd.d12(q0, q1)?)));
            }
        }
        if worst > tol {
            return Err(Error::Domain(format!("analytic derivatives disagree with finite differences by {worst:.3e}")));
        }
        Ok(worst)
    }
}

fn finite_vec(v: Vector, context: &'static str) -> Result<Vector> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite { context })
    }
}

/// `D₁L_d(q₁, q₂) + D₂L_d(q₀, q₁)`.
pub fn del_residual(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector, q2: &Vector) -> Result<Vector> {
    Ok(l.d1(q1, q2)? + l.d2(q0, q1)?)
}

/// Solve the DEL equations for `q₂` by Newton from the predictor `2q₁ − q₀`.
pub fn del_step(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector, cfg: &NewtonConfig) -> Result<Vector> {
    let guess = q1 * 2.0 - q0;
    del_step_from(l, q0, q1, &guess, cfg)
}

pub fn del_step_from(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector, guess: &Vector, cfg: &NewtonConfig) -> Result<Vector> {
    let back = l.d2(q0, q1)?;
    let out = newton_solve_with(|q2: &Vector| Ok(l.d1(q1, q2)? + &back), |q2: &Vector| l.d12(q1, q2), guess, cfg)?;
    Ok(out.x)
}

/// `𝔽⁻L_d(q₀, q₁) = (q₀, −D₁L_d(q₀, q₁))`.
pub fn legendre_minus(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector) -> Result<(Vector, Vector)> {
    Ok((q0.clone(), -l.d1(q0, q1)?))
}

/// `𝔽⁺L_d(q₀, q₁) = (q₁, D₂L_d(q₀, q₁))`.
pub fn legendre_plus(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector) -> Result<(Vector, Vector)> {
    Ok((q1.clone(), l.d2(q0, q1)?))
}

/// Coefficient matrix of `Ω_{L_d} = D₁₂L_d dq₀ ∧ dq₁` on `Q × Q`, i.e.
/// `[[0, D₁₂], [−D₁₂ᵀ, 0]]` in `(q₀, q₁)` ordering.
pub fn lagrangian_two_form(l: &DiscreteLagrangian, q0: &Vector, q1: &Vector) -> Result<Matrix> {
    let d12 = l.d12(q0, q1)?;
    Ok(two_form_from_d12(&d12))
}

pub(crate) fn two_form_from_d12(d12: &Matrix) -> Matrix {
    let n = d12.nrows();
    let mut out = Matrix::zeros(2 * n, 2 * n);
    out.view_mut((0, n), (n, n)).copy_from(d12);
    out.view_mut((n, 0), (n, n)).copy_from(&(-d12.transpose()));
    out
}

/// Discrete Hamiltonian map `F̃_{L_d} = 𝔽⁺L_d ∘ (𝔽⁻L_d)⁻¹` on `(q, p)`.
///
/// The inverse Legendre transform is solved by Newton from the guess
/// `q₁ = q₀ + h p` (exact for the free particle with unit mass).
pub fn hamiltonian_map(l: &DiscreteLagrangian, q: &Vector, p: &Vector, cfg: &NewtonConfig) -> Result<(Vector, Vector)> {
    let guess = q + p * l.h();
    let out = newton_solve_with(|q1: &Vector| Ok(-l.d1(q, q1)? - p), |q1: &Vector| Ok(-l.d12(q, q1)?), &guess, cfg)?;
    legendre_plus(l, q, &out.x)
}

/// Ordered sequence of configurations with a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Vector>,
    pub h: f64,
    pub labels: Vec<String>,
}

impl Trajectory {
    pub fn new(points: Vec<Vector>, h: f64, labels: Vec<String>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain(format!("a trajectory needs at least 2 points, got {}", points.len())));
        }
        let n = points[0].len();
        for p in &points {
            check_dim(n, p.len())?;
        }
        if labels.len() != n {
            return Err(Error::Dimension { expected: n, got: labels.len() });
        }
        Ok(Self { points, h, labels })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Consecutive pairs `(q_k, q_{k+1})`.
    pub fn pairs(&self) -> impl Iterator<Item = (&Vector, &Vector)> {
        self.points.windows(2).map(|w| (&w[0], &w[1]))
    }
}

/// Default coordinate labels `q0, q1, …`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("q{i}")).collect()
}

/// Named scalar function of a consecutive pair, e.g. a discrete energy.
#[derive(Clone)]
pub struct PairFunction {
    pub name: String,
    pub f: PairScalar,
}

impl PairFunction {
    pub fn new<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, q0: &Vector, q1: &Vector) -> f64 {
        (self.f)(q0, q1)
    }
}

impl fmt::Debug for PairFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PairFunction").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub energy_names: Vec<String>,
    /// `energies[e][k]` is energy `e` on the pair `(q_k, q_{k+1})`.
    pub energies: Vec<Vec<f64>>,
}

impl Simulation {
    pub(crate) fn from_points(points: Vec<Vector>, h: f64, labels: Vec<String>, energies: &[PairFunction]) -> Result<Self> {
        let trajectory = Trajectory::new(points, h, labels)?;
        let values = energies.iter().map(|e| trajectory.pairs().map(|(a, b)| e.eval(a, b)).collect()).collect();
        Ok(Self { trajectory, energy_names: energies.iter().map(|e| e.name.clone()).collect(), energies: values })
    }
}

/// Run `steps` DEL steps from `(q0, q1)`.
pub fn simulate(
    l: &DiscreteLagrangian,
    q0: &Vector,
    q1: &Vector,
    steps: usize,
    energies: &[PairFunction],
    cfg: &NewtonConfig,
) -> Result<Simulation> {
    match simulate_partial(l, q0, q1, steps, energies, cfg)? {
        (sim, None) => Ok(sim),
        (_, Some(err)) => Err(err),
    }
}

/// Like [`simulate`], but a failing step ends the run and the points computed
/// so far are returned together with the error.
pub fn simulate_partial(
    l: &DiscreteLagrangian,
    q0: &Vector,
    q1: &Vector,
    steps: usize,
    energies: &[PairFunction],
    cfg: &NewtonConfig,
) -> Result<(Simulation, Option<Error>)> {
    check_dim(l.dim(), q0.len())?;
    check_dim(l.dim(), q1.len())?;
    let mut points = Vec::with_capacity(steps + 2);
    points.push(q0.clone());
    points.push(q1.clone());
    let mut failure = None;
    for k in 0..steps {
        let n = points.len();
        match del_step(l, &points[n - 2], &points[n - 1], cfg) {
            Ok(q2) => points.push(q2),
            Err(e) => {
                failure = Some(Error::StepFailed { step: k + 2, source: Box::new(e) });
                break;
            }
        }
    }
    let sim = Simulation::from_points(points, l.h(), default_labels(l.dim()), energies)?;
    Ok((sim, failure))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(h: f64) -> DiscreteLagrangian {
        DiscreteLagrangian::new(1, h, move |a: &Vector, b: &Vector| {
            let d = (b - a) / h;
            0.5 * h * d.dot(&d)
        })
        .unwrap()
    }

    #[test]
    fn fd_derivatives_of_quadratic() {
        let l = toy(0.1);
        let (a, b) = (Vector::from_element(1, 0.0), Vector::from_element(1, 1.0));
        assert!((l.d1(&a, &b).unwrap()[0] + 10.0).abs() < 1e-8);
        assert!((l.d2(&a, &b).unwrap()[0] - 10.0).abs() < 1e-8);
        assert!((l.d12(&a, &b).unwrap()[(0, 0)] + 10.0).abs() < 1e-6);
    }

    #[test]
    fn scaled_lagrangian_scales_residual() {
        let l = toy(0.1);
        let s = l.scaled(3.0);
        let q = [0.0, 1.0, 3.0].map(|x| Vector::from_element(1, x));
        let r = del_residual(&l, &q[0], &q[1], &q[2]).unwrap();
        let rs = del_residual(&s, &q[0], &q[1], &q[2]).unwrap();
        assert!((rs - r * 3.0).amax() < 1e-7);
    }

    #[test]
    fn validate_flags_wrong_derivative() {
        let l = toy(0.1).with_d1(|a: &Vector, b: &Vector| (b - a) * 10.0);
        let probes = vec![(Vector::from_element(1, 0.2), Vector::from_element(1, 0.5))];
        assert!(l.validate(&probes, 1e-6).is_err());
    }

    #[test]
    fn rejects_bad_step() {
        assert!(DiscreteLagrangian::new(1, 0.0, |_: &Vector, _: &Vector| 0.0).is_err());
    }
}
