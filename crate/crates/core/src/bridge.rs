//! Continuous second-order systems and their discrete counterparts: exact
//! discrete Lagrangians, exponential-map discretization, flow isotropy and
//! a worked backward-error example.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::helmholtz::{isotropy_pullback, FiberKind, FiberMap, IsotropyReport};
use crate::lagrangian::DiscreteLagrangian;
use crate::numkit::diff::{fd_gradient, fd_jacobian, DiffConfig};
use crate::numkit::fit::fit_order;
use crate::numkit::linalg::{concat, max_abs_vec, product_symplectic, Vector};
use crate::numkit::newton::{newton_solve, NewtonConfig};
use crate::numkit::ode::{rk4_with, RK4_MAX_STEP};
use crate::numkit::quad::composite_gauss;
use crate::sode::ExplicitSOdE;

/// Endpoint tolerance of the shooting solve, tighter than the documented
/// `1e-10` so actions stay accurate for small `h`.
pub const SHOOTING_TOL: f64 = 1e-13;
pub const QUAD_TOL: f64 = 1e-10;
const QUAD_START_NODES: usize = 8;
const QUAD_MAX_NODES: usize = 64;

type VelocityScalar = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;
type VelocityMap = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;
type FlowFn = Arc<dyn Fn(&Vector, &Vector, f64) -> (Vector, Vector) + Send + Sync>;

/// `q̈ = Γ(q, q̇)` on `TQ`, optionally with a Lagrangian and a closed-form
/// flow.
#[derive(Clone)]
pub struct ContinuousSystem {
    dim: usize,
    accel: VelocityMap,
    lagrangian: Option<VelocityScalar>,
    flow: Option<FlowFn>,
}

impl fmt::Debug for ContinuousSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousSystem")
            .field("dim", &self.dim)
            .field("lagrangian", &self.lagrangian.is_some())
            .field("flow", &self.flow.is_some())
            .finish()
    }
}

impl ContinuousSystem {
    pub fn new<G>(dim: usize, accel: G) -> Self
    where
        G: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
    {
        Self { dim, accel: Arc::new(move |q: &Vector, v: &Vector| Ok(accel(q, v))), lagrangian: None, flow: None }
    }

    pub fn with_lagrangian<L>(mut self, l: L) -> Self
    where
        L: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        self.lagrangian = Some(Arc::new(l));
        self
    }

    /// Closed-form `Φ_t(q, q̇)`.
    pub fn with_flow<F>(mut self, flow: F) -> Self
    where
        F: Fn(&Vector, &Vector, f64) -> (Vector, Vector) + Send + Sync + 'static,
    {
        self.flow = Some(Arc::new(flow));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_lagrangian(&self) -> bool {
        self.lagrangian.is_some()
    }

    pub fn accel(&self, q: &Vector, v: &Vector) -> Result<Vector> {
        check_dim(self.dim, q.len())?;
        check_dim(self.dim, v.len())?;
        let a = (self.accel)(q, v)?;
        check_dim(self.dim, a.len())?;
        Ok(a)
    }

    pub fn lagrangian(&self, q: &Vector, v: &Vector) -> Result<f64> {
        match &self.lagrangian {
            Some(l) => Ok(l(q, v)),
            None => Err(Error::Unsupported("system has no Lagrangian".into())),
        }
    }

    /// `Φ_t(q, q̇)`: the closed form when present, else RK4 with internal
    /// step `max_step`.
    pub fn flow_with(&self, q: &Vector, v: &Vector, t: f64, max_step: f64) -> Result<(Vector, Vector)> {
        check_dim(self.dim, q.len())?;
        check_dim(self.dim, v.len())?;
        if let Some(f) = &self.flow {
            return Ok(f(q, v, t));
        }
        let n = self.dim;
        let y = rk4_with(
            |y: &Vector| {
                let q = y.rows(0, n).into_owned();
                let v = y.rows(n, n).into_owned();
                Ok(concat(&[&v, &self.accel(&q, &v)?]))
            },
            &concat(&[q, v]),
            t,
            max_step,
        )?;
        Ok((y.rows(0, n).into_owned(), y.rows(n, n).into_owned()))
    }

    pub fn flow(&self, q: &Vector, v: &Vector, t: f64) -> Result<(Vector, Vector)> {
        self.flow_with(q, v, t, default_step(t))
    }

    /// Stacked-state form of [`Self::flow`].
    pub fn flow_state(&self, z: &Vector, t: f64) -> Result<Vector> {
        check_dim(2 * self.dim, z.len())?;
        let (q, v) = self.flow(&z.rows(0, self.dim).into_owned(), &z.rows(self.dim, self.dim).into_owned(), t)?;
        Ok(concat(&[&q, &v]))
    }

    /// Euler–Lagrange residual `d/dt ∂L/∂q̇ − ∂L/∂q` with `q̈ = Γ(q, q̇)`.
    pub fn euler_lagrange_residual(&self, q: &Vector, v: &Vector) -> Result<f64> {
        let n = self.dim;
        let lag = self.lagrangian.clone().ok_or_else(|| Error::Unsupported("system has no Lagrangian".into()))?;
        let a = self.accel(q, v)?;
        let diff = DiffConfig::richardson();
        let grad = |s: &Vector| fd_gradient(|s: &Vector| Ok(lag(&s.rows(0, n).into_owned(), &s.rows(n, n).into_owned())), s, &diff);
        let s = concat(&[q, v]);
        let g = grad(&s)?;
        let hess = fd_jacobian(|s: &Vector| Ok(grad(s)?.rows(n, n).into_owned()), &s, &diff)?;
        let dt_p = hess.columns(0, n) * v + hess.columns(n, n) * a;
        Ok(max_abs_vec(&(dt_p - g.rows(0, n))))
    }
}

fn default_step(t: f64) -> f64 {
    RK4_MAX_STEP.min(t.abs() / 100.0).max(f64::MIN_POSITIVE)
}

/// `R^{e−}_h`: the initial velocity joining `q0` to `q1` in time `h`, found
/// by Newton shooting from `(q1 − q0)/h`.
pub fn shoot(sys: &ContinuousSystem, q0: &Vector, q1: &Vector, h: f64) -> Result<Vector> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    check_dim(sys.dim, q0.len())?;
    check_dim(sys.dim, q1.len())?;
    let guess = (q1 - q0) / h;
    let cfg = NewtonConfig { abs_tol: SHOOTING_TOL, stall_tol: 1e-10, ..NewtonConfig::default() };
    newton_solve(|v: &Vector| Ok(sys.flow(q0, v, h)?.0 - q1), &guess, &cfg)
}

/// `∫₀ʰ L(q(t), q̇(t)) dt` along the solution leaving `(q0, v0)`, by
/// Gauss–Legendre quadrature with the node count doubled until successive
/// values agree within `QUAD_TOL`.
pub fn action_along(sys: &ContinuousSystem, q0: &Vector, v0: &Vector, h: f64) -> Result<f64> {
    let step = default_step(h);
    let integrand = |t: f64| -> Result<f64> {
        let (q, v) = sys.flow_with(q0, v0, t, step)?;
        sys.lagrangian(&q, &v)
    };
    let mut nodes = QUAD_START_NODES;
    let mut prev = composite_gauss(integrand, 0.0, h, nodes, 1)?;
    while nodes < QUAD_MAX_NODES {
        nodes *= 2;
        let next = composite_gauss(integrand, 0.0, h, nodes, 1)?;
        let converged = (next - prev).abs() < QUAD_TOL;
        prev = next;
        if converged {
            return Ok(prev);
        }
    }
    Ok(prev)
}

/// Exact discrete Lagrangian `L_d^E(q0, q1)`.
pub fn exact_discrete_lagrangian(sys: &ContinuousSystem, q0: &Vector, q1: &Vector, h: f64) -> Result<f64> {
    let v0 = shoot(sys, q0, q1, h)?;
    action_along(sys, q0, &v0, h)
}

/// `L_d^E` packaged as a [`DiscreteLagrangian`] (derivatives by finite
/// differences).
pub fn exact_discrete_lagrangian_fn(sys: &ContinuousSystem, h: f64) -> Result<DiscreteLagrangian> {
    let s = sys.clone();
    DiscreteLagrangian::new(sys.dim, h, move |a: &Vector, b: &Vector| exact_discrete_lagrangian(&s, a, b, h).unwrap_or(f64::NAN))
}

/// `q₂ = τ_Q ∘ Φ_{2h} ∘ R^{e−}_h (q₀, q₁)`.
pub fn exp_map_discretize(sys: &ContinuousSystem, q0: &Vector, q1: &Vector, h: f64) -> Result<Vector> {
    let v0 = shoot(sys, q0, q1, h)?;
    Ok(sys.flow(q0, &v0, 2.0 * h)?.0)
}

/// The SOdE induced by the exponential map.
pub fn exp_map_sode(sys: &ContinuousSystem, h: f64) -> ExplicitSOdE {
    let s = sys.clone();
    ExplicitSOdE::fallible(sys.dim, move |a: &Vector, b: &Vector| exp_map_discretize(&s, a, b, h))
}

/// `F ∘ R^{e−}_h` as a discrete fiber map based at `q₀`.
pub fn fiber_via_shooting<F>(sys: &ContinuousSystem, fiber: F, h: f64) -> FiberMap
where
    F: Fn(&Vector, &Vector) -> Vector + Send + Sync + 'static,
{
    let s = sys.clone();
    FiberMap::fallible(sys.dim, FiberKind::Minus, move |a: &Vector, b: &Vector| {
        let v = shoot(&s, a, b, h)?;
        Ok(fiber(a, &v))
    })
}

/// Isotropy of `v ↦ (F(v), F(Φ_t(v)))` in `(T*Q × T*Q, Ω_Q)` at the state
/// `state = (q, q̇)`.
pub fn flow_isotropy<F>(sys: &ContinuousSystem, fiber: F, t: f64, state: &Vector) -> Result<IsotropyReport>
where
    F: Fn(&Vector, &Vector) -> Vector,
{
    let n = sys.dim;
    check_dim(2 * n, state.len())?;
    let point = |z: &Vector| {
        let q = z.rows(0, n).into_owned();
        let v = z.rows(n, n).into_owned();
        let p = fiber(&q, &v);
        concat(&[&q, &p])
    };
    let emb = |z: &Vector| -> Result<Vector> {
        let moved = sys.flow_state(z, t)?;
        Ok(concat(&[&point(z), &point(&moved)]))
    };
    isotropy_pullback(emb, &product_symplectic(n), state, &DiffConfig::default())
}

/// The scalar family `(x₂ − 2x₁ + x₀)/h² + x₁ = 0` with the fiber maps
/// `(x₁ − x₀)/h + h x₀ + b h` and the objects derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackwardErrorCase {
    pub b: f64,
}

impl BackwardErrorCase {
    pub fn new(b: f64) -> Self {
        Self { b }
    }

    /// Truncation order of the modified Hamiltonian.
    pub const RHO: usize = 2;

    pub fn section(&self, x0: f64, x1: f64, h: f64) -> f64 {
        (2.0 - h * h) * x1 - x0
    }

    pub fn fiber(&self, x0: f64, x1: f64, h: f64) -> f64 {
        (x1 - x0) / h + h * x0 + self.b * h
    }

    /// The induced map `(x₀, p₀) ↦ (x₁, p₁)` on `T*ℝ`.
    pub fn psi(&self, x0: f64, p0: f64, h: f64) -> (f64, f64) {
        ((1.0 - h * h) * x0 + h * p0 - self.b * h * h, p0 - h * x0)
    }

    pub fn ld(&self, x0: f64, x1: f64, h: f64) -> f64 {
        let d = (x1 - x0) / h;
        0.5 * h * d * d - 0.5 * h * x0 * x0 + self.b * h * (x1 - x0)
    }

    /// Type-2 generating function `S_(h)(x₀, p₁)`.
    pub fn s(&self, x0: f64, p1: f64, h: f64) -> f64 {
        0.5 * h * (x0 * x0 + p1 * p1) - h * h * self.b * p1 + 0.5 * self.b * self.b * h.powi(3)
    }

    /// `S₁ = H` and `S₂ = ½ H_q H_p` for `H = ½(x² + p²)`.
    pub fn s_coefficients(&self, x: f64, p: f64) -> (f64, f64) {
        (0.5 * (x * x + p * p), 0.5 * x * p)
    }

    pub fn h2(&self, x: f64, p: f64, h: f64) -> f64 {
        0.5 * (x * x + p * p) - h * (self.b * p + 0.5 * x * p)
    }

    pub fn l2(&self, x: f64, xd: f64, h: f64) -> f64 {
        let b = self.b;
        (4.0 * b * b * h * h + (h * h - 4.0) * x * x + 4.0 * h * x * xd + 4.0 * xd * xd + 4.0 * b * h * (h * x + 2.0 * xd)) / 8.0
    }

    pub fn discrete_lagrangian(&self, h: f64) -> Result<DiscreteLagrangian> {
        let c = *self;
        Ok(DiscreteLagrangian::new(1, h, move |a: &Vector, b: &Vector| c.ld(a[0], b[0], h))?
            .with_d1(move |a: &Vector, b: &Vector| Vector::from_element(1, -(b[0] - a[0]) / h - h * a[0] - c.b * h))
            .with_d2(move |a: &Vector, b: &Vector| Vector::from_element(1, (b[0] - a[0]) / h + c.b * h))
            .with_d12(move |_: &Vector, _: &Vector| crate::numkit::linalg::Matrix::from_element(1, 1, -1.0 / h)))
    }

    pub fn sode(&self, h: f64) -> ExplicitSOdE {
        let c = *self;
        ExplicitSOdE::new(1, move |a: &Vector, b: &Vector| Vector::from_element(1, c.section(a[0], b[0], h)))
    }

    pub fn fiber_map(&self, h: f64) -> FiberMap {
        let c = *self;
        FiberMap::new(1, FiberKind::Minus, move |a: &Vector, b: &Vector| Vector::from_element(1, c.fiber(a[0], b[0], h)))
    }

    /// Euler–Lagrange system of `L^{(2)}_h`:
    /// `ẍ = (h² − 4)x/4 + b h²/2`.
    pub fn modified_system(&self, h: f64) -> ContinuousSystem {
        let c = *self;
        ContinuousSystem::new(1, move |q: &Vector, _v: &Vector| Vector::from_element(1, (h * h - 4.0) * q[0] / 4.0 + c.b * h * h / 2.0))
            .with_lagrangian(move |q: &Vector, v: &Vector| c.l2(q[0], v[0], h))
    }

    /// `L_d^{(2)e}(x₀, x₁)` by shooting and quadrature.
    pub fn exact_modified(&self, x0: f64, x1: f64, h: f64) -> Result<f64> {
        let sys = self.modified_system(h);
        exact_discrete_lagrangian(&sys, &Vector::from_element(1, x0), &Vector::from_element(1, x1), h)
    }
}

/// Where the difference `L_d^{(2)e} − L_d` is sampled in an order study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OrderSampling {
    /// `(x(0), x(h))` along the `L^{(2)}_h` solution with the given initial
    /// state.
    Solution { x0: f64, v0: f64 },
    /// A fixed pair independent of `h`.
    FixedPair { x0: f64, x1: f64 },
}

impl Default for OrderSampling {
    fn default() -> Self {
        Self::Solution { x0: 1.0, v0: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStudy {
    pub h: Vec<f64>,
    pub difference: Vec<f64>,
    pub slope: f64,
}

pub fn order_study_backward(case: &BackwardErrorCase, h_grid: &[f64], sampling: OrderSampling) -> Result<OrderStudy> {
    if h_grid.len() < 5 {
        return Err(Error::Domain(format!("order study needs at least 5 step sizes, got {}", h_grid.len())));
    }
    if let Some(h) = h_grid.iter().find(|h| !(**h > 0.0 && **h <= 0.2)) {
        return Err(Error::Domain(format!("order-study step {h} outside (0, 0.2]")));
    }
    let mut difference = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let sys = case.modified_system(h);
        let d = match sampling {
            OrderSampling::Solution { x0, v0 } => {
                let q0 = Vector::from_element(1, x0);
                let v = Vector::from_element(1, v0);
                let x1 = sys.flow(&q0, &v, h)?.0[0];
                action_along(&sys, &q0, &v, h)? - case.ld(x0, x1, h)
            }
            OrderSampling::FixedPair { x0, x1 } => case.exact_modified(x0, x1, h)? - case.ld(x0, x1, h),
        };
        difference.push(d.abs());
    }
    let slope = fit_order(h_grid, &difference)?;
    Ok(OrderStudy { h: h_grid.to_vec(), difference, slope })
}
