//! Discrete Lagrange–d'Alembert integrator for systems with linear
//! velocity constraints `w^a(q)(q̇) = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::helmholtz::{isotropy_pullback, FiberMap, IsotropyReport};
use crate::lagrangian::{default_labels, DiscreteLagrangian, PairFunction, Simulation};
use crate::numkit::diff::{fd_jacobian, DiffConfig};
use crate::numkit::linalg::{concat, product_symplectic, Matrix, Vector};
use crate::numkit::newton::{newton_solve, NewtonConfig};

/// Where the constraint forms are evaluated when discretizing
/// `w^a(q)(q̇)` on a step `(q_k, q_{k+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiscretizationRule {
    Midpoint,
    Trapezoidal,
    /// Average of `w` at `(1−α)q_k + αq_{k+1}` and `αq_k + (1−α)q_{k+1}`.
    Alpha(f64),
    /// `w(q_k)`.
    EulerA,
    /// `w(q_{k+1})`.
    EulerB,
}

impl DiscretizationRule {
    pub fn alpha(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self::Alpha(alpha))
        } else {
            Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha}")))
        }
    }

    /// Points at which `w` is averaged, as weights on `q_{k+1}`.
    fn weights(&self) -> Vec<f64> {
        match *self {
            Self::Midpoint => vec![0.5],
            Self::Trapezoidal => vec![0.0, 1.0],
            Self::Alpha(a) => vec![a, 1.0 - a],
            Self::EulerA => vec![0.0],
            Self::EulerB => vec![1.0],
        }
    }
}

impl fmt::Display for DiscretizationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Midpoint => write!(f, "midpoint"),
            Self::Trapezoidal => write!(f, "trapezoidal"),
            Self::Alpha(a) => write!(f, "alpha:{a}"),
            Self::EulerA => write!(f, "euler-a"),
            Self::EulerB => write!(f, "euler-b"),
        }
    }
}

impl FromStr for DiscretizationRule {
    type Err = Error;

    /// Accepts `midpoint`, `trapezoidal`, `euler-a`, `euler-b` and
    /// `alpha:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "midpoint" => Ok(Self::Midpoint),
            "trapezoidal" => Ok(Self::Trapezoidal),
            "euler-a" | "euler_a" | "eulera" => Ok(Self::EulerA),
            "euler-b" | "euler_b" | "eulerb" => Ok(Self::EulerB),
            other => match other.strip_prefix("alpha:").or_else(|| other.strip_prefix("alpha=")) {
                Some(v) => {
                    let a: f64 = v.parse().map_err(|_| Error::Domain(format!("bad alpha value `{v}`")))?;
                    Self::alpha(a)
                }
                None => Err(Error::Domain(format!("unknown discretization rule `{s}`"))),
            },
        }
    }
}

type FormsFn = Arc<dyn Fn(&Vector) -> Matrix + Send + Sync>;
type VelocityScalar = Arc<dyn Fn(&Vector, &Vector) -> f64 + Send + Sync>;

/// Discrete Lagrangian with `m` constraint one-forms (rows of `w(q)`), a
/// discretization rule and a chart split of the configuration coordinates
/// into free and dependent ones.
#[derive(Clone)]
pub struct NonholonomicSystem {
    dim: usize,
    num_constraints: usize,
    forms: FormsFn,
    ld: DiscreteLagrangian,
    rule: DiscretizationRule,
    free: Vec<usize>,
    dependent: Vec<usize>,
    lagrangian: Option<VelocityScalar>,
    pub labels: Vec<String>,
    pub diff: DiffConfig,
}

impl fmt::Debug for NonholonomicSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonholonomicSystem")
            .field("dim", &self.dim)
            .field("num_constraints", &self.num_constraints)
            .field("rule", &self.rule)
            .field("free", &self.free)
            .field("dependent", &self.dependent)
            .finish()
    }
}

impl NonholonomicSystem {
    /// The last `m` coordinates are taken as dependent in the chart.
    pub fn new<W>(ld: DiscreteLagrangian, num_constraints: usize, forms: W, rule: DiscretizationRule) -> Result<Self>
    where
        W: Fn(&Vector) -> Matrix + Send + Sync + 'static,
    {
        let n = ld.dim();
        if num_constraints == 0 || num_constraints >= n {
            return Err(Error::Domain(format!("need 0 < m < n constraints, got m={num_constraints}, n={n}")));
        }
        Ok(Self {
            dim: n,
            num_constraints,
            forms: Arc::new(forms),
            ld,
            rule,
            free: (0..n - num_constraints).collect(),
            dependent: (n - num_constraints..n).collect(),
            lagrangian: None,
            labels: default_labels(n),
            diff: DiffConfig::default(),
        })
    }

    pub fn with_rule(mut self, rule: DiscretizationRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_dim(self.dim, labels.len())?;
        self.labels = labels;
        Ok(self)
    }

    /// Choose which coordinates of `q_k` are solved from the discrete
    /// constraints.
    pub fn with_dependent(mut self, dependent: Vec<usize>) -> Result<Self> {
        check_dim(self.num_constraints, dependent.len())?;
        let mut seen = vec![false; self.dim];
        for &i in &dependent {
            if i >= self.dim || seen[i] {
                return Err(Error::Domain(format!("invalid dependent coordinate index {i}")));
            }
            seen[i] = true;
        }
        self.free = (0..self.dim).filter(|i| !seen[*i]).collect();
        self.dependent = dependent;
        Ok(self)
    }

    pub fn with_continuous_lagrangian<F>(mut self, l: F) -> Self
    where
        F: Fn(&Vector, &Vector) -> f64 + Send + Sync + 'static,
    {
        self.lagrangian = Some(Arc::new(l));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn rule(&self) -> DiscretizationRule {
        self.rule
    }

    pub fn discrete_lagrangian(&self) -> &DiscreteLagrangian {
        &self.ld
    }

    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn dependent_indices(&self) -> &[usize] {
        &self.dependent
    }

    /// Dimension of the `M_d` chart `(q_{k−1}, free part of q_k)`.
    pub fn chart_dim(&self) -> usize {
        2 * self.dim - self.num_constraints
    }

    pub fn continuous_lagrangian(&self, q: &Vector, v: &Vector) -> Option<f64> {
        self.lagrangian.as_ref().map(|l| l(q, v))
    }

    pub fn forms(&self, q: &Vector) -> Result<Matrix> {
        check_dim(self.dim, q.len())?;
        let w = (self.forms)(q);
        check_dim(self.num_constraints, w.nrows())?;
        check_dim(self.dim, w.ncols())?;
        Ok(w)
    }

    /// Full row rank of `w` at every probe.
    pub fn forms_full_rank(&self, probes: &[Vector]) -> Result<bool> {
        for q in probes {
            let w = self.forms(q)?;
            let s = w.singular_values();
            if s.iter().any(|v| *v <= 1e-10 * s.max().max(1.0)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn discrete_constraint(&self, q0: &Vector, q1: &Vector) -> Result<Vector> {
        discrete_constraint(self, self.rule, q0, q1)
    }
}

/// `w_d^a(q_k, q_{k+1})`: `w` averaged over the rule's points, contracted
/// with `(q_{k+1} − q_k)/h`.
pub fn discrete_constraint(sys: &NonholonomicSystem, rule: DiscretizationRule, q0: &Vector, q1: &Vector) -> Result<Vector> {
    check_dim(sys.dim, q1.len())?;
    let vel = (q1 - q0) / sys.ld.h();
    let weights = rule.weights();
    let mut acc = Vector::zeros(sys.num_constraints);
    for s in &weights {
        let q = q0 * (1.0 - s) + q1 * *s;
        acc += sys.forms(&q)? * &vel;
    }
    Ok(acc / weights.len() as f64)
}

/// DLA equations at `(q_{k−1}, q_k, q_{k+1}, λ)`: the `n` force-balance
/// components `D₁L_d(q_k, q_{k+1}) + D₂L_d(q_{k−1}, q_k) − λ_a w^a(q_k)`
/// followed by the `m` discrete constraints on `(q_k, q_{k+1})`.
pub fn dla_residual(sys: &NonholonomicSystem, qp: &Vector, qk: &Vector, qn: &Vector, lambda: &Vector) -> Result<Vector> {
    check_dim(sys.num_constraints, lambda.len())?;
    let force = sys.ld.d1(qk, qn)? + sys.ld.d2(qp, qk)? - sys.forms(qk)?.transpose() * lambda;
    Ok(concat(&[&force, &sys.discrete_constraint(qk, qn)?]))
}

/// One DLA step, solving `(q_{k+1}, λ)` jointly by Newton from
/// `(2q_k − q_{k−1}, 0)`.
pub fn dla_step(sys: &NonholonomicSystem, qp: &Vector, qk: &Vector, cfg: &NewtonConfig) -> Result<(Vector, Vector)> {
    check_dim(sys.dim, qp.len())?;
    check_dim(sys.dim, qk.len())?;
    let n = sys.dim;
    let m = sys.num_constraints;
    let back = sys.ld.d2(qp, qk)?;
    let wt = sys.forms(qk)?.transpose();
    let guess = concat(&[&(qk * 2.0 - qp), &Vector::zeros(m)]);
    let u = newton_solve(
        |u: &Vector| {
            let qn = u.rows(0, n).into_owned();
            let lambda = u.rows(n, m).into_owned();
            let force = sys.ld.d1(qk, &qn)? + &back - &wt * lambda;
            Ok(concat(&[&force, &sys.discrete_constraint(qk, &qn)?]))
        },
        &guess,
        cfg,
    )?;
    Ok((u.rows(0, n).into_owned(), u.rows(n, m).into_owned()))
}

/// Completes `(q_{k−1}, free part of q_k)` to a point of `M_d` by solving
/// the discrete constraints for the dependent coordinates of `q_k`.
pub fn md_point(sys: &NonholonomicSystem, z: &Vector, cfg: &NewtonConfig) -> Result<(Vector, Vector)> {
    check_dim(sys.chart_dim(), z.len())?;
    let n = sys.dim;
    let q0 = z.rows(0, n).into_owned();
    let assemble = |dep: &Vector| {
        let mut q1 = Vector::zeros(n);
        for (j, &i) in sys.free.iter().enumerate() {
            q1[i] = z[n + j];
        }
        for (j, &i) in sys.dependent.iter().enumerate() {
            q1[i] = dep[j];
        }
        q1
    };
    let guess = Vector::from_iterator(sys.num_constraints, sys.dependent.iter().map(|&i| q0[i]));
    let dep = newton_solve(|d: &Vector| sys.discrete_constraint(&q0, &assemble(d)), &guess, cfg)?;
    let q1 = assemble(&dep);
    Ok((q0, q1))
}

/// Chart point of `M_d` for `(q_{k−1}, q_k)`.
pub fn md_coordinates(sys: &NonholonomicSystem, q0: &Vector, q1: &Vector) -> Result<Vector> {
    check_dim(sys.dim, q0.len())?;
    check_dim(sys.dim, q1.len())?;
    let free = Vector::from_iterator(sys.free.len(), sys.free.iter().map(|&i| q1[i]));
    Ok(concat(&[q0, &free]))
}

/// `M_d ↪ Q × Q` at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub q0: Vector,
    pub q1: Vector,
    /// `2n × (2n − m)` Jacobian of the embedding.
    pub jacobian: Matrix,
}

pub fn md_chart(sys: &NonholonomicSystem, z: &Vector, cfg: &NewtonConfig) -> Result<ChartPoint> {
    let (q0, q1) = md_point(sys, z, cfg)?;
    let jacobian = fd_jacobian(
        |z: &Vector| {
            let (a, b) = md_point(sys, z, cfg)?;
            Ok(concat(&[&a, &b]))
        },
        z,
        &sys.diff,
    )?;
    Ok(ChartPoint { q0, q1, jacobian })
}

/// The DLA flow in chart coordinates.
pub fn md_flow(sys: &NonholonomicSystem, z: &Vector, cfg: &NewtonConfig) -> Result<Vector> {
    let (q0, q1) = md_point(sys, z, cfg)?;
    let (q2, _) = dla_step(sys, &q0, &q1, cfg)?;
    md_coordinates(sys, &q1, &q2)
}

/// Isotropy of `z ↦ (F(q₀, q₁), F(q₁, q₂))` in `(T*Q × T*Q, Ω_Q)`, with
/// `(q₀, q₁)` from the chart and `q₂` from one DLA step.
pub fn constrained_isotropy(sys: &NonholonomicSystem, f: &FiberMap, z: &Vector, cfg: &NewtonConfig) -> Result<IsotropyReport> {
    check_dim(sys.dim, f.dim())?;
    let embedding = |z: &Vector| -> Result<Vector> {
        let (q0, q1) = md_point(sys, z, cfg)?;
        let (q2, _) = dla_step(sys, &q0, &q1, cfg)?;
        Ok(concat(&[&f.point(&q0, &q1)?, &f.point(&q1, &q2)?]))
    };
    isotropy_pullback(embedding, &product_symplectic(sys.dim), z, &f.diff)
}

#[derive(Debug, Clone)]
pub struct DlaSimulation {
    pub simulation: Simulation,
    /// `lambdas[k]` are the multipliers of the step producing `q_{k+2}`.
    pub lambdas: Vec<Vector>,
}

/// Runs `steps` DLA steps from `(q0, q1)`. A failing step ends the run and
/// is returned alongside the partial result.
pub fn simulate_dla_partial(
    sys: &NonholonomicSystem,
    q0: &Vector,
    q1: &Vector,
    steps: usize,
    energies: &[PairFunction],
    cfg: &NewtonConfig,
) -> Result<(DlaSimulation, Option<Error>)> {
    check_dim(sys.dim, q0.len())?;
    check_dim(sys.dim, q1.len())?;
    let mut points = Vec::with_capacity(steps + 2);
    let mut lambdas = Vec::with_capacity(steps);
    points.push(q0.clone());
    points.push(q1.clone());
    let mut failure = None;
    for k in 0..steps {
        let len = points.len();
        match dla_step(sys, &points[len - 2], &points[len - 1], cfg) {
            Ok((q2, lambda)) => {
                points.push(q2);
                lambdas.push(lambda);
            }
            Err(e) => {
                failure = Some(Error::StepFailed { step: k + 2, source: Box::new(e) });
                break;
            }
        }
    }
    let simulation = Simulation::from_points(points, sys.ld.h(), sys.labels.clone(), energies)?;
    Ok((DlaSimulation { simulation, lambdas }, failure))
}

pub fn simulate_dla(
    sys: &NonholonomicSystem,
    q0: &Vector,
    q1: &Vector,
    steps: usize,
    energies: &[PairFunction],
    cfg: &NewtonConfig,
) -> Result<DlaSimulation> {
    match simulate_dla_partial(sys, q0, q1, steps, energies, cfg)? {
        (sim, None) => Ok(sim),
        (_, Some(e)) => Err(e),
    }
}
