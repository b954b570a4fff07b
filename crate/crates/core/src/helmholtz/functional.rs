//! The one-dimensional functional equation
//! `g(y, f(x, y)) ∂f/∂x(x, y) + g(x, y) = 0`
//! relating a linear recurrence `f` to the mixed partial `g` of a discrete
//! Lagrangian.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::diff::{derivative_1d, DiffConfig};
use crate::numkit::linalg::Matrix;

/// Result over a sample set. Points where `f` or `g` is not finite are
/// listed instead of contributing a residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub max_residual: f64,
    pub worst_point: Option<(f64, f64)>,
    pub evaluated: usize,
    pub singular_points: Vec<(f64, f64)>,
}

pub fn functional_residual_1d<G, F>(g: G, f: F, points: &[(f64, f64)]) -> Result<FunctionalReport>
where
    G: Fn(f64, f64) -> f64,
    F: Fn(f64, f64) -> f64,
{
    let diff = DiffConfig::richardson();
    let mut rep = FunctionalReport { max_residual: 0.0, worst_point: None, evaluated: 0, singular_points: Vec::new() };
    for &(x, y) in points {
        let fxy = f(x, y);
        let gyf = g(y, fxy);
        let gxy = g(x, y);
        let dfdx = derivative_1d(|t| Ok(Matrix::from_element(1, 1, f(x + t, y))), x, 0, &diff);
        let dfdx = match dfdx {
            Ok(m) => m[(0, 0)],
            Err(Error::Evaluation { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        let r = gyf * dfdx + gxy;
        if !r.is_finite() {
            rep.singular_points.push((x, y));
            continue;
        }
        rep.evaluated += 1;
        if rep.worst_point.is_none() || r.abs() > rep.max_residual {
            rep.max_residual = r.abs();
            rep.worst_point = Some((x, y));
        }
    }
    Ok(rep)
}

type Scalar2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A linear recurrence `f(x, y) = a x + b y` with a matching `g`, and the
/// region on which the pair is meant to be sampled.
#[derive(Clone)]
pub struct FunctionalPair {
    pub name: &'static str,
    pub a: f64,
    pub b: f64,
    pub g: Scalar2,
    admissible: Arc<dyn Fn(f64, f64) -> bool + Send + Sync>,
}

impl fmt::Debug for FunctionalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalPair").field("name", &self.name).field("a", &self.a).field("b", &self.b).finish()
    }
}

impl FunctionalPair {
    pub fn f(&self, x: f64, y: f64) -> f64 {
        self.a * x + self.b * y
    }

    pub fn admissible(&self, x: f64, y: f64) -> bool {
        (self.admissible)(x, y)
    }

    pub fn residual(&self, points: &[(f64, f64)]) -> Result<FunctionalReport> {
        let g = self.g.clone();
        functional_residual_1d(|x, y| g(x, y), |x, y| self.f(x, y), points)
    }
}

/// Known solution pairs.
pub fn functional_catalogue() -> Vec<FunctionalPair> {
    let anywhere = Arc::new(|_: f64, _: f64| true);
    let big_b = 1.0;
    let a5: f64 = 2.0;
    vec![
        FunctionalPair { name: "a=-1 constant g", a: -1.0, b: 0.7, g: Arc::new(|_, _| 1.0), admissible: anywhere.clone() },
        FunctionalPair { name: "f=x, g=x-y", a: 1.0, b: 0.0, g: Arc::new(|x, y| x - y), admissible: anywhere.clone() },
        FunctionalPair {
            name: "a<0, g=1/|xy|",
            a: -2.0,
            b: 0.0,
            g: Arc::new(|x, y| 1.0 / (x * y).abs()),
            admissible: Arc::new(|x, y| x * y != 0.0),
        },
        FunctionalPair {
            name: "a>0, g=1/(x|y|)-1/(y|x|)",
            a: 2.0,
            b: 0.0,
            g: Arc::new(|x, y| 1.0 / (x * y.abs()) - 1.0 / (y * x.abs())),
            admissible: Arc::new(|x, y| x * y < 0.0),
        },
        FunctionalPair {
            name: "b=(a^3-1)/a, linear g",
            a: a5,
            b: (a5.powi(3) - 1.0) / a5,
            g: Arc::new(move |x, y| -a5 * a5 * big_b * x + big_b * y),
            admissible: anywhere,
        },
    ]
}
