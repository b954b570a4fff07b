use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::halton_points;
use crate::numkit::linalg::Vector;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 64;

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub count: usize,
    pub skip: usize,
}

impl SampleBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, count: usize) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension { expected: lo.len(), got: hi.len() });
        }
        if lo.len() > 16 {
            return Err(Error::Unsupported(format!("sampling supports at most 16 dimensions, got {}", lo.len())));
        }
        if let Some(i) = (0..lo.len()).find(|&i| !(lo[i] < hi[i])) {
            return Err(Error::Domain(format!("empty sampling interval in coordinate {i}")));
        }
        Ok(Self { lo, hi, count, skip: 0 })
    }

    /// `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], count)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn points(&self) -> Vec<Vector> {
        halton_points(&self.lo, &self.hi, self.count, self.skip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Worst residual of one condition over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ConditionReport {
    /// Folds `(point, residual)` samples. A non-finite residual is worst.
    pub fn from_samples<I>(condition: impl Into<String>, samples: I, tolerance: f64) -> Self
    where
        I: IntoIterator<Item = (Vector, f64)>,
    {
        let mut max_residual = 0.0_f64;
        let mut worst_point = Vec::new();
        for (p, r) in samples {
            let r = if r.is_finite() { r.abs() } else { f64::INFINITY };
            if worst_point.is_empty() || r > max_residual {
                max_residual = r;
                worst_point = p.iter().copied().collect();
            }
        }
        let verdict = if max_residual <= tolerance && !worst_point.is_empty() { Verdict::Pass } else { Verdict::Fail };
        Self { condition: condition.into(), max_residual, worst_point, tolerance, verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Evaluates `residual` at each sample point. The first evaluation error is
/// returned.
pub fn sample_condition<F>(condition: &str, samples: &SampleBox, tolerance: f64, residual: F) -> Result<ConditionReport>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let pts = samples.points();
    let mut out = Vec::with_capacity(pts.len());
    for p in pts {
        let r = residual(&p)?;
        out.push((p, r));
    }
    Ok(ConditionReport::from_samples(condition, out, tolerance))
}
