use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use varmech::helmholtz::ConditionReport;
use varmech::Vector;

use crate::CliError;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trajectory table: one row per point, with pair energies on the row of
/// the pair's first point and multipliers on the row of the point where the
/// DLA step was taken. Missing entries are left empty.
pub struct TrajectoryTable<'a> {
    pub comments: Vec<String>,
    pub labels: &'a [String],
    pub points: &'a [Vector],
    pub energy_names: &'a [String],
    pub energies: &'a [Vec<f64>],
    pub lambdas: Option<&'a [Vector]>,
    pub failed_at: Option<usize>,
}

impl TrajectoryTable<'_> {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            let _ = writeln!(out, "# {c}");
        }
        let m = self.lambdas.and_then(|l| l.first()).map_or(0, |l| l.len());
        let mut header = vec!["k".to_string()];
        header.extend(self.labels.iter().cloned());
        header.extend(self.energy_names.iter().cloned());
        header.extend((1..=m).map(|i| format!("lambda{i}")));
        let _ = writeln!(out, "{}", header.join(","));
        for (k, q) in self.points.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(q.iter().map(|x| fmt_value(*x)));
            for e in self.energies {
                row.push(e.get(k).map(|x| fmt_value(*x)).unwrap_or_default());
            }
            if let Some(l) = self.lambdas {
                let at = k.checked_sub(1).and_then(|j| l.get(j));
                for i in 0..m {
                    row.push(at.map(|v| fmt_value(v[i])).unwrap_or_default());
                }
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        if let Some(step) = self.failed_at {
            let _ = writeln!(out, "# failed at step {step}");
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Condition {
    pub name: String,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
    pub tol: f64,
    pub pass: bool,
}

impl From<ConditionReport> for Condition {
    fn from(r: ConditionReport) -> Self {
        let pass = r.passed();
        Self { name: r.condition, max_residual: r.max_residual, worst_point: r.worst_point, tol: r.tolerance, pass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub h: Option<f64>,
    pub rule: Option<String>,
    pub b: Option<f64>,
    pub fiber: Option<String>,
    pub form: Option<String>,
    pub tol: f64,
    pub samples: usize,
    pub seed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub system: String,
    pub params: ReportParams,
    pub conditions: Vec<Condition>,
    pub verdict: &'static str,
}

impl CheckReport {
    pub fn new(check: &str, system: &str, params: ReportParams, conditions: Vec<Condition>) -> Self {
        let pass = !conditions.is_empty() && conditions.iter().all(|c| c.pass);
        Self { check: check.into(), system: system.into(), params, conditions, verdict: if pass { "pass" } else { "fail" } }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output when no path is given.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes())?;
            out.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(contents.as_bytes())?;
            tmp.flush()?;
            tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
        }
    }
    Ok(())
}
