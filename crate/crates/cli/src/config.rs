//! Flat `key = value` run configuration. Command-line flags are applied on
//! top of the file and use the same value syntax.

use std::fs;
use std::path::{Path, PathBuf};

use varmech::helmholtz::DEFAULT_TOL;
use varmech::{DiscretizationRule, SystemParams};

use crate::CliError;

pub const KEYS: [&str; 19] = [
    "system", "rule", "h", "b", "steps", "q0", "q1", "v0", "tol", "samples", "seed", "fiber", "form", "out", "h_min", "h_max", "h_count",
    "sampling", "kmax",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: Option<String>,
    pub rule: Option<DiscretizationRule>,
    pub h: Option<f64>,
    pub b: Option<f64>,
    pub steps: Option<usize>,
    pub q0: Option<Vec<f64>>,
    pub q1: Option<Vec<f64>>,
    pub v0: Option<f64>,
    pub tol: f64,
    pub samples: Option<usize>,
    /// Offset into the Halton sequence used for sampled checks.
    pub seed: usize,
    pub fiber: Option<String>,
    pub form: Option<String>,
    pub out: Option<PathBuf>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub h_count: Option<usize>,
    pub sampling: Option<String>,
    pub kmax: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            system: None,
            rule: None,
            h: None,
            b: None,
            steps: None,
            q0: None,
            q1: None,
            v0: None,
            tol: DEFAULT_TOL,
            samples: None,
            seed: 0,
            fiber: None,
            form: None,
            out: None,
            h_min: None,
            h_max: None,
            h_count: None,
            sampling: None,
            kmax: None,
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("invalid value `{value}` for `{key}`: {why}"))
}

fn number(key: &str, value: &str) -> Result<f64, CliError> {
    let x: f64 = value.trim().parse().map_err(|_| bad(key, value, "not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, value, "must be finite"))
    }
}

fn positive(key: &str, value: &str) -> Result<f64, CliError> {
    let x = number(key, value)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(bad(key, value, "must be positive"))
    }
}

fn count(key: &str, value: &str) -> Result<usize, CliError> {
    value.trim().parse().map_err(|_| bad(key, value, "not a non-negative integer"))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| number(key, v)).collect()
}

fn text(value: &str) -> Option<String> {
    Some(value.trim().to_string())
}

impl RunConfig {
    /// Sets one key. Dashes in keys are read as underscores.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "system" => self.system = text(value),
            "rule" => self.rule = Some(value.parse().map_err(|e: varmech::Error| bad(&key, value, &e.to_string()))?),
            "h" => self.h = Some(positive(&key, value)?),
            "b" => self.b = Some(number(&key, value)?),
            "steps" => self.steps = Some(count(&key, value)?),
            "q0" => self.q0 = Some(list(&key, value)?),
            "q1" => self.q1 = Some(list(&key, value)?),
            "v0" => self.v0 = Some(number(&key, value)?),
            "tol" => self.tol = positive(&key, value)?,
            "samples" => {
                let n = count(&key, value)?;
                if n == 0 {
                    return Err(bad(&key, value, "must be at least 1"));
                }
                self.samples = Some(n);
            }
            "seed" => self.seed = count(&key, value)?,
            "fiber" | "f" => self.fiber = text(value),
            "form" => self.form = text(value),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "h_min" => self.h_min = Some(positive(&key, value)?),
            "h_max" => self.h_max = Some(positive(&key, value)?),
            "h_count" => self.h_count = Some(count(&key, value)?),
            "sampling" => match value.trim() {
                "solution" | "fixed" => self.sampling = text(value),
                _ => return Err(bad(&key, value, "expected `solution` or `fixed`")),
            },
            "kmax" => self.kmax = Some(count(&key, value)?),
            other => return Err(CliError::Config(format!("unknown config key `{other}` (known: {})", KEYS.join(", ")))),
        }
        Ok(())
    }

    /// Applies a config file's text. `#` starts a comment line.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Config(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(k, v).map_err(|e| CliError::Config(format!("{origin}:{}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    pub fn system(&self) -> Result<&str, CliError> {
        self.system.as_deref().ok_or_else(|| CliError::Config("no system given (use --system or `system = ...`)".into()))
    }

    pub fn params(&self) -> SystemParams {
        SystemParams { h: self.h, rule: self.rule, b: self.b }
    }
}
