use std::path::{Path, PathBuf};

use serde::Serialize;
use varmech::bridge::{order_study_backward, BackwardErrorCase, OrderSampling};
use varmech::helmholtz::{
    chc_classical, chc_implicit, dhc_explicit, dhc_implicit, gamma_isotropy, two_form_checks, ConditionReport, FiberMap, Jet, SampleBox,
};
use varmech::invariants::{conserved_quantity, recursion_operator, trace_powers};
use varmech::lagrangian::{self, simulate_partial};
use varmech::nonholonomic::{constrained_isotropy, md_point, simulate_dla, simulate_dla_partial};
use varmech::numkit::linalg::max_abs;
use varmech::numkit::{fd_directional, logspace, DiffConfig};
use varmech::sode::implicit_step;
use varmech::systems::NAMES;
use varmech::{catalog_with, Error, Matrix, NewtonConfig, SystemEntry, Vector};

use crate::config::RunConfig;
use crate::output::{emit, fmt_value, to_json, CheckReport, Condition, ReportParams, TrajectoryTable};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    DhcExplicit,
    DhcImplicit,
    Isotropy,
    Chc,
    Ihc,
    TwoForm,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Self::DhcExplicit => "dhc-explicit",
            Self::DhcImplicit => "dhc-implicit",
            Self::Isotropy => "isotropy",
            Self::Chc => "chc",
            Self::Ihc => "ihc",
            Self::TwoForm => "two-form",
        }
    }
}

fn entry(cfg: &RunConfig) -> Result<SystemEntry, CliError> {
    Ok(catalog_with(cfg.system()?, &cfg.params())?)
}

fn vector(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

/// Initial pair from the entry, with `q0`/`q1` overrides. For constrained
/// systems `q1` may list only the free coordinates.
fn initial(e: &SystemEntry, cfg: &RunConfig) -> Result<(Vector, Vector), CliError> {
    let (d0, d1) = e.require(&e.initial, "initial data")?.clone();
    let q0 = cfg.q0.as_deref().map(vector).unwrap_or(d0);
    if q0.len() != e.dim {
        return Err(CliError::Config(format!("q0 needs {} values, got {}", e.dim, q0.len())));
    }
    let Some(q1) = cfg.q1.as_deref() else {
        return Ok((q0, d1));
    };
    if q1.len() == e.dim {
        return Ok((q0, vector(q1)));
    }
    match &e.nonholonomic {
        Some(sys) if q1.len() == sys.free_indices().len() => {
            let z = Vector::from_iterator(q0.len() + q1.len(), q0.iter().chain(q1).copied());
            Ok(md_point(sys, &z, &NewtonConfig::default())?)
        }
        _ => Err(CliError::Config(format!("q1 needs {} values, got {}", e.dim, q1.len()))),
    }
}

/// Returns the process exit code.
pub fn simulate(cfg: &RunConfig) -> Result<i32, CliError> {
    let e = entry(cfg)?;
    let steps = cfg.steps.unwrap_or(e.default_steps);
    let (q0, q1) = initial(&e, cfg)?;
    let newton = NewtonConfig::default();
    let mut comments = vec![format!("system={} h={} steps={steps}", e.name, e.h)];
    let (sim, lambdas, failure) = match &e.nonholonomic {
        Some(sys) => {
            comments[0].push_str(&format!(" rule={}", sys.rule()));
            let (run, failure) = simulate_dla_partial(sys, &q0, &q1, steps, &e.energies, &newton)?;
            (run.simulation, Some(run.lambdas), failure)
        }
        None => {
            let ld = e.require(&e.ld, "discrete Lagrangian")?;
            let (sim, failure) = simulate_partial(ld, &q0, &q1, steps, &e.energies, &newton)?;
            (sim, None, failure)
        }
    };
    let failed_at = match &failure {
        Some(Error::StepFailed { step, .. }) => Some(*step),
        Some(other) => return Err(other.clone().into()),
        None => None,
    };
    let table = TrajectoryTable {
        comments,
        labels: &sim.trajectory.labels,
        points: &sim.trajectory.points,
        energy_names: &sim.energy_names,
        energies: &sim.energies,
        lambdas: lambdas.as_deref(),
        failed_at,
    };
    emit(cfg.out.as_deref(), &table.render())?;
    if let Some(err) = failure {
        eprintln!("varmech: {err}");
        return Ok(2);
    }
    Ok(0)
}

fn sample_box(e: &SystemEntry, cfg: &RunConfig, fallback: Option<&SampleBox>) -> Result<SampleBox, CliError> {
    let mut b =
        e.sample_box.as_ref().or(fallback).ok_or_else(|| CliError::Config(format!("system `{}` has no sampling box", e.name)))?.clone();
    if let Some(n) = cfg.samples {
        b.count = n;
    }
    b.skip = cfg.seed;
    Ok(b)
}

fn split(z: &Vector, n: usize) -> (Vector, Vector) {
    (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
}

fn fold(name: &str, samples: &[(Vector, Vec<f64>)], index: usize, tol: f64) -> Condition {
    ConditionReport::from_samples(name, samples.iter().map(|(p, r)| (p.clone(), r[index])), tol).into()
}

fn folded(names: &[&str], samples: &[(Vector, Vec<f64>)], tol: f64) -> Vec<Condition> {
    names.iter().enumerate().map(|(i, n)| fold(n, samples, i, tol)).collect()
}

fn fiber<'a>(e: &'a SystemEntry, cfg: &RunConfig) -> Result<&'a FiberMap, CliError> {
    Ok(e.fiber_map(cfg.fiber.as_deref())?)
}

fn jet_point(j: &Jet) -> Vector {
    Vector::from_iterator(4 * j.dim(), j.q.iter().chain(&j.qd).chain(&j.qdd).chain(&j.qddd).copied())
}

/// Jets on the solution manifold of `q̈ = a(q, q̇)` at `(q, q̇)` samples.
fn continuous_jets(e: &SystemEntry, b: &SampleBox) -> Result<Vec<Jet>, CliError> {
    let sys = e.require(&e.continuous, "continuous system")?;
    let n = e.dim;
    let mut out = Vec::new();
    for z in b.points() {
        let (q, v) = split(&z, n);
        let a = sys.accel(&q, &v)?;
        let dir = Vector::from_iterator(2 * n, v.iter().chain(&a).copied());
        let jerk = fd_directional(
            |s: &Vector| {
                let (q, v) = split(s, n);
                Ok(Matrix::from_column_slice(n, 1, sys.accel(&q, &v)?.as_slice()))
            },
            &z,
            &dir,
            &DiffConfig::richardson(),
        )?;
        out.push(Jet::new(q, v, a, jerk.column(0).into_owned())?);
    }
    Ok(out)
}

pub fn check(which: Check, cfg: &RunConfig) -> Result<i32, CliError> {
    let e = entry(cfg)?;
    let tol = cfg.tol;
    let newton = NewtonConfig::default();
    let n = e.dim;
    let samples_used;
    let conditions = match which {
        Check::DhcExplicit => {
            let (f, g) = (fiber(&e, cfg)?, e.require(&e.sode, "explicit SOdE")?);
            let b = sample_box(&e, cfg, None)?;
            samples_used = b.count;
            let mut rows = Vec::new();
            for z in b.points() {
                let (q0, q1) = split(&z, n);
                let r = dhc_explicit(f, g, &q0, &q1)?;
                rows.push((z, vec![max_abs(&r.r1), max_abs(&r.r2), max_abs(&r.r3), max_abs(&r.r3_full)]));
            }
            folded(&["dHC1", "dHC2", "dHC3", "dHC3-full"], &rows, tol)
        }
        Check::DhcImplicit => {
            let (f, s) = (fiber(&e, cfg)?, e.require(&e.implicit, "implicit SOdE")?);
            let b = sample_box(&e, cfg, None)?;
            samples_used = b.count;
            let mut rows = Vec::new();
            for z in b.points() {
                let (q0, q1) = split(&z, n);
                let guess = match &e.sode {
                    Some(g) => Some(g.gamma(&q0, &q1)?),
                    None => None,
                };
                let q2 = implicit_step(s, &q0, &q1, guess.as_ref(), &newton)?;
                let r = dhc_implicit(f, s, &q0, &q1, &q2)?;
                rows.push((z, vec![max_abs(&r.r_aa), max_abs(&r.r_ab), max_abs(&r.r_bb)]));
            }
            folded(&["dHC-AA", "dHC-AB", "dHC-BB"], &rows, tol)
        }
        Check::Isotropy => {
            let f = fiber(&e, cfg)?;
            let b = sample_box(&e, cfg, None)?;
            samples_used = b.count;
            let mut rows = Vec::new();
            for z in b.points() {
                let r = match &e.nonholonomic {
                    Some(sys) => constrained_isotropy(sys, f, &z, &newton)?,
                    None => {
                        let (q0, q1) = split(&z, n);
                        gamma_isotropy(f, e.require(&e.sode, "explicit SOdE")?, &q0, &q1)?
                    }
                };
                rows.push((z, vec![r.max_residual]));
            }
            folded(&["isotropy"], &rows, tol)
        }
        Check::Chc => {
            let (jets, rows) = match &e.implicit_continuous {
                Some(ic) => {
                    let phi = |q: &Vector, v: &Vector, a: &Vector| (ic.phi)(q, v, a);
                    let mut rows = Vec::new();
                    for j in &ic.documented_jets {
                        let r = chc_classical(phi, j)?;
                        rows.push((jet_point(j), vec![max_abs(&r.c1), max_abs(&r.c2), max_abs(&r.c3)]));
                    }
                    (ic.documented_jets.len(), rows)
                }
                None => {
                    let sys = e.require(&e.continuous, "continuous system")?;
                    let b = sample_box(&e, cfg, None)?;
                    let jets = continuous_jets(&e, &b)?;
                    let phi = |q: &Vector, v: &Vector, a: &Vector| Ok(a - sys.accel(q, v)?);
                    let mut rows = Vec::new();
                    for j in &jets {
                        let r = chc_classical(phi, j)?;
                        rows.push((jet_point(j), vec![max_abs(&r.c1), max_abs(&r.c2), max_abs(&r.c3)]));
                    }
                    (jets.len(), rows)
                }
            };
            samples_used = jets;
            folded(&["cHC1", "cHC2", "cHC3"], &rows, tol)
        }
        Check::Ihc => {
            let ic = e.require(&e.implicit_continuous, "implicit continuous equation")?;
            let b = sample_box(&e, cfg, Some(&ic.state_box))?;
            samples_used = b.count;
            let mut rows = Vec::new();
            for z in b.points() {
                let (q, v) = split(&z, n);
                let r = chc_implicit(
                    |q: &Vector, v: &Vector| (ic.fiber)(q, v),
                    |q: &Vector, v: &Vector, a: &Vector| (ic.phi)(q, v, a),
                    &q,
                    &v,
                    None,
                    &newton,
                )?;
                rows.push((z, vec![max_abs(&r.i1), max_abs(&r.i2), max_abs(&r.i3)]));
            }
            folded(&["iHC1", "iHC2", "iHC3"], &rows, tol)
        }
        Check::TwoForm => {
            let forms: Vec<_> = e.two_forms.iter().filter(|(k, _)| cfg.form.as_deref().is_none_or(|f| f == k)).collect();
            if forms.is_empty() {
                return Err(CliError::Config(format!("system `{}` has no two-form {:?}", e.name, cfg.form)));
            }
            let b = sample_box(&e, cfg, None)?;
            samples_used = b.count;
            let mut out = Vec::new();
            for (name, om) in forms {
                let mut rows = Vec::new();
                for z in b.points() {
                    let c = match &e.sode {
                        Some(g) => two_form_checks(om, Some(|z: &Vector| g.flow(z)), &z)?,
                        None => two_form_checks(om, None::<fn(&Vector) -> varmech::Result<Vector>>, &z)?,
                    };
                    let mut r = vec![c.closure, c.vertical, c.antisymmetry];
                    r.extend(c.discrete_lie);
                    rows.push((z, r));
                }
                let mut names = vec![format!("{name}/closure"), format!("{name}/vertical"), format!("{name}/antisymmetry")];
                if e.sode.is_some() {
                    names.push(format!("{name}/discrete-lie"));
                }
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                out.extend(folded(&names, &rows, tol));
            }
            out
        }
    };
    let params = ReportParams {
        h: e.h.is_finite().then_some(e.h),
        rule: e.nonholonomic.as_ref().map(|s| s.rule().to_string()),
        b: e.backward.map(|c| c.b),
        fiber: matches!(which, Check::DhcExplicit | Check::DhcImplicit | Check::Isotropy).then(|| fiber_name(&e, cfg)),
        form: cfg.form.clone(),
        tol,
        samples: samples_used,
        seed: cfg.seed,
    };
    let report = CheckReport::new(which.name(), e.name, params, conditions);
    emit(cfg.out.as_deref(), &to_json(&report)?)?;
    Ok(if report.passed() { 0 } else { 3 })
}

fn fiber_name(e: &SystemEntry, cfg: &RunConfig) -> String {
    match &cfg.fiber {
        Some(f) => e.fiber_maps.iter().find(|(k, _)| k.eq_ignore_ascii_case(f)).map_or(f.clone(), |(k, _)| k.clone()),
        None => e.fiber_maps.first().map(|(k, _)| k.clone()).unwrap_or_default(),
    }
}

#[derive(Serialize)]
struct OrderSidecar {
    b: f64,
    sampling: &'static str,
    x0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x1: Option<f64>,
    points: usize,
    slope: f64,
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the `h,difference` table; the fitted slope goes to `<out>.json`,
/// or into a leading comment line when writing to standard output.
pub fn order_study(cfg: &RunConfig) -> Result<i32, CliError> {
    let case = BackwardErrorCase::new(cfg.b.unwrap_or(0.0));
    let grid = logspace(cfg.h_min.unwrap_or(1e-3), cfg.h_max.unwrap_or(1e-1), cfg.h_count.unwrap_or(7));
    let x0 = cfg.q0.as_ref().and_then(|q| q.first().copied()).unwrap_or(1.0);
    let (sampling, v0, x1) = match cfg.sampling.as_deref() {
        Some("fixed") => {
            let x1 = cfg.q1.as_ref().and_then(|q| q.first().copied()).ok_or_else(|| CliError::Config("fixed sampling needs q1".into()))?;
            (OrderSampling::FixedPair { x0, x1 }, None, Some(x1))
        }
        _ => {
            let v0 = cfg.v0.unwrap_or(0.5);
            (OrderSampling::Solution { x0, v0 }, Some(v0), None)
        }
    };
    let study = order_study_backward(&case, &grid, sampling)?;
    let sidecar = OrderSidecar {
        b: case.b,
        sampling: if x1.is_some() { "fixed" } else { "solution" },
        x0,
        v0,
        x1,
        points: study.h.len(),
        slope: study.slope,
    };
    let mut table = String::new();
    if cfg.out.is_none() {
        table.push_str(&format!("# slope={}\n", fmt_value(study.slope)));
    }
    table.push_str("h,difference\n");
    for (h, d) in study.h.iter().zip(&study.difference) {
        table.push_str(&format!("{},{}\n", fmt_value(*h), fmt_value(*d)));
    }
    emit(cfg.out.as_deref(), &table)?;
    if let Some(out) = &cfg.out {
        emit(Some(&sidecar_path(out)), &to_json(&sidecar)?)?;
    }
    Ok(0)
}

/// Simulates and writes the trajectory with every conserved quantity and,
/// when the system has two forms and an explicit flow, the traces
/// `Tr A^k` of the recursion operator as extra columns. Relative drifts are
/// listed in the leading comments.
pub fn invariants(cfg: &RunConfig) -> Result<i32, CliError> {
    let e = entry(cfg)?;
    let steps = cfg.steps.unwrap_or(e.default_steps.min(1000));
    let (q0, q1) = initial(&e, cfg)?;
    let newton = NewtonConfig::default();
    let trajectory = match &e.nonholonomic {
        Some(sys) => simulate_dla(sys, &q0, &q1, steps, &[], &newton)?.simulation.trajectory,
        None => lagrangian::simulate(e.require(&e.ld, "discrete Lagrangian")?, &q0, &q1, steps, &[], &newton)?.trajectory,
    };
    let mut names = Vec::new();
    let mut series = Vec::new();
    let mut drifts = Vec::new();
    for f in &e.energies {
        let s = conserved_quantity(f, &trajectory);
        drifts.push(format!("{}={}", s.name, fmt_value(s.drift)));
        names.push(s.name);
        series.push(s.values);
    }
    let mut comments = vec![format!("system={} h={} steps={steps}", e.name, e.h)];
    if let (Some(g), [(n1, o1), (n2, o2), ..]) = (&e.sode, e.two_forms.as_slice()) {
        let kmax = cfg.kmax.unwrap_or(4);
        let z0 = Vector::from_iterator(2 * e.dim, q0.iter().chain(&q1).copied());
        let t = trace_powers(|z| recursion_operator(o1, o2, z), |z| g.flow(z), &z0, steps, kmax)?;
        comments.push(format!("recursion operator from {n1} and {n2}"));
        for (k, (values, drift)) in t.values.into_iter().zip(t.drift).enumerate() {
            let name = format!("trA{}", k + 1);
            drifts.push(format!("{name}={}", fmt_value(drift)));
            names.push(name);
            series.push(values);
        }
    }
    comments.push(format!("drift {}", drifts.join(" ")));
    let table = TrajectoryTable {
        comments,
        labels: &trajectory.labels,
        points: &trajectory.points,
        energy_names: &names,
        energies: &series,
        lambdas: None,
        failed_at: None,
    };
    emit(cfg.out.as_deref(), &table.render())?;
    Ok(0)
}

pub fn list() -> Result<i32, CliError> {
    let mut out = String::new();
    for name in NAMES {
        let e = catalog_with(name, &Default::default())?;
        let mut parts = Vec::new();
        if e.ld.is_some() {
            parts.push("ld".to_string());
        }
        if e.sode.is_some() {
            parts.push("sode".into());
        }
        if e.nonholonomic.is_some() {
            parts.push("constraints".into());
        }
        if e.implicit_continuous.is_some() {
            parts.push("implicit-continuous".into());
        }
        if !e.fiber_maps.is_empty() {
            parts.push(format!("fibers={}", e.fiber_maps.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join("/")));
        }
        if !e.two_forms.is_empty() {
            parts.push(format!("forms={}", e.two_forms.iter().map(|(k, _)| k.as_str()).collect::<Vec<_>>().join("/")));
        }
        let h = if e.h.is_finite() { e.h.to_string() } else { "-".into() };
        out.push_str(&format!("{name}\tdim={}\th={h}\t{}\n", e.dim, parts.join(" ")));
    }
    emit(None, &out)?;
    Ok(0)
}
