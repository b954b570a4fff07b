//! Built-in example systems, addressable by name.

pub mod harmonic;
pub mod implicit_exp;
pub mod rolling_disk;
pub mod toy;

use std::fmt;
use std::sync::Arc;

use crate::bridge::{BackwardErrorCase, ContinuousSystem};
use crate::error::{Error, Result};
use crate::helmholtz::{FiberMap, Jet, SampleBox, TwoFormField};
use crate::lagrangian::{default_labels, DiscreteLagrangian, PairFunction};
use crate::nonholonomic::{DiscretizationRule, NonholonomicSystem};
use crate::numkit::linalg::Vector;
use crate::sode::{explicit_to_implicit, ExplicitSOdE, ImplicitSOdE};

pub const NAMES: [&str; 5] = ["toy-free-particle", "harmonic-exact", "rolling-disk", "backward-error", "implicit-exp"];

/// Overrides for a catalog entry; `None` keeps the entry's default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SystemParams {
    pub h: Option<f64>,
    pub rule: Option<DiscretizationRule>,
    pub b: Option<f64>,
}

type TripleFn = Arc<dyn Fn(&Vector, &Vector, &Vector) -> Result<Vector> + Send + Sync>;
type PairFn = Arc<dyn Fn(&Vector, &Vector) -> Result<Vector> + Send + Sync>;

/// Continuous implicit equation `Φ(q, q̇, q̈) = 0` with a Legendre-map
/// candidate `F(q, q̇)`.
#[derive(Clone)]
pub struct ImplicitContinuous {
    pub phi: TripleFn,
    pub fiber: PairFn,
    /// Jets at which the classical conditions are reported first.
    pub documented_jets: Vec<Jet>,
    /// Box for `(q, q̇)` probes.
    pub state_box: SampleBox,
}

impl fmt::Debug for ImplicitContinuous {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitContinuous").field("documented_jets", &self.documented_jets.len()).finish()
    }
}

#[derive(Debug, Clone)]
pub struct SystemEntry {
    pub name: &'static str,
    pub dim: usize,
    pub h: f64,
    pub labels: Vec<String>,
    /// Main discrete Lagrangian.
    pub ld: Option<DiscreteLagrangian>,
    /// Alternative discrete Lagrangians by name.
    pub ld_variants: Vec<(String, DiscreteLagrangian)>,
    pub sode: Option<ExplicitSOdE>,
    pub implicit: Option<ImplicitSOdE>,
    /// Fiber maps by name; the first is the default.
    pub fiber_maps: Vec<(String, FiberMap)>,
    pub two_forms: Vec<(String, TwoFormField)>,
    pub continuous: Option<ContinuousSystem>,
    pub implicit_continuous: Option<ImplicitContinuous>,
    pub nonholonomic: Option<NonholonomicSystem>,
    pub backward: Option<BackwardErrorCase>,
    pub energies: Vec<PairFunction>,
    pub initial: Option<(Vector, Vector)>,
    pub default_steps: usize,
    /// Box for discrete checks: `Q × Q` for unconstrained systems, the
    /// `M_d` chart for constrained ones.
    pub sample_box: Option<SampleBox>,
}

impl SystemEntry {
    fn bare(name: &'static str, dim: usize, h: f64) -> Self {
        Self {
            name,
            dim,
            h,
            labels: default_labels(dim),
            ld: None,
            ld_variants: Vec::new(),
            sode: None,
            implicit: None,
            fiber_maps: Vec::new(),
            two_forms: Vec::new(),
            continuous: None,
            implicit_continuous: None,
            nonholonomic: None,
            backward: None,
            energies: Vec::new(),
            initial: None,
            default_steps: 0,
            sample_box: None,
        }
    }

    /// Named fiber map, or the default one for `None`.
    pub fn fiber_map(&self, name: Option<&str>) -> Result<&FiberMap> {
        match name {
            None => self.fiber_maps.first().map(|(_, f)| f),
            Some(n) => self.fiber_maps.iter().find(|(k, _)| k.eq_ignore_ascii_case(n)).map(|(_, f)| f),
        }
        .ok_or_else(|| {
            let known: Vec<&str> = self.fiber_maps.iter().map(|(k, _)| k.as_str()).collect();
            Error::Unsupported(format!("system `{}` has no fiber map {:?} (known: {})", self.name, name, known.join(", ")))
        })
    }

    pub fn lagrangian_variant(&self, name: &str) -> Result<&DiscreteLagrangian> {
        self.ld_variants
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Unsupported(format!("system `{}` has no discrete Lagrangian `{name}`", self.name)))
    }

    pub fn two_form(&self, name: &str) -> Result<&TwoFormField> {
        self.two_forms
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Unsupported(format!("system `{}` has no two-form `{name}`", self.name)))
    }

    pub fn require<'a, T>(&self, part: &'a Option<T>, what: &str) -> Result<&'a T> {
        part.as_ref().ok_or_else(|| Error::Unsupported(format!("system `{}` provides no {what}", self.name)))
    }
}

pub fn catalog(name: &str) -> Result<SystemEntry> {
    catalog_with(name, &SystemParams::default())
}

fn positive_h(h: f64) -> Result<f64> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(Error::Domain(format!("h must be positive, got {h}")))
    }
}

pub fn catalog_with(name: &str, params: &SystemParams) -> Result<SystemEntry> {
    let unsupported = |what: &str| Err(Error::Unsupported(format!("system `{name}` takes no {what} parameter")));
    if params.rule.is_some() && name != "rolling-disk" {
        return unsupported("rule");
    }
    if params.b.is_some() && name != "backward-error" {
        return unsupported("b");
    }
    match name {
        "toy-free-particle" => {
            let h = positive_h(params.h.unwrap_or(toy::DEFAULT_H))?;
            let ld = toy::lagrangian(h)?;
            let sode = toy::sode();
            let mut e = SystemEntry::bare("toy-free-particle", 2, h);
            e.labels = vec!["x".into(), "y".into()];
            e.implicit = Some(explicit_to_implicit(&sode));
            e.fiber_maps = vec![("Fminus".into(), FiberMap::legendre_minus(&ld)), ("Fplus".into(), FiberMap::legendre_plus(&ld))];
            e.two_forms = vec![("Omega".into(), TwoFormField::from_fiber_map(&toy::fiber_map(h)))];
            e.ld_variants = vec![("scaled".into(), ld.scaled(h * h))];
            e.ld = Some(ld);
            e.sode = Some(sode);
            e.continuous = Some(toy::continuous());
            e.energies = toy::energies(h);
            e.initial = Some(toy::initial());
            e.default_steps = 1000;
            e.sample_box = Some(SampleBox::cube(4, -1.0, 1.0, 64)?);
            Ok(e)
        }
        "harmonic-exact" => {
            let h = positive_h(params.h.unwrap_or(harmonic::DEFAULT_H))?;
            let ld = harmonic::ld1(h)?;
            let sode = harmonic::sode(h);
            let mut e = SystemEntry::bare("harmonic-exact", 1, h);
            e.labels = vec!["x".into()];
            e.implicit = Some(explicit_to_implicit(&sode));
            e.fiber_maps =
                vec![("Fd1".into(), harmonic::fd1(h)), ("Fd2".into(), harmonic::fd2(h)), ("Fplus".into(), FiberMap::legendre_plus(&ld))];
            e.two_forms = vec![("Omega1".into(), harmonic::omega1(h)), ("Omega2".into(), harmonic::omega2(h))];
            e.ld_variants = vec![("Ld2".into(), harmonic::ld2(h)?)];
            e.ld = Some(ld);
            e.sode = Some(sode);
            e.continuous = Some(harmonic::continuous());
            e.energies = harmonic::energies(h);
            e.initial = Some(harmonic::initial(h));
            e.default_steps = 10_000;
            e.sample_box = Some(SampleBox::cube(2, -1.0, 1.0, 64)?);
            Ok(e)
        }
        "rolling-disk" => {
            let h = positive_h(params.h.unwrap_or(rolling_disk::DEFAULT_H))?;
            let rule = params.rule.unwrap_or(DiscretizationRule::Midpoint);
            let sys = rolling_disk::system(h, rule)?;
            let mut e = SystemEntry::bare("rolling-disk", 4, h);
            e.labels = rolling_disk::LABELS.iter().map(|s| s.to_string()).collect();
            e.ld = Some(sys.discrete_lagrangian().clone());
            e.ld_variants = vec![
                ("extended".into(), rolling_disk::extended_lagrangian(h)?),
                ("Ld1".into(), rolling_disk::ld1(h)?),
                ("Ldbar".into(), rolling_disk::ld_bar(h)?),
            ];
            e.fiber_maps = vec![
                ("Fd1".into(), rolling_disk::fd1(h)),
                ("Fd1bar".into(), rolling_disk::fd1_bar()),
                ("Fd2".into(), rolling_disk::fd2(h)),
            ];
            e.initial = Some(rolling_disk::initial(&sys)?);
            e.nonholonomic = Some(sys);
            e.energies = rolling_disk::energies(h);
            e.default_steps = rolling_disk::DEFAULT_STEPS;
            e.sample_box = Some(rolling_disk::chart_box(32)?);
            Ok(e)
        }
        "backward-error" => {
            let h = positive_h(params.h.unwrap_or(0.1))?;
            let case = BackwardErrorCase::new(params.b.unwrap_or(0.0));
            let ld = case.discrete_lagrangian(h)?;
            let sode = case.sode(h);
            let mut e = SystemEntry::bare("backward-error", 1, h);
            e.labels = vec!["x".into()];
            e.implicit = Some(explicit_to_implicit(&sode));
            e.fiber_maps = vec![("Fh".into(), case.fiber_map(h)), ("Fplus".into(), FiberMap::legendre_plus(&ld))];
            e.two_forms = vec![("Omega".into(), TwoFormField::from_fiber_map(&case.fiber_map(h)))];
            e.ld = Some(ld);
            e.sode = Some(sode);
            e.continuous = Some(case.modified_system(h));
            e.backward = Some(case);
            let c = case;
            e.energies = vec![PairFunction::new("Ld", move |a: &Vector, b: &Vector| c.ld(a[0], b[0], h))];
            e.initial = Some((Vector::from_element(1, 1.0), Vector::from_element(1, 1.0 + 0.5 * h)));
            e.default_steps = 1000;
            e.sample_box = Some(SampleBox::cube(2, -1.0, 1.0, 64)?);
            Ok(e)
        }
        "implicit-exp" => {
            if params.h.is_some() {
                return unsupported("h");
            }
            let mut e = SystemEntry::bare("implicit-exp", 2, f64::NAN);
            e.labels = vec!["x".into(), "y".into()];
            e.implicit_continuous = Some(ImplicitContinuous {
                phi: Arc::new(implicit_exp::phi),
                fiber: Arc::new(implicit_exp::fiber),
                documented_jets: vec![implicit_exp::documented_jet()],
                state_box: SampleBox::cube(4, -1.0, 1.0, 32)?,
            });
            Ok(e)
        }
        other => Err(Error::UnknownSystem(other.to_string())),
    }
}
