//! Inverse problem of the calculus of variations: Helmholtz-type conditions
//! for discrete and continuous second-order equations.

pub mod continuous;
pub mod discrete;
pub mod functional;
pub mod report;
pub mod twoform;

pub use continuous::{chc_classical, chc_implicit, ChcResiduals, IhcResiduals, Jet};
pub use discrete::{
    dhc_explicit, dhc_implicit, gamma_embedding, gamma_isotropy, isotropy_pullback, plus_from_minus, DhcResiduals, FiberKind, FiberMap,
    ImplicitDhcResiduals, IsotropyReport,
};
pub use functional::{functional_catalogue, functional_residual_1d, FunctionalPair, FunctionalReport};
pub use report::{sample_condition, ConditionReport, SampleBox, Verdict, DEFAULT_SAMPLES, DEFAULT_TOL};
pub use twoform::{two_form_checks, TwoFormChecks, TwoFormField};
