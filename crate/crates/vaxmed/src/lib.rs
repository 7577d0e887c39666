//! Exact-enumeration toolkit for mediation analysis of vaccine effects.
//!
//! The library models small systems of binary variables (exposure,
//! behaviour, infection, plus auxiliaries) as structural causal models
//! with finite-support exogenous noise, and computes counterfactual
//! estimands by exhaustive enumeration: real-world total effects, natural
//! and controlled direct effects, blinded-trial estimands, path-specific
//! decompositions, and partial-interference contrasts. Around that core
//! sit graphical identification checks, finite-sample plug-in estimators
//! with bootstrap uncertainty, behaviour-change detection tests, and a
//! scenario-driven CLI.
//!
//! Modules:
//! - [`graph`]: causal DAGs, d-separation, identification assumptions
//! - [`scm`]: structural models, counterfactuals, enumeration, sampling
//! - [`estimands`]: effect definitions computed against a model
//! - [`estimation`]: datasets, plug-in estimators, bootstrap, positivity
//! - [`interference`]: grouped models with within-group spillover
//! - [`detect`]: behaviour-change detection and panel interpretation
//! - [`scenario`], [`builtin`], [`report`], [`runner`]: file format,
//!   shipped scenarios, and report rendering behind the `vaxmed` binary

pub mod builtin;
pub mod detect;
pub mod estimands;
pub mod estimation;
pub mod graph;
pub mod interference;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod scenario;
pub mod scm;

pub use scalar::Scalar;

/// Working-precision structural model.
pub type Model = scm::StructuralModel<f64>;
/// Reduced-precision structural model for large sweeps.
pub type Model32 = scm::StructuralModel<f32>;
/// Exact-arithmetic structural model for oracle cross-checks.
pub type ExactModel = scm::StructuralModel<num_rational::BigRational>;

/// Working-precision estimand value.
pub type Effect = estimands::EstimandValue<f64>;
/// Exact-arithmetic estimand value.
pub type ExactEffect = estimands::EstimandValue<num_rational::BigRational>;

/// Working-precision grouped (partial-interference) model.
pub type GroupModel = interference::GroupedModel<f64>;
