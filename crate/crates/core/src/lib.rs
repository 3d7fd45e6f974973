//! Discrete Bayesian networks whose conditional distributions can be
//! represented as mixtures over parent-subset submodels.
//!
//! The crate is organised bottom-up:
//!
//! - [`network`]: conventional discrete networks with a fixed node ordering,
//!   joint likelihoods, ancestral sampling and random CPT generation.
//! - [`dataset`]: observations with optional missing entries, CSV I/O.
//! - [`inference`]: exact family posteriors and expected family counts.
//! - [`mixture`]: submodel enumeration, mixture likelihood, collapse to a
//!   conventional network and the restricted-order global mixture.
//! - [`estimation`]: priors, count marginalisation, MAP updates and the EM driver.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

// `!(x >= 0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod dataset;
pub mod error;
pub mod estimation;
pub mod factor;
pub mod format;
pub mod inference;
pub mod mixture;
pub mod network;
pub mod scalar;

pub use codec::ParentConfigCodec;
pub use dataset::{Dataset, Observation};
pub use error::{Error, Result};
pub use estimation::{
    conventional_map, em_fit, em_fit_with, marginalize_counts, objective_value, objective_with_stats, psi_update,
    responsibilities, sufficient_stats, theta_update, EmConfig, FamilyPrior, FitReport,
    IterationRecord, PriorSpec, SubstructurePlan, SufficientStats, WeightPrior,
};
pub use inference::{
    evidence_log_likelihood, expected_family_counts, family_posterior, observed_data_score,
    FamilyCountTable, FamilyTable,
};
pub use mixture::{
    capped_subsets, enumerate_substructures, MbnComponent, MixtureNetwork, RestrictedMbn,
    SubmodelSpec, SubsetProjection, Submodel,
};
pub use network::{DiscreteNetwork, NodeSpec, Structure};
pub use scalar::Scalar;

/// Conventional network over `f64`.
pub type Network = DiscreteNetwork<f64>;
/// Mixture network over `f64`.
pub type Mixture = MixtureNetwork<f64>;
/// Family count table over `f64`.
pub type FamilyCounts = FamilyCountTable<f64>;
/// Prior specification over `f64`.
pub type Priors = PriorSpec<f64>;
/// EM fit report over `f64`.
pub type Report = FitReport<f64>;
/// Restricted-order mixture of networks over `f64`.
pub type Mbn = RestrictedMbn<f64>;
