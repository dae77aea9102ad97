//! Causal diagrams, binary structural causal models and risk-ratio estimation.
//!
//! The crate is `no_std` with `alloc`. Everything here is pure computation over
//! in-memory values: graphs, models, datasets and fits. File formats and the
//! command line live in the `causalkit` crate.
//!
//! - [`dag`], [`paths`], [`dsep`], [`adjust`]: path blocking, d-separation and
//!   adjustment-set validity.
//! - [`scm`], [`dataset`]: Bernoulli structural models, sampling, selection and
//!   exact enumeration of the joint distribution.
//! - [`glm`]: IRLS fits for logistic, log-binomial and Poisson/log models.
//! - [`estimate`], [`bootstrap`], [`oracle`]: unadjusted, outcome-regression,
//!   G-computation and IPW risk ratios with their exact population targets.
//! - [`scenario`]: a model plus a list of analyses run against one dataset.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adjust;
pub mod bootstrap;
pub mod dag;
pub mod dataset;
pub mod dsep;
pub mod estimate;
pub mod fixtures;
pub mod glm;
mod linalg;
pub mod normal;
pub mod oracle;
pub mod paths;
pub mod rng;
pub mod scenario;
pub mod scm;

pub use adjust::{is_valid_adjustment, minimal_adjustment_sets, AdjustmentQuery};
pub use bootstrap::{bootstrap_ci, BootstrapSpec};
pub use dag::{CausalDag, DagError, NodeId, Role};
pub use dataset::{Dataset, DatasetError, SelectionRule};
pub use dsep::{d_separated, d_separated_by_paths, d_separated_by_reachability};
pub use estimate::{
    g_computation_rr, ipw_rr, outcome_regression_rr, unadjusted_rr, Analysis, CiMethod, EffectEstimate, EstimateError,
    Method, OutcomeFamily,
};
pub use glm::{Family, GlmError, GlmFit, Link, ModelSpec};
pub use oracle::{conditional_independence_gap, population_estimand};
pub use paths::{backdoor_paths, enumerate_paths, path_open, Direction, NodeKind, Path};
pub use scenario::{AnalysisRequest, ResultRow, ResultTable, Scenario, ScenarioError};
pub use scm::{Equation, ScmError, StructuralModel};
