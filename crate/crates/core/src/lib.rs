//! Operator-level query cost modeling on top of limited execution feedback.
//!
//! The crate combines per-operator cost models trained on execution feedback
//! (CPU milliseconds) with the optimizer's abstract cost units by scaling
//! through a single *pivot* operator, and ships the workload-level correlation
//! analysis that tells when such a combination ranks plans correctly.
//!
//! Layout:
//! - [`kind`] and [`plan`]: annotated plan trees and the backbone operator set.
//! - [`feedback`]: the append-only execution feedback store.
//! - [`model`]: per-kind least-squares cost models.
//! - [`combine`]: pivot selection and combination of mixed estimates.
//! - [`analysis`]: sample statistics, workload decomposition, closed forms and bounds.
//! - [`synth`]: seeded synthetic workloads (correlated triples and full plans).
//! - [`tuning`]: what-if index tuning simulation and regression reporting.
//!
//! Everything here is `no_std` + `alloc`; file formats and the CLI live in the
//! `pivotcost` crate.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod analysis;
pub mod combine;
pub mod feedback;
pub mod kind;
pub mod model;
pub mod plan;
pub mod synth;
pub mod tuning;

mod math;

pub use analysis::{
    bounds, pearson, spearman, CorrelationStats, QueryDecomposition, StatsError,
    WorkloadDecomposition,
};
pub use combine::{
    combine, pick_pivot, relative_cost, CombineError, CombinedEstimate, EstimateSource,
    OperatorEstimate, PivotChoice, PivotEligibility,
};
pub use feedback::{FeatureVector, FeedbackError, FeedbackRecord, FeedbackStore};
pub use kind::{Backbone, OperatorKind};
pub use model::{feature_map, train, ModelError, ModelSet, OperatorModel, TrainedModel};
pub use plan::{OperatorId, PlanError, PlanOperator, QueryPlan};
