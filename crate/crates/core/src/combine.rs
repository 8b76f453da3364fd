//! Pivot selection and combination of mixed cost estimates.
//!
//! Model predictions are in milliseconds while the optimizer speaks abstract
//! units. A single pivot record converts between the two: a model prediction
//! `e` becomes `e / pivot.act_cost * pivot.opt_cost` optimizer units, and
//! operators without a model keep their `opt_cost`.
//!
//! The pivot maximises `lambda = opt_cost / act_cost` over the feedback store.
//! A larger `lambda` widens the spread of the scaled backbone costs relative
//! to the optimizer-costed remainder, which raises the correlation lower
//! bounds in [`crate::analysis::bounds`].

use alloc::vec::Vec;

use crate::feedback::{FeatureVector, FeedbackRecord, FeedbackStore};
use crate::model::ModelSet;
use crate::plan::{OperatorId, QueryPlan};

/// Default eligibility floor for pivot candidates, in milliseconds.
pub const DEFAULT_MIN_ACT_COST_MS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CombineError {
    #[error("no feedback record with act_cost >= {0} ms and positive optimizer cost")]
    NoEligibleRecord(f64),
    #[error("pivot record {record_id}: act_cost must be positive and opt_cost nonnegative (opt {opt_cost}, act {act_cost})")]
    InvalidPivot {
        record_id: u64,
        opt_cost: f64,
        act_cost: f64,
    },
    #[error("operator {0} has a model but no pivot was supplied")]
    MissingPivot(OperatorId),
}

/// The pivot operator `o^pivot` and its scaling constant `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PivotChoice {
    pub record_id: u64,
    pub opt_cost: f64,
    pub act_cost: f64,
    pub lambda: f64,
}

impl PivotChoice {
    pub fn new(record_id: u64, opt_cost: f64, act_cost: f64) -> Result<Self, CombineError> {
        if !(act_cost.is_finite() && act_cost > 0.0 && opt_cost.is_finite() && opt_cost >= 0.0) {
            return Err(CombineError::InvalidPivot {
                record_id,
                opt_cost,
                act_cost,
            });
        }
        Ok(PivotChoice {
            record_id,
            opt_cost,
            act_cost,
            lambda: opt_cost / act_cost,
        })
    }

    pub fn from_record(r: &FeedbackRecord) -> Result<Self, CombineError> {
        PivotChoice::new(r.record_id, r.opt_cost, r.act_cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PivotEligibility {
    pub min_act_cost_ms: f64,
}

impl Default for PivotEligibility {
    fn default() -> Self {
        PivotEligibility {
            min_act_cost_ms: DEFAULT_MIN_ACT_COST_MS,
        }
    }
}

/// Picks the eligible record with the largest `opt_cost / act_cost`.
///
/// Eligible means `act_cost >= min_act_cost_ms` and `act_cost > 0`. As in the
/// classic scan, `lambda` starts at zero and only strictly larger ratios
/// replace the incumbent, so a zero-ratio record is never chosen. Ties go to
/// the lowest `record_id`.
pub fn pick_pivot(
    store: &FeedbackStore,
    eligibility: PivotEligibility,
) -> Result<PivotChoice, CombineError> {
    pick_pivot_from(store.records(), eligibility)
}

pub fn pick_pivot_from(
    records: &[FeedbackRecord],
    eligibility: PivotEligibility,
) -> Result<PivotChoice, CombineError> {
    let mut best: Option<(&FeedbackRecord, f64)> = None;
    for r in records {
        if !(r.act_cost > 0.0 && r.act_cost >= eligibility.min_act_cost_ms) {
            continue;
        }
        let lambda = r.opt_cost / r.act_cost;
        let better = match best {
            None => lambda > 0.0,
            Some((b, bl)) => lambda > bl || (lambda == bl && r.record_id < b.record_id),
        };
        if better {
            best = Some((r, lambda));
        }
    }
    let (r, _) = best.ok_or(CombineError::NoEligibleRecord(eligibility.min_act_cost_ms))?;
    PivotChoice::from_record(r)
}

/// `relcost(o) = extcost(o) / actcost(o^pivot)`.
pub fn relative_cost(extcost: f64, pivot: &PivotChoice) -> f64 {
    extcost / pivot.act_cost
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EstimateSource {
    Model,
    Optimizer,
}

/// Provenance of one operator's share of the combined estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorEstimate {
    pub id: OperatorId,
    pub source: EstimateSource,
    /// Model prediction (ms) or optimizer cost (units), before scaling.
    pub raw: f64,
    /// Contribution to the total, in optimizer units.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CombinedEstimate {
    pub query_id: alloc::string::String,
    pub total: f64,
    /// One entry per operator, in document order.
    pub per_operator: Vec<OperatorEstimate>,
    pub pivot: Option<PivotChoice>,
}

impl CombinedEstimate {
    pub fn operator(&self, id: OperatorId) -> Option<&OperatorEstimate> {
        self.per_operator.iter().find(|e| e.id == id)
    }

    /// Summed contributions of model-sourced operators (`L'`).
    pub fn model_part(&self) -> f64 {
        self.part(EstimateSource::Model)
    }

    /// Summed contributions of optimizer-sourced operators (`I'`).
    pub fn optimizer_part(&self) -> f64 {
        self.part(EstimateSource::Optimizer)
    }

    fn part(&self, source: EstimateSource) -> f64 {
        self.per_operator
            .iter()
            .filter(|e| e.source == source)
            .map(|e| e.contribution)
            .sum()
    }
}

/// Estimated plan cost from mixed sources.
///
/// Operators whose kind has a model contribute
/// `predict / pivot.act_cost * pivot.opt_cost`; the rest contribute their
/// `opt_cost`. With no models the total is the plain optimizer sum.
pub fn combine(
    plan: &QueryPlan,
    models: &ModelSet,
    pivot: Option<&PivotChoice>,
) -> Result<CombinedEstimate, CombineError> {
    let mut per_operator = Vec::with_capacity(plan.operators().len());
    let mut total = 0.0;
    for op in plan.operators() {
        let entry = match models.get(&op.kind) {
            Some(model) => {
                let pivot = pivot.ok_or(CombineError::MissingPivot(op.id))?;
                let ext = model.predict(&FeatureVector::of(op));
                OperatorEstimate {
                    id: op.id,
                    source: EstimateSource::Model,
                    raw: ext,
                    contribution: relative_cost(ext, pivot) * pivot.opt_cost,
                }
            }
            None => OperatorEstimate {
                id: op.id,
                source: EstimateSource::Optimizer,
                raw: op.opt_cost,
                contribution: op.opt_cost,
            },
        };
        total += entry.contribution;
        per_operator.push(entry);
    }
    Ok(CombinedEstimate {
        query_id: plan.query_id().into(),
        total,
        per_operator,
        pivot: pivot.copied(),
    })
}
