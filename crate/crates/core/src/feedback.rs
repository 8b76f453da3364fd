//! Execution feedback harvested from executed plans.

use alloc::vec::Vec;

use crate::kind::{Backbone, OperatorKind};
use crate::plan::{PlanOperator, QueryPlan};

/// Default minimum number of records a kind needs before it gets a model.
pub const DEFAULT_SUFFICIENCY_THRESHOLD: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    pub est_card_in: f64,
    pub est_card_out: f64,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub act_card_in: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub act_card_out: Option<f64>,
}

impl FeatureVector {
    pub fn estimated(est_card_in: f64, est_card_out: f64) -> Self {
        FeatureVector {
            est_card_in,
            est_card_out,
            act_card_in: None,
            act_card_out: None,
        }
    }

    pub fn of(op: &PlanOperator) -> Self {
        FeatureVector {
            est_card_in: op.est_card_in,
            est_card_out: op.est_card_out,
            act_card_in: op.act_card_in,
            act_card_out: op.act_card_out,
        }
    }
}

/// One executed backbone operator: features, optimizer cost and measured CPU time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeedbackRecord {
    pub record_id: u64,
    pub kind: OperatorKind,
    pub features: FeatureVector,
    pub opt_cost: f64,
    pub act_cost: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeedbackError {
    #[error("record {0}: kind {1} is not in the backbone set")]
    NotBackbone(u64, OperatorKind),
    #[error("record {id}: {field} must be finite and nonnegative, got {value}")]
    InvalidValue {
        id: u64,
        field: &'static str,
        value: f64,
    },
    #[error("record {0}: ids must be strictly increasing")]
    OutOfOrder(u64),
}

/// Append-only feedback repository (the set 𝓕).
///
/// Records keep insertion order and get strictly increasing ids. Readers take
/// `&FeedbackStore` (or a clone) as their snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackStore {
    backbone: Backbone,
    records: Vec<FeedbackRecord>,
    next_id: u64,
}

impl FeedbackStore {
    pub fn new(backbone: Backbone) -> Self {
        FeedbackStore {
            backbone,
            records: Vec::new(),
            next_id: 1,
        }
    }

    /// Rebuilds a store from previously dumped records.
    pub fn from_records(
        backbone: Backbone,
        records: Vec<FeedbackRecord>,
    ) -> Result<Self, FeedbackError> {
        let mut last: Option<u64> = None;
        for r in &records {
            if !backbone.contains(&r.kind) {
                return Err(FeedbackError::NotBackbone(r.record_id, r.kind.clone()));
            }
            if last.is_some_and(|l| r.record_id <= l) {
                return Err(FeedbackError::OutOfOrder(r.record_id));
            }
            last = Some(r.record_id);
            for (field, value) in [
                ("opt_cost", r.opt_cost),
                ("act_cost", r.act_cost),
                ("est_card_in", r.features.est_card_in),
                ("est_card_out", r.features.est_card_out),
            ] {
                if !(value.is_finite() && value >= 0.0) {
                    return Err(FeedbackError::InvalidValue {
                        id: r.record_id,
                        field,
                        value,
                    });
                }
            }
        }
        let next_id = last.map_or(1, |l| l + 1);
        Ok(FeedbackStore {
            backbone,
            records,
            next_id,
        })
    }

    pub fn backbone(&self) -> &Backbone {
        &self.backbone
    }

    /// Adds one record per measured backbone operator of `plan`; returns how many.
    ///
    /// Operators without `act_cost` are skipped. Ingesting the same plan twice
    /// stores it twice.
    pub fn ingest(&mut self, plan: &QueryPlan) -> usize {
        let mut added = 0;
        for op in plan.operators() {
            if !self.backbone.contains(&op.kind) {
                continue;
            }
            let Some(act_cost) = op.act_cost else {
                continue;
            };
            self.records.push(FeedbackRecord {
                record_id: self.next_id,
                kind: op.kind.clone(),
                features: FeatureVector::of(op),
                opt_cost: op.opt_cost,
                act_cost,
            });
            self.next_id += 1;
            added += 1;
        }
        added
    }

    pub fn records(&self) -> &[FeedbackRecord] {
        &self.records
    }

    pub fn records_of<'a>(
        &'a self,
        kind: &'a OperatorKind,
    ) -> impl Iterator<Item = &'a FeedbackRecord> + 'a {
        self.records.iter().filter(move |r| &r.kind == kind)
    }

    pub fn count(&self, kind: &OperatorKind) -> usize {
        self.records_of(kind).count()
    }

    /// True iff at least `threshold` records exist for `kind` (inclusive).
    pub fn has_sufficient_feedback(&self, kind: &OperatorKind, threshold: usize) -> bool {
        assert!(threshold >= 1, "sufficiency threshold must be at least 1");
        self.count(kind) >= threshold
    }

    /// Kinds that appear in the store, ordered.
    pub fn kinds(&self) -> Vec<OperatorKind> {
        let mut kinds: Vec<_> = self.records.iter().map(|r| r.kind.clone()).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
