//! Per-kind external cost models.
//!
//! Each backbone kind gets a linear model over four features of the
//! estimated cardinalities:
//!
//! ```text
//! [1, C_out, C_in, C_in * log2(1 + C_in)]
//! ```
//!
//! Fitting is ordinary least squares by Householder QR on a column-scaled
//! design. Rows are put into a canonical order before fitting, so the result
//! does not depend on the order records arrive in.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::feedback::{FeatureVector, FeedbackRecord, FeedbackStore};
use crate::kind::OperatorKind;
use crate::math;

pub const FEATURES: usize = 4;

/// Damping used when the design is rank deficient (applied to the scaled design).
pub const RIDGE_DAMPING: f64 = 1e-6;

// |R_kk| below this fraction of the largest diagonal counts as rank loss.
const RANK_TOLERANCE: f64 = 1e-10;

pub fn feature_map(fv: &FeatureVector) -> [f64; FEATURES] {
    let c_in = fv.est_card_in;
    let c_out = fv.est_card_out;
    [1.0, c_out, c_in, c_in * math::log2(1.0 + c_in)]
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatorModel {
    pub kind: OperatorKind,
    pub coefficients: [f64; FEATURES],
    pub trained_on: usize,
    /// Root-mean-square training residual, in milliseconds.
    pub residual_rms: f64,
}

impl OperatorModel {
    /// `extcost`: the dot product with [`feature_map`], clamped below at zero.
    pub fn predict(&self, fv: &FeatureVector) -> f64 {
        let x = feature_map(fv);
        let y: f64 = self
            .coefficients
            .iter()
            .zip(x.iter())
            .map(|(c, v)| c * v)
            .sum();
        if y > 0.0 {
            y
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: OperatorModel,
    /// The design was rank deficient and ridge damping was applied.
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no training records")]
    Empty,
    #[error("training records mix kinds {0} and {1}")]
    MixedKinds(OperatorKind, OperatorKind),
    #[error("kind {kind}: {have} records, need at least {need}")]
    Insufficient {
        kind: OperatorKind,
        have: usize,
        need: usize,
    },
    #[error("record {0}: non-finite feature or cost")]
    NonFinite(u64),
}

/// Fits one model to `records`, which must all share a kind.
pub fn train(records: &[FeedbackRecord], threshold: usize) -> Result<TrainedModel, ModelError> {
    let first = records.first().ok_or(ModelError::Empty)?;
    let kind = first.kind.clone();
    if let Some(other) = records.iter().find(|r| r.kind != kind) {
        return Err(ModelError::MixedKinds(kind, other.kind.clone()));
    }
    if records.len() < threshold {
        return Err(ModelError::Insufficient {
            kind,
            have: records.len(),
            need: threshold,
        });
    }

    let mut rows: Vec<([f64; FEATURES], f64)> = Vec::with_capacity(records.len());
    for r in records {
        let x = feature_map(&r.features);
        if !(x.iter().all(|v| v.is_finite()) && r.act_cost.is_finite()) {
            return Err(ModelError::NonFinite(r.record_id));
        }
        rows.push((x, r.act_cost));
    }
    rows.sort_by(canonical_order);

    let (coefficients, regularized) = least_squares(&rows);
    let sse: f64 = rows
        .iter()
        .map(|(x, y)| {
            let fit: f64 = x.iter().zip(&coefficients).map(|(a, b)| a * b).sum();
            (y - fit) * (y - fit)
        })
        .sum();
    let residual_rms = math::sqrt(sse / rows.len() as f64);

    Ok(TrainedModel {
        model: OperatorModel {
            kind,
            coefficients,
            trained_on: records.len(),
            residual_rms,
        },
        regularized,
    })
}

fn canonical_order(a: &([f64; FEATURES], f64), b: &([f64; FEATURES], f64)) -> Ordering {
    a.0.iter()
        .zip(b.0.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.1.total_cmp(&b.1))
}

fn least_squares(rows: &[([f64; FEATURES], f64)]) -> ([f64; FEATURES], bool) {
    let mut scale = [0.0_f64; FEATURES];
    for (x, _) in rows {
        for j in 0..FEATURES {
            scale[j] = scale[j].max(math::abs(x[j]));
        }
    }
    for s in scale.iter_mut() {
        if *s == 0.0 {
            *s = 1.0;
        }
    }

    let mut design: Vec<[f64; FEATURES]> = rows
        .iter()
        .map(|(x, _)| core::array::from_fn(|j| x[j] / scale[j]))
        .collect();
    let mut target: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();

    let solved = match householder_solve(design.clone(), target.clone()) {
        Some(beta) => (beta, false),
        None => {
            let damp = math::sqrt(RIDGE_DAMPING);
            for j in 0..FEATURES {
                let mut row = [0.0; FEATURES];
                row[j] = damp;
                design.push(row);
                target.push(0.0);
            }
            let beta = householder_solve(design, target)
                .expect("damped design always has full column rank");
            (beta, true)
        }
    };
    let (beta, regularized) = solved;
    (core::array::from_fn(|j| beta[j] / scale[j]), regularized)
}

/// Solves min ||A b - y|| by Householder QR; `None` when A is rank deficient.
fn householder_solve(mut a: Vec<[f64; FEATURES]>, mut y: Vec<f64>) -> Option<[f64; FEATURES]> {
    let m = a.len();
    if m < FEATURES {
        return None;
    }
    let mut diag = [0.0_f64; FEATURES];
    for k in 0..FEATURES {
        let norm = math::sqrt(a[k..].iter().map(|r| r[k] * r[k]).sum::<f64>());
        if norm == 0.0 {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        // v = x - alpha e1, stored in place in column k.
        a[k][k] -= alpha;
        let vtv: f64 = a[k..].iter().map(|r| r[k] * r[k]).sum();
        if vtv > 0.0 {
            for j in k + 1..FEATURES {
                let dot: f64 = a[k..].iter().map(|r| r[k] * r[j]).sum();
                let f = 2.0 * dot / vtv;
                for r in a[k..].iter_mut() {
                    r[j] -= f * r[k];
                }
            }
            let dot: f64 = a[k..].iter().zip(&y[k..]).map(|(r, yi)| r[k] * yi).sum();
            let f = 2.0 * dot / vtv;
            for (r, yi) in a[k..].iter().zip(y[k..].iter_mut()) {
                *yi -= f * r[k];
            }
        }
        diag[k] = alpha;
    }

    let largest = diag.iter().fold(0.0_f64, |m, d| m.max(math::abs(*d)));
    if diag.iter().any(|d| math::abs(*d) <= RANK_TOLERANCE * largest) {
        return None;
    }

    let mut beta = [0.0_f64; FEATURES];
    for k in (0..FEATURES).rev() {
        let mut acc = y[k];
        for j in k + 1..FEATURES {
            acc -= a[k][j] * beta[j];
        }
        beta[k] = acc / diag[k];
    }
    Some(beta)
}

/// Trained models keyed by operator kind (the set 𝓜).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelSet {
    models: BTreeMap<OperatorKind, OperatorModel>,
}

/// Outcome of training one kind from a feedback store.
#[derive(Debug, Clone, PartialEq)]
pub struct KindTraining {
    pub kind: OperatorKind,
    pub records: usize,
    pub sufficient: bool,
    pub regularized: bool,
}

impl ModelSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, model: OperatorModel) -> Option<OperatorModel> {
        self.models.insert(model.kind.clone(), model)
    }

    pub fn get(&self, kind: &OperatorKind) -> Option<&OperatorModel> {
        self.models.get(kind)
    }

    pub fn iter(&self) -> impl Iterator<Item = &OperatorModel> {
        self.models.values()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// Trains a model for every kind in `store` with at least `threshold` records.
    pub fn train_from(store: &FeedbackStore, threshold: usize) -> (ModelSet, Vec<KindTraining>) {
        let mut set = ModelSet::new();
        let mut report = Vec::new();
        for kind in store.kinds() {
            let records: Vec<FeedbackRecord> = store.records_of(&kind).cloned().collect();
            let sufficient = store.has_sufficient_feedback(&kind, threshold);
            let mut regularized = false;
            if sufficient {
                let trained = train(&records, threshold)
                    .expect("records share one kind and meet the threshold");
                regularized = trained.regularized;
                set.insert(trained.model);
            }
            report.push(KindTraining {
                kind,
                records: records.len(),
                sufficient,
                regularized,
            });
        }
        (set, report)
    }
}

impl FromIterator<OperatorModel> for ModelSet {
    fn from_iter<I: IntoIterator<Item = OperatorModel>>(iter: I) -> Self {
        let mut set = ModelSet::new();
        for m in iter {
            set.insert(m);
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn record(id: u64, c_in: f64, c_out: f64, act: f64) -> FeedbackRecord {
        FeedbackRecord {
            record_id: id,
            kind: OperatorKind::TableScan,
            features: FeatureVector::estimated(c_in, c_out),
            opt_cost: 1.0,
            act_cost: act,
        }
    }

    #[test]
    fn feature_map_examples() {
        assert_eq!(feature_map(&FeatureVector::estimated(0.0, 0.0)), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(feature_map(&FeatureVector::estimated(1.0, 1.0)), [1.0, 1.0, 1.0, 1.0]);
        assert_eq!(feature_map(&FeatureVector::estimated(3.0, 2.0)), [1.0, 2.0, 3.0, 6.0]);
    }

    #[test]
    fn feature_map_ignores_actual_cardinalities() {
        let mut fv = FeatureVector::estimated(3.0, 2.0);
        fv.act_card_in = Some(1e6);
        fv.act_card_out = Some(5.0);
        assert_eq!(feature_map(&fv), [1.0, 2.0, 3.0, 6.0]);
    }

    #[test]
    fn recovers_noiseless_linear_target() {
        let records: Vec<_> = (0..20)
            .map(|i| {
                let c_in = 10.0 + 37.0 * i as f64;
                let c_out = ((i * 7) % 13) as f64 * 3.0 + 1.0;
                record(i, c_in, c_out, 2.0 + 0.5 * c_out)
            })
            .collect();
        let fit = train(&records, 10).unwrap();
        assert!(!fit.regularized);
        let want = [2.0, 0.5, 0.0, 0.0];
        for (got, want) in fit.model.coefficients.iter().zip(want) {
            assert!((got - want).abs() < 1e-6, "{:?}", fit.model.coefficients);
        }
        assert!(fit.model.residual_rms < 1e-6);
        assert_eq!(fit.model.trained_on, 20);
    }

    #[test]
    fn constant_target_predicts_constant_inside_hull() {
        let records: Vec<_> = (0..15)
            .map(|i| record(i, 5.0 + (i * i) as f64, 1.0 + (i % 4) as f64 * 9.0, 7.0))
            .collect();
        let model = train(&records, 10).unwrap().model;
        for (c_in, c_out) in [(5.0, 1.0), (100.0, 10.0), (150.0, 28.0), (201.0, 19.0)] {
            let p = model.predict(&FeatureVector::estimated(c_in, c_out));
            assert!((p - 7.0).abs() < 1e-6, "{p}");
        }
    }

    #[test]
    fn too_few_records_is_an_error() {
        let records: Vec<_> = (0..3).map(|i| record(i, i as f64, 1.0, 1.0)).collect();
        assert_eq!(
            train(&records, 10),
            Err(ModelError::Insufficient {
                kind: OperatorKind::TableScan,
                have: 3,
                need: 10
            })
        );
        assert_eq!(train(&[], 1), Err(ModelError::Empty));
    }

    #[test]
    fn mixed_kinds_rejected() {
        let mut records: Vec<_> = (0..12).map(|i| record(i, i as f64, 1.0, 1.0)).collect();
        records[5].kind = OperatorKind::IndexSeek;
        assert!(matches!(train(&records, 10), Err(ModelError::MixedKinds(..))));
    }

    #[test]
    fn rank_deficient_design_falls_back_to_ridge() {
        // Only two distinct feature rows.
        let records: Vec<_> = (0..12)
            .map(|i| {
                if i % 2 == 0 {
                    record(i, 10.0, 5.0, 3.0)
                } else {
                    record(i, 20.0, 5.0, 4.0)
                }
            })
            .collect();
        let fit = train(&records, 10).unwrap();
        assert!(fit.regularized);
        assert!(fit.model.coefficients.iter().all(|c| c.is_finite()));
        let p = fit.model.predict(&FeatureVector::estimated(10.0, 5.0));
        assert!((p - 3.0).abs() < 1e-2, "{p}");
    }

    #[test]
    fn predict_examples() {
        let model = |c: [f64; 4]| OperatorModel {
            kind: OperatorKind::TableScan,
            coefficients: c,
            trained_on: 10,
            residual_rms: 0.0,
        };
        let fv = FeatureVector::estimated(4.0, 10.0);
        assert_eq!(model([2.0, 0.5, 0.0, 0.0]).predict(&fv), 7.0);
        assert_eq!(model([0.0; 4]).predict(&fv), 0.0);
        assert_eq!(model([-5.0, 0.0, 0.0, 0.0]).predict(&fv), 0.0);
    }

    #[test]
    fn model_set_trains_only_sufficient_kinds() {
        use crate::kind::Backbone;
        use crate::plan::{PlanOperator, QueryPlan};
        let mut store = FeedbackStore::new(Backbone::leaves());
        for i in 0..12u64 {
            let c = 10.0 + i as f64 * 3.0;
            let ops = vec![
                PlanOperator::new(1, OperatorKind::HashJoin, 1.0)
                    .with_act_cost(1.0)
                    .with_children([2, 3]),
                PlanOperator::new(2, OperatorKind::TableScan, 1.0)
                    .with_act_cost(1.0 + 0.1 * c)
                    .with_cards(c, c / 2.0 + (i % 3) as f64),
                PlanOperator::new(3, OperatorKind::IndexSeek, 1.0)
                    .with_act_cost(2.0)
                    .with_cards(c, 1.0),
            ];
            let plan = QueryPlan::new("q", 1.0, 1, ops).unwrap();
            if i < 5 {
                store.ingest(&plan);
            } else {
                // Scan only.
                let mut ops = plan.into_operators();
                ops[2].act_cost = None;
                store.ingest(&QueryPlan::new("q", 1.0, 1, ops).unwrap());
            }
        }
        let (set, report) = ModelSet::train_from(&store, 10);
        assert_eq!(set.len(), 1);
        assert!(set.get(&OperatorKind::TableScan).is_some());
        assert_eq!(report.len(), 2);
        assert!(report.iter().any(|r| r.kind == OperatorKind::IndexSeek && !r.sufficient));
    }
}
