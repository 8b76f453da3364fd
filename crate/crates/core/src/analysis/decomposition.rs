//! Per-query leaf/internal decomposition of actual and estimated cost, and
//! the workload-level statistics derived from it.

use alloc::string::String;
use alloc::vec::Vec;

use super::bounds;
use super::stats::{self, StatsError};
use crate::combine::CombinedEstimate;
use crate::kind::Backbone;
use crate::plan::QueryPlan;

/// `(L, I, L', I')` for one query.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QueryDecomposition {
    pub query_id: String,
    pub leaf: f64,
    pub internal: f64,
    pub est_leaf: f64,
    pub est_internal: f64,
}

impl QueryDecomposition {
    /// `P = L + I`.
    pub fn actual(&self) -> f64 {
        self.leaf + self.internal
    }

    /// `P' = L' + I'`.
    pub fn estimated(&self) -> f64 {
        self.est_leaf + self.est_internal
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WorkloadDecomposition {
    pub queries: Vec<QueryDecomposition>,
    /// `lambda` of the shared pivot, when one was used.
    pub lambda: Option<f64>,
}

impl WorkloadDecomposition {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn leaf(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.leaf).collect()
    }

    pub fn internal(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.internal).collect()
    }

    pub fn est_leaf(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.est_leaf).collect()
    }

    pub fn est_internal(&self) -> Vec<f64> {
        self.queries.iter().map(|q| q.est_internal).collect()
    }

    /// `P` per query.
    pub fn actual(&self) -> Vec<f64> {
        self.queries.iter().map(QueryDecomposition::actual).collect()
    }

    /// `P'` per query.
    pub fn estimated(&self) -> Vec<f64> {
        self.queries.iter().map(QueryDecomposition::estimated).collect()
    }
}

/// Splits each executed plan and its combined estimate into `(L, I, L', I')`.
///
/// `L'` is the model-sourced part of the estimate and `I'` the
/// optimizer-sourced part. All estimates must share one pivot.
pub fn decompose(
    plans: &[QueryPlan],
    estimates: &[CombinedEstimate],
    backbone: &Backbone,
) -> Result<WorkloadDecomposition, StatsError> {
    if plans.len() != estimates.len() {
        return Err(StatsError::CountMismatch(plans.len(), estimates.len()));
    }
    if let Some(first) = estimates.first() {
        if let Some(other) = estimates.iter().find(|e| e.pivot != first.pivot) {
            return Err(StatsError::InconsistentPivots(
                first.query_id.clone(),
                other.query_id.clone(),
            ));
        }
    }
    let mut queries = Vec::with_capacity(plans.len());
    for (plan, est) in plans.iter().zip(estimates) {
        queries.push(QueryDecomposition {
            query_id: plan.query_id().into(),
            leaf: plan.actual_leaf_cost(backbone)?,
            internal: plan.actual_internal_cost(backbone)?,
            est_leaf: est.model_part(),
            est_internal: est.optimizer_part(),
        });
    }
    Ok(WorkloadDecomposition {
        queries,
        lambda: estimates.first().and_then(|e| e.pivot).map(|p| p.lambda),
    })
}

/// Workload-level quantities: spreads, their ratios and the three correlations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationStats {
    /// `sigma_L / sigma_I`.
    pub eta: f64,
    /// `sigma_L' / sigma_I'`.
    pub eta_prime: f64,
    /// `rho(L, I)`.
    pub alpha: f64,
    /// `rho(L, I')`.
    pub beta: f64,
    /// `rho(I, I')`.
    pub gamma: f64,
    pub sigma_l: f64,
    pub sigma_i: f64,
    pub sigma_lp: f64,
    pub sigma_ip: f64,
    pub lambda: Option<f64>,
}

impl CorrelationStats {
    /// Closed-form `rho(P, P')` from these statistics.
    pub fn rho_closed_form(&self) -> Result<f64, bounds::BoundsError> {
        bounds::rho_closed_form(self.eta, self.eta_prime, self.alpha, self.beta, self.gamma)
    }
}

/// Sample statistics of a decomposition.
///
/// `sigma_I` and `sigma_I'` must be positive. A constant `L` is allowed: then
/// `eta = 0` and `alpha`, `beta` (undefined) are reported as 0.
pub fn stats(d: &WorkloadDecomposition) -> Result<CorrelationStats, StatsError> {
    if d.len() < 2 {
        return Err(StatsError::TooFew(d.len()));
    }
    let l = d.leaf();
    let i = d.internal();
    let lp = d.est_leaf();
    let ip = d.est_internal();
    for (name, xs) in [("L", &l), ("I", &i), ("L'", &lp), ("I'", &ip)] {
        if !xs.iter().all(|v| v.is_finite()) {
            return Err(StatsError::NonFinite(name));
        }
    }

    let sigma_l = stats::std_dev(&l);
    let sigma_i = stats::std_dev(&i);
    let sigma_lp = stats::std_dev(&lp);
    let sigma_ip = stats::std_dev(&ip);
    if sigma_i == 0.0 {
        return Err(StatsError::ZeroVariance("I"));
    }
    if sigma_ip == 0.0 {
        return Err(StatsError::ZeroVariance("I'"));
    }

    let (alpha, beta) = if sigma_l > 0.0 {
        (stats::pearson(&l, &i)?, stats::pearson(&l, &ip)?)
    } else {
        (0.0, 0.0)
    };
    let gamma = stats::pearson(&i, &ip)?;

    Ok(CorrelationStats {
        eta: sigma_l / sigma_i,
        eta_prime: sigma_lp / sigma_ip,
        alpha,
        beta,
        gamma,
        sigma_l,
        sigma_i,
        sigma_lp,
        sigma_ip,
        lambda: d.lambda,
    })
}
