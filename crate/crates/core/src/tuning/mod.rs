//! What-if index tuning simulation.
//!
//! A [`WhatIfOracle`] maps `(query, configuration)` to an annotated plan. The
//! tuner sees only what an optimizer would (estimated cardinalities and
//! optimizer costs) plus, in combined mode, the trained models and pivot.
//! Actual costs are read only to score the outcome.

pub mod suite;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::analysis::stats;
use crate::combine::{combine, CombineError, PivotChoice};
use crate::math;
use crate::model::ModelSet;
use crate::plan::{PlanError, QueryPlan};

/// Outcomes with `act_improvement` below this count as regressions.
pub const DEFAULT_REGRESSION_CUT: f64 = -0.2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TuningError {
    #[error("configuration id must be nonempty")]
    EmptyConfigurationId,
    #[error("no what-if plan for query {query} under configuration {config}")]
    MissingOracleEntry { query: String, config: String },
    #[error("baseline cost must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error("threshold tau must lie in [0, 1), got {0}")]
    InvalidThreshold(f64),
    #[error("no candidate configurations")]
    NoCandidates,
    #[error("weight must be positive, got {0}")]
    InvalidWeight(f64),
    #[error("{0} costs but {1} weights")]
    LengthMismatch(usize, usize),
    #[error("no outcomes to report")]
    NoOutcomes,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Combine(#[from] CombineError),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IndexConfiguration {
    id: String,
    indexes: BTreeSet<String>,
}

impl IndexConfiguration {
    pub fn new<I, S>(id: impl Into<String>, indexes: I) -> Result<Self, TuningError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let id = id.into();
        if id.is_empty() {
            return Err(TuningError::EmptyConfigurationId);
        }
        Ok(IndexConfiguration {
            id,
            indexes: indexes.into_iter().map(Into::into).collect(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn indexes(&self) -> &BTreeSet<String> {
        &self.indexes
    }

    pub fn contains(&self, index: &str) -> bool {
        self.indexes.contains(index)
    }

    pub fn len(&self) -> usize {
        self.indexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indexes.is_empty()
    }
}

/// Prefix chains `I1 = {i1}, I2 = {i1, i2}, ...` of a ranked index list.
pub fn nested_configurations<S: AsRef<str>>(ranked: &[S]) -> Vec<IndexConfiguration> {
    (1..=ranked.len())
        .map(|n| IndexConfiguration {
            id: alloc::format!("I{n}"),
            indexes: ranked[..n].iter().map(|s| String::from(s.as_ref())).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WhatIfOracle {
    plans: BTreeMap<(String, String), QueryPlan>,
}

impl WhatIfOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers the plan of `plan.query_id()` under `config`.
    pub fn insert(&mut self, config: &str, plan: QueryPlan) -> Option<QueryPlan> {
        self.plans
            .insert((plan.query_id().into(), config.into()), plan)
    }

    pub fn plan(&self, query: &str, config: &str) -> Result<&QueryPlan, TuningError> {
        self.plans
            .get(&(query.into(), config.into()))
            .ok_or_else(|| TuningError::MissingOracleEntry {
                query: query.into(),
                config: config.into(),
            })
    }

    /// Every plan, ordered by `(query, configuration)`.
    pub fn plans(&self) -> impl Iterator<Item = &QueryPlan> {
        self.plans.values()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &QueryPlan)> {
        self.plans
            .iter()
            .map(|((q, c), p)| (q.as_str(), c.as_str(), p))
    }

    pub fn len(&self) -> usize {
        self.plans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plans.is_empty()
    }

    /// Copy with every optimizer cost multiplied by `k`.
    pub fn scale_optimizer_costs(&self, k: f64) -> Result<WhatIfOracle, TuningError> {
        let mut plans = BTreeMap::new();
        for (key, plan) in &self.plans {
            plans.insert(key.clone(), plan.scale_optimizer_costs(k)?);
        }
        Ok(WhatIfOracle { plans })
    }

    /// Copy with every actual cost replaced by `f(query, config, act_cost)`.
    pub fn map_actual_costs<F>(&self, mut f: F) -> Result<WhatIfOracle, TuningError>
    where
        F: FnMut(&str, &str, f64) -> f64,
    {
        let mut plans = BTreeMap::new();
        for ((q, c), plan) in &self.plans {
            let mut ops = plan.operators().to_vec();
            for op in &mut ops {
                op.act_cost = op.act_cost.map(|a| f(q, c, a));
            }
            let rebuilt = QueryPlan::new(q.clone(), plan.weight(), plan.root(), ops)?;
            plans.insert((q.clone(), c.clone()), rebuilt);
        }
        Ok(WhatIfOracle { plans })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EstimatorMode {
    Optimizer,
    Combined,
}

impl EstimatorMode {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorMode::Optimizer => "optimizer",
            EstimatorMode::Combined => "combined",
        }
    }
}

impl core::fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the tuner costs a candidate plan.
#[derive(Debug, Clone, Copy)]
pub enum Estimator<'a> {
    /// Plain sum of optimizer costs.
    Optimizer,
    /// Model predictions scaled through the pivot, optimizer costs elsewhere.
    Combined {
        models: &'a ModelSet,
        pivot: &'a PivotChoice,
    },
}

impl Estimator<'_> {
    pub fn mode(&self) -> EstimatorMode {
        match self {
            Estimator::Optimizer => EstimatorMode::Optimizer,
            Estimator::Combined { .. } => EstimatorMode::Combined,
        }
    }

    /// Estimated cost of `plan`; never reads actual costs.
    pub fn plan_cost(&self, plan: &QueryPlan) -> Result<f64, TuningError> {
        match self {
            Estimator::Optimizer => Ok(plan.optimizer_total_cost()),
            Estimator::Combined { models, pivot } => Ok(combine(plan, models, Some(pivot))?.total),
        }
    }
}

fn improvement(old: f64, new: f64) -> Result<f64, TuningError> {
    if !(old > 0.0) {
        return Err(TuningError::NonPositiveBaseline(old));
    }
    Ok(1.0 - new / old)
}

/// `1 - c_new / c_old` on estimated costs.
pub fn estimated_improvement(c_old: f64, c_new: f64) -> Result<f64, TuningError> {
    improvement(c_old, c_new)
}

/// `1 - a_new / a_old` on actual costs.
pub fn actual_improvement(a_old: f64, a_new: f64) -> Result<f64, TuningError> {
    improvement(a_old, a_new)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TuningOutcome {
    pub query_id: String,
    pub mode: EstimatorMode,
    pub old_config: String,
    pub new_config: String,
    pub est_improvement: f64,
    pub act_improvement: f64,
    pub recommended: bool,
}

impl TuningOutcome {
    /// Re-applies the threshold gate at a different `tau`.
    pub fn regate(&self, tau: f64) -> TuningOutcome {
        TuningOutcome {
            recommended: self.est_improvement > tau && self.new_config != self.old_config,
            ..self.clone()
        }
    }
}

/// Picks the candidate with the lowest estimated cost for `query`.
///
/// Ties go to the configuration with fewer indexes, then the smaller id.
/// The pick is recommended only if its estimated improvement over `old`
/// exceeds `tau`. The actual improvement is reported either way.
pub fn tune(
    query: &str,
    candidates: &[IndexConfiguration],
    old: &IndexConfiguration,
    oracle: &WhatIfOracle,
    estimator: &Estimator<'_>,
    tau: f64,
) -> Result<TuningOutcome, TuningError> {
    if !(0.0..1.0).contains(&tau) {
        return Err(TuningError::InvalidThreshold(tau));
    }
    let mut best: Option<(f64, &IndexConfiguration)> = None;
    for config in candidates {
        let cost = estimator.plan_cost(oracle.plan(query, config.id())?)?;
        let better = match best {
            None => true,
            Some((bc, b)) => match cost.total_cmp(&bc) {
                core::cmp::Ordering::Less => true,
                core::cmp::Ordering::Greater => false,
                core::cmp::Ordering::Equal => {
                    (config.len(), config.id()) < (b.len(), b.id())
                }
            },
        };
        if better {
            best = Some((cost, config));
        }
    }
    let (new_cost, new) = best.ok_or(TuningError::NoCandidates)?;

    let old_plan = oracle.plan(query, old.id())?;
    let new_plan = oracle.plan(query, new.id())?;
    let est_improvement = estimated_improvement(estimator.plan_cost(old_plan)?, new_cost)?;
    let act_improvement =
        actual_improvement(old_plan.actual_total_cost()?, new_plan.actual_total_cost()?)?;
    Ok(TuningOutcome {
        query_id: query.into(),
        mode: estimator.mode(),
        old_config: old.id().into(),
        new_config: new.id().into(),
        est_improvement,
        act_improvement,
        recommended: est_improvement > tau && new.id() != old.id(),
    })
}

/// [`tune`] for each query in order.
pub fn tune_all<S: AsRef<str>>(
    queries: &[S],
    candidates: &[IndexConfiguration],
    old: &IndexConfiguration,
    oracle: &WhatIfOracle,
    estimator: &Estimator<'_>,
    tau: f64,
) -> Result<Vec<TuningOutcome>, TuningError> {
    queries
        .iter()
        .map(|q| tune(q.as_ref(), candidates, old, oracle, estimator, tau))
        .collect()
}

/// Edges `-1.0, -0.8, ..., 1.0` of the improvement histogram.
pub fn bin_edges() -> [f64; 11] {
    core::array::from_fn(|i| (i as f64 - 5.0) / 5.0)
}

/// Bin counts: `below` for `x < -1`, `bins[i]` for `edges[i] <= x < edges[i+1]`
/// (the last bin also takes `x = 1`), `above` for `x > 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Histogram {
    pub below: usize,
    pub bins: [usize; 10],
    pub above: usize,
}

impl Histogram {
    pub fn add(&mut self, x: f64) {
        let edges = bin_edges();
        if x < edges[0] {
            self.below += 1;
        } else if x > edges[10] {
            self.above += 1;
        } else {
            let i = edges[1..10].iter().take_while(|e| x >= **e).count();
            self.bins[i] += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.below + self.above + self.bins.iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModeReport {
    pub mode: EstimatorMode,
    pub outcomes: usize,
    pub recommended: usize,
    /// Recommended outcomes with `act_improvement < regression_cut`.
    pub regressions: usize,
    /// Distribution of `act_improvement` over all outcomes of this mode.
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionReport {
    pub regression_cut: f64,
    /// One entry per mode present, in [`EstimatorMode`] order.
    pub modes: Vec<ModeReport>,
}

impl RegressionReport {
    pub fn mode(&self, mode: EstimatorMode) -> Option<&ModeReport> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

pub fn regression_report(
    outcomes: &[TuningOutcome],
    regression_cut: f64,
) -> Result<RegressionReport, TuningError> {
    if outcomes.is_empty() {
        return Err(TuningError::NoOutcomes);
    }
    let mut by_mode: BTreeMap<EstimatorMode, ModeReport> = BTreeMap::new();
    for o in outcomes {
        let r = by_mode.entry(o.mode).or_insert_with(|| ModeReport {
            mode: o.mode,
            outcomes: 0,
            recommended: 0,
            regressions: 0,
            histogram: Histogram::default(),
        });
        r.outcomes += 1;
        r.histogram.add(o.act_improvement);
        if o.recommended {
            r.recommended += 1;
            if o.act_improvement < regression_cut {
                r.regressions += 1;
            }
        }
    }
    Ok(RegressionReport {
        regression_cut,
        modes: by_mode.into_values().collect(),
    })
}

/// `c(W) = sum_k c_k * w_k`. Weights must be positive.
pub fn workload_cost(costs: &[f64], weights: &[f64]) -> Result<f64, TuningError> {
    if costs.len() != weights.len() {
        return Err(TuningError::LengthMismatch(costs.len(), weights.len()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
        return Err(TuningError::InvalidWeight(*w));
    }
    Ok(math::compensated_sum(
        costs.iter().zip(weights).map(|(c, w)| c * w),
    ))
}

/// Workload cost of `plans` under `cost`, weighted by each plan's weight.
pub fn plans_workload_cost<'p, I, F>(plans: I, mut cost: F) -> Result<f64, TuningError>
where
    I: IntoIterator<Item = &'p QueryPlan>,
    F: FnMut(&QueryPlan) -> Result<f64, TuningError>,
{
    let mut costs = Vec::new();
    let mut weights = Vec::new();
    for p in plans {
        costs.push(cost(p)?);
        weights.push(p.weight());
    }
    workload_cost(&costs, &weights)
}

/// Workload-level view of per-query relative estimation errors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CarryoverReport {
    /// `(c(W) - a(W)) / a(W)`.
    pub workload_error: f64,
    /// Mean of the per-query errors' distribution.
    pub epsilon: f64,
    /// Standard error of `workload_error` around `epsilon`; zero when every error equals `epsilon`.
    pub standard_error: f64,
}

impl CarryoverReport {
    pub fn within(&self, standard_errors: f64) -> bool {
        math::abs(self.workload_error - self.epsilon) <= standard_errors * self.standard_error
    }
}

/// Relative error of the workload cost when query `k` is estimated as
/// `a_k * (1 + x_k)`.
///
/// The workload error is the `a_k w_k`-weighted mean of the `x_k`; its
/// standard error uses the sample spread of the `x_k`.
pub fn carryover(
    actual: &[f64],
    weights: &[f64],
    errors: &[f64],
    epsilon: f64,
) -> Result<CarryoverReport, TuningError> {
    if errors.len() != actual.len() {
        return Err(TuningError::LengthMismatch(actual.len(), errors.len()));
    }
    let estimated: Vec<f64> = actual
        .iter()
        .zip(errors)
        .map(|(a, x)| a * (1.0 + x))
        .collect();
    let a = workload_cost(actual, weights)?;
    let c = workload_cost(&estimated, weights)?;
    if !(a > 0.0) {
        return Err(TuningError::NonPositiveBaseline(a));
    }
    let shares: Vec<f64> = actual.iter().zip(weights).map(|(a, w)| a * w).collect();
    let spread = if errors.len() >= 2 && errors.iter().any(|x| *x != errors[0]) {
        stats::std_dev(errors)
    } else {
        0.0
    };
    let share_norm = math::sqrt(shares.iter().map(|s| s * s).sum::<f64>());
    Ok(CarryoverReport {
        workload_error: (c - a) / a,
        epsilon,
        standard_error: spread * share_norm / a,
    })
}

/// [`carryover`] with every `x_k = epsilon`.
pub fn carryover_deterministic(
    actual: &[f64],
    weights: &[f64],
    epsilon: f64,
) -> Result<CarryoverReport, TuningError> {
    let errors = alloc::vec![epsilon; actual.len()];
    carryover(actual, weights, &errors, epsilon)
}

/// `n` errors drawn i.i.d. uniform on `[lo, hi]` from the seed.
pub fn uniform_errors(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = crate::synth::rng_for(seed, 0);
    (0..n).map(|_| rng.random_range(lo..=hi)).collect()
}

/// Estimated and actual improvement between two configurations when every
/// query's estimate carries the same relative error `epsilon`.
pub fn carried_improvements(
    actual_old: &[f64],
    actual_new: &[f64],
    weights: &[f64],
    epsilon: f64,
) -> Result<(f64, f64), TuningError> {
    let scale = |xs: &[f64]| xs.iter().map(|a| a * (1.0 + epsilon)).collect::<Vec<_>>();
    let a_old = workload_cost(actual_old, weights)?;
    let a_new = workload_cost(actual_new, weights)?;
    let c_old = workload_cost(&scale(actual_old), weights)?;
    let c_new = workload_cost(&scale(actual_new), weights)?;
    Ok((
        estimated_improvement(c_old, c_new)?,
        actual_improvement(a_old, a_new)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kind::OperatorKind;
    use crate::plan::PlanOperator;
    use alloc::vec;

    #[test]
    fn improvement_examples() {
        assert!((estimated_improvement(100.0, 80.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(estimated_improvement(7.0, 7.0).unwrap(), 0.0);
        assert!((estimated_improvement(100.0, 120.0).unwrap() + 0.2).abs() < 1e-15);
        assert!((actual_improvement(50.0, 40.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(actual_improvement(10.0, 25.0).unwrap(), -1.5);
        assert_eq!(
            estimated_improvement(0.0, 1.0),
            Err(TuningError::NonPositiveBaseline(0.0))
        );
    }

    #[test]
    fn nested_prefixes() {
        let c = nested_configurations(&["a", "b", "c"]);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].id(), "I1");
        assert!(c[0].indexes().is_subset(c[1].indexes()));
        assert!(c[1].indexes().is_subset(c[2].indexes()));
        assert_eq!(c[2].len(), 3);
        assert!(IndexConfiguration::new("", ["x"]).is_err());
        assert_eq!(IndexConfiguration::new("d", ["x", "x"]).unwrap().len(), 1);
    }

    fn one_op(query: &str, opt: f64, act: f64) -> QueryPlan {
        let op = PlanOperator::new(1, OperatorKind::TableScan, opt).with_act_cost(act);
        QueryPlan::new(query, 1.0, 1, vec![op]).unwrap()
    }

    fn two_config_oracle(opt: [f64; 2], act: [f64; 2]) -> (WhatIfOracle, Vec<IndexConfiguration>) {
        let configs = vec![
            IndexConfiguration::new("I0", Vec::<String>::new()).unwrap(),
            IndexConfiguration::new("I1", ["i1"]).unwrap(),
        ];
        let mut oracle = WhatIfOracle::new();
        oracle.insert("I0", one_op("q", opt[0], act[0]));
        oracle.insert("I1", one_op("q", opt[1], act[1]));
        (oracle, configs)
    }

    #[test]
    fn single_candidate_is_not_recommended() {
        let (oracle, configs) = two_config_oracle([10.0, 5.0], [10.0, 5.0]);
        let o = tune("q", &configs[..1], &configs[0], &oracle, &Estimator::Optimizer, 0.0).unwrap();
        assert!(!o.recommended);
        assert_eq!((o.est_improvement, o.act_improvement), (0.0, 0.0));
    }

    #[test]
    fn threshold_gates_recommendation() {
        // Estimated 0.15, actual 0.5.
        let (oracle, configs) = two_config_oracle([100.0, 85.0], [10.0, 5.0]);
        let o = tune("q", &configs, &configs[0], &oracle, &Estimator::Optimizer, 0.2).unwrap();
        assert_eq!(o.new_config, "I1");
        assert!(!o.recommended);
        assert_eq!(o.act_improvement, 0.5);
        let o = tune("q", &configs, &configs[0], &oracle, &Estimator::Optimizer, 0.1).unwrap();
        assert!(o.recommended);
    }

    #[test]
    fn ties_prefer_fewer_indexes() {
        let (oracle, configs) = two_config_oracle([10.0, 10.0], [10.0, 1.0]);
        let rev: Vec<_> = configs.iter().rev().cloned().collect();
        let o = tune("q", &rev, &configs[1], &oracle, &Estimator::Optimizer, 0.0).unwrap();
        assert_eq!(o.new_config, "I0");
    }

    #[test]
    fn tune_errors() {
        let (oracle, configs) = two_config_oracle([1.0, 1.0], [1.0, 1.0]);
        assert!(matches!(
            tune("other", &configs, &configs[0], &oracle, &Estimator::Optimizer, 0.0),
            Err(TuningError::MissingOracleEntry { .. })
        ));
        assert_eq!(
            tune("q", &configs, &configs[0], &oracle, &Estimator::Optimizer, 1.0),
            Err(TuningError::InvalidThreshold(1.0))
        );
        assert_eq!(
            tune("q", &[], &configs[0], &oracle, &Estimator::Optimizer, 0.0),
            Err(TuningError::NoCandidates)
        );
    }

    fn outcome(act: f64, recommended: bool, mode: EstimatorMode) -> TuningOutcome {
        TuningOutcome {
            query_id: "q".into(),
            mode,
            old_config: "I0".into(),
            new_config: "I1".into(),
            est_improvement: 0.5,
            act_improvement: act,
            recommended,
        }
    }

    #[test]
    fn histogram_of_constant_outcomes() {
        let outs: Vec<_> = (0..4)
            .map(|_| outcome(0.5, true, EstimatorMode::Combined))
            .collect();
        let r = regression_report(&outs, DEFAULT_REGRESSION_CUT).unwrap();
        let h = &r.mode(EstimatorMode::Combined).unwrap().histogram;
        assert_eq!(h.bins, [0, 0, 0, 0, 0, 0, 0, 4, 0, 0]);
        assert_eq!(h.total(), 4);
        assert!(r.mode(EstimatorMode::Optimizer).is_none());
    }

    #[test]
    fn histogram_of_mixed_fixture() {
        use EstimatorMode::*;
        let outs = [
            outcome(-1.5, true, Optimizer),
            outcome(-0.5, true, Optimizer),
            outcome(-0.2, true, Optimizer),
            outcome(-0.25, false, Optimizer),
            outcome(0.0, false, Optimizer),
            outcome(0.4, true, Optimizer),
            outcome(0.99, true, Optimizer),
            outcome(1.0, true, Combined),
            outcome(-0.3, true, Combined),
            outcome(0.1, true, Combined),
        ];
        let r = regression_report(&outs, -0.2).unwrap();
        let opt = r.mode(Optimizer).unwrap();
        // -1.5 below; -0.5 in [-0.6,-0.4); -0.25 in [-0.4,-0.2); -0.2 and 0.0
        // each open their bins; 0.4 in [0.4,0.6); 0.99 in [0.8,1.0].
        assert_eq!(opt.histogram.below, 1);
        assert_eq!(opt.histogram.bins, [0, 0, 1, 1, 1, 1, 0, 1, 0, 1]);
        assert_eq!((opt.outcomes, opt.recommended, opt.regressions), (7, 5, 2));
        let comb = r.mode(Combined).unwrap();
        assert_eq!(comb.histogram.bins, [0, 0, 0, 1, 0, 1, 0, 0, 0, 1]);
        assert_eq!(comb.regressions, 1);
        assert_eq!(regression_report(&[], -0.2), Err(TuningError::NoOutcomes));
    }

    #[test]
    fn workload_cost_examples() {
        assert_eq!(workload_cost(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap(), 6.0);
        assert_eq!(workload_cost(&[10.0, 4.0], &[2.0, 0.5]).unwrap(), 22.0);
        assert_eq!(workload_cost(&[7.0], &[3.0]).unwrap(), 21.0);
        assert!(workload_cost(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn carryover_zero_error() {
        let r = carryover_deterministic(&[3.0, 5.0, 8.0], &[1.0; 3], 0.0).unwrap();
        assert_eq!(r.workload_error, 0.0);
        let (e, a) = carried_improvements(&[3.0, 5.0], &[2.0, 6.0], &[1.0; 2], 0.0).unwrap();
        assert_eq!(e, a);
    }

    #[test]
    fn carryover_constant_error() {
        let actual = [12.0, 3.5, 40.0, 7.25, 19.0];
        let r = carryover_deterministic(&actual, &[1.0; 5], 0.3).unwrap();
        // Direct summation: sum(1.3 a) / sum(a) - 1.
        let a: f64 = actual.iter().sum();
        let c: f64 = actual.iter().map(|x| 1.3 * x).sum();
        assert!((r.workload_error - 0.3).abs() < 1e-12);
        assert!(((c - a) / a - 0.3).abs() < 1e-12);
        assert_eq!(r.standard_error, 0.0);
    }
}
