//! Seeded index-tuning suite: every query scans five tables, and index `i_j`
//! turns the scan of table `j` into an index seek over the qualifying rows.
//!
//! Seeks are cheap for selective predicates and expensive for unselective
//! ones. The emulated optimizer prices both access paths by output
//! cardinality only, so it always believes the indexes help. Join costs are
//! small and vary by a few percent between configurations, which keeps the
//! leaf share of each query's cost spread large.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{
    nested_configurations, tune_all, Estimator, IndexConfiguration, TuningError, TuningOutcome,
    WhatIfOracle,
};
use crate::analysis::stats;
use crate::feedback::{FeatureVector, FeedbackStore};
use crate::kind::{Backbone, OperatorKind};
use crate::plan::{PlanOperator, QueryPlan};
use crate::synth::{rng_for, GroundTruth, OptimizerCostModel};

const TABLES: usize = 5;
// Relative jitter of internal operator costs between configurations.
const JITTER: f64 = 0.03;
// Queries whose spread ratio across configurations falls below this are redrawn.
const MIN_ETA: f64 = 10.0;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SuiteParams {
    pub n_queries: usize,
    pub seed: u64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        SuiteParams {
            n_queries: 100,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningSuite {
    pub queries: Vec<String>,
    /// The starting configuration (no indexes).
    pub base: IndexConfiguration,
    /// `I1 ⊂ ... ⊂ I5`.
    pub nested: Vec<IndexConfiguration>,
    pub oracle: WhatIfOracle,
}

fn ground_truth() -> GroundTruth {
    let mut gt = GroundTruth::standard(0.0);
    gt.coefficients
        .insert(OperatorKind::HashJoin, [1.0, 0.00001, 0.00002, 0.0]);
    gt
}

struct Table {
    rows: f64,
    selectivity: f64,
}

impl TuningSuite {
    pub fn generate(params: SuiteParams) -> Result<TuningSuite, TuningError> {
        let ranked: Vec<String> = (1..=TABLES).map(|j| format!("i{j}")).collect();
        let base = IndexConfiguration::new("I0", Vec::<String>::new())?;
        let nested = nested_configurations(&ranked);
        let configs: Vec<IndexConfiguration> =
            core::iter::once(base.clone()).chain(nested.iter().cloned()).collect();
        let gt = ground_truth();
        let optimizer = OptimizerCostModel::standard();
        let backbone = Backbone::leaves();

        let mut oracle = WhatIfOracle::new();
        let mut queries = Vec::with_capacity(params.n_queries);
        for k in 0..params.n_queries {
            let query = format!("q{k:03}");
            let mut rng = rng_for(params.seed, k as u64);
            let mut accepted = None;
            for _ in 0..MAX_REDRAWS {
                let tables: Vec<Table> = (0..TABLES)
                    .map(|_| Table {
                        rows: libm::pow(10.0, rng.random_range(4.0..6.0)),
                        selectivity: libm::pow(10.0, rng.random_range(-4.0..0.0)),
                    })
                    .collect();
                let reductions: Vec<f64> =
                    (0..TABLES - 1).map(|_| rng.random_range(0.1..1.0)).collect();
                let jitter: Vec<Vec<f64>> = configs
                    .iter()
                    .map(|_| {
                        (0..TABLES - 1)
                            .map(|_| 1.0 + rng.random_range(-JITTER..JITTER))
                            .collect()
                    })
                    .collect();
                let plans = configs
                    .iter()
                    .zip(&jitter)
                    .map(|(c, j)| build_plan(&query, c, &tables, &reductions, j, &gt, &optimizer))
                    .collect::<Result<Vec<_>, _>>()?;
                if spread_ratio(&plans, &backbone)? >= MIN_ETA {
                    accepted = Some(plans);
                    break;
                }
            }
            let plans = accepted.expect("suite query redraws exhausted");
            for (c, p) in configs.iter().zip(plans) {
                oracle.insert(c.id(), p);
            }
            queries.push(query);
        }
        Ok(TuningSuite {
            queries,
            base,
            nested,
            oracle,
        })
    }

    /// The base configuration followed by the nested chain.
    pub fn candidates(&self) -> Vec<IndexConfiguration> {
        core::iter::once(self.base.clone())
            .chain(self.nested.iter().cloned())
            .collect()
    }

    /// Feedback from executing every what-if plan.
    pub fn feedback(&self, backbone: Backbone) -> FeedbackStore {
        let mut store = FeedbackStore::new(backbone);
        for p in self.oracle.plans() {
            store.ingest(p);
        }
        store
    }

    /// Tunes every query starting from [`TuningSuite::base`].
    pub fn tune(&self, estimator: &Estimator<'_>, tau: f64) -> Result<Vec<TuningOutcome>, TuningError> {
        tune_all(&self.queries, &self.candidates(), &self.base, &self.oracle, estimator, tau)
    }

    /// Pearson correlation between estimated and actual cost over all what-if plans.
    pub fn cost_correlation(&self, estimator: &Estimator<'_>) -> Result<f64, TuningError> {
        let mut est = Vec::with_capacity(self.oracle.len());
        let mut act = Vec::with_capacity(self.oracle.len());
        for p in self.oracle.plans() {
            est.push(estimator.plan_cost(p)?);
            act.push(p.actual_total_cost()?);
        }
        stats::pearson(&est, &act).map_err(|_| TuningError::NoOutcomes)
    }

    /// `sigma_L / sigma_I` of each query across its candidate configurations.
    pub fn eta_per_query(&self, backbone: &Backbone) -> Result<Vec<f64>, TuningError> {
        let candidates = self.candidates();
        self.queries
            .iter()
            .map(|q| {
                let plans = candidates
                    .iter()
                    .map(|c| self.oracle.plan(q, c.id()).cloned())
                    .collect::<Result<Vec<_>, _>>()?;
                spread_ratio(&plans, backbone)
            })
            .collect()
    }

    /// Copy with every optimizer cost multiplied by `k`.
    pub fn scale_optimizer_costs(&self, k: f64) -> Result<TuningSuite, TuningError> {
        Ok(TuningSuite {
            oracle: self.oracle.scale_optimizer_costs(k)?,
            ..self.clone()
        })
    }
}

fn spread_ratio(plans: &[QueryPlan], backbone: &Backbone) -> Result<f64, TuningError> {
    let mut l = Vec::with_capacity(plans.len());
    let mut i = Vec::with_capacity(plans.len());
    for p in plans {
        l.push(p.actual_leaf_cost(backbone)?);
        i.push(p.actual_internal_cost(backbone)?);
    }
    Ok(stats::std_dev(&l) / stats::std_dev(&i))
}

fn build_plan(
    query: &str,
    config: &IndexConfiguration,
    tables: &[Table],
    reductions: &[f64],
    jitter: &[f64],
    gt: &GroundTruth,
    optimizer: &OptimizerCostModel,
) -> Result<QueryPlan, TuningError> {
    let joins = TABLES - 1;
    let mut operators = Vec::with_capacity(TABLES + joins);
    let mut leaf_out = Vec::with_capacity(TABLES);

    // Leaves take ids joins+1..; table j is scanned by leaf joins+1+j.
    for (j, t) in tables.iter().enumerate() {
        let qualifying = t.rows * t.selectivity;
        let (kind, card_in) = if config.contains(&format!("i{}", j + 1)) {
            (OperatorKind::IndexSeek, qualifying)
        } else {
            (OperatorKind::TableScan, t.rows)
        };
        let features = FeatureVector::estimated(card_in, qualifying);
        let act = gt.cost(&kind, &features).expect("suite kinds have ground truth");
        let mut op = PlanOperator::new((joins + 1 + j) as u64, kind.clone(), optimizer.cost(&kind, qualifying))
            .with_act_cost(act)
            .with_cards(card_in, qualifying);
        op.act_card_in = Some(card_in);
        op.act_card_out = Some(qualifying);
        operators.push(op);
        leaf_out.push(qualifying);
    }

    // Left-deep chain: join m (id m+1) joins join m+1 with one table; the
    // deepest join takes the first two tables.
    let mut below = leaf_out[0];
    let mut chain = Vec::with_capacity(joins);
    for m in (0..joins).rev() {
        let table = joins - m;
        let card_in = below + leaf_out[table];
        let card_out = card_in * reductions[m];
        let mut children = Vec::with_capacity(2);
        if m + 1 < joins {
            children.push((m + 2) as u64);
        } else {
            children.push((joins + 1) as u64);
        }
        children.push((joins + 1 + table) as u64);
        let kind = OperatorKind::HashJoin;
        let features = FeatureVector::estimated(card_in, card_out);
        let act = gt.cost(&kind, &features).expect("suite kinds have ground truth") * jitter[m];
        let mut op = PlanOperator::new((m + 1) as u64, kind.clone(), optimizer.cost(&kind, card_out))
            .with_act_cost(act)
            .with_cards(card_in, card_out)
            .with_children(children);
        op.act_card_in = Some(card_in);
        op.act_card_out = Some(card_out);
        chain.push(op);
        below = card_out;
    }
    chain.reverse();
    chain.extend(operators);
    Ok(QueryPlan::new(query, 1.0, 1, chain)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shape() {
        let s = TuningSuite::generate(SuiteParams {
            n_queries: 5,
            seed: 3,
        })
        .unwrap();
        assert_eq!(s.oracle.len(), 30);
        assert_eq!(s.candidates().len(), 6);
        let p = s.oracle.plan("q000", "I5").unwrap();
        assert_eq!(p.operators().len(), 9);
        let seeks = p
            .operators()
            .iter()
            .filter(|o| o.kind == OperatorKind::IndexSeek)
            .count();
        assert_eq!(seeks, 5);
        assert!(s.eta_per_query(&Backbone::leaves()).unwrap().iter().all(|e| *e >= MIN_ETA));
    }

    #[test]
    fn suite_is_deterministic() {
        let a = TuningSuite::generate(SuiteParams { n_queries: 4, seed: 9 }).unwrap();
        let b = TuningSuite::generate(SuiteParams { n_queries: 4, seed: 9 }).unwrap();
        assert_eq!(a, b);
    }
}
