//! Seeded synthetic workloads.
//!
//! [`synth_triples`] draws `(L, I, I')` per query with a chosen correlation
//! structure and sets `L' = lambda * L`. [`synth_plans`] builds full annotated
//! plans whose actual costs come from a known [`GroundTruth`].
//!
//! Every query draws from its own ChaCha8 stream (`seed`, stream = query
//! index), so outputs depend only on the seed and the query position.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::analysis::{QueryDecomposition, WorkloadDecomposition};
use crate::feedback::FeatureVector;
use crate::kind::OperatorKind;
use crate::math;
use crate::model::{feature_map, FEATURES};
use crate::plan::{OperatorId, PlanOperator, QueryPlan};

// Attempts per query before giving up on rejection sampling.
const MAX_ATTEMPTS_PER_QUERY: usize = 10_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid spec: {0}")]
    InvalidSpec(&'static str),
    #[error("correlation matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("rejection rate above 50% ({rejected} rejected, {accepted} accepted); means are too small for the spreads")]
    RejectionRate { rejected: usize, accepted: usize },
    #[error("no ground-truth coefficients for {0}")]
    MissingKind(OperatorKind),
    #[error(transparent)]
    Plan(#[from] crate::plan::PlanError),
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Target statistics for [`synth_triples`]; component order is `(L, I, I')`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SynthSpec {
    pub n_queries: usize,
    pub corr: [[f64; 3]; 3],
    pub means: [f64; 3],
    pub sds: [f64; 3],
    pub seed: u64,
}

impl SynthSpec {
    /// Spec with target correlations `alpha = rho(L, I)`, `beta = rho(L, I')`, `gamma = rho(I, I')`.
    pub fn with_correlations(
        n_queries: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
        means: [f64; 3],
        sds: [f64; 3],
        seed: u64,
    ) -> Self {
        SynthSpec {
            n_queries,
            corr: [[1.0, alpha, beta], [alpha, 1.0, gamma], [beta, gamma, 1.0]],
            means,
            sds,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_queries < 2 {
            return Err(SynthError::InvalidSpec("n_queries must be at least 2"));
        }
        for i in 0..3 {
            if self.corr[i][i] != 1.0 {
                return Err(SynthError::InvalidSpec("correlation diagonal must be 1"));
            }
            for j in 0..3 {
                let v = self.corr[i][j];
                if !(v.is_finite() && (-1.0..=1.0).contains(&v)) {
                    return Err(SynthError::InvalidSpec("correlations must lie in [-1, 1]"));
                }
                if v != self.corr[j][i] {
                    return Err(SynthError::InvalidSpec("correlation matrix must be symmetric"));
                }
            }
            if !(self.means[i].is_finite() && self.means[i] > 0.0) {
                return Err(SynthError::InvalidSpec("means must be positive"));
            }
            if !(self.sds[i].is_finite() && self.sds[i] >= 0.0) {
                return Err(SynthError::InvalidSpec("standard deviations must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Lower-triangular `F` with `F F^T = m`; semidefinite input gives zero columns.
pub fn cholesky_psd(m: &[[f64; 3]; 3]) -> Result<[[f64; 3]; 3], SynthError> {
    const TOL: f64 = 1e-10;
    let mut f = [[0.0; 3]; 3];
    for j in 0..3 {
        let d = m[j][j] - (0..j).map(|k| f[j][k] * f[j][k]).sum::<f64>();
        if d < -TOL {
            return Err(SynthError::NotPositiveSemidefinite);
        }
        let pivot = if d > TOL { math::sqrt(d) } else { 0.0 };
        f[j][j] = pivot;
        for i in j + 1..3 {
            let r = m[i][j] - (0..j).map(|k| f[i][k] * f[j][k]).sum::<f64>();
            if pivot == 0.0 {
                if math::abs(r) > 1e-8 {
                    return Err(SynthError::NotPositiveSemidefinite);
                }
            } else {
                f[i][j] = r / pivot;
            }
        }
    }
    Ok(f)
}

/// Correlated positive triples with `L' = lambda * L`.
///
/// Draws rejected for a negative component are redrawn from the same
/// per-query stream. Fails if more draws are rejected than accepted.
pub fn synth_triples(spec: &SynthSpec, lambda: f64) -> Result<WorkloadDecomposition, SynthError> {
    spec.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(SynthError::InvalidSpec("lambda must be positive"));
    }
    let f = cholesky_psd(&spec.corr)?;
    let mut rejected = 0usize;
    let mut queries = Vec::with_capacity(spec.n_queries);
    for k in 0..spec.n_queries {
        let mut rng = rng_for(spec.seed, k as u64);
        let mut attempts = 0;
        let x = loop {
            let z: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            let mut x = [0.0; 3];
            for i in 0..3 {
                let correlated: f64 = (0..=i).map(|j| f[i][j] * z[j]).sum();
                x[i] = spec.means[i] + spec.sds[i] * correlated;
            }
            if x.iter().all(|v| *v >= 0.0) {
                break x;
            }
            rejected += 1;
            attempts += 1;
            if rejected > spec.n_queries || attempts >= MAX_ATTEMPTS_PER_QUERY {
                return Err(SynthError::RejectionRate {
                    rejected,
                    accepted: k,
                });
            }
        };
        queries.push(QueryDecomposition {
            query_id: format!("q{k}"),
            leaf: x[0],
            internal: x[1],
            est_leaf: lambda * x[0],
            est_internal: x[2],
        });
    }
    Ok(WorkloadDecomposition {
        queries,
        lambda: Some(lambda),
    })
}

/// True per-kind cost functions over the model feature basis, in milliseconds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GroundTruth {
    pub coefficients: BTreeMap<OperatorKind, [f64; FEATURES]>,
    pub noise_sd: f64,
}

impl GroundTruth {
    /// Cost functions for every named kind.
    pub fn standard(noise_sd: f64) -> Self {
        use OperatorKind::*;
        let coefficients = [
            (TableScan, [2.0, 0.0005, 0.002, 0.0]),
            (IndexScan, [1.0, 0.001, 0.0015, 0.0]),
            (IndexSeek, [0.5, 0.0005, 0.0, 0.004]),
            (Filter, [0.2, 0.0, 0.0002, 0.0]),
            (Sort, [0.5, 0.0, 0.0, 0.0003]),
            (HashJoin, [1.0, 0.0002, 0.0008, 0.0]),
            (NestedLoopJoin, [0.5, 0.0001, 0.002, 0.0]),
            (MergeJoin, [0.8, 0.0002, 0.0005, 0.0]),
            (Aggregate, [0.3, 0.0001, 0.0004, 0.0]),
        ]
        .into_iter()
        .collect();
        GroundTruth {
            coefficients,
            noise_sd,
        }
    }

    /// Nonnegative coefficients keep costs nonnegative for any nonnegative cardinalities.
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(SynthError::InvalidSpec("noise_sd must be nonnegative"));
        }
        if self
            .coefficients
            .values()
            .flatten()
            .any(|c| !(c.is_finite() && *c >= 0.0))
        {
            return Err(SynthError::InvalidSpec("ground-truth coefficients must be nonnegative"));
        }
        Ok(())
    }

    /// Noiseless cost of `kind` at the given cardinalities.
    pub fn cost(&self, kind: &OperatorKind, features: &FeatureVector) -> Result<f64, SynthError> {
        let c = self
            .coefficients
            .get(kind)
            .ok_or_else(|| SynthError::MissingKind(kind.clone()))?;
        let x = feature_map(features);
        Ok(c.iter().zip(&x).map(|(a, b)| a * b).sum())
    }
}

/// Optimizer emulation: `opt = 100 * (c0 + c1 * C_out)` in abstract units.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerCostModel {
    pub coefficients: BTreeMap<OperatorKind, [f64; 2]>,
    pub fallback: [f64; 2],
}

impl OptimizerCostModel {
    pub const UNIT_FACTOR: f64 = 100.0;

    pub fn standard() -> Self {
        use OperatorKind::*;
        let coefficients = [
            (TableScan, [1.0, 0.001]),
            (IndexScan, [0.8, 0.0008]),
            (IndexSeek, [0.5, 0.0005]),
            (Filter, [0.1, 0.0001]),
            (Sort, [0.5, 0.0004]),
            (HashJoin, [0.5, 0.0002]),
            (NestedLoopJoin, [0.3, 0.0005]),
            (MergeJoin, [0.4, 0.0002]),
            (Aggregate, [0.2, 0.0001]),
        ]
        .into_iter()
        .collect();
        OptimizerCostModel {
            coefficients,
            fallback: [1.0, 0.001],
        }
    }

    pub fn cost(&self, kind: &OperatorKind, est_card_out: f64) -> f64 {
        let [c0, c1] = self.coefficients.get(kind).copied().unwrap_or(self.fallback);
        Self::UNIT_FACTOR * (c0 + c1 * est_card_out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanShape {
    pub leaves_per_plan: usize,
    pub internals_per_plan: usize,
}

impl PlanShape {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.leaves_per_plan == 0 {
            return Err(SynthError::InvalidSpec("plans need at least one leaf"));
        }
        if self.internals_per_plan == 0 && self.leaves_per_plan != 1 {
            return Err(SynthError::InvalidSpec(
                "a plan without internal operators has exactly one leaf",
            ));
        }
        Ok(())
    }
}

/// Parameters for [`synth_plans`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanSynth {
    pub n_queries: usize,
    pub ground_truth: GroundTruth,
    pub shape: PlanShape,
    /// Leaf input cardinalities are drawn uniformly from this range.
    pub card_range: (f64, f64),
    pub optimizer: OptimizerCostModel,
    pub seed: u64,
}

const LEAF_KINDS: [OperatorKind; 3] = [
    OperatorKind::TableScan,
    OperatorKind::IndexScan,
    OperatorKind::IndexSeek,
];
const JOIN_KINDS: [OperatorKind; 3] = [
    OperatorKind::HashJoin,
    OperatorKind::NestedLoopJoin,
    OperatorKind::MergeJoin,
];
const UNARY_KINDS: [OperatorKind; 3] = [
    OperatorKind::Filter,
    OperatorKind::Sort,
    OperatorKind::Aggregate,
];

/// Full plans with actual costs drawn from the ground truth.
///
/// Internal operators form a chain from the root down; leaves hang off the
/// chain, deepest operator first. Estimated and actual cardinalities agree.
/// `act_cost = truth + N(0, noise_sd)`, clamped at zero.
pub fn synth_plans(params: &PlanSynth) -> Result<Vec<QueryPlan>, SynthError> {
    params.shape.validate()?;
    params.ground_truth.validate()?;
    let (lo, hi) = params.card_range;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(SynthError::InvalidSpec("card_range must satisfy 0 < lo <= hi"));
    }
    (0..params.n_queries)
        .map(|k| synth_plan(params, k))
        .collect()
}

fn synth_plan(params: &PlanSynth, k: usize) -> Result<QueryPlan, SynthError> {
    let mut rng = rng_for(params.seed, k as u64);
    let (lo, hi) = params.card_range;
    let m = params.shape.internals_per_plan;
    let n = params.shape.leaves_per_plan;

    // Children of internal operator j (ids 1..=m); leaves have ids m+1..=m+n.
    let mut children: Vec<Vec<OperatorId>> = (0..m)
        .map(|j| if j + 1 < m { alloc::vec![j as u64 + 2] } else { Vec::new() })
        .collect();
    for i in 0..n {
        if m > 0 {
            children[m - 1 - i % m].push((m + 1 + i) as u64);
        }
    }

    let mut leaves = Vec::with_capacity(n);
    for i in 0..n {
        let kind = LEAF_KINDS[rng.random_range(0..LEAF_KINDS.len())].clone();
        let card_in = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        let card_out = card_in * rng.random_range(0.01..=1.0);
        leaves.push(((m + 1 + i) as u64, kind, card_in, card_out, Vec::new()));
    }

    // Internal cardinalities bottom-up: input is the sum of child outputs.
    let mut out_card: BTreeMap<OperatorId, f64> =
        leaves.iter().map(|l| (l.0, l.3)).collect();
    let mut internals = Vec::with_capacity(m);
    for j in (0..m).rev() {
        let id = j as u64 + 1;
        let kids = children[j].clone();
        let card_in: f64 = kids.iter().map(|c| out_card[c]).sum();
        let card_out = card_in * rng.random_range(0.1..=1.0);
        let pool = if kids.len() >= 2 { &JOIN_KINDS } else { &UNARY_KINDS };
        let kind = pool[rng.random_range(0..pool.len())].clone();
        out_card.insert(id, card_out);
        internals.push((id, kind, card_in, card_out, kids));
    }
    internals.reverse();

    let mut operators = Vec::with_capacity(m + n);
    for (id, kind, card_in, card_out, kids) in internals.into_iter().chain(leaves) {
        let features = FeatureVector::estimated(card_in, card_out);
        let truth = params.ground_truth.cost(&kind, &features)?;
        let noise: f64 = if params.ground_truth.noise_sd > 0.0 {
            params.ground_truth.noise_sd * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let mut op = PlanOperator::new(id, kind.clone(), params.optimizer.cost(&kind, card_out))
            .with_act_cost((truth + noise).max(0.0))
            .with_cards(card_in, card_out)
            .with_children(kids);
        op.act_card_in = Some(card_in);
        op.act_card_out = Some(card_out);
        operators.push(op);
    }
    Ok(QueryPlan::new(format!("q{k}"), 1.0, 1, operators)?)
}
