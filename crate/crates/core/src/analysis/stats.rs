//! Sample statistics (n - 1 normalisation) and correlation coefficients.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooFew(usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("estimates use different pivots (queries {0} and {1})")]
    InconsistentPivots(alloc::string::String, alloc::string::String),
    #[error("{0} plans but {1} estimates")]
    CountMismatch(usize, usize),
    #[error(transparent)]
    Plan(#[from] crate::plan::PlanError),
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample covariance, two-pass.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = mean(xs);
    let my = mean(ys);
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    s / (xs.len() as f64 - 1.0)
}

pub fn variance(xs: &[f64]) -> f64 {
    covariance(xs, xs)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    math::sqrt(variance(xs))
}

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<(), StatsError> {
    if xs.len() != ys.len() {
        return Err(StatsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(StatsError::TooFew(xs.len()));
    }
    if !xs.iter().all(|v| v.is_finite()) {
        return Err(StatsError::NonFinite("xs"));
    }
    if !ys.iter().all(|v| v.is_finite()) {
        return Err(StatsError::NonFinite("ys"));
    }
    Ok(())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys)?;
    let mx = mean(xs);
    let my = mean(ys);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance("ys"));
    }
    Ok((sxy / (math::sqrt(sxx) * math::sqrt(syy))).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, StatsError> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}
