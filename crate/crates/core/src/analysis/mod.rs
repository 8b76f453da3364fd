//! Workload-level correlation analysis.

pub mod bounds;
pub mod curves;
pub mod decomposition;
pub mod stats;

pub use decomposition::{
    decompose, stats, CorrelationStats, QueryDecomposition, WorkloadDecomposition,
};
pub use stats::{pearson, spearman, StatsError};
