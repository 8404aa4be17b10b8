//! Validation statistics: correlation, Ward clustering, rank-versus-accuracy
//! validation and baseline comparisons.

mod stats;
mod validation;
mod ward;

pub use stats::{bootstrap_mean_ci, mean, pearson};
pub use validation::{
    baseline_report, rank_validation, trial_palettes, GroupSummary, PaletteScorer, RankPoint, RankValidationConfig,
    RankValidationReport,
};
pub use ward::{ward_cluster, ClusterResult, Merge};
