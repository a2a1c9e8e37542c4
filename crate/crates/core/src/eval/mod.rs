//! Cross-validation, pooled metrics and the two-proportion z test.

mod cv;
mod folds;
mod metrics;
mod stats;

pub use cv::{run_cv, run_cv_merged, CvConfig, FoldResult, MetricsReport, OutOfFold, Summary};
pub use folds::{stratified_kfold, FoldPlan};
pub use metrics::{auc, confusion, metrics, roc_points, ConfusionCounts, Metric, Rates};
pub use stats::{p_from_z, two_proportion_ztest, ZTest};
