//! Benchmark problems, designs, metrics and the repeated-experiment runner.

mod experiment;
mod lhs;
mod metrics;
mod problems;

pub use experiment::*;
pub use lhs::{lhs_sample, scale_to_bounds};
pub use metrics::{boxplot_stats, improvement, quantile_sorted, validation_points, validation_rmse, BoxplotStats};
pub use problems::*;
