//! Navigation and aggregate performance metrics over evaluation trials.

mod aggregate;
mod navigation;
mod report;

pub use aggregate::{
    iqm, normalize_scores, performance_profile, probability_of_improvement, quantile_sorted, stratified_bootstrap,
    stratified_bootstrap_ci, stratified_bootstrap_ci_vec,
};
pub use navigation::{dts, shortest_path, spl, success_rate, trial_dts, TrialRecord};
pub use report::{build_report, reference_score, MetricReport, PoiRow, ProfileRow, ReportOptions, SummaryRow};
