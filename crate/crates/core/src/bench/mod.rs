//! Benchmark dataset loading, statistics, evaluation and reports.

mod dataset;
mod evaluate;
mod report;
mod stats;

pub use dataset::{
    copy_predictions, load_dataset, load_predictions, parse_dataset, parse_predictions, CopyMode, Prediction,
    RewriteExample,
};
pub use evaluate::{evaluate, EvalOptions, EvalRow, Evaluation, ExampleDetail, HALLUCINATION_EDIT_RATIO};
pub use report::{emit_report, render_details, render_report, render_stats, ReportFormat};
pub use stats::{dataset_stats, DatasetStats, StatsRow};
