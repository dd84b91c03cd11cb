//! Datasets, structure-disjoint folds, metrics and the benchmark driver.

mod benchmark;
mod dataset;
mod folds;
mod metrics;

pub use benchmark::{
    evaluate_folds, run_benchmark, score_record, score_records, BenchmarkConfig, BenchmarkReport, FoldReport,
    Observation, Prediction, RecordFailure,
};
pub use dataset::{
    csv_reader, load_dataset, parse_dataset, Dataset, DatasetRecord, Rejected, StructureStore, LABEL_COLUMN,
    REQUIRED_COLUMNS,
};
pub use folds::{make_folds, FoldAssignment};
pub use metrics::{
    auroc, average_ranks, minimized_rmse_mae, pearson, per_structure_metrics, spearman, GroupCorrelation,
    MetricsReport, PerStructure,
};
