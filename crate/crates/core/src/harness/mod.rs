//! Experiment harness: datasets, detector drivers, metrics and result files.

pub mod csv_io;
pub mod dataset;
pub mod detect;
pub mod experiment;
pub mod metrics;
pub mod report;

pub use csv_io::{ingest_csv, write_csv, write_schedule_csv, ColumnMapping};
pub use dataset::{Dataset, FeatureScaler, MeasurementStreams, VirtualLink, VnStream};
pub use detect::{detect, detect_pl, detect_pn, quantile, ConvergenceTrace, Detection, Mode, TargetAlarms, Variant};
pub use experiment::{
    bench_plan, emit_bench, evaluate_dataset, run_bench, run_dataset, run_experiment, run_once, BenchEntry,
    ExperimentResult, RunOutcome,
};
pub use metrics::{compute_metrics, f1_score, mean_metrics, score_verdict, ConfusionMatrix, Metrics};
pub use report::{
    emit_results, read_report, Report, RunReport, Series, Summary, TargetReport, REPORT_FILE, REPORT_SCHEMA,
};
