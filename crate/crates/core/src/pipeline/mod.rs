//! Scene initialization, training, the acquisition loop and evaluation.

mod config;
mod eval;
mod experiment;
mod init;
mod report;
mod train;

pub use config::{ExperimentConfig, StageConfig, ViewSpec};
pub use eval::{closest_perceived_distribution, wasserstein2};
pub use experiment::{
    evaluate_scene, finish, run_experiment, CapturedView, ExperimentReport, RiskSnapshot, RoundPlan, Selection, Session,
    UncertaintyPoint, WaypointMetric,
};
pub use init::{unproject_init, unproject_uncovered};
pub use report::{
    emit_report, metrics_csv, parse_metrics_csv, risk_history_csv, uncertainty_csv, ParsedMetrics,
};
pub use train::{total_loss, train_scene, Observation, TrainConfig, Trainer};
