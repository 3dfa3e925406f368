//! Evaluation: TREC metrics, paired t-tests, fold plans and interpolation
//! tuning by cross-validation.

mod cv;
mod folds;
mod metrics;
mod qrels;
mod ttest;

pub use cv::{
    cross_validate, grid_search, CandidateRuns, CvReport, FoldOutcome, GridCell, GridChoice,
    PrecomputedGrid, GRID_TENTHS,
};
pub use folds::{FoldPlan, FoldRoles, NUM_FOLDS};
pub use metrics::{
    average_precision_at_k, evaluate, ndcg_at_k, precision_at_k, Metric, MetricReport,
};
pub use qrels::{Judgments, Qrels};
pub use ttest::{paired_ttest, TTest};
