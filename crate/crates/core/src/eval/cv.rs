use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::{FoldPlan, NUM_FOLDS};
use super::metrics::{Metric, MetricReport};
use super::qrels::Qrels;
use crate::error::{Error, Result};
use crate::run::{RankedList, Run};

/// Grid values in tenths: 0.1 ..= 0.9.
pub const GRID_TENTHS: std::ops::RangeInclusive<u8> = 1..=9;

/// One (alpha, beta) grid point, stored in tenths so it orders and hashes exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridCell {
    pub alpha_tenths: u8,
    pub beta_tenths: u8,
}

impl GridCell {
    pub fn new(alpha_tenths: u8, beta_tenths: u8) -> Self {
        Self { alpha_tenths, beta_tenths }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_tenths as f64 / 10.0
    }

    pub fn beta(&self) -> f64 {
        self.beta_tenths as f64 / 10.0
    }

    /// All 81 cells, alpha-major ascending.
    pub fn grid() -> Vec<GridCell> {
        GRID_TENTHS
            .flat_map(|a| GRID_TENTHS.map(move |b| GridCell::new(a, b)))
            .collect()
    }
}

/// Anything that can produce a ranking for a query at a given (alpha, beta).
pub trait CandidateRuns: Sync {
    fn ranking(&self, query_id: &str, alpha: f64, beta: f64) -> Option<RankedList>;
}

/// A fixed run per grid cell.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedGrid {
    pub runs: BTreeMap<GridCell, Run>,
}

impl CandidateRuns for PrecomputedGrid {
    fn ranking(&self, query_id: &str, alpha: f64, beta: f64) -> Option<RankedList> {
        let cell = GridCell::new((alpha * 10.0).round() as u8, (beta * 10.0).round() as u8);
        self.runs.get(&cell)?.get(query_id).cloned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub cell: GridCell,
    /// Mean of the tuning metric over the evaluated queries.
    pub score: f64,
}

fn mean_metric(
    candidates: &dyn CandidateRuns,
    query_ids: &[String],
    qrels: &Qrels,
    metric: Metric,
    cell: GridCell,
) -> Option<f64> {
    let values: Vec<f64> = query_ids
        .iter()
        .filter_map(|q| {
            let judged = qrels.get(q)?;
            let list = candidates.ranking(q, cell.alpha(), cell.beta())?;
            Some(metric.compute(&list, judged))
        })
        .collect();
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Best cell by mean `metric` over `query_ids`; ties go to the smaller alpha,
/// then the smaller beta.
pub fn grid_search(
    candidates: &dyn CandidateRuns,
    query_ids: &[String],
    qrels: &Qrels,
    metric: Metric,
) -> Result<GridChoice> {
    let cells = GridCell::grid();
    let scores: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&cell| mean_metric(candidates, query_ids, qrels, metric, cell))
        .collect();
    let mut best: Option<GridChoice> = None;
    for (cell, score) in cells.into_iter().zip(scores) {
        let Some(score) = score else {
            return Err(Error::Empty("validation queries with judgments and rankings".into()));
        };
        if best.is_none_or(|b| score > b.score) {
            best = Some(GridChoice { cell, score });
        }
    }
    best.ok_or_else(|| Error::Empty("interpolation grid".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub validation_fold: usize,
    pub choice: GridChoice,
    /// Test-fold metrics at the chosen cell.
    pub test: MetricReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub tuning_metric: Metric,
    pub folds: Vec<FoldOutcome>,
    /// Every test query pooled into one report.
    pub pooled: MetricReport,
    /// The concatenated test rankings.
    #[serde(skip)]
    pub run: Run,
}

impl CvReport {
    /// One row per fold: fold, test metrics, chosen alpha and beta.
    pub fn to_text(&self) -> String {
        let metrics = &self.pooled.metrics;
        let mut out = String::from("fold");
        for m in metrics {
            out.push_str(&format!("\t{m}"));
        }
        out.push_str(&format!("\talpha\tbeta\tvalid_{}\n", self.tuning_metric));
        for f in &self.folds {
            out.push_str(&f.fold.to_string());
            for v in &f.test.means {
                out.push_str(&format!("\t{v:.4}"));
            }
            out.push_str(&format!(
                "\t{:.1}\t{:.1}\t{:.4}\n",
                f.choice.cell.alpha(),
                f.choice.cell.beta(),
                f.choice.score
            ));
        }
        out.push_str("pooled");
        for v in &self.pooled.means {
            out.push_str(&format!("\t{v:.4}"));
        }
        out.push_str(&format!("\t-\t-\t-\nqueries\t{}\n", self.pooled.num_queries()));
        out
    }
}

/// For every fold: tune on its validation fold, then rank its test queries
/// with the chosen cell. Metrics are pooled per query across folds.
pub fn cross_validate(
    candidates: &dyn CandidateRuns,
    plan: &FoldPlan,
    qrels: &Qrels,
    metrics: &[Metric],
    tuning_metric: Metric,
) -> Result<CvReport> {
    let mut folds = Vec::with_capacity(NUM_FOLDS);
    let mut pooled_rows = BTreeMap::new();
    let mut skipped = Vec::new();
    let mut lists = Vec::new();
    for test in 0..NUM_FOLDS {
        let roles = FoldPlan::roles(test);
        let choice = grid_search(candidates, plan.fold(roles.validation), qrels, tuning_metric)
            .map_err(|e| Error::Empty(format!("fold {test}: {e}")))?;
        let mut rows = BTreeMap::new();
        for q in plan.fold(test) {
            let Some(list) = candidates.ranking(q, choice.cell.alpha(), choice.cell.beta()) else {
                skipped.push(q.clone());
                continue;
            };
            match qrels.get(q) {
                Some(judged) => {
                    let row: Vec<f64> = metrics.iter().map(|m| m.compute(&list, judged)).collect();
                    pooled_rows.insert(q.clone(), row.clone());
                    rows.insert(q.clone(), row);
                }
                None => skipped.push(q.clone()),
            }
            lists.push(list);
        }
        folds.push(FoldOutcome {
            fold: test,
            validation_fold: roles.validation,
            choice,
            test: MetricReport::from_rows(metrics.to_vec(), rows, Vec::new()),
        });
    }
    skipped.sort();
    Ok(CvReport {
        tuning_metric,
        folds,
        pooled: MetricReport::from_rows(metrics.to_vec(), pooled_rows, skipped),
        run: Run::new(lists),
    })
}
