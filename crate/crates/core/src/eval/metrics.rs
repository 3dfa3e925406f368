use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::qrels::{Judgments, Qrels};
use crate::error::Error;
use crate::run::{RankedList, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Precision(usize),
    Ndcg(usize),
    Map(usize),
}

impl Metric {
    /// P@20, NDCG@20, MAP@100, MAP@1000.
    pub fn standard() -> Vec<Metric> {
        vec![
            Metric::Precision(20),
            Metric::Ndcg(20),
            Metric::Map(100),
            Metric::Map(1000),
        ]
    }

    pub fn cutoff(&self) -> usize {
        match *self {
            Metric::Precision(k) | Metric::Ndcg(k) | Metric::Map(k) => k,
        }
    }

    pub fn compute(&self, list: &RankedList, judged: &Judgments) -> f64 {
        match *self {
            Metric::Precision(k) => precision_at_k(list, judged, k),
            Metric::Ndcg(k) => ndcg_at_k(list, judged, k),
            Metric::Map(k) => average_precision_at_k(list, judged, k),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Precision(k) => write!(f, "P@{k}"),
            Metric::Ndcg(k) => write!(f, "NDCG@{k}"),
            Metric::Map(k) => write!(f, "MAP@{k}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    /// Accepts `P@20`, `ndcg@20`, `map@1000` and the trec_eval spellings
    /// `P_20`, `ndcg_cut_20`, `map_cut_100`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidParameter(format!("unknown metric `{s}`"));
        let lower = s.trim().to_ascii_lowercase();
        let (name, k) = lower
            .split_once('@')
            .or_else(|| lower.rsplit_once('_'))
            .ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(Error::InvalidParameter(format!("metric cutoff must be positive in `{s}`")));
        }
        match name {
            "p" => Ok(Metric::Precision(k)),
            "ndcg" | "ndcg_cut" => Ok(Metric::Ndcg(k)),
            "map" | "map_cut" => Ok(Metric::Map(k)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Metric {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn grade(judged: &Judgments, doc_id: &str) -> u32 {
    judged.get(doc_id).copied().unwrap_or(0)
}

/// Relevant documents in the top k, divided by k.
pub fn precision_at_k(list: &RankedList, judged: &Judgments, k: usize) -> f64 {
    assert!(k >= 1, "cutoff must be positive");
    let hits = list
        .doc_ids()
        .take(k)
        .filter(|d| grade(judged, d) > 0)
        .count();
    hits as f64 / k as f64
}

/// Linear-gain NDCG; 0 when the query has no relevant documents.
pub fn ndcg_at_k(list: &RankedList, judged: &Judgments, k: usize) -> f64 {
    assert!(k >= 1, "cutoff must be positive");
    let discount = |i: usize| 1.0 / ((i + 2) as f64).log2();
    let dcg: f64 = list
        .doc_ids()
        .take(k)
        .enumerate()
        .map(|(i, d)| grade(judged, d) as f64 * discount(i))
        .sum();
    let mut ideal: Vec<u32> = judged.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| g as f64 * discount(i))
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// Average precision over the top k, normalised by every relevant document
/// in the judgments (including those ranked below k or not retrieved).
pub fn average_precision_at_k(list: &RankedList, judged: &Judgments, k: usize) -> f64 {
    assert!(k >= 1, "cutoff must be positive");
    let total = judged.values().filter(|&&g| g > 0).count();
    if total == 0 {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, d) in list.doc_ids().take(k).enumerate() {
        if grade(judged, d) > 0 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / total as f64
}

/// Per-query values and means over queries that have judgments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub metrics: Vec<Metric>,
    /// Query id to one value per metric, in `metrics` order.
    pub per_query: BTreeMap<String, Vec<f64>>,
    pub means: Vec<f64>,
    /// Queries in the run without any judgments.
    pub skipped: Vec<String>,
}

impl MetricReport {
    pub fn num_queries(&self) -> usize {
        self.per_query.len()
    }

    fn position(&self, metric: Metric) -> Option<usize> {
        self.metrics.iter().position(|&m| m == metric)
    }

    pub fn mean(&self, metric: Metric) -> Option<f64> {
        self.position(metric).map(|i| self.means[i])
    }

    /// Per-query values of one metric, ordered by query id.
    pub fn values(&self, metric: Metric) -> Option<BTreeMap<&str, f64>> {
        let i = self.position(metric)?;
        Some(
            self.per_query
                .iter()
                .map(|(q, v)| (q.as_str(), v[i]))
                .collect(),
        )
    }

    /// Builds a report from already computed per-query rows.
    pub fn from_rows(
        metrics: Vec<Metric>,
        per_query: BTreeMap<String, Vec<f64>>,
        skipped: Vec<String>,
    ) -> Self {
        let n = per_query.len();
        let means = (0..metrics.len())
            .map(|i| {
                if n == 0 {
                    0.0
                } else {
                    per_query.values().map(|v| v[i]).sum::<f64>() / n as f64
                }
            })
            .collect();
        Self {
            metrics,
            per_query,
            means,
            skipped,
        }
    }

    /// trec_eval-style text: `metric<TAB>query<TAB>value`, then `all` rows.
    pub fn to_text(&self, per_query: bool) -> String {
        let mut out = String::new();
        if per_query {
            for (q, vals) in &self.per_query {
                for (m, v) in self.metrics.iter().zip(vals) {
                    out.push_str(&format!("{m}\t{q}\t{v:.4}\n"));
                }
            }
        }
        for (m, v) in self.metrics.iter().zip(&self.means) {
            out.push_str(&format!("{m}\tall\t{v:.4}\n"));
        }
        out.push_str(&format!("num_q\tall\t{}\n", self.num_queries()));
        out
    }
}

/// Evaluates every query of `run` that has judgments.
pub fn evaluate(run: &Run, qrels: &Qrels, metrics: &[Metric]) -> MetricReport {
    let mut per_query = BTreeMap::new();
    let mut skipped = Vec::new();
    for list in run.lists() {
        match qrels.get(&list.query_id) {
            Some(judged) => {
                let row = metrics.iter().map(|m| m.compute(list, judged)).collect();
                per_query.insert(list.query_id.clone(), row);
            }
            None => skipped.push(list.query_id.clone()),
        }
    }
    MetricReport::from_rows(metrics.to_vec(), per_query, skipped)
}
