use serde::{Deserialize, Serialize};

use super::{combine, effective_alpha, interpolate_initial, Ablation, ChunkSet};
use crate::run::RankedList;
use crate::scorer::Probability;

/// Intermediate scores of one candidate document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocTrace {
    pub doc_id: String,
    pub initial_rank: usize,
    /// I(q, d)
    pub initial_score: f64,
    /// Phase-one MaxP score.
    pub rel_qd: f64,
    /// Chunk-evidence score.
    pub rel_cd: f64,
}

impl DocTrace {
    pub fn final_score(&self, alpha: f64, beta: f64) -> f64 {
        let model = Probability::new(combine(self.rel_qd, self.rel_cd, alpha));
        interpolate_initial(model, self.initial_score, beta)
    }
}

/// Everything computed for one query. The final ranking for any (alpha, beta)
/// can be recomputed from it without calling a scorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryTrace {
    pub query_id: String,
    pub ablation: Ablation,
    /// Effective alpha (1 under `remove_qd`).
    pub alpha: f64,
    pub beta: f64,
    /// Every phase-one score was identical.
    pub degenerate_phase_one: bool,
    pub feedback_docs: Vec<String>,
    pub chunks: ChunkSet,
    /// Candidates in initial-run order.
    pub docs: Vec<DocTrace>,
}

impl QueryTrace {
    pub fn ranking(&self) -> RankedList {
        self.rerank(self.alpha, self.beta)
    }

    /// Final ranking at `alpha`, `beta`; ties keep initial-run order.
    pub fn rerank(&self, alpha: f64, beta: f64) -> RankedList {
        let alpha = effective_alpha(self.ablation, alpha);
        let mut docs: Vec<&DocTrace> = self.docs.iter().collect();
        docs.sort_by_key(|d| d.initial_rank);
        RankedList::from_scores_stable(
            self.query_id.clone(),
            docs.into_iter()
                .map(|d| (d.doc_id.clone(), d.final_score(alpha, beta)))
                .collect(),
        )
    }

    /// Phase-one ranking reconstructed from the trace.
    pub fn phase_one(&self) -> RankedList {
        let mut docs: Vec<&DocTrace> = self.docs.iter().collect();
        docs.sort_by_key(|d| d.initial_rank);
        RankedList::from_scores_stable(
            self.query_id.clone(),
            docs.into_iter().map(|d| (d.doc_id.clone(), d.rel_qd)).collect(),
        )
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace serialises")
    }
}
