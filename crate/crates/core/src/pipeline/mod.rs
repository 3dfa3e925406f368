//! Three-phase chunk-expansion re-ranking.
//!
//! 1. Phase one re-scores the top `rerank_depth` documents of the initial run
//!    with MaxP over passages.
//! 2. Phase two cuts the top `k_d` phase-one documents into m-word chunks,
//!    scores each chunk against the query and keeps the best `k_c`, weighted by
//!    a softmax over their scores.
//! 3. Phase three scores every candidate document against each kept chunk
//!    (MaxP, chunk as query side), aggregates with the softmax weights, mixes
//!    with the phase-one score by `alpha`, and finally interpolates
//!    `beta * ln(model) + (1 - beta) * initial`.
//!
//! All orderings break ties by the document's rank in the initial run.

mod trace;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use trace::{DocTrace, QueryTrace};

use crate::corpus::{decompose_chunks, Corpus, Document};
use crate::error::Error;
use crate::lexical::Query;
use crate::run::{RankedList, Run};
use crate::scorer::{
    maxp_over_passages, passage_texts, score_document_maxp, Probability, RelevanceScorer,
    ScorePair, ScorerError, SharedScorer,
};

/// Documents scored per scorer call in phases one and three.
const DOC_BATCH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    /// Drop rel(q, d) from the final mix: alpha is forced to 1.
    RemoveQd,
    /// Take feedback chunks from the initial run instead of the phase-one run.
    ChunksFromInitial,
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "none" => Ok(Ablation::None),
            "remove_qd" | "remove-qd" => Ok(Ablation::RemoveQd),
            "chunks_from_initial" | "chunks-from-initial" => Ok(Ablation::ChunksFromInitial),
            other => Err(Error::InvalidParameter(format!("unknown ablation `{other}`"))),
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ablation::None => "none",
            Ablation::RemoveQd => "remove_qd",
            Ablation::ChunksFromInitial => "chunks_from_initial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Feedback documents taken from the top of the phase-one run.
    pub k_d: usize,
    /// Chunks kept for expansion.
    pub k_c: usize,
    /// Chunk length in words.
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub rerank_depth: usize,
    pub ablation: Ablation,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k_d: 10,
            k_c: 10,
            m: 10,
            alpha: 0.4,
            beta: 0.9,
            rerank_depth: 1000,
            ablation: Ablation::None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.k_d < 1 {
            return bad("k_d must be at least 1".into());
        }
        if self.k_c < 1 {
            return bad("k_c must be at least 1".into());
        }
        if self.m < 2 {
            return bad("chunk length m must be at least 2".into());
        }
        if self.rerank_depth < 1 {
            return bad("rerank depth must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta {} outside [0, 1]", self.beta));
        }
        Ok(())
    }

    /// The alpha actually applied, after ablations.
    pub fn effective_alpha(&self) -> f64 {
        effective_alpha(self.ablation, self.alpha)
    }
}

pub(crate) fn effective_alpha(ablation: Ablation, alpha: f64) -> f64 {
    if ablation == Ablation::RemoveQd {
        1.0
    } else {
        alpha
    }
}

/// One scorer per phase; they may all be the same instance.
#[derive(Clone)]
pub struct PhaseScorers {
    pub phase1: SharedScorer,
    pub phase2: SharedScorer,
    pub phase3: SharedScorer,
}

impl PhaseScorers {
    pub fn same(scorer: SharedScorer) -> Self {
        Self {
            phase1: scorer.clone(),
            phase2: scorer.clone(),
            phase3: scorer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredChunk {
    pub doc_id: String,
    pub start: usize,
    pub text: String,
    /// rel(q, c)
    pub score: f64,
    /// Softmax weight within the kept set.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkSet {
    pub query_id: String,
    pub chunks: Vec<ScoredChunk>,
}

impl ChunkSet {
    pub fn weights(&self) -> Vec<f64> {
        self.chunks.iter().map(|c| c.weight).collect()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.chunks.iter().map(|c| c.text.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }
}

#[derive(thiserror::Error, Debug)]
pub enum PipelineError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("document {0} is in the run but not in the corpus")]
    MissingDocument(String),
    #[error("no initial run for query {0}")]
    MissingInitialRun(String),
    #[error("empty {what} for query {query_id}")]
    Empty { what: &'static str, query_id: String },
    #[error(transparent)]
    Config(#[from] Error),
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// (1 - alpha) * rel(q, d) + alpha * rel(C, d)
pub fn combine(rel_qd: f64, rel_cd: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * rel_qd + alpha * rel_cd
}

/// beta * ln(model) + (1 - beta) * initial
pub fn interpolate_initial(model_score: Probability, initial_score: f64, beta: f64) -> f64 {
    beta * model_score.ln() + (1.0 - beta) * initial_score
}

fn resolve<'c>(corpus: &'c Corpus, doc_id: &str) -> Result<&'c Document, PipelineError> {
    corpus
        .get(doc_id)
        .ok_or_else(|| PipelineError::MissingDocument(doc_id.to_owned()))
}

/// Passage texts per document, computed once per query and shared by phases
/// one and three.
struct PassageTable<'c> {
    docs: Vec<&'c Document>,
    passages: Vec<Vec<String>>,
}

impl<'c> PassageTable<'c> {
    fn new(corpus: &'c Corpus, list: &RankedList) -> Result<Self, PipelineError> {
        let docs = list
            .doc_ids()
            .map(|d| resolve(corpus, d))
            .collect::<Result<Vec<_>, _>>()?;
        let passages = docs.par_iter().map(|d| passage_texts(d)).collect();
        Ok(Self { docs, passages })
    }

    /// MaxP of every document against each query-side text, indexed [doc][text].
    fn maxp(
        &self,
        scorer: &dyn RelevanceScorer,
        texts: &[&str],
    ) -> Result<Vec<Vec<Probability>>, ScorerError> {
        let groups: Vec<Vec<Vec<Probability>>> = self
            .passages
            .par_chunks(DOC_BATCH)
            .map(|group| maxp_over_passages(scorer, texts, group))
            .collect::<Result<_, _>>()?;
        Ok(groups.into_iter().flatten().collect())
    }
}

fn phase_one_from_table(
    query_id: &str,
    query_text: &str,
    table: &PassageTable<'_>,
    scorer: &dyn RelevanceScorer,
) -> Result<RankedList, PipelineError> {
    let scores = table.maxp(scorer, &[query_text])?;
    let scored = table
        .docs
        .iter()
        .zip(scores)
        .map(|(d, s)| (d.doc_id.clone(), s[0].value()))
        .collect();
    Ok(RankedList::from_scores_stable(query_id, scored))
}

/// Re-scores the top `depth` documents of `initial` with MaxP and re-sorts them.
/// Ties keep their initial order.
pub fn phase_one(
    query: &Query,
    initial: &RankedList,
    corpus: &Corpus,
    scorer: &dyn RelevanceScorer,
    depth: usize,
) -> Result<RankedList, PipelineError> {
    if initial.is_empty() {
        return Err(PipelineError::Empty {
            what: "initial run",
            query_id: query.query_id.clone(),
        });
    }
    let table = PassageTable::new(corpus, &initial.truncated(depth))?;
    phase_one_from_table(&query.query_id, &query.text, &table, scorer)
}

/// Chunks the top `k_d` documents of `feedback`, scores every chunk against
/// the query and keeps the best `k_c` (ties by doc_id, then start offset).
pub fn select_chunks(
    query: &Query,
    feedback: &RankedList,
    corpus: &Corpus,
    scorer: &dyn RelevanceScorer,
    config: &PipelineConfig,
) -> Result<ChunkSet, PipelineError> {
    let mut candidates = Vec::new();
    for doc_id in feedback.doc_ids().take(config.k_d) {
        candidates.extend(decompose_chunks(resolve(corpus, doc_id)?, config.m));
    }
    if candidates.is_empty() {
        return Err(PipelineError::Empty {
            what: "feedback chunk set",
            query_id: query.query_id.clone(),
        });
    }
    let pairs: Vec<ScorePair> = candidates
        .iter()
        .map(|c| ScorePair::new(query.text.clone(), c.text()))
        .collect();
    let scores = scorer.score_pairs(&pairs)?;
    let mut scored: Vec<(crate::corpus::Chunk, f64)> = candidates
        .into_iter()
        .zip(scores.into_iter().map(Probability::value))
        .collect();
    scored.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.doc_id.cmp(&b.0.doc_id))
            .then_with(|| a.0.start.cmp(&b.0.start))
    });
    scored.truncate(config.k_c);
    let weights = softmax(&scored.iter().map(|s| s.1).collect::<Vec<_>>());
    let chunks = scored
        .into_iter()
        .zip(weights)
        .map(|((chunk, score), weight)| ScoredChunk {
            text: chunk.text(),
            doc_id: chunk.doc_id,
            start: chunk.start,
            score,
            weight,
        })
        .collect();
    Ok(ChunkSet {
        query_id: query.query_id.clone(),
        chunks,
    })
}

/// rel(C, d) = sum_i w_i * MaxP(c_i, d).
pub fn feedback_score(
    chunks: &ChunkSet,
    doc: &Document,
    scorer: &dyn RelevanceScorer,
) -> Result<f64, PipelineError> {
    let mut total = 0.0;
    for c in &chunks.chunks {
        total += c.weight * score_document_maxp(scorer, &c.text, doc)?.value();
    }
    Ok(total)
}

fn weighted_sum(chunks: &ChunkSet, per_chunk: &[Probability]) -> f64 {
    chunks
        .chunks
        .iter()
        .zip(per_chunk)
        .fold(0.0, |acc, (c, s)| acc + c.weight * s.value())
}

/// Runs all three phases for one query.
pub fn run_query(
    query: &Query,
    initial: &RankedList,
    corpus: &Corpus,
    scorers: &PhaseScorers,
    config: &PipelineConfig,
) -> Result<QueryTrace, PipelineError> {
    config.validate()?;
    if initial.is_empty() {
        return Err(PipelineError::Empty {
            what: "initial run",
            query_id: query.query_id.clone(),
        });
    }
    let candidates = initial.truncated(config.rerank_depth);
    let table = PassageTable::new(corpus, &candidates)?;
    let phase1 = phase_one_from_table(&query.query_id, &query.text, &table, &*scorers.phase1)?;
    let degenerate = phase1
        .entries()
        .windows(2)
        .all(|w| w[0].score == w[1].score)
        && phase1.len() > 1;

    let feedback = match config.ablation {
        Ablation::ChunksFromInitial => initial,
        _ => &phase1,
    };
    let chunks = select_chunks(query, feedback, corpus, &*scorers.phase2, config)?;

    let per_doc = table.maxp(&*scorers.phase3, &chunks.texts())?;
    let rel_qd = phase1.score_map();
    let docs = candidates
        .entries()
        .iter()
        .zip(&per_doc)
        .map(|(e, chunk_scores)| DocTrace {
            doc_id: e.doc_id.clone(),
            initial_rank: e.rank,
            initial_score: e.score,
            rel_qd: rel_qd[e.doc_id.as_str()],
            rel_cd: weighted_sum(&chunks, chunk_scores),
        })
        .collect();

    Ok(QueryTrace {
        query_id: query.query_id.clone(),
        ablation: config.ablation,
        alpha: config.effective_alpha(),
        beta: config.beta,
        degenerate_phase_one: degenerate,
        feedback_docs: feedback
            .doc_ids()
            .take(config.k_d)
            .map(str::to_owned)
            .collect(),
        chunks,
        docs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryFailure {
    pub query_id: String,
    pub error: String,
}

/// Per-query outcomes of a full run, in query order.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub outcomes: Vec<Result<QueryTrace, QueryFailure>>,
}

impl PipelineRun {
    pub fn traces(&self) -> impl Iterator<Item = &QueryTrace> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &QueryFailure> {
        self.outcomes.iter().filter_map(|o| o.as_ref().err())
    }

    pub fn has_failures(&self) -> bool {
        self.failures().next().is_some()
    }

    /// Final rankings at each trace's configured alpha and beta.
    pub fn run(&self) -> Run {
        Run::new(self.traces().map(QueryTrace::ranking).collect())
    }

    /// Final rankings at the given alpha and beta (ablations still apply).
    pub fn run_at(&self, alpha: f64, beta: f64) -> Run {
        Run::new(self.traces().map(|t| t.rerank(alpha, beta)).collect())
    }

    pub fn trace(&self, query_id: &str) -> Option<&QueryTrace> {
        self.traces().find(|t| t.query_id == query_id)
    }
}

impl crate::eval::CandidateRuns for PipelineRun {
    fn ranking(&self, query_id: &str, alpha: f64, beta: f64) -> Option<RankedList> {
        self.trace(query_id).map(|t| t.rerank(alpha, beta))
    }
}

/// Runs every query independently (in parallel); a failing query is recorded
/// and the rest proceed.
pub fn run_pipeline(
    queries: &[Query],
    initial: &Run,
    corpus: &Corpus,
    scorers: &PhaseScorers,
    config: &PipelineConfig,
) -> Result<PipelineRun, Error> {
    config.validate()?;
    let outcomes = queries
        .par_iter()
        .map(|q| {
            let result = match initial.get(&q.query_id) {
                Some(list) => run_query(q, list, corpus, scorers, config),
                None => Err(PipelineError::MissingInitialRun(q.query_id.clone())),
            };
            result.map_err(|e| QueryFailure {
                query_id: q.query_id.clone(),
                error: e.to_string(),
            })
        })
        .collect();
    Ok(PipelineRun { outcomes })
}
