//! Unsupervised retrieval (DPH, BM25, query likelihood) and classic feedback
//! expansion (RM3, KL/Rocchio). DPH ranking of the KL-expanded query is the
//! canonical initial run for re-ranking.

mod expansion;
pub mod models;
mod retrieval;

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use expansion::{DocWeighting, KlParams, Rm3Params};
pub use retrieval::Retrieval;

use crate::corpus::parse_tsv_record;
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::run::RankedList;
use crate::text::{tokenize, Stopwords};
use models::{CollectionStats, TermStats};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub text: String,
    pub terms: Vec<String>,
}

impl Query {
    pub fn new(query_id: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let terms = tokenize(&text);
        Self {
            query_id: query_id.into(),
            text,
            terms,
        }
    }
}

/// Reads `query_id<TAB>text` lines.
pub fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut queries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = parse_tsv_record(&line)
            .ok_or_else(|| Error::parse(path, i + 1, "expected `query_id<TAB>text`"))?;
        if !seen.insert(id.to_owned()) {
            return Err(Error::parse(path, i + 1, format!("duplicate query id {id}")));
        }
        queries.push(Query::new(id, text));
    }
    Ok(queries)
}

/// Non-negative term weights. Kept in a BTreeMap so that iteration, and hence
/// floating-point accumulation order, is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedQuery {
    pub query_id: String,
    pub term_weights: BTreeMap<String, f64>,
}

impl WeightedQuery {
    /// Raw query-term frequencies after stopword removal.
    pub fn from_query(query: &Query, stopwords: &Stopwords) -> Self {
        let mut term_weights = BTreeMap::new();
        for t in query.terms.iter().filter(|t| !stopwords.contains(t)) {
            *term_weights.entry(t.clone()).or_insert(0.0) += 1.0;
        }
        Self {
            query_id: query.query_id.clone(),
            term_weights,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.term_weights.values().sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.term_weights.values().copied().fold(0.0, f64::max)
    }

    /// Weights divided by their sum. Empty stays empty.
    pub fn normalized_sum(&self) -> Self {
        self.scaled(self.total_weight())
    }

    /// Weights divided by their maximum. Empty stays empty.
    pub fn normalized_max(&self) -> Self {
        self.scaled(self.max_weight())
    }

    fn scaled(&self, by: f64) -> Self {
        let term_weights = if by > 0.0 {
            self.term_weights
                .iter()
                .map(|(t, w)| (t.clone(), w / by))
                .collect()
        } else {
            self.term_weights.clone()
        };
        Self {
            query_id: self.query_id.clone(),
            term_weights,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.term_weights.values().all(|w| w.is_finite() && *w >= 0.0)
            && self.term_weights.values().any(|w| *w > 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Dph,
    Bm25 { k1: f64, b: f64 },
    QueryLikelihood { mu: f64 },
}

impl Model {
    pub const fn bm25() -> Self {
        Model::Bm25 { k1: 0.9, b: 0.4 }
    }

    pub const fn query_likelihood() -> Self {
        Model::QueryLikelihood { mu: 1000.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Dph => "DPH",
            Model::Bm25 { .. } => "BM25",
            Model::QueryLikelihood { .. } => "QL",
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dph" => Ok(Model::Dph),
            "bm25" => Ok(Model::bm25()),
            "ql" | "qld" | "query-likelihood" => Ok(Model::query_likelihood()),
            other => Err(Error::InvalidParameter(format!("unknown ranking model `{other}`"))),
        }
    }
}

/// Ranks documents of one index. Pure: every method is a function of the
/// index, the query and the parameters.
#[derive(Debug, Clone)]
pub struct LexicalRanker<'a> {
    index: &'a InvertedIndex,
    stopwords: Stopwords,
}

impl<'a> LexicalRanker<'a> {
    pub fn new(index: &'a InvertedIndex) -> Self {
        Self::with_stopwords(index, Stopwords::english())
    }

    pub fn with_stopwords(index: &'a InvertedIndex, stopwords: Stopwords) -> Self {
        Self { index, stopwords }
    }

    pub fn index(&self) -> &'a InvertedIndex {
        self.index
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn weighted(&self, query: &Query) -> WeightedQuery {
        WeightedQuery::from_query(query, &self.stopwords)
    }

    fn collection_stats(&self) -> CollectionStats {
        CollectionStats {
            num_docs: self.index.num_docs() as f64,
            total_tokens: self.index.total_tokens() as f64,
            avg_doc_length: self.index.avg_doc_length(),
        }
    }

    pub fn rank_query(&self, query: &Query, model: Model, k: usize) -> RankedList {
        self.rank(&self.weighted(query), model, k)
    }

    /// Top-k documents containing at least one weighted term. A query with no
    /// indexed terms yields an empty list.
    pub fn rank(&self, query: &WeightedQuery, model: Model, k: usize) -> RankedList {
        let scores = self.score_all(query, model);
        let mut scored: Vec<(String, f64)> = scores
            .into_iter()
            .map(|(doc, s)| (self.index.doc_id(doc).to_owned(), s))
            .collect();
        if scored.len() > k {
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            scored.truncate(k);
        }
        RankedList::from_scores(query.query_id.clone(), scored)
    }

    /// Scores of all matching documents, keyed by document ordinal.
    pub fn score_all(&self, query: &WeightedQuery, model: Model) -> BTreeMap<u32, f64> {
        let c = self.collection_stats();
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        let mut active: Vec<(f64, TermStats)> = Vec::new();
        for (term, &weight) in &query.term_weights {
            if weight <= 0.0 {
                continue;
            }
            let Some(ord) = self.index.term_ord(term) else {
                continue;
            };
            let t = TermStats {
                doc_freq: f64::from(self.index.doc_freq_of(ord)),
                collection_freq: self.index.collection_freq_of(ord) as f64,
            };
            active.push((weight, t));
            for p in self.index.postings(term) {
                let tf = f64::from(p.tf);
                let dl = f64::from(self.index.doc_length(p.doc));
                let w = match model {
                    Model::Dph => models::dph(tf, dl, &c, &t),
                    Model::Bm25 { k1, b } => models::bm25(tf, dl, &c, &t, k1, b),
                    Model::QueryLikelihood { mu } => models::ql_matched(tf, &c, &t, mu),
                };
                *acc.entry(p.doc).or_insert(0.0) += weight * w;
            }
        }
        if let Model::QueryLikelihood { mu } = model {
            for (doc, score) in acc.iter_mut() {
                let dl = f64::from(self.index.doc_length(*doc));
                for (weight, t) in &active {
                    *score += weight * models::ql_background(dl, &c, t, mu);
                }
            }
        }
        acc
    }
}
