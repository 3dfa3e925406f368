//! Relevance scorer contract: a batch of (query-side, document-side) text
//! pairs in, one relevance probability per pair out, in the same order.
//!
//! Two implementations ship: a deterministic lexical mock that runs offline
//! and a client for a remote cross-encoder service. [`CachedScorer`] wraps
//! either without changing any returned value.

mod cache;
mod mock;
mod remote;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use cache::{CachedScorer, ScoreCache};
pub use mock::{IdfSource, MockLexicalScorer};
pub use remote::{HealthStatus, RemoteScorer, MAX_BATCH};

use crate::corpus::{passages_from_tokens, Document, PASSAGE_STRIDE, PASSAGE_WINDOW};
use crate::index::InvertedIndex;

pub const PROBABILITY_FLOOR: f64 = 1e-6;
pub const DEFAULT_MAX_SEQ_LEN: usize = 384;

/// A relevance probability, clamped to [1e-6, 1 - 1e-6] so its log is finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Probability(f64);

impl Probability {
    /// Clamps into range. NaN maps to the floor.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            return Self(PROBABILITY_FLOOR);
        }
        Self(value.clamp(PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScorePair {
    pub text_a: String,
    pub text_b: String,
}

impl ScorePair {
    pub fn new(text_a: impl Into<String>, text_b: impl Into<String>) -> Self {
        Self {
            text_a: text_a.into(),
            text_b: text_b.into(),
        }
    }
}

#[derive(thiserror::Error, Debug)]
pub enum ScorerError {
    /// Connection refused, timeout, or a 5xx response: worth retrying.
    #[error("scorer transport error ({endpoint}): {message}")]
    Transport { endpoint: String, message: String },

    #[error("scorer rejected the request ({endpoint}): HTTP {status}: {message}")]
    Rejected {
        endpoint: String,
        status: u16,
        message: String,
    },

    #[error("malformed scorer response ({endpoint}): {message}")]
    MalformedResponse { endpoint: String, message: String },

    #[error("invalid scorer configuration: {0}")]
    Config(String),
}

impl ScorerError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ScorerError::Transport { .. })
    }
}

/// Implementations must be deterministic per instance and safe to call from
/// several threads at once.
pub trait RelevanceScorer: Send + Sync {
    /// Stable identifier; part of the score-cache key.
    fn id(&self) -> &str;

    fn score_pairs(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError>;
}

impl<S: RelevanceScorer + ?Sized> RelevanceScorer for Arc<S> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn score_pairs(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        (**self).score_pairs(pairs)
    }
}

pub type SharedScorer = Arc<dyn RelevanceScorer>;

/// Word tokens of a pair cut so that both sides together hold at most
/// `max_len` tokens. The document side is shortened first.
pub fn truncate_pair(a: &[String], b: &[String], max_len: usize) -> (usize, usize) {
    let a_len = a.len().min(max_len);
    let b_len = b.len().min(max_len - a_len);
    (a_len, b_len)
}

/// Passage texts of a document (100-token windows, stride 50).
pub fn passage_texts(doc: &Document) -> Vec<String> {
    passages_from_tokens(&doc.doc_id, &doc.tokens(), PASSAGE_WINDOW, PASSAGE_STRIDE)
        .iter()
        .map(|p| p.text())
        .collect()
}

/// MaxP: the highest score of `query_text` against any passage of `doc`.
/// A document without tokens is scored as a single empty passage.
pub fn score_document_maxp(
    scorer: &dyn RelevanceScorer,
    query_text: &str,
    doc: &Document,
) -> Result<Probability, ScorerError> {
    Ok(score_documents_maxp(scorer, query_text, &[doc])?[0])
}

/// MaxP scores of several documents against one query text, in one batch.
pub fn score_documents_maxp(
    scorer: &dyn RelevanceScorer,
    query_text: &str,
    docs: &[&Document],
) -> Result<Vec<Probability>, ScorerError> {
    let passages: Vec<Vec<String>> = docs.iter().map(|d| passage_texts(d)).collect();
    maxp_over_passages(scorer, &[query_text], &passages)
        .map(|rows| rows.into_iter().map(|mut r| r.remove(0)).collect())
}

/// For every document (outer) and every query-side text (inner), the maximum
/// score over that document's passages. All pairs go to the scorer in one call.
pub fn maxp_over_passages(
    scorer: &dyn RelevanceScorer,
    query_texts: &[&str],
    doc_passages: &[Vec<String>],
) -> Result<Vec<Vec<Probability>>, ScorerError> {
    let mut pairs = Vec::new();
    for passages in doc_passages {
        for q in query_texts {
            if passages.is_empty() {
                pairs.push(ScorePair::new(*q, ""));
            }
            for p in passages {
                pairs.push(ScorePair::new(*q, p.clone()));
            }
        }
    }
    let scores = scorer.score_pairs(&pairs)?;
    if scores.len() != pairs.len() {
        return Err(ScorerError::MalformedResponse {
            endpoint: scorer.id().to_owned(),
            message: format!("expected {} scores, got {}", pairs.len(), scores.len()),
        });
    }
    let mut it = scores.into_iter();
    Ok(doc_passages
        .iter()
        .map(|passages| {
            let n = passages.len().max(1);
            query_texts
                .iter()
                .map(|_| {
                    it.by_ref()
                        .take(n)
                        .fold(Probability::new(0.0), |m, s| if s > m { s } else { m })
                })
                .collect()
        })
        .collect())
}

/// Textual scorer configuration, e.g. `mock`, `mock:shift=-1.5,maxlen=256`,
/// `remote`, or `http://host:port`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScorerSpec {
    Mock { shift: f64, max_len: usize },
    /// `endpoint` of `None` defers to the environment override.
    Remote {
        endpoint: Option<String>,
        timeout_ms: u64,
    },
}

/// Environment variable naming the remote scorer endpoint; overrides any
/// endpoint given in configuration.
pub const ENDPOINT_ENV: &str = "CHUNKQE_SCORER_URL";

impl Default for ScorerSpec {
    fn default() -> Self {
        ScorerSpec::Mock {
            shift: mock::DEFAULT_SHIFT,
            max_len: DEFAULT_MAX_SEQ_LEN,
        }
    }
}

impl FromStr for ScorerSpec {
    type Err = ScorerError;

    fn from_str(s: &str) -> Result<Self, ScorerError> {
        let s = s.trim();
        if s.starts_with("http://") || s.starts_with("https://") {
            return Ok(ScorerSpec::Remote {
                endpoint: Some(s.to_owned()),
                timeout_ms: remote::DEFAULT_TIMEOUT_MS,
            });
        }
        let (kind, opts) = s.split_once(':').unwrap_or((s, ""));
        let opts: Vec<(&str, &str)> = opts
            .split(',')
            .filter(|o| !o.is_empty())
            .map(|o| {
                o.split_once('=')
                    .ok_or_else(|| ScorerError::Config(format!("option `{o}` is not key=value")))
            })
            .collect::<Result<_, _>>()?;
        let bad = |k: &str, v: &str| ScorerError::Config(format!("bad value `{v}` for `{k}`"));
        match kind {
            "mock" => {
                let (mut shift, mut max_len) = (mock::DEFAULT_SHIFT, DEFAULT_MAX_SEQ_LEN);
                for (k, v) in opts {
                    match k {
                        "shift" => shift = v.parse().map_err(|_| bad(k, v))?,
                        "maxlen" => max_len = v.parse().map_err(|_| bad(k, v))?,
                        _ => return Err(ScorerError::Config(format!("unknown mock option `{k}`"))),
                    }
                }
                Ok(ScorerSpec::Mock { shift, max_len })
            }
            "remote" => {
                let mut timeout_ms = remote::DEFAULT_TIMEOUT_MS;
                for (k, v) in opts {
                    match k {
                        "timeout_ms" => timeout_ms = v.parse().map_err(|_| bad(k, v))?,
                        _ => return Err(ScorerError::Config(format!("unknown remote option `{k}`"))),
                    }
                }
                Ok(ScorerSpec::Remote {
                    endpoint: None,
                    timeout_ms,
                })
            }
            other => Err(ScorerError::Config(format!("unknown scorer kind `{other}`"))),
        }
    }
}

impl ScorerSpec {
    /// Instantiates the scorer. The mock takes its idf from `index` when given.
    pub fn build(&self, index: Option<Arc<InvertedIndex>>) -> Result<SharedScorer, ScorerError> {
        match self {
            ScorerSpec::Mock { shift, max_len } => {
                let idf = index.map_or(IdfSource::Uniform, IdfSource::Index);
                Ok(Arc::new(
                    MockLexicalScorer::new(idf)
                        .with_shift(*shift)
                        .with_max_len(*max_len),
                ))
            }
            ScorerSpec::Remote {
                endpoint,
                timeout_ms,
            } => {
                let endpoint = std::env::var(ENDPOINT_ENV)
                    .ok()
                    .filter(|e| !e.is_empty())
                    .or_else(|| endpoint.clone())
                    .ok_or_else(|| {
                        ScorerError::Config(format!(
                            "remote scorer needs an endpoint (set {ENDPOINT_ENV})"
                        ))
                    })?;
                Ok(Arc::new(RemoteScorer::new(
                    endpoint,
                    Duration::from_millis(*timeout_ms),
                )))
            }
        }
    }
}
