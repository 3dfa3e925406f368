//! Chunk-based pseudo-relevance-feedback re-ranking.
//!
//! A first-round neural re-ranking of an initial lexical run supplies feedback
//! documents; those are cut into short overlapping chunks, the best chunks are
//! selected by the scorer, and every candidate document is finally re-scored
//! against the query and the selected chunks together.
//!
//! Around that pipeline sit the lexical retrieval models that produce the
//! initial run, TREC-style evaluation with cross-validation and significance
//! testing, and a transformer FLOPs/parameter cost model.

pub mod corpus;
pub mod cost;
pub mod error;
pub mod eval;
pub mod index;
pub mod lexical;
pub mod pipeline;
pub mod run;
pub mod scorer;
pub mod synthetic;
pub mod text;

pub use corpus::{Chunk, Corpus, Document, Passage};
pub use error::{Error, Result};
pub use index::InvertedIndex;
pub use lexical::{LexicalRanker, Model, Query, WeightedQuery};
pub use run::{RankedEntry, RankedList, Run};
pub use scorer::{Probability, RelevanceScorer, ScorePair, ScorerError};
pub use eval::{Metric, MetricReport, Qrels};
pub use pipeline::{Ablation, PhaseScorers, PipelineConfig, PipelineRun, QueryTrace};
