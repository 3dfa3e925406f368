//! Deterministic lexical stand-in for a trained cross-encoder.
//!
//! s = sum over distinct query-side terms t present in the document side of
//!     idf(t) * (1 + ln tf_b(t)), divided by the idf mass of all distinct
//!     query-side terms;
//! p = sigmoid(4 * s + shift), shift = -2 by default.

use std::collections::HashMap;
use std::sync::Arc;

use super::{truncate_pair, Probability, RelevanceScorer, ScorePair, ScorerError};
use crate::index::InvertedIndex;
use crate::text::tokenize;

pub const DEFAULT_SHIFT: f64 = -2.0;
pub const STEEPNESS: f64 = 4.0;

#[derive(Debug, Clone)]
pub enum IdfSource {
    Uniform,
    Index(Arc<InvertedIndex>),
}

impl IdfSource {
    fn idf(&self, term: &str) -> f64 {
        match self {
            IdfSource::Uniform => 1.0,
            IdfSource::Index(index) => index.idf(term),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MockLexicalScorer {
    id: String,
    idf: IdfSource,
    shift: f64,
    max_len: usize,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl MockLexicalScorer {
    pub fn new(idf: IdfSource) -> Self {
        let mut s = Self {
            id: String::new(),
            idf,
            shift: DEFAULT_SHIFT,
            max_len: super::DEFAULT_MAX_SEQ_LEN,
        };
        s.refresh_id();
        s
    }

    pub fn uniform() -> Self {
        Self::new(IdfSource::Uniform)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self.refresh_id();
        self
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self.refresh_id();
        self
    }

    fn refresh_id(&mut self) {
        let idf = match &self.idf {
            IdfSource::Uniform => "uniform".to_owned(),
            IdfSource::Index(i) => format!("index:{}:{}:{}", i.num_docs(), i.num_terms(), i.total_tokens()),
        };
        self.id = format!("mock(shift={},maxlen={},idf={idf})", self.shift, self.max_len);
    }

    /// The normalised overlap s before the sigmoid.
    pub fn overlap(&self, query_tokens: &[String], doc_tokens: &[String]) -> f64 {
        let mut tf: HashMap<&str, u32> = HashMap::new();
        for t in doc_tokens {
            *tf.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut seen = std::collections::HashSet::new();
        let (mut matched, mut mass) = (0.0, 0.0);
        for t in query_tokens {
            if !seen.insert(t.as_str()) {
                continue;
            }
            let idf = self.idf.idf(t);
            mass += idf;
            if let Some(&n) = tf.get(t.as_str()) {
                matched += idf * (1.0 + f64::from(n).ln());
            }
        }
        if mass > 0.0 {
            matched / mass
        } else {
            0.0
        }
    }

    pub fn score_text(&self, text_a: &str, text_b: &str) -> Probability {
        let a = tokenize(text_a);
        let b = tokenize(text_b);
        let (la, lb) = truncate_pair(&a, &b, self.max_len);
        let s = self.overlap(&a[..la], &b[..lb]);
        Probability::new(sigmoid(STEEPNESS * s + self.shift))
    }
}

impl RelevanceScorer for MockLexicalScorer {
    fn id(&self) -> &str {
        &self.id
    }

    fn score_pairs(&self, pairs: &[ScorePair]) -> Result<Vec<Probability>, ScorerError> {
        Ok(pairs
            .iter()
            .map(|p| self.score_text(&p.text_a, &p.text_b))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_overlap_with_unit_tf() {
        let s = MockLexicalScorer::uniform();
        let p = s.score_text("storm damage", "heavy storm caused damage");
        assert_abs_diff_eq!(p.value(), 1.0 / (1.0 + (-2.0f64).exp()), epsilon = 1e-12);
        assert_abs_diff_eq!(p.value(), 0.8807970779778823, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_vocabularies() {
        let s = MockLexicalScorer::uniform();
        assert_abs_diff_eq!(s.score_text("a b", "c d").value(), 0.11920292202211755, epsilon = 1e-12);
        let unshifted = MockLexicalScorer::uniform().with_shift(0.0);
        assert_eq!(unshifted.score_text("a b", "c d").value(), 0.5);
    }

    #[test]
    fn repeated_document_terms_raise_score() {
        let s = MockLexicalScorer::uniform();
        let one = s.score_text("flood", "flood warning");
        let three = s.score_text("flood", "flood flood flood warning");
        assert!(three > one);
    }

    #[test]
    fn truncation_applies() {
        let s = MockLexicalScorer::uniform().with_max_len(3);
        // query side keeps "x y", document side keeps only its first token
        assert_eq!(s.score_text("x y", "z x y"), s.score_text("x y", "z"));
    }

    #[test]
    fn batch_is_order_preserving_and_deterministic() {
        let s = MockLexicalScorer::uniform();
        let pairs = vec![
            ScorePair::new("a", "a b"),
            ScorePair::new("a", "b"),
            ScorePair::new("a", "a b"),
        ];
        let out = s.score_pairs(&pairs).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], out[2]);
        assert!(out[0] > out[1]);
    }
}
