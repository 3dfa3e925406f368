//! Pseudo-relevance-feedback term expansion.
//!
//! RM3: P(t|R) = sum_d w_d * tf(t,d) / |d|, truncated to the top `fb_terms`
//! terms and renormalised, then mixed with the normalised original query as
//! `mix * P(t|Q) + (1 - mix) * P(t|R)`.
//!
//! KL/Rocchio: each feedback term is scored by P_fb(t) * log2(P_fb(t) / P_c(t)),
//! where P_fb is its relative frequency in the concatenated feedback documents
//! and P_c its collection relative frequency. The top `fb_terms` positive
//! scores, divided by the largest, are added at weight 0.4 to the original
//! terms (which carry weight qtf / max qtf).

use std::collections::BTreeMap;

use super::{LexicalRanker, Model, Query, WeightedQuery};
use crate::error::{Error, Result};
use crate::index::DocOrd;
use crate::run::RankedList;

/// How feedback documents are weighted in the relevance model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DocWeighting {
    #[default]
    Uniform,
    /// Proportional to the retrieval score; negative scores count as zero.
    Score,
    /// Proportional to exp(score), i.e. the posterior P(d|q) when the feedback
    /// run scores are log-likelihoods.
    Likelihood,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rm3Params {
    pub fb_docs: usize,
    pub fb_terms: usize,
    /// Weight of the original query distribution, in [0, 1].
    pub original_weight: f64,
    pub weighting: DocWeighting,
}

impl Default for Rm3Params {
    fn default() -> Self {
        Self {
            fb_docs: 10,
            fb_terms: 10,
            original_weight: 0.5,
            weighting: DocWeighting::Uniform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlParams {
    pub fb_docs: usize,
    pub fb_terms: usize,
    pub expansion_weight: f64,
}

impl Default for KlParams {
    fn default() -> Self {
        Self {
            fb_docs: 10,
            fb_terms: 10,
            expansion_weight: 0.4,
        }
    }
}

/// Highest-weight `n` entries, ties by ascending term.
fn top_terms(weights: BTreeMap<String, f64>, n: usize) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = weights.into_iter().collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v.truncate(n);
    v
}

impl LexicalRanker<'_> {
    fn feedback_docs(&self, feedback: &RankedList, n: usize) -> Result<Vec<(DocOrd, f64)>> {
        if feedback.is_empty() {
            return Err(Error::Empty(format!(
                "feedback list for query {}",
                feedback.query_id
            )));
        }
        feedback
            .entries()
            .iter()
            .take(n)
            .map(|e| {
                self.index()
                    .doc_ord(&e.doc_id)
                    .map(|d| (d, e.score))
                    .ok_or_else(|| Error::UnknownDocId(e.doc_id.clone()))
            })
            .collect()
    }

    /// Non-stopword term counts of one document.
    fn doc_terms(&self, doc: DocOrd) -> Vec<(&str, f64)> {
        self.index()
            .term_vector(doc)
            .iter()
            .map(|&(t, tf)| (self.index().term(t), f64::from(tf)))
            .filter(|(t, _)| !self.stopwords().contains(t))
            .collect()
    }

    /// Relevance-model term distribution of the top `fb_docs` feedback documents.
    pub fn relevance_model(
        &self,
        feedback: &RankedList,
        params: &Rm3Params,
    ) -> Result<BTreeMap<String, f64>> {
        let docs = self.feedback_docs(feedback, params.fb_docs)?;
        let raw: Vec<f64> = match params.weighting {
            DocWeighting::Uniform => vec![1.0; docs.len()],
            DocWeighting::Score => docs.iter().map(|d| d.1.max(0.0)).collect(),
            DocWeighting::Likelihood => {
                let max = docs.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
                docs.iter().map(|d| (d.1 - max).exp()).collect()
            }
        };
        let total: f64 = raw.iter().sum();
        let doc_weights: Vec<f64> = if total > 0.0 {
            raw.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / docs.len() as f64; docs.len()]
        };

        let mut model: BTreeMap<String, f64> = BTreeMap::new();
        for (&(doc, _), &w) in docs.iter().zip(&doc_weights) {
            let terms = self.doc_terms(doc);
            let len: f64 = terms.iter().map(|t| t.1).sum();
            if len == 0.0 {
                continue;
            }
            for (t, tf) in terms {
                *model.entry(t.to_owned()).or_insert(0.0) += w * tf / len;
            }
        }
        Ok(model)
    }

    pub fn rm3_expand(
        &self,
        query: &Query,
        feedback: &RankedList,
        params: &Rm3Params,
    ) -> Result<WeightedQuery> {
        if !(0.0..=1.0).contains(&params.original_weight) {
            return Err(Error::InvalidParameter(format!(
                "RM3 original-query weight {} outside [0, 1]",
                params.original_weight
            )));
        }
        let original = self.weighted(query).normalized_sum();
        let model = self.relevance_model(feedback, params)?;
        let kept = top_terms(model, params.fb_terms);
        let kept_mass: f64 = kept.iter().map(|t| t.1).sum();

        let (mix_orig, mix_fb) = match (original.term_weights.is_empty(), kept_mass > 0.0) {
            (false, true) => (params.original_weight, 1.0 - params.original_weight),
            (false, false) => (1.0, 0.0),
            (true, true) => (0.0, 1.0),
            (true, false) => {
                return Err(Error::Empty(format!(
                    "no terms to expand query {}",
                    query.query_id
                )))
            }
        };
        let mut weights: BTreeMap<String, f64> = BTreeMap::new();
        for (t, w) in &original.term_weights {
            *weights.entry(t.clone()).or_insert(0.0) += mix_orig * w;
        }
        for (t, w) in kept {
            *weights.entry(t).or_insert(0.0) += mix_fb * w / kept_mass;
        }
        weights.retain(|_, w| *w > 0.0);
        let total: f64 = weights.values().sum();
        weights.values_mut().for_each(|w| *w /= total);
        Ok(WeightedQuery {
            query_id: query.query_id.clone(),
            term_weights: weights,
        })
    }

    /// KL divergence contribution of every non-stopword term in the feedback set.
    pub fn kl_term_scores(
        &self,
        feedback: &RankedList,
        fb_docs: usize,
    ) -> Result<BTreeMap<String, f64>> {
        let docs = self.feedback_docs(feedback, fb_docs)?;
        let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
        let mut fb_len = 0.0;
        for &(doc, _) in &docs {
            fb_len += f64::from(self.index().doc_length(doc));
            for (t, n) in self.doc_terms(doc) {
                *tf.entry(t).or_insert(0.0) += n;
            }
        }
        let total = self.index().total_tokens() as f64;
        Ok(tf
            .into_iter()
            .map(|(t, n)| {
                let p_fb = n / fb_len;
                let p_c = self.index().collection_freq(t) as f64 / total;
                (t.to_owned(), p_fb * (p_fb / p_c).log2())
            })
            .collect())
    }

    pub fn kl_expand(
        &self,
        query: &Query,
        feedback: &RankedList,
        params: &KlParams,
    ) -> Result<WeightedQuery> {
        let mut expanded = self.weighted(query).normalized_max();
        if params.fb_terms == 0 {
            return Ok(expanded);
        }
        let mut scores = self.kl_term_scores(feedback, params.fb_docs)?;
        scores.retain(|_, s| *s > 0.0);
        let top = top_terms(scores, params.fb_terms);
        let Some(max) = top.first().map(|t| t.1) else {
            return Ok(expanded);
        };
        for (t, s) in top {
            *expanded.term_weights.entry(t).or_insert(0.0) += params.expansion_weight * s / max;
        }
        Ok(expanded)
    }

    /// DPH first pass, KL expansion over its top documents, DPH again with the
    /// expanded query.
    pub fn dph_kl(&self, query: &Query, k: usize, params: &KlParams) -> Result<RankedList> {
        let first = self.rank_query(query, Model::Dph, params.fb_docs.max(1));
        if first.is_empty() {
            return Ok(first);
        }
        let expanded = self.kl_expand(query, &first, params)?;
        Ok(self.rank(&expanded, Model::Dph, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, Document};
    use crate::index::InvertedIndex;
    use crate::text::Stopwords;

    fn index(docs: &[(&str, &str)]) -> InvertedIndex {
        InvertedIndex::build(
            &Corpus::new(docs.iter().map(|(i, t)| Document::new(*i, *t)).collect()).unwrap(),
        )
    }

    fn list(q: &str, docs: &[(&str, f64)]) -> RankedList {
        RankedList::from_scores(q, docs.iter().map(|(d, s)| (d.to_string(), *s)).collect())
    }

    #[test]
    fn relevance_model_of_single_document() {
        let idx = index(&[("d1", "a a b"), ("d2", "c")]);
        let r = LexicalRanker::with_stopwords(&idx, Stopwords::none());
        let rm = r
            .relevance_model(&list("q", &[("d1", 1.0)]), &Rm3Params::default())
            .unwrap();
        assert!((rm["a"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((rm["b"] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(rm.len(), 2);
    }

    #[test]
    fn rm3_full_original_weight_is_original_distribution() {
        let idx = index(&[("d1", "cat dog dog"), ("d2", "fish")]);
        let r = LexicalRanker::new(&idx);
        let q = Query::new("q", "cat cat fish");
        let params = Rm3Params {
            original_weight: 1.0,
            ..Default::default()
        };
        let out = r.rm3_expand(&q, &list("q", &[("d1", 2.0)]), &params).unwrap();
        assert_eq!(out.term_weights.len(), 2);
        assert!((out.term_weights["cat"] - 2.0 / 3.0).abs() < 1e-12);
        assert!((out.term_weights["fish"] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rm3_single_feedback_term() {
        let idx = index(&[("d1", "cat dog dog bird"), ("d2", "fish")]);
        let r = LexicalRanker::new(&idx);
        let params = Rm3Params {
            fb_terms: 1,
            ..Default::default()
        };
        let out = r
            .rm3_expand(&Query::new("q", "fish"), &list("q", &[("d1", 1.0)]), &params)
            .unwrap();
        // fish (original) + dog (single surviving feedback term)
        assert_eq!(out.term_weights.keys().collect::<Vec<_>>(), vec!["dog", "fish"]);
        assert!((out.term_weights.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rm3_uses_all_available_feedback() {
        let idx = index(&[("d1", "x y"), ("d2", "y z")]);
        let r = LexicalRanker::new(&idx);
        let params = Rm3Params {
            fb_docs: 50,
            ..Default::default()
        };
        let out = r
            .rm3_expand(&Query::new("q", "y"), &list("q", &[("d1", 1.0), ("d2", 0.5)]), &params)
            .unwrap();
        assert!(out.term_weights.contains_key("x") && out.term_weights.contains_key("z"));
    }

    #[test]
    fn rm3_empty_feedback_is_an_error() {
        let idx = index(&[("d1", "x")]);
        let r = LexicalRanker::new(&idx);
        assert!(r
            .rm3_expand(&Query::new("q", "x"), &RankedList::empty("q"), &Rm3Params::default())
            .is_err());
    }

    #[test]
    fn likelihood_weighting_prefers_higher_scores() {
        let idx = index(&[("d1", "alpha"), ("d2", "beta")]);
        let r = LexicalRanker::new(&idx);
        let params = Rm3Params {
            weighting: DocWeighting::Likelihood,
            ..Default::default()
        };
        let rm = r
            .relevance_model(&list("q", &[("d1", -1.0), ("d2", -1.0 - 2f64.ln())]), &params)
            .unwrap();
        assert!((rm["alpha"] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn kl_zero_feedback_terms_returns_original() {
        let idx = index(&[("d1", "apple pie"), ("d2", "apple tart")]);
        let r = LexicalRanker::new(&idx);
        let q = Query::new("q", "apple");
        let params = KlParams {
            fb_terms: 0,
            ..Default::default()
        };
        let out = r.kl_expand(&q, &list("q", &[("d1", 1.0)]), &params).unwrap();
        assert_eq!(out, r.weighted(&q).normalized_max());
    }

    #[test]
    fn kl_equal_proportions_never_selected() {
        // "common" has the same relative frequency in the feedback doc and the collection
        let idx = index(&[("d1", "common rare"), ("d2", "common other")]);
        let r = LexicalRanker::new(&idx);
        let scores = r.kl_term_scores(&list("q", &[("d1", 1.0)]), 1).unwrap();
        assert!(scores["common"].abs() < 1e-15);
        assert!(scores["rare"] > 0.0);
        let out = r
            .kl_expand(&Query::new("q", "rare"), &list("q", &[("d1", 1.0)]), &KlParams::default())
            .unwrap();
        assert!(!out.term_weights.contains_key("common"));
    }

    #[test]
    fn kl_weights_follow_rocchio_mix() {
        let idx = index(&[("d1", "storm storm flood"), ("d2", "sun sand"), ("d3", "sun sea")]);
        let r = LexicalRanker::new(&idx);
        let out = r
            .kl_expand(&Query::new("q", "storm"), &list("q", &[("d1", 1.0)]), &KlParams::default())
            .unwrap();
        // storm has the larger divergence: original 1.0 plus 0.4 of normalised score 1.0
        assert!((out.term_weights["storm"] - 1.4).abs() < 1e-12);
        assert!(out.term_weights["flood"] > 0.0 && out.term_weights["flood"] < 0.4);
    }
}
