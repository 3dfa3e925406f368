use std::collections::BTreeMap;

use chunkqe::index::InvertedIndex;
use chunkqe::lexical::{read_queries, DocWeighting, LexicalRanker, Model, Query, Retrieval, Rm3Params};
use chunkqe::text::ENGLISH_STOPWORDS;
use chunkqe::{Corpus, RankedList};

use super::{fixture, Check};

pub fn load() -> (Corpus, InvertedIndex, Vec<Query>) {
    let corpus = Corpus::read_tsv(&fixture("corpus.tsv")).unwrap();
    let index = InvertedIndex::build(&corpus);
    let queries = read_queries(&fixture("queries.tsv")).unwrap();
    (corpus, index, queries)
}

/// Character-at-a-time tokenizer: maximal alphanumeric runs, lowercased.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Per-document scores computed straight from token lists.
pub struct BruteForce {
    docs: Vec<(String, Vec<String>)>,
    n: f64,
    total: f64,
    avgdl: f64,
}

impl BruteForce {
    pub fn new(corpus: &Corpus) -> Self {
        let docs: Vec<(String, Vec<String>)> = corpus
            .iter()
            .map(|d| (d.doc_id.clone(), oracle_tokens(&d.text)))
            .collect();
        let n = docs.len() as f64;
        let total = docs.iter().map(|d| d.1.len()).sum::<usize>() as f64;
        Self { docs, n, total, avgdl: total / n }
    }

    fn tf(toks: &[String], term: &str) -> f64 {
        toks.iter().filter(|t| *t == term).count() as f64
    }

    fn df(&self, term: &str) -> f64 {
        self.docs.iter().filter(|d| Self::tf(&d.1, term) > 0.0).count() as f64
    }

    fn cf(&self, term: &str) -> f64 {
        self.docs.iter().map(|d| Self::tf(&d.1, term)).sum()
    }

    fn query_terms(query: &Query) -> BTreeMap<String, f64> {
        let mut q = BTreeMap::new();
        for t in oracle_tokens(&query.text) {
            if !ENGLISH_STOPWORDS.contains(&t.as_str()) {
                *q.entry(t).or_insert(0.0) += 1.0;
            }
        }
        q
    }

    pub fn score(&self, query: &Query, model: &str) -> Vec<(String, f64)> {
        let q = Self::query_terms(query);
        let mut out = Vec::new();
        for (id, toks) in &self.docs {
            let dl = toks.len() as f64;
            if !q.keys().any(|t| Self::tf(toks, t) > 0.0) {
                continue;
            }
            let mut s = 0.0;
            for (t, &qtf) in &q {
                let cf = self.cf(t);
                if cf == 0.0 {
                    continue;
                }
                let tf = Self::tf(toks, t);
                s += qtf * match model {
                    "bm25" => {
                        if tf == 0.0 {
                            0.0
                        } else {
                            let df = self.df(t);
                            let idf = (1.0 + (self.n - df + 0.5) / (df + 0.5)).ln();
                            idf * tf * 1.9 / (tf + 0.9 * (0.6 + 0.4 * dl / self.avgdl))
                        }
                    }
                    "ql" => ((tf + 1000.0 * cf / self.total) / (dl + 1000.0)).ln(),
                    "dph" => {
                        if tf == 0.0 || tf == dl {
                            0.0
                        } else {
                            let f = tf / dl;
                            (1.0 - f).powi(2) / (tf + 1.0)
                                * (tf * (tf * self.avgdl / dl * self.n / cf).log2()
                                    + 0.5 * (2.0 * std::f64::consts::PI * tf * (1.0 - f)).log2())
                        }
                    }
                    _ => unreachable!(),
                };
            }
            out.push((id.clone(), s));
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }
}

pub fn check_rankers() -> Check {
    let (corpus, index, queries) = load();
    let brute = BruteForce::new(&corpus);
    let ranker = LexicalRanker::new(&index);
    for (name, model) in [
        ("bm25", Model::bm25()),
        ("ql", Model::query_likelihood()),
        ("dph", Model::Dph),
    ] {
        for q in &queries {
            let expected = brute.score(q, name);
            let got = ranker.rank_query(q, model, 1000);
            ensure!(got.len() == expected.len(), "{name} {}: length", q.query_id);
            for (e, (id, s)) in got.entries().iter().zip(&expected) {
                ensure!(&e.doc_id == id, "{name} {}: {} where {id} expected", q.query_id, e.doc_id);
                ensure!((e.score - s).abs() < 1e-9, "{name} {} {id}: {} vs {s}", q.query_id, e.score);
            }
        }
    }
    Ok(())
}

/// RM3 expansion weights over a spread of feedback sets and parameters.
pub fn check_rm3_distribution() -> Check {
    let (corpus, index, queries) = load();
    let ranker = LexicalRanker::new(&index);
    let docs = corpus.documents();
    for fb in 1..=8usize {
        let scored: Vec<(String, f64)> = (0..fb)
            .map(|i| (docs[(i * 7 + fb) % docs.len()].doc_id.clone(), 10.0 - i as f64))
            .collect();
        let feedback = RankedList::from_scores("q", scored);
        for weighting in [DocWeighting::Uniform, DocWeighting::Score, DocWeighting::Likelihood] {
            for (fb_terms, original_weight) in [(1, 0.0), (10, 0.5), (24, 1.0), (5, 0.3)] {
                let params = Rm3Params { fb_docs: 10, fb_terms, original_weight, weighting };
                for q in &queries {
                    let expanded = ranker.rm3_expand(q, &feedback, &params).map_err(|e| e.to_string())?;
                    let total: f64 = expanded.term_weights.values().sum();
                    ensure!((total - 1.0).abs() < 1e-9, "{} {weighting:?}: sum {total}", q.query_id);
                    ensure!(expanded.term_weights.values().all(|&w| w > 0.0), "non-positive weight");
                }
            }
        }
    }
    Ok(())
}

pub fn dph_kl_run() -> String {
    let (_, index, queries) = load();
    LexicalRanker::new(&index)
        .retrieve_all(&queries, Retrieval::DphKl, 1000)
        .unwrap()
        .to_trec_string("dph+kl")
}

pub fn check_golden_run() -> Check {
    let text = dph_kl_run();
    let golden = std::fs::read_to_string(fixture("dph_kl_golden.txt")).map_err(|e| e.to_string())?;
    ensure!(text == golden, "DPH+KL run differs from the golden file");
    ensure!(dph_kl_run() == text, "DPH+KL run differs between two runs");
    Ok(())
}
