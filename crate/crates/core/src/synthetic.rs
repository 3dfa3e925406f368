//! Seeded synthetic test collections.
//!
//! Each query owns a topic: a handful of topic words, a set of on-topic
//! documents that mix those words into background text, and graded
//! judgments (2 for dense topical documents, 1 for lighter ones, 0 for a
//! sample of off-topic documents). Some off-topic documents borrow a few
//! topic words so rankings are not trivially separable.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Document};
use crate::error::{Error, Result};
use crate::eval::Qrels;
use crate::lexical::Query;

const SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "re", "su", "ta", "ve", "no", "pi", "da", "gu", "ze", "ro", "fa", "bi", "ne",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub num_docs: usize,
    pub num_queries: usize,
    pub first_query_id: u32,
    /// On-topic documents per query.
    pub docs_per_topic: usize,
    pub topic_words: usize,
    pub background_words: usize,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_docs: 1000,
            num_queries: 10,
            first_query_id: 701,
            docs_per_topic: 30,
            topic_words: 12,
            background_words: 1500,
            min_doc_len: 40,
            max_doc_len: 320,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCollection {
    pub corpus: Corpus,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
}

impl SyntheticCollection {
    pub fn queries_tsv(&self) -> String {
        self.queries
            .iter()
            .map(|q| format!("{}\t{}\n", q.query_id, q.text))
            .collect()
    }
}

/// Deterministic pronounceable word for an index; distinct indices give distinct words.
fn word(mut i: usize, prefix: &str) -> String {
    let mut w = String::from(prefix);
    loop {
        w.push_str(SYLLABLES[i % SYLLABLES.len()]);
        i /= SYLLABLES.len();
        if i == 0 {
            break;
        }
        i -= 1;
    }
    w
}

/// Skewed draw from the background vocabulary (low indices are frequent).
fn background(rng: &mut ChaCha8Rng, vocab: &[String]) -> String {
    let u: f64 = rng.random();
    vocab[((u * u * u) * vocab.len() as f64) as usize % vocab.len()].clone()
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticCollection> {
    if spec.num_queries == 0 || spec.num_docs < spec.num_queries * spec.docs_per_topic {
        return Err(Error::InvalidParameter(
            "synthetic collection needs at least docs_per_topic documents per query".into(),
        ));
    }
    if spec.min_doc_len == 0 || spec.min_doc_len > spec.max_doc_len || spec.topic_words < 3 {
        return Err(Error::InvalidParameter("invalid synthetic document shape".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab: Vec<String> = (0..spec.background_words).map(|i| word(i, "")).collect();
    let topics: Vec<Vec<String>> = (0..spec.num_queries)
        .map(|t| {
            (0..spec.topic_words)
                .map(|j| word(t * spec.topic_words + j, "x"))
                .collect()
        })
        .collect();

    // Document slots: the first num_queries * docs_per_topic are on-topic.
    let mut owner: Vec<Option<usize>> = (0..spec.num_docs)
        .map(|i| {
            let t = i / spec.docs_per_topic;
            (t < spec.num_queries).then_some(t)
        })
        .collect();
    owner.shuffle(&mut rng);

    let mut docs = Vec::with_capacity(spec.num_docs);
    let mut qrels = Qrels::new();
    let width = spec.num_docs.to_string().len().max(4);
    for (i, topic) in owner.iter().enumerate() {
        let doc_id = format!("D{:0width$}", i + 1);
        let len = rng.random_range(spec.min_doc_len..=spec.max_doc_len);
        let density = match topic {
            Some(_) => rng.random_range(0.02..0.12),
            None => 0.0,
        };
        // Off-topic documents sometimes borrow from a random topic.
        let borrowed = (topic.is_none() && rng.random_bool(0.4))
            .then(|| rng.random_range(0..spec.num_queries));
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let w = match (topic, borrowed) {
                (Some(t), _) if rng.random_bool(density) => {
                    topics[*t][rng.random_range(0..spec.topic_words)].clone()
                }
                (None, Some(b)) if rng.random_bool(0.04) => {
                    topics[b][rng.random_range(0..spec.topic_words)].clone()
                }
                _ => background(&mut rng, &vocab),
            };
            words.push(w);
        }
        if let Some(t) = topic {
            let grade = if density >= 0.07 { 2 } else { 1 };
            qrels.insert(&query_id(spec, *t), &doc_id, grade)?;
        } else if let Some(b) = borrowed {
            qrels.insert(&query_id(spec, b), &doc_id, 0)?;
        }
        docs.push(Document::new(doc_id, words.join(" ")));
    }

    let queries = topics
        .iter()
        .enumerate()
        .map(|(t, words)| {
            let mut picks: Vec<&String> = words.iter().take(3).collect();
            picks.push(&vocab[t % vocab.len()]);
            let text = picks.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(" ");
            Query::new(query_id(spec, t), text)
        })
        .collect();

    Ok(SyntheticCollection {
        corpus: Corpus::new(docs)?,
        queries,
        qrels,
    })
}

fn query_id(spec: &SyntheticSpec, topic: usize) -> String {
    (spec.first_query_id as usize + topic).to_string()
}
