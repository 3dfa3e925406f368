use std::sync::{Arc, OnceLock};

use chunkqe::corpus::chunk_spans;
use chunkqe::index::InvertedIndex;
use chunkqe::lexical::{LexicalRanker, Query, Retrieval};
use chunkqe::pipeline::{
    combine, feedback_score, interpolate_initial, phase_one, run_pipeline, select_chunks,
    PhaseScorers, PipelineConfig,
};
use chunkqe::scorer::{
    score_document_maxp, CachedScorer, IdfSource, MockLexicalScorer, Probability,
    RelevanceScorer, ScoreCache, ScorePair, SharedScorer,
};
use chunkqe::synthetic::{generate, SyntheticSpec};
use chunkqe::text::tokenize;
use chunkqe::{Corpus, RankedList, Run};

use super::Check;

/// The default synthetic collection (1,000 documents, 10 queries) with its
/// DPH+KL initial run and a cached mock scorer.
pub struct Fixture {
    pub corpus: Corpus,
    pub queries: Vec<Query>,
    pub initial: Run,
    pub scorer: SharedScorer,
}

impl Fixture {
    pub fn scorers(&self) -> PhaseScorers {
        PhaseScorers::same(self.scorer.clone())
    }
}

pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let c = generate(&SyntheticSpec::default()).unwrap();
        let index = Arc::new(InvertedIndex::build(&c.corpus));
        let initial = LexicalRanker::new(&index)
            .retrieve_all(&c.queries, Retrieval::DphKl, 1000)
            .unwrap();
        let mock: SharedScorer = Arc::new(MockLexicalScorer::new(IdfSource::Index(index.clone())));
        let scorer: SharedScorer = Arc::new(CachedScorer::new(mock, Arc::new(ScoreCache::new())));
        Fixture {
            corpus: c.corpus,
            queries: c.queries,
            initial,
            scorer,
        }
    })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Re-ranks every query at depth 20 and compares against scoring each
/// document on its own with the building-block operations.
pub fn check_compositional() -> Check {
    let f = fixture();
    let config = PipelineConfig {
        rerank_depth: 20,
        ..PipelineConfig::default()
    };
    let scorer = &*f.scorer;
    let run = run_pipeline(&f.queries, &f.initial, &f.corpus, &f.scorers(), &config).map_err(err)?;
    ensure!(!run.has_failures(), "pipeline reported failed queries");
    let ranked = run.run();
    for q in &f.queries {
        let initial = f.initial.get(&q.query_id).ok_or("missing initial list")?.truncated(20);
        let p1 = phase_one(q, &initial, &f.corpus, scorer, 20).map_err(err)?;
        let chunks = select_chunks(q, &p1, &f.corpus, scorer, &config).map_err(err)?;
        let mut expected = Vec::new();
        for e in initial.entries() {
            let doc = f.corpus.get(&e.doc_id).ok_or("missing document")?;
            let rel_qd = score_document_maxp(scorer, &q.text, doc).map_err(err)?.value();
            let rel_cd = feedback_score(&chunks, doc, scorer).map_err(err)?;
            let model = Probability::new(combine(rel_qd, rel_cd, config.alpha));
            expected.push((e.doc_id.clone(), interpolate_initial(model, e.score, config.beta), e.rank));
        }
        // ties keep the initial order
        expected.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
        let got = ranked.get(&q.query_id).ok_or("query missing from output")?;
        ensure!(got.len() == expected.len(), "query {}: length", q.query_id);
        for (e, (id, s, _)) in got.entries().iter().zip(&expected) {
            ensure!(&e.doc_id == id, "query {}: {} where {id} expected", q.query_id, e.doc_id);
            ensure!((e.score - s).abs() < 1e-9, "query {} {id}: {} vs {s}", q.query_id, e.score);
        }
    }
    Ok(())
}

/// `(start, len)` windows of `m` tokens every `m / 2` tokens; the last
/// window is the first one reaching the end. A short document is one chunk.
pub fn oracle_windows(len: usize, m: usize) -> Vec<(usize, usize)> {
    if len == 0 {
        return Vec::new();
    }
    if len <= m {
        return vec![(0, len)];
    }
    let step = m / 2;
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + m).min(len);
        out.push((start, end - start));
        if end == len {
            return out;
        }
        start += step;
    }
}

pub struct Selected {
    pub doc_id: String,
    pub start: usize,
    pub text: String,
    pub weight: f64,
}

/// Scores every chunk of the top `k_d` documents one pair at a time.
pub fn brute_force_chunks(
    scorer: &dyn RelevanceScorer,
    query: &Query,
    feedback: &RankedList,
    corpus: &Corpus,
    (k_d, k_c, m): (usize, usize, usize),
) -> Vec<Selected> {
    let mut all = Vec::new();
    for id in feedback.doc_ids().take(k_d) {
        let tokens = tokenize(&corpus.get(id).unwrap().text);
        for (s, n) in oracle_windows(tokens.len(), m) {
            let text = tokens[s..s + n].join(" ");
            let score = scorer
                .score_pairs(&[ScorePair::new(query.text.clone(), text.clone())])
                .unwrap()[0]
                .value();
            all.push((id.to_owned(), s, text, score));
        }
    }
    all.sort_by(|a, b| b.3.total_cmp(&a.3).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    all.truncate(k_c);
    let z: f64 = all.iter().map(|c| c.3.exp()).sum();
    all.into_iter()
        .map(|(doc_id, start, text, s)| Selected { doc_id, start, text, weight: s.exp() / z })
        .collect()
}

pub const CHUNK_SHAPES: [(usize, usize, usize); 6] =
    [(10, 10, 10), (1, 1, 10), (3, 5, 5), (5, 20, 20), (10, 5, 7), (2, 10, 4)];

/// Two (k_d, k_c, m) shapes per query: twenty cases in all.
pub fn check_chunk_selection() -> Check {
    let f = fixture();
    let mut cases = 0;
    for (i, q) in f.queries.iter().enumerate() {
        for j in 0..2 {
            let (k_d, k_c, m) = CHUNK_SHAPES[(i * 2 + j) % CHUNK_SHAPES.len()];
            let feedback = f.initial.get(&q.query_id).ok_or("missing initial list")?;
            let config = PipelineConfig { k_d, k_c, m, ..PipelineConfig::default() };
            let got = select_chunks(q, feedback, &f.corpus, &*f.scorer, &config).map_err(err)?;
            let expected = brute_force_chunks(&*f.scorer, q, feedback, &f.corpus, (k_d, k_c, m));
            ensure!(got.len() == expected.len(), "case {cases}: {} chunks vs {}", got.len(), expected.len());
            for (g, e) in got.chunks.iter().zip(&expected) {
                ensure!(
                    (&g.doc_id, g.start, &g.text) == (&e.doc_id, e.start, &e.text),
                    "case {cases}: chunk {}@{} where {}@{} expected",
                    g.doc_id,
                    g.start,
                    e.doc_id,
                    e.start
                );
                ensure!((g.weight - e.weight).abs() < 1e-9, "case {cases}: weight {} vs {}", g.weight, e.weight);
            }
            cases += 1;
        }
    }
    ensure!(cases == 20, "ran {cases} cases");
    Ok(())
}

pub fn check_chunk_windows() -> Check {
    for len in 0..200 {
        for m in 2..25 {
            ensure!(chunk_spans(len, m) == oracle_windows(len, m), "windows differ at len {len}, m {m}");
        }
    }
    Ok(())
}

/// alpha=0, beta=1 reproduces phase one; alpha=0, beta=0 reproduces the
/// initial run; k_c=1 puts all weight on one chunk.
pub fn check_identities() -> Check {
    let f = fixture();
    let base = PipelineConfig::default();

    let qd_only = PipelineConfig { alpha: 0.0, beta: 1.0, ..base };
    let run = run_pipeline(&f.queries, &f.initial, &f.corpus, &f.scorers(), &qd_only).map_err(err)?;
    let ranked = run.run();
    for q in &f.queries {
        let initial = f.initial.get(&q.query_id).ok_or("missing initial list")?;
        let p1 = phase_one(q, initial, &f.corpus, &*f.scorer, base.rerank_depth).map_err(err)?;
        let got = ranked.get(&q.query_id).ok_or("query missing")?;
        ensure!(got.doc_ids().eq(p1.doc_ids()), "query {}: not phase-one order", q.query_id);
    }

    let initial_only = PipelineConfig { alpha: 0.0, beta: 0.0, ..base };
    let run = run_pipeline(&f.queries, &f.initial, &f.corpus, &f.scorers(), &initial_only).map_err(err)?;
    let ranked = run.run();
    for q in &f.queries {
        let initial = f.initial.get(&q.query_id).ok_or("missing initial list")?;
        let got = ranked.get(&q.query_id).ok_or("query missing")?;
        ensure!(got.doc_ids().eq(initial.doc_ids()), "query {}: not initial order", q.query_id);
    }

    let one_chunk = PipelineConfig { k_c: 1, ..base };
    let run = run_pipeline(&f.queries, &f.initial, &f.corpus, &f.scorers(), &one_chunk).map_err(err)?;
    ensure!(run.traces().count() == f.queries.len(), "failed queries");
    for t in run.traces() {
        ensure!(t.chunks.weights() == vec![1.0], "query {}: weights {:?}", t.query_id, t.chunks.weights());
    }
    Ok(())
}
