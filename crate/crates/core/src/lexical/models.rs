//! Per-term scoring kernels for the three lexical models.
//!
//! BM25 (Robertson/Lucene form):
//!   idf = ln(1 + (N - df + 0.5) / (df + 0.5))
//!   w   = idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))
//!
//! Query likelihood with Dirichlet smoothing, written so that the per-document
//! sum over query terms equals the full log-likelihood
//!   sum_t q_t * ln((tf + mu * p_c) / (dl + mu)),  p_c = cf / |C|
//! as a matched part ln(1 + tf / (mu * p_c)) plus a document-level part.
//!
//! DPH (divergence from randomness, hypergeometric, Popper normalisation), as
//! in Terrier with base-2 logarithms:
//!   f    = tf / dl
//!   norm = (1 - f)^2 / (tf + 1)
//!   w    = norm * (tf * log2((tf * avgdl / dl) * (N / cf)) + 0.5 * log2(2 * pi * tf * (1 - f)))
//! A term making up the whole document (f = 1) scores 0.

#[derive(Debug, Clone, Copy)]
pub struct CollectionStats {
    pub num_docs: f64,
    pub total_tokens: f64,
    pub avg_doc_length: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct TermStats {
    pub doc_freq: f64,
    pub collection_freq: f64,
}

pub fn bm25_idf(c: &CollectionStats, t: &TermStats) -> f64 {
    (1.0 + (c.num_docs - t.doc_freq + 0.5) / (t.doc_freq + 0.5)).ln()
}

pub fn bm25(tf: f64, dl: f64, c: &CollectionStats, t: &TermStats, k1: f64, b: f64) -> f64 {
    let norm = k1 * (1.0 - b + b * dl / c.avg_doc_length);
    bm25_idf(c, t) * tf * (k1 + 1.0) / (tf + norm)
}

pub fn ql_collection_prob(c: &CollectionStats, t: &TermStats) -> f64 {
    t.collection_freq / c.total_tokens
}

/// Contribution of a query term that occurs in the document.
pub fn ql_matched(tf: f64, c: &CollectionStats, t: &TermStats, mu: f64) -> f64 {
    (1.0 + tf / (mu * ql_collection_prob(c, t))).ln()
}

/// Contribution every query term makes to every candidate document.
pub fn ql_background(dl: f64, c: &CollectionStats, t: &TermStats, mu: f64) -> f64 {
    (mu * ql_collection_prob(c, t) / (dl + mu)).ln()
}

pub fn dph(tf: f64, dl: f64, c: &CollectionStats, t: &TermStats) -> f64 {
    let f = tf / dl;
    if f >= 1.0 {
        return 0.0;
    }
    let norm = (1.0 - f) * (1.0 - f) / (tf + 1.0);
    let info = tf * ((tf * c.avg_doc_length / dl) * (c.num_docs / t.collection_freq)).log2()
        + 0.5 * (2.0 * std::f64::consts::PI * tf * (1.0 - f)).log2();
    norm * info
}
