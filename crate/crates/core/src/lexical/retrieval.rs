//! Named first-stage retrieval configurations.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{DocWeighting, KlParams, LexicalRanker, Model, Query, Rm3Params};
use crate::error::{Error, Result};
use crate::run::{RankedList, Run};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retrieval {
    Dph,
    Bm25,
    Ql,
    DphKl,
    Bm25Rm3,
    QlRm3,
}

impl Retrieval {
    pub const ALL: [Retrieval; 6] = [
        Retrieval::Dph,
        Retrieval::Bm25,
        Retrieval::Ql,
        Retrieval::DphKl,
        Retrieval::Bm25Rm3,
        Retrieval::QlRm3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Retrieval::Dph => "dph",
            Retrieval::Bm25 => "bm25",
            Retrieval::Ql => "ql",
            Retrieval::DphKl => "dph+kl",
            Retrieval::Bm25Rm3 => "bm25+rm3",
            Retrieval::QlRm3 => "ql+rm3",
        }
    }
}

impl fmt::Display for Retrieval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Retrieval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Retrieval::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown model `{s}` (expected one of dph, bm25, ql, dph+kl, bm25+rm3, ql+rm3)"
                ))
            })
    }
}

impl LexicalRanker<'_> {
    fn rm3(&self, query: &Query, model: Model, weighting: DocWeighting, k: usize) -> Result<RankedList> {
        let params = Rm3Params {
            weighting,
            ..Rm3Params::default()
        };
        let first = self.rank_query(query, model, params.fb_docs.max(1));
        if first.is_empty() {
            return Ok(first);
        }
        let expanded = self.rm3_expand(query, &first, &params)?;
        Ok(self.rank(&expanded, model, k))
    }

    /// Top `k` documents for `query` under a named configuration. RM3 weights
    /// feedback documents by BM25 score, or by likelihood for QL.
    pub fn retrieve(&self, query: &Query, retrieval: Retrieval, k: usize) -> Result<RankedList> {
        match retrieval {
            Retrieval::Dph => Ok(self.rank_query(query, Model::Dph, k)),
            Retrieval::Bm25 => Ok(self.rank_query(query, Model::bm25(), k)),
            Retrieval::Ql => Ok(self.rank_query(query, Model::query_likelihood(), k)),
            Retrieval::DphKl => self.dph_kl(query, k, &KlParams::default()),
            Retrieval::Bm25Rm3 => self.rm3(query, Model::bm25(), DocWeighting::Score, k),
            Retrieval::QlRm3 => {
                self.rm3(query, Model::query_likelihood(), DocWeighting::Likelihood, k)
            }
        }
    }

    /// One ranked list per query, in query order.
    pub fn retrieve_all(&self, queries: &[Query], retrieval: Retrieval, k: usize) -> Result<Run> {
        let lists = queries
            .par_iter()
            .map(|q| self.retrieve(q, retrieval, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Run::new(lists))
    }
}
