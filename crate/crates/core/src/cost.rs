//! Parameter counts and forward-pass FLOPs for BERT-style cross-encoders, and
//! per-query cost of the three-phase pipeline relative to a single Large
//! re-ranker.
//!
//! Parameters:
//!   embeddings  (vocab + positions + segments) * H + 2H (layer norm)
//!   per layer   12H^2 + 13H  (QKV/output projections, 4H feed-forward, biases, two layer norms)
//!   pooler      H^2 + H
//!
//! Forward FLOPs at sequence length n, embedding lookups excluded:
//!   2 * n * (non-embedding parameters) + 2 * L * n^2 * H * ATTENTION_CONSTANT

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::chunk_spans;
use crate::error::{Error, Result};

pub const VOCAB_SIZE: u64 = 30522;
pub const MAX_POSITIONS: u64 = 512;
pub const SEGMENTS: u64 = 2;
pub const MAX_SEQ_LEN: usize = 384;
/// Two n x n x H matrix products per layer: scores (QK^T) and the weighted sum.
pub const ATTENTION_CONSTANT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Tiny,
    Small,
    Medium,
    Base,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub variant: Variant,
    pub layers: u64,
    pub hidden: u64,
    pub heads: u64,
    pub vocab: u64,
    pub max_seq: usize,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Tiny,
        Variant::Small,
        Variant::Medium,
        Variant::Base,
        Variant::Large,
    ];

    pub fn spec(self) -> VariantSpec {
        let (layers, hidden, heads) = match self {
            Variant::Tiny => (2, 128, 2),
            Variant::Small => (4, 256, 4),
            Variant::Medium => (8, 512, 8),
            Variant::Base => (12, 768, 12),
            Variant::Large => (24, 1024, 16),
        };
        VariantSpec {
            variant: self,
            layers,
            hidden,
            heads,
            vocab: VOCAB_SIZE,
            max_seq: MAX_SEQ_LEN,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Variant::Tiny => 'T',
            Variant::Small => 'S',
            Variant::Medium => 'M',
            Variant::Base => 'B',
            Variant::Large => 'L',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.letter() == c.to_ascii_uppercase())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl VariantSpec {
    pub fn embedding_params(&self) -> u64 {
        (self.vocab + MAX_POSITIONS + SEGMENTS) * self.hidden
    }

    pub fn layer_params(&self) -> u64 {
        let h = self.hidden;
        12 * h * h + 13 * h
    }

    /// Everything except the embedding tables.
    pub fn nonembedding_params(&self) -> u64 {
        let h = self.hidden;
        2 * h + self.layers * self.layer_params() + h * h + h
    }

    pub fn param_count(&self) -> u64 {
        self.embedding_params() + self.nonembedding_params()
    }

    /// One forward pass over `seq_len` tokens.
    pub fn flops_forward(&self, seq_len: usize) -> Result<f64> {
        if seq_len == 0 || seq_len > self.max_seq {
            return Err(Error::InvalidParameter(format!(
                "sequence length {seq_len} outside 1..={}",
                self.max_seq
            )));
        }
        let n = seq_len as f64;
        let linear = 2.0 * n * self.nonembedding_params() as f64;
        let attention = 2.0 * self.layers as f64 * n * n * self.hidden as f64 * ATTENTION_CONSTANT;
        Ok(linear + attention)
    }
}

pub fn param_count(variant: Variant) -> u64 {
    variant.spec().param_count()
}

pub fn flops_forward(variant: Variant, seq_len: usize) -> Result<f64> {
    variant.spec().flops_forward(seq_len)
}

/// Which model runs each phase, written as three letters (e.g. `LMT`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhaseModels {
    pub phase1: Variant,
    pub phase2: Variant,
    pub phase3: Variant,
}

impl PhaseModels {
    pub fn name(&self) -> String {
        [self.phase1, self.phase2, self.phase3]
            .iter()
            .map(|v| v.letter())
            .collect()
    }
}

impl FromStr for PhaseModels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<Variant> = s
            .trim()
            .chars()
            .map(Variant::from_letter)
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model letters in `{s}`")))?;
        match letters.as_slice() {
            &[phase1, phase2, phase3] => Ok(Self { phase1, phase2, phase3 }),
            _ => Err(Error::InvalidParameter(format!(
                "configuration `{s}` must name exactly three models (e.g. LMT)"
            ))),
        }
    }
}

impl fmt::Display for PhaseModels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Counting assumptions for one query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Workload {
    /// Documents re-ranked in phases one and three.
    pub docs: usize,
    /// Scorer inputs per document (one 384-token input, MaxP collapsed to a single pass).
    pub inputs_per_doc: usize,
    /// Passages per feedback document that are chunked in phase two.
    pub feedback_passages_per_doc: usize,
    /// Words in a feedback passage.
    pub passage_words: usize,
    pub phase1_len: usize,
    /// Query-chunk inputs are padded to the full sequence length.
    pub phase2_len: usize,
    pub phase3_len: usize,
}

impl Default for Workload {
    fn default() -> Self {
        Self {
            docs: 1000,
            inputs_per_doc: 1,
            feedback_passages_per_doc: 1,
            passage_words: 100,
            phase1_len: MAX_SEQ_LEN,
            phase2_len: MAX_SEQ_LEN,
            phase3_len: MAX_SEQ_LEN,
        }
    }
}

impl Workload {
    fn validate(&self) -> Result<()> {
        if self.docs == 0
            || self.inputs_per_doc == 0
            || self.feedback_passages_per_doc == 0
            || self.passage_words == 0
        {
            return Err(Error::InvalidParameter("workload counts must be positive".into()));
        }
        Ok(())
    }

    /// Chunks scored in phase two for `k_d` feedback documents.
    pub fn chunk_pairs(&self, k_d: usize, m: usize) -> usize {
        k_d * self.feedback_passages_per_doc * chunk_spans(self.passage_words, m).len()
    }
}

/// Pipeline knobs that affect cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostParams {
    pub k_d: usize,
    pub k_c: usize,
    pub m: usize,
}

impl Default for CostParams {
    fn default() -> Self {
        Self { k_d: 10, k_c: 10, m: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub name: String,
    pub phase1: f64,
    pub phase2: f64,
    pub phase3: f64,
    pub total: f64,
    /// Large re-ranking the same documents (phase one only).
    pub baseline: f64,
    pub ratio: f64,
}

fn baseline_flops(workload: &Workload) -> Result<f64> {
    Ok((workload.docs * workload.inputs_per_doc) as f64
        * flops_forward(Variant::Large, workload.phase1_len)?)
}

/// Per-query FLOPs of the three phases and the ratio to a Large-only re-ranker.
pub fn pipeline_flops(
    models: PhaseModels,
    params: CostParams,
    workload: &Workload,
) -> Result<CostReport> {
    workload.validate()?;
    if params.k_d == 0 || params.k_c == 0 || params.m == 0 {
        return Err(Error::InvalidParameter("k_d, k_c and m must be positive".into()));
    }
    let pairs = (workload.docs * workload.inputs_per_doc) as f64;
    let phase1 = pairs * flops_forward(models.phase1, workload.phase1_len)?;
    let phase2 = workload.chunk_pairs(params.k_d, params.m) as f64
        * flops_forward(models.phase2, workload.phase2_len)?;
    let phase3 = params.k_c as f64 * pairs * flops_forward(models.phase3, workload.phase3_len)?;
    let total = phase1 + phase2 + phase3;
    let baseline = baseline_flops(workload)?;
    Ok(CostReport {
        name: models.name(),
        phase1,
        phase2,
        phase3,
        total,
        baseline,
        ratio: total / baseline,
    })
}

/// A single model re-ranking the documents, relative to Large.
pub fn single_model_flops(variant: Variant, workload: &Workload) -> Result<CostReport> {
    workload.validate()?;
    let phase1 = (workload.docs * workload.inputs_per_doc) as f64
        * flops_forward(variant, workload.phase1_len)?;
    let baseline = baseline_flops(workload)?;
    Ok(CostReport {
        name: format!("{variant}"),
        phase1,
        phase2: 0.0,
        phase3: 0.0,
        total: phase1,
        baseline,
        ratio: phase1 / baseline,
    })
}

/// The thirteen three-letter configurations of the variant study.
pub const STANDARD_CONFIGS: [&str; 13] = [
    "LLL", "LTL", "LSL", "LML", "LBL", "LMT", "LMS", "LMM", "LMB", "LLT", "LLS", "LLM", "LLB",
];

/// Base and Large single-model rows followed by every standard configuration.
pub fn standard_table(params: CostParams, workload: &Workload) -> Result<Vec<CostReport>> {
    let mut rows = vec![
        single_model_flops(Variant::Base, workload)?,
        single_model_flops(Variant::Large, workload)?,
    ];
    for name in STANDARD_CONFIGS {
        rows.push(pipeline_flops(name.parse()?, params, workload)?);
    }
    Ok(rows)
}

/// Fixed-width text table: name, FLOPs per phase (tera), total, ratio.
pub fn format_table(rows: &[CostReport]) -> String {
    let mut out = format!(
        "{:<8}{:>12}{:>12}{:>12}{:>12}{:>9}\n",
        "model", "phase1_T", "phase2_T", "phase3_T", "total_T", "ratio"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<8}{:>12.2}{:>12.2}{:>12.2}{:>12.2}{:>8.2}x\n",
            r.name,
            r.phase1 / 1e12,
            r.phase2 / 1e12,
            r.phase3 / 1e12,
            r.total / 1e12,
            r.ratio
        ));
    }
    out
}
