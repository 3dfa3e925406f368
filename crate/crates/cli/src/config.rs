//! Experiment configuration: defaults, then an optional TOML file, then
//! command-line flags. Relative paths in the file resolve against its directory.
//!
//! ```toml
//! corpus = "corpus.tsv"
//! queries = "queries.tsv"
//! qrels = "qrels.txt"
//! folds = "folds.txt"
//! out = "out"
//!
//! [pipeline]
//! k_d = 10
//! k_c = 10
//! m = 10
//! alpha = 0.4
//! beta = 0.9
//! depth = 1000
//! ablation = "none"
//!
//! [scorers]
//! phase1 = "mock"
//! phase2 = "mock"
//! phase3 = "mock"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chunkqe::lexical::Retrieval;
use chunkqe::pipeline::{Ablation, PipelineConfig};
use chunkqe::scorer::ScorerSpec;
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    index: Option<PathBuf>,
    queries: Option<PathBuf>,
    qrels: Option<PathBuf>,
    folds: Option<PathBuf>,
    initial_run: Option<PathBuf>,
    initial_model: Option<String>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    pipeline: PipelineSection,
    #[serde(default)]
    scorers: ScorerSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineSection {
    k_d: Option<usize>,
    k_c: Option<usize>,
    m: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    depth: Option<usize>,
    ablation: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScorerSection {
    phase1: Option<String>,
    phase2: Option<String>,
    phase3: Option<String>,
}

/// Flags shared by every experiment command.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// TOML experiment file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Corpus as `doc_id<TAB>text` lines
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Index artifact from `chunkqe index` (used instead of --corpus)
    #[arg(long)]
    pub index: Option<PathBuf>,
    /// Queries as `query_id<TAB>text` lines
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// TREC qrels
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Fold file (`fold_index query_id` lines); round-robin when absent
    #[arg(long)]
    pub folds: Option<PathBuf>,
    /// Initial TREC run; computed with --initial-model when absent
    #[arg(long)]
    pub initial_run: Option<PathBuf>,
    /// First-stage model when no initial run is given
    #[arg(long)]
    pub initial_model: Option<String>,
    /// Feedback documents
    #[arg(long)]
    pub kd: Option<usize>,
    /// Feedback chunks
    #[arg(long)]
    pub kc: Option<usize>,
    /// Chunk length in words
    #[arg(long)]
    pub m: Option<usize>,
    /// Weight of chunk evidence against the phase-one score
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of the model score against the initial score
    #[arg(long)]
    pub beta: Option<f64>,
    /// Documents re-ranked per query
    #[arg(long)]
    pub depth: Option<usize>,
    /// `mock[:shift=..,maxlen=..]`, `remote[:timeout_ms=..]` or an http(s) URL
    #[arg(long)]
    pub scorer_phase1: Option<String>,
    /// Scorer for query-chunk pairs; same syntax as --scorer-phase1
    #[arg(long)]
    pub scorer_phase2: Option<String>,
    /// Scorer for chunk-document pairs; same syntax as --scorer-phase1
    #[arg(long)]
    pub scorer_phase3: Option<String>,
    /// none, remove_qd or chunks_from_initial
    #[arg(long)]
    pub ablation: Option<String>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Recorded in reports; the pipeline itself draws no random numbers
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub corpus: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub queries: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub folds: Option<PathBuf>,
    pub initial_run: Option<PathBuf>,
    #[serde(serialize_with = "display")]
    pub initial_model: Retrieval,
    pub out: PathBuf,
    pub seed: u64,
    pub pipeline: PipelineConfig,
    pub scorers: [ScorerSpec; 3],
}

fn display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            corpus: None,
            index: None,
            queries: None,
            qrels: None,
            folds: None,
            initial_run: None,
            initial_model: Retrieval::DphKl,
            out: PathBuf::from("out"),
            seed: 42,
            pipeline: PipelineConfig::default(),
            scorers: Default::default(),
        }
    }
}

fn scorer(s: &str) -> Result<ScorerSpec> {
    s.parse().with_context(|| format!("scorer `{s}`"))
}

impl ExperimentConfig {
    pub fn resolve(args: &ExperimentArgs) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_flags(args)?;
        cfg.pipeline.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let file: FileConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rel = |p: Option<PathBuf>| p.map(|p| base.join(p));
        set(&mut self.corpus, rel(file.corpus));
        set(&mut self.index, rel(file.index));
        set(&mut self.queries, rel(file.queries));
        set(&mut self.qrels, rel(file.qrels));
        set(&mut self.folds, rel(file.folds));
        set(&mut self.initial_run, rel(file.initial_run));
        if let Some(out) = file.out {
            self.out = base.join(out);
        }
        if let Some(m) = file.initial_model {
            self.initial_model = m.parse()?;
        }
        self.seed = file.seed.unwrap_or(self.seed);
        let p = file.pipeline;
        let c = &mut self.pipeline;
        c.k_d = p.k_d.unwrap_or(c.k_d);
        c.k_c = p.k_c.unwrap_or(c.k_c);
        c.m = p.m.unwrap_or(c.m);
        c.alpha = p.alpha.unwrap_or(c.alpha);
        c.beta = p.beta.unwrap_or(c.beta);
        c.rerank_depth = p.depth.unwrap_or(c.rerank_depth);
        if let Some(a) = p.ablation {
            c.ablation = a.parse()?;
        }
        for (slot, spec) in self
            .scorers
            .iter_mut()
            .zip([file.scorers.phase1, file.scorers.phase2, file.scorers.phase3])
        {
            if let Some(s) = spec {
                *slot = scorer(&s)?;
            }
        }
        Ok(())
    }

    fn apply_flags(&mut self, a: &ExperimentArgs) -> Result<()> {
        set(&mut self.corpus, a.corpus.clone());
        set(&mut self.index, a.index.clone());
        set(&mut self.queries, a.queries.clone());
        set(&mut self.qrels, a.qrels.clone());
        set(&mut self.folds, a.folds.clone());
        set(&mut self.initial_run, a.initial_run.clone());
        if let Some(out) = &a.out {
            self.out = out.clone();
        }
        if let Some(m) = &a.initial_model {
            self.initial_model = m.parse()?;
        }
        self.seed = a.seed.unwrap_or(self.seed);
        let c = &mut self.pipeline;
        c.k_d = a.kd.unwrap_or(c.k_d);
        c.k_c = a.kc.unwrap_or(c.k_c);
        c.m = a.m.unwrap_or(c.m);
        c.alpha = a.alpha.unwrap_or(c.alpha);
        c.beta = a.beta.unwrap_or(c.beta);
        c.rerank_depth = a.depth.unwrap_or(c.rerank_depth);
        if let Some(ab) = &a.ablation {
            c.ablation = ab.parse::<Ablation>()?;
        }
        for (slot, spec) in self
            .scorers
            .iter_mut()
            .zip([&a.scorer_phase1, &a.scorer_phase2, &a.scorer_phase3])
        {
            if let Some(s) = spec {
                *slot = scorer(s)?;
            }
        }
        Ok(())
    }

    /// Checks that every named input exists before any work starts.
    pub fn check_inputs(&self, need_qrels: bool) -> Result<()> {
        if self.corpus.is_none() && self.index.is_none() {
            bail!("one of --corpus or --index is required");
        }
        if self.queries.is_none() {
            bail!("--queries is required");
        }
        if need_qrels && self.qrels.is_none() {
            bail!("--qrels is required");
        }
        for p in [
            &self.corpus,
            &self.index,
            &self.queries,
            &self.qrels,
            &self.folds,
            &self.initial_run,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                bail!("input {} does not exist", p.display());
            }
        }
        Ok(())
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}
