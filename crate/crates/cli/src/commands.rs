//! One function per subcommand. Each returns its printable output and leaves
//! files only through [`write_atomic`].

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chunkqe::cost::{self, CostParams, CostReport, PhaseModels, Workload};
use chunkqe::eval::{cross_validate, evaluate, paired_ttest, CvReport, FoldPlan, Metric, Qrels};
use chunkqe::index::{self, InvertedIndex};
use chunkqe::lexical::{read_queries, LexicalRanker, Query, Retrieval};
use chunkqe::pipeline::{run_pipeline, PhaseScorers, PipelineConfig, PipelineRun};
use chunkqe::scorer::{CachedScorer, ScoreCache, SharedScorer};
use chunkqe::synthetic::{self, SyntheticSpec};
use chunkqe::{Corpus, Run};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::output::{write_atomic, write_json};

pub const RUN_TAG: &str = "chunkqe";

/// How a command finished when it did not fail outright.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Complete,
    /// Outputs were written but these queries failed.
    Partial(Vec<String>),
}

pub fn load_collection(corpus: Option<&Path>, index: Option<&Path>) -> Result<(Corpus, InvertedIndex)> {
    let (corpus, index) = match (index, corpus) {
        (Some(path), _) => {
            index::load(path).with_context(|| format!("loading index {}", path.display()))?
        }
        (None, Some(path)) => {
            let corpus = Corpus::read_tsv(path)?;
            let index = InvertedIndex::build(&corpus);
            (corpus, index)
        }
        (None, None) => bail!("one of --corpus or --index is required"),
    };
    if corpus.is_empty() {
        bail!("the corpus contains no documents");
    }
    Ok((corpus, index))
}

pub fn synth(out: &Path, spec: &SyntheticSpec) -> Result<String> {
    let collection = synthetic::generate(spec)?;
    let ids: Vec<&str> = collection.queries.iter().map(|q| q.query_id.as_str()).collect();
    let folds = FoldPlan::round_robin(&ids)?;
    write_atomic(&out.join("corpus.tsv"), collection.corpus.to_tsv().as_bytes())?;
    write_atomic(&out.join("queries.tsv"), collection.queries_tsv().as_bytes())?;
    write_atomic(&out.join("qrels.txt"), collection.qrels.to_trec_string().as_bytes())?;
    write_atomic(&out.join("folds.txt"), folds.to_file_string().as_bytes())?;
    let experiment = "corpus = \"corpus.tsv\"\nqueries = \"queries.tsv\"\nqrels = \"qrels.txt\"\n\
                      folds = \"folds.txt\"\nout = \"out\"\n";
    write_atomic(&out.join("experiment.toml"), experiment.as_bytes())?;
    Ok(format!(
        "wrote {} documents, {} queries, {} judged queries to {}\n",
        collection.corpus.len(),
        collection.queries.len(),
        collection.qrels.len(),
        out.display()
    ))
}

pub fn build_index(corpus_path: &Path, out: &Path) -> Result<String> {
    let (corpus, index) = load_collection(Some(corpus_path), None)?;
    let mut bytes = Vec::new();
    index::write_artifact(&mut bytes, &corpus, &index)?;
    write_atomic(out, &bytes)?;
    Ok(format!(
        "documents\t{}\nterms\t{}\ntokens\t{}\navg_doc_length\t{:.4}\n",
        index.num_docs(),
        index.num_terms(),
        index.total_tokens(),
        index.avg_doc_length()
    ))
}

pub fn rank(
    corpus: Option<&Path>,
    index: Option<&Path>,
    queries: &Path,
    model: &str,
    k: usize,
    out: &Path,
) -> Result<String> {
    let retrieval: Retrieval = model.parse()?;
    if k == 0 {
        bail!("k must be positive");
    }
    let (_, index) = load_collection(corpus, index)?;
    let queries = read_queries(queries)?;
    let run = LexicalRanker::new(&index).retrieve_all(&queries, retrieval, k)?;
    write_atomic(out, run.to_trec_string(retrieval.name()).as_bytes())?;
    Ok(format!("{} queries ranked with {retrieval}\n", run.len()))
}

/// Loaded inputs and scorers for pipeline commands.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub corpus: Corpus,
    pub index: Arc<InvertedIndex>,
    pub queries: Vec<Query>,
    pub initial: Run,
    pub scorers: PhaseScorers,
}

impl Experiment {
    pub fn load(config: ExperimentConfig, need_qrels: bool) -> Result<Self> {
        config.check_inputs(need_qrels)?;
        let (corpus, index) = load_collection(config.corpus.as_deref(), config.index.as_deref())?;
        let index = Arc::new(index);
        let queries = read_queries(config.queries.as_deref().expect("checked"))?;
        let initial = match &config.initial_run {
            Some(path) => Run::read(path)?,
            None => LexicalRanker::new(&index).retrieve_all(
                &queries,
                config.initial_model,
                config.pipeline.rerank_depth,
            )?,
        };
        let cache = Arc::new(ScoreCache::new());
        let build = |i: usize| -> Result<SharedScorer> {
            let inner = config.scorers[i]
                .build(Some(index.clone()))
                .with_context(|| format!("phase {} scorer", i + 1))?;
            Ok(Arc::new(CachedScorer::new(inner, cache.clone())))
        };
        let scorers = PhaseScorers {
            phase1: build(0)?,
            phase2: build(1)?,
            phase3: build(2)?,
        };
        Ok(Self {
            config,
            corpus,
            index,
            queries,
            initial,
            scorers,
        })
    }

    pub fn run(&self, pipeline: &PipelineConfig) -> Result<PipelineRun> {
        Ok(run_pipeline(
            &self.queries,
            &self.initial,
            &self.corpus,
            &self.scorers,
            pipeline,
        )?)
    }

    fn qrels(&self) -> Result<Qrels> {
        let path = self.config.qrels.as_deref().context("--qrels is required")?;
        Ok(Qrels::read(path)?)
    }

    fn scorer_ids(&self) -> [String; 3] {
        [&self.scorers.phase1, &self.scorers.phase2, &self.scorers.phase3]
            .map(|s| s.id().to_owned())
    }
}

/// Writes trace.jsonl and failures.tsv (removing a stale one) for a pipeline run.
fn write_run_side_files(out: &Path, run: &PipelineRun) -> Result<Status> {
    let mut traces = String::new();
    for t in run.traces() {
        traces.push_str(&t.to_json_line());
        traces.push('\n');
    }
    write_atomic(&out.join("trace.jsonl"), traces.as_bytes())?;
    let failures_path = out.join("failures.tsv");
    let failed: Vec<String> = run.failures().map(|f| f.query_id.clone()).collect();
    if failed.is_empty() {
        if failures_path.exists() {
            std::fs::remove_file(&failures_path)?;
        }
        return Ok(Status::Complete);
    }
    let text: String = run
        .failures()
        .map(|f| format!("{}\t{}\n", f.query_id, f.error.replace(['\t', '\n'], " ")))
        .collect();
    write_atomic(&failures_path, text.as_bytes())?;
    Ok(Status::Partial(failed))
}

/// Runs the three-phase pipeline at the configured alpha and beta.
pub fn qe(config: ExperimentConfig) -> Result<(String, Status)> {
    let exp = Experiment::load(config, false)?;
    let out = exp.config.out.clone();
    let run = exp.run(&exp.config.pipeline)?;
    write_atomic(&out.join("initial.txt"), exp.initial.to_trec_string("initial").as_bytes())?;
    write_atomic(&out.join("run.txt"), run.run().to_trec_string(RUN_TAG).as_bytes())?;
    let status = write_run_side_files(&out, &run)?;
    let summary = format!(
        "{} queries re-ranked, {} failed; outputs in {}\n",
        run.traces().count(),
        run.failures().count(),
        out.display()
    );
    Ok((summary, status))
}

pub fn parse_metrics(list: &str) -> Result<Vec<Metric>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<Metric>().map_err(anyhow::Error::from))
        .collect()
}

pub fn eval(run: &Path, qrels: &Path, metrics: &[Metric], per_query: bool, json: bool) -> Result<String> {
    let report = evaluate(&Run::read(run)?, &Qrels::read(qrels)?, metrics);
    if json {
        return Ok(serde_json::to_string_pretty(&report)? + "\n");
    }
    let mut text = report.to_text(per_query);
    for q in &report.skipped {
        text.push_str(&format!("skipped\t{q}\tno judgments\n"));
    }
    Ok(text)
}

pub fn sigtest(run_a: &Path, run_b: &Path, qrels: &Path, metric: Metric) -> Result<String> {
    let qrels = Qrels::read(qrels)?;
    let a = evaluate(&Run::read(run_a)?, &qrels, &[metric]);
    let b = evaluate(&Run::read(run_b)?, &qrels, &[metric]);
    let (va, vb) = (a.values(metric).expect("metric"), b.values(metric).expect("metric"));
    let common: Vec<&str> = va.keys().filter(|q| vb.contains_key(*q)).copied().collect();
    let xs: Vec<f64> = common.iter().map(|q| va[q]).collect();
    let ys: Vec<f64> = common.iter().map(|q| vb[q]).collect();
    let test = paired_ttest(&ys, &xs)?;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(format!(
        "metric\t{metric}\nqueries\t{}\nmean_a\t{:.4}\nmean_b\t{:.4}\nt\t{:.4}\np\t{:.6}\nsignificance\t{}\n{}",
        test.n,
        mean(&xs),
        mean(&ys),
        test.t,
        test.p,
        if test.stars().is_empty() { "-" } else { test.stars() },
        if test.degenerate { "note\tzero variance in differences\n" } else { "" },
    ))
}

#[derive(Serialize)]
struct CvOutput<'a> {
    initial_model: String,
    pipeline: &'a PipelineConfig,
    scorers: [String; 3],
    seed: u64,
    failed_queries: Vec<String>,
    cv: &'a CvReport,
}

/// Runs the pipeline once, then tunes alpha and beta per fold on validation
/// NDCG@20 and reports pooled test metrics.
pub fn cv(config: ExperimentConfig) -> Result<(String, Status)> {
    let exp = Experiment::load(config, true)?;
    let qrels = exp.qrels()?;
    let ids: Vec<&str> = exp.queries.iter().map(|q| q.query_id.as_str()).collect();
    let plan = match &exp.config.folds {
        Some(path) => {
            let plan = FoldPlan::read(path)?;
            plan.check_partition(&ids)?;
            plan
        }
        None => FoldPlan::round_robin(&ids)?,
    };
    let run = exp.run(&exp.config.pipeline)?;
    let report = cross_validate(&run, &plan, &qrels, &Metric::standard(), Metric::Ndcg(20))?;

    let out = exp.config.out.clone();
    write_atomic(&out.join("initial.txt"), exp.initial.to_trec_string("initial").as_bytes())?;
    let status = write_run_side_files(&out, &run)?;
    let failed = match &status {
        Status::Complete => Vec::new(),
        Status::Partial(q) => q.clone(),
    };
    let mut text = report.to_text();
    if !failed.is_empty() {
        text.push_str(&format!("PARTIAL\tfailed queries: {}\n", failed.join(" ")));
    }
    write_atomic(&out.join("run.txt"), report.run.to_trec_string(RUN_TAG).as_bytes())?;
    write_atomic(&out.join("cv_report.txt"), text.as_bytes())?;
    write_json(
        &out.join("cv_report.json"),
        &CvOutput {
            initial_model: exp.config.initial_model.to_string(),
            pipeline: &exp.config.pipeline,
            scorers: exp.scorer_ids(),
            seed: exp.config.seed,
            failed_queries: failed,
            cv: &report,
        },
    )?;
    Ok((text, status))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    #[value(name = "k_c", alias = "kc")]
    Kc,
    M,
}

/// One pipeline run per value of `k_c` or `m`, at the configured alpha and beta.
pub fn sweep(config: ExperimentConfig, param: SweepParam, values: &[i64]) -> Result<(String, Status)> {
    if values.is_empty() {
        bail!("no sweep values given");
    }
    if let Some(v) = values.iter().find(|&&v| v <= 0) {
        bail!("sweep values must be positive, got {v}");
    }
    let exp = Experiment::load(config, true)?;
    let qrels = exp.qrels()?;
    let metrics = [Metric::Precision(20), Metric::Ndcg(20), Metric::Map(1000)];
    let name = match param {
        SweepParam::Kc => "k_c",
        SweepParam::M => "m",
    };
    let mut text = format!("{name}\t{}\t{}\t{}\n", metrics[0], metrics[1], metrics[2]);
    let mut failed = BTreeMap::new();
    for &v in values {
        let mut pipeline = exp.config.pipeline;
        match param {
            SweepParam::Kc => pipeline.k_c = v as usize,
            SweepParam::M => pipeline.m = v as usize,
        }
        let run = exp.run(&pipeline)?;
        for f in run.failures() {
            failed.insert(f.query_id.clone(), f.error.clone());
        }
        let report = evaluate(&run.run(), &qrels, &metrics);
        text.push_str(&v.to_string());
        for m in report.means {
            text.push_str(&format!("\t{m:.4}"));
        }
        text.push('\n');
    }
    let status = if failed.is_empty() {
        Status::Complete
    } else {
        text.push_str(&format!(
            "PARTIAL\tfailed queries: {}\n",
            failed.keys().cloned().collect::<Vec<_>>().join(" ")
        ));
        Status::Partial(failed.into_keys().collect())
    };
    write_atomic(&exp.config.out.join(format!("sweep_{name}.txt")), text.as_bytes())?;
    Ok((text, status))
}

pub fn cost(config: Option<&str>, params: CostParams, json: bool) -> Result<String> {
    let workload = Workload::default();
    let rows: Vec<CostReport> = match config {
        Some(name) => vec![cost::pipeline_flops(name.parse::<PhaseModels>()?, params, &workload)?],
        None => cost::standard_table(params, &workload)?,
    };
    if json {
        return Ok(serde_json::to_string_pretty(&rows)? + "\n");
    }
    let mut text = cost::format_table(&rows);
    if config.is_none() {
        text.push_str("\nparameters\n");
        for v in cost::Variant::ALL {
            text.push_str(&format!("{:<8}{:>12}\n", v.to_string(), cost::param_count(v)));
        }
    }
    Ok(text)
}
