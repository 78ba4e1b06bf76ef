//! End-to-end orchestration: split, retrieve, prompt, generate, score.
//!
//! One experiment is a grid over seeds x seen-ratios x lambdas x shot mixes.
//! Every cell writes its split, prompts, completions, and per-sample scores
//! as JSONL under its own directory, plus a run-level aggregate and manifest.
//! Completions are cached by content hash of (backend, model, prompt), so
//! reruns and lambda sweeps skip generation wherever prompts coincide.

mod report;

pub use report::{write_report_csv, ReportRow};

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{self, DatasetError, Record};
use crate::embeddings::{DeterministicLocalBackend, EmbedError, Embedder, RemoteEmbeddingBackend};
use crate::llm::{
    FixtureBackend, GenerationConfig, LlmBackend, LlmError, MockEchoBackend, RemoteLlmBackend,
};
use crate::metrics::{self, MetricsError, SampleScore, SlotAveraging};
use crate::prompting::{build_prompt, extract_output, PromptError, PromptLayout};
use crate::proleg::serialize_fact_set;
use crate::selection::{
    diversity_report, select_hybrid, BoundaryMode, DemoKind, Demonstration, DiversityReport,
    Pool, SelectError,
};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Select(#[from] SelectError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid shot spec `{0}` (expected forms like `3c`, `5c`, `3c+3t`)")]
    BadShotSpec(String),
    #[error("missing manifest: {0}")]
    MissingManifest(String),
    #[error("config: {0}")]
    Config(String),
}

/// A few-shot mix: `n` case demonstrations plus `m` template demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ShotSpec {
    pub n_case: usize,
    pub m_template: usize,
}

impl ShotSpec {
    pub fn new(n_case: usize, m_template: usize) -> Self {
        ShotSpec { n_case, m_template }
    }
}

impl std::fmt::Display for ShotSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.n_case, self.m_template) {
            (n, 0) => write!(f, "{n}c"),
            (0, m) => write!(f, "{m}t"),
            (n, m) => write!(f, "{n}c+{m}t"),
        }
    }
}

impl FromStr for ShotSpec {
    type Err = RunnerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut n_case = 0usize;
        let mut m_template = 0usize;
        for part in s.split('+') {
            let part = part.trim();
            if part.len() < 2 {
                return Err(RunnerError::BadShotSpec(s.to_string()));
            }
            let (digits, kind) = part.split_at(part.len() - 1);
            let count: usize = digits
                .parse()
                .map_err(|_| RunnerError::BadShotSpec(s.to_string()))?;
            match kind {
                "c" => n_case += count,
                "t" => m_template += count,
                _ => return Err(RunnerError::BadShotSpec(s.to_string())),
            }
        }
        if n_case + m_template == 0 {
            return Err(RunnerError::BadShotSpec(s.to_string()));
        }
        Ok(ShotSpec { n_case, m_template })
    }
}

impl TryFrom<String> for ShotSpec {
    type Error = RunnerError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ShotSpec> for String {
    fn from(s: ShotSpec) -> String {
        s.to_string()
    }
}

/// Which embedding backend a run uses.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EmbeddingChoice {
    #[default]
    Local,
    LocalWithDimension {
        dimension: usize,
    },
    /// Reads EMBED_API_BASE / EMBED_API_KEY / EMBED_MODEL.
    RemoteFromEnv,
}

/// Which generation backend a run uses.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LlmChoice {
    /// Echoes the gold output for every corpus record: pipeline identity.
    #[default]
    MockEcho,
    /// Replays recorded completions from a JSONL fixture file.
    Fixture { path: PathBuf },
    /// Reads LLM_API_BASE / LLM_API_KEY.
    RemoteFromEnv {
        #[serde(default = "default_rate_limit")]
        requests_per_sec: f64,
        #[serde(default)]
        use_system_role: bool,
    },
}

fn default_rate_limit() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub corpus_path: PathBuf,
    pub output_dir: PathBuf,
    pub seeds: Vec<i64>,
    pub seen_ratios: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub shots: Vec<ShotSpec>,
    pub boundary_size: usize,
    pub boundary_mode: BoundaryMode,
    /// Deduplicate the template pool by template id.
    pub dedup_template_pool: bool,
    /// Drop the query's own record from retrieval pools (always true under
    /// template-disjoint splits; kept as an explicit guard).
    pub exclude_query_id: bool,
    pub include_skeleton_block: bool,
    pub slot_averaging: SlotAveraging,
    /// Label written into reports (the model name for remote runs).
    pub model_label: String,
    pub embedding: EmbeddingChoice,
    pub llm: LlmChoice,
    pub generation: GenerationConfig,
    /// In-flight samples per cell.
    pub concurrency: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            corpus_path: PathBuf::new(),
            output_dir: PathBuf::new(),
            seeds: vec![0, 1, 2, 3, 4],
            seen_ratios: vec![0.2, 0.4, 0.5, 0.6, 0.8],
            lambdas: vec![0.6],
            shots: vec![ShotSpec::new(3, 3)],
            boundary_size: crate::selection::DEFAULT_BOUNDARY_SIZE,
            boundary_mode: BoundaryMode::Shrinking,
            dedup_template_pool: true,
            exclude_query_id: true,
            include_skeleton_block: true,
            slot_averaging: SlotAveraging::Pooled,
            model_label: "mock-echo".into(),
            embedding: EmbeddingChoice::Local,
            llm: LlmChoice::MockEcho,
            generation: GenerationConfig::default(),
            concurrency: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.seeds.is_empty() {
            return Err(RunnerError::Config("seeds must be non-empty".into()));
        }
        if self.seen_ratios.iter().any(|r| !(0.0 < *r && *r < 1.0)) {
            return Err(RunnerError::Config(
                "every seen_ratio must be in (0, 1)".into(),
            ));
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(RunnerError::Config("every lambda must be in [0, 1]".into()));
        }
        if self.shots.is_empty() {
            return Err(RunnerError::Config("shots must be non-empty".into()));
        }
        if self.concurrency == 0 {
            return Err(RunnerError::Config("concurrency must be positive".into()));
        }
        Ok(())
    }
}

/// Per-sample score line, as written to scores.jsonl.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub exact: u8,
    pub soft: f64,
    pub struct_match: bool,
    pub parse_failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PromptRecord {
    id: String,
    prompt_sha256: String,
    prompt: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CompletionRecord {
    id: String,
    prompt_sha256: String,
    completion: String,
}

/// Summary of one grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSummary {
    pub seed: i64,
    pub ratio: f64,
    pub lambda: f64,
    pub shots: ShotSpec,
    pub n: usize,
    pub exact_acc: f64,
    pub soft_acc: f64,
    pub parse_fail_rate: f64,
    pub mean_pairwise_sim: Option<f64>,
    pub mean_sim_to_query: Option<f64>,
}

/// Cross-seed summary for one (ratio, lambda, shots) configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSummary {
    pub ratio: f64,
    pub lambda: f64,
    pub shots: ShotSpec,
    pub n_seeds: usize,
    pub exact_acc_mean: f64,
    pub exact_acc_std: f64,
    pub soft_acc_mean: f64,
    pub soft_acc_std: f64,
    pub mean_pairwise_sim: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateReport {
    pub model: String,
    pub cells: Vec<CellSummary>,
    pub groups: Vec<GroupSummary>,
}

/// Paths of everything one cell wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellPaths {
    pub seed: i64,
    pub ratio: f64,
    pub lambda: f64,
    pub shots: ShotSpec,
    pub dir: PathBuf,
    pub split: PathBuf,
    pub prompts: PathBuf,
    pub completions: PathBuf,
    pub scores: PathBuf,
}

/// Run manifest: config snapshot plus artifact paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub cells: Vec<CellPaths>,
    pub aggregate: PathBuf,
}

pub fn build_embedder(
    choice: &EmbeddingChoice,
    cache_path: Option<&Path>,
) -> Result<Embedder, RunnerError> {
    macro_rules! wrap {
        ($backend:expr) => {
            match cache_path {
                Some(path) => Embedder::with_cache($backend, path)?,
                None => Embedder::new($backend),
            }
        };
    }
    Ok(match choice {
        EmbeddingChoice::Local => wrap!(DeterministicLocalBackend::default()),
        EmbeddingChoice::LocalWithDimension { dimension } => {
            wrap!(DeterministicLocalBackend::with_dimension(*dimension))
        }
        EmbeddingChoice::RemoteFromEnv => wrap!(RemoteEmbeddingBackend::from_env()?),
    })
}

pub fn build_llm(
    choice: &LlmChoice,
    corpus: &[Record],
) -> Result<Box<dyn LlmBackend>, RunnerError> {
    Ok(match choice {
        LlmChoice::MockEcho => {
            let mut echo = MockEchoBackend::new();
            for record in corpus {
                echo.register(&record.case_text, serialize_fact_set(&record.facts));
            }
            Box::new(echo)
        }
        LlmChoice::Fixture { path } => Box::new(FixtureBackend::load(path)?),
        LlmChoice::RemoteFromEnv {
            requests_per_sec,
            use_system_role,
        } => Box::new(
            RemoteLlmBackend::from_env()?
                .with_rate_limit(*requests_per_sec)
                .with_system_role(*use_system_role),
        ),
    })
}

/// Persistent completion cache: JSONL of {key, completion}, keyed by
/// sha256(backend kind, model, prompt).
struct CompletionCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    key: String,
    completion: String,
}

impl CompletionCache {
    fn open(path: PathBuf) -> Result<Self, RunnerError> {
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            for line in text.lines() {
                if line.trim().is_empty() {
                    continue;
                }
                // Tolerate a torn trailing line from an interrupted run.
                if let Ok(parsed) = serde_json::from_str::<CacheLine>(line) {
                    entries.insert(parsed.key, parsed.completion);
                }
            }
        } else if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        Ok(CompletionCache {
            path,
            entries: Mutex::new(entries),
        })
    }

    fn key(backend_kind: &str, model: &str, prompt: &str) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(backend_kind.as_bytes());
        hasher.update([0u8]);
        hasher.update(model.as_bytes());
        hasher.update([0u8]);
        hasher.update(prompt.as_bytes());
        hex::encode(hasher.finalize())
    }

    fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    fn put(&self, key: String, completion: String) -> Result<(), RunnerError> {
        let mut entries = self.entries.lock().unwrap();
        if entries.contains_key(&key) {
            return Ok(());
        }
        let line = serde_json::to_string(&CacheLine {
            key: key.clone(),
            completion: completion.clone(),
        })?;
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(file, "{line}")?;
        entries.insert(key, completion);
        Ok(())
    }
}

struct SampleOutcome {
    id: String,
    prompt: String,
    prompt_hash: String,
    completion: Option<String>,
    score: SampleScore,
    error: Option<String>,
    diversity: Option<DiversityReport>,
}

fn record_to_case_demo(record: &Record) -> Demonstration {
    Demonstration::new(
        record.id.clone(),
        DemoKind::Case,
        record.case_text.clone(),
        record.facts.clone(),
    )
}

fn record_to_template_demo(record: &Record) -> Demonstration {
    Demonstration::new(
        record.id.clone(),
        DemoKind::Template,
        record.template_text.clone(),
        record.facts.clone(),
    )
}

/// Build retrieval pools from the training side.
fn build_pools(train: &[&Record], dedup_templates: bool) -> Result<(Pool, Pool), RunnerError> {
    let case_pool = Pool::new(
        DemoKind::Case,
        train.iter().map(|r| record_to_case_demo(r)).collect(),
    )?;
    let mut seen = std::collections::HashSet::new();
    let mut template_items = Vec::new();
    for record in train {
        if dedup_templates && !seen.insert(record.template_id()) {
            continue;
        }
        template_items.push(record_to_template_demo(record));
    }
    let template_pool = Pool::new(DemoKind::Template, template_items)?;
    Ok((case_pool, template_pool))
}

fn pool_without(pool: &Pool, id: &str) -> Result<Option<Pool>, RunnerError> {
    if !pool.items().iter().any(|d| d.id == id) {
        return Ok(None);
    }
    let items: Vec<Demonstration> = pool
        .items()
        .iter()
        .filter(|d| d.id != id)
        .cloned()
        .collect();
    Ok(Some(Pool::new(pool.kind(), items)?))
}

#[allow(clippy::too_many_arguments)]
fn run_sample(
    record: &Record,
    case_pool: &Pool,
    template_pool: &Pool,
    cfg: &ExperimentConfig,
    lambda: f64,
    shots: ShotSpec,
    embedder: &Embedder,
    llm: &dyn LlmBackend,
    cache: &CompletionCache,
) -> SampleOutcome {
    let mut outcome = SampleOutcome {
        id: record.id.clone(),
        prompt: String::new(),
        prompt_hash: String::new(),
        completion: None,
        score: SampleScore::parse_failure(),
        error: None,
        diversity: None,
    };

    let mut step = || -> Result<(), RunnerError> {
        let (case_pool_q, template_pool_q);
        let (case_ref, template_ref) = if cfg.exclude_query_id {
            case_pool_q = pool_without(case_pool, &record.id)?;
            template_pool_q = pool_without(template_pool, &record.id)?;
            (
                case_pool_q.as_ref().unwrap_or(case_pool),
                template_pool_q.as_ref().unwrap_or(template_pool),
            )
        } else {
            (case_pool, template_pool)
        };

        let selection = select_hybrid(
            &record.case_text,
            case_ref,
            template_ref,
            shots.n_case,
            shots.m_template,
            lambda,
            (cfg.boundary_size, cfg.boundary_mode),
            embedder,
        )?;
        outcome.diversity = diversity_report(&selection).ok();

        let layout = PromptLayout {
            include_skeleton_block: cfg.include_skeleton_block,
            ..PromptLayout::default()
        };
        let prompt = build_prompt(&record.legal_case(), &selection, &layout)?;
        outcome.prompt_hash = CompletionCache::key(llm.kind_name(), &cfg.generation.model, &prompt);
        outcome.prompt = prompt;

        let completion = match cache.get(&outcome.prompt_hash) {
            Some(hit) => hit,
            None => {
                let fresh = llm.generate(&outcome.prompt, &cfg.generation)?;
                cache.put(outcome.prompt_hash.clone(), fresh.clone())?;
                fresh
            }
        };
        outcome.completion = Some(completion.clone());

        let parsed = extract_output(&completion);
        outcome.score = match parsed {
            Err(failure) => {
                outcome.error = Some(failure.reason);
                SampleScore::parse_failure()
            }
            Ok(pred) => {
                metrics::score_sample(Some(&pred), &record.facts, embedder, cfg.slot_averaging)?
            }
        };
        Ok(())
    };

    if let Err(e) = step() {
        outcome.error = Some(e.to_string());
        outcome.score = SampleScore::parse_failure();
    }
    outcome
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), RunnerError> {
    let mut file = std::fs::File::create(path)?;
    for row in rows {
        let line = serde_json::to_string(row)?;
        writeln!(file, "{line}")?;
    }
    Ok(())
}

fn float_label(x: f64) -> String {
    format!("{x}").replace('.', "p")
}

/// Execute the full experiment grid described by `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunManifest, RunnerError> {
    cfg.validate()?;
    let (corpus, _warnings) = dataset::load_corpus(&cfg.corpus_path)?;
    if corpus.is_empty() {
        return Err(RunnerError::Dataset(DatasetError::EmptyCorpus));
    }
    let embedder = build_embedder(
        &cfg.embedding,
        Some(&cfg.output_dir.join("cache/embeddings.bin")),
    )?;
    let llm = build_llm(&cfg.llm, &corpus)?;
    run_experiment_with(cfg, &corpus, &embedder, llm.as_ref())
}

/// Like [`run_experiment`] with injected corpus and backends.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    corpus: &[Record],
    embedder: &Embedder,
    llm: &dyn LlmBackend,
) -> Result<RunManifest, RunnerError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let cache = CompletionCache::open(cfg.output_dir.join("cache/completions.jsonl"))?;
    let by_id: HashMap<&str, &Record> = corpus.iter().map(|r| (r.id.as_str(), r)).collect();

    let thread_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| RunnerError::Config(e.to_string()))?;

    let mut cells = Vec::new();
    let mut summaries: Vec<CellSummary> = Vec::new();
    let mut all_scores: Vec<(i64, f64, f64, ShotSpec, SampleScore)> = Vec::new();

    for &seed in &cfg.seeds {
        for &ratio in &cfg.seen_ratios {
            let split = dataset::make_split(corpus, seed, ratio)?;
            let train: Vec<&Record> = split
                .train_ids
                .iter()
                .map(|id| by_id[id.as_str()])
                .collect();
            let test: Vec<&Record> = split
                .test_ids
                .iter()
                .map(|id| by_id[id.as_str()])
                .collect();
            let (case_pool, template_pool) = build_pools(&train, cfg.dedup_template_pool)?;

            for &lambda in &cfg.lambdas {
                for &shots in &cfg.shots {
                    let dir = cfg.output_dir.join(format!(
                        "runs/seed{seed}_ratio{}_lambda{}_shots{shots}",
                        float_label(ratio),
                        float_label(lambda),
                    ));
                    std::fs::create_dir_all(&dir)?;

                    let outcomes: Vec<SampleOutcome> = thread_pool.install(|| {
                        use rayon::prelude::*;
                        test.par_iter()
                            .map(|record| {
                                run_sample(
                                    record,
                                    &case_pool,
                                    &template_pool,
                                    cfg,
                                    lambda,
                                    shots,
                                    embedder,
                                    llm,
                                    &cache,
                                )
                            })
                            .collect()
                    });

                    let paths = CellPaths {
                        seed,
                        ratio,
                        lambda,
                        shots,
                        dir: dir.clone(),
                        split: dir.join("split.json"),
                        prompts: dir.join("prompts.jsonl"),
                        completions: dir.join("completions.jsonl"),
                        scores: dir.join("scores.jsonl"),
                    };
                    std::fs::write(&paths.split, serde_json::to_string_pretty(&split)?)?;
                    let prompt_rows: Vec<PromptRecord> = outcomes
                        .iter()
                        .map(|o| PromptRecord {
                            id: o.id.clone(),
                            prompt_sha256: o.prompt_hash.clone(),
                            prompt: o.prompt.clone(),
                        })
                        .collect();
                    write_jsonl(&paths.prompts, &prompt_rows)?;
                    let completion_rows: Vec<CompletionRecord> = outcomes
                        .iter()
                        .map(|o| CompletionRecord {
                            id: o.id.clone(),
                            prompt_sha256: o.prompt_hash.clone(),
                            completion: o.completion.clone().unwrap_or_default(),
                        })
                        .collect();
                    write_jsonl(&paths.completions, &completion_rows)?;
                    let score_rows: Vec<ScoreRecord> = outcomes
                        .iter()
                        .map(|o| ScoreRecord {
                            id: o.id.clone(),
                            exact: o.score.exact as u8,
                            soft: o.score.soft,
                            struct_match: o.score.struct_match,
                            parse_failed: o.score.parse_failed,
                            error: o.error.clone(),
                        })
                        .collect();
                    write_jsonl(&paths.scores, &score_rows)?;

                    let n = outcomes.len();
                    let exact_acc =
                        outcomes.iter().filter(|o| o.score.exact).count() as f64 / n.max(1) as f64;
                    let soft_acc =
                        outcomes.iter().map(|o| o.score.soft).sum::<f64>() / n.max(1) as f64;
                    let parse_fail_rate =
                        outcomes.iter().filter(|o| o.score.parse_failed).count() as f64
                            / n.max(1) as f64;
                    let diversity: Vec<&DiversityReport> =
                        outcomes.iter().filter_map(|o| o.diversity.as_ref()).collect();
                    let mean_of = |f: fn(&DiversityReport) -> f64| {
                        if diversity.is_empty() {
                            None
                        } else {
                            Some(
                                diversity.iter().map(|d| f(d)).sum::<f64>()
                                    / diversity.len() as f64,
                            )
                        }
                    };
                    summaries.push(CellSummary {
                        seed,
                        ratio,
                        lambda,
                        shots,
                        n,
                        exact_acc,
                        soft_acc,
                        parse_fail_rate,
                        mean_pairwise_sim: mean_of(|d| d.mean_pairwise_sim),
                        mean_sim_to_query: mean_of(|d| d.mean_sim_to_query),
                    });
                    for o in &outcomes {
                        all_scores.push((seed, ratio, lambda, shots, o.score));
                    }
                    cells.push(paths);
                }
            }
        }
    }

    // Cross-seed groups per (ratio, lambda, shots).
    let mut group_keys: Vec<(f64, f64, ShotSpec)> = Vec::new();
    for cell in &summaries {
        let key = (cell.ratio, cell.lambda, cell.shots);
        if !group_keys.contains(&key) {
            group_keys.push(key);
        }
    }
    let mut groups = Vec::new();
    for (ratio, lambda, shots) in group_keys {
        let scores: Vec<SampleScore> = all_scores
            .iter()
            .filter(|(_, r, l, s, _)| *r == ratio && *l == lambda && *s == shots)
            .map(|(_, _, _, _, score)| *score)
            .collect();
        let labels: Vec<i64> = all_scores
            .iter()
            .filter(|(_, r, l, s, _)| *r == ratio && *l == lambda && *s == shots)
            .map(|(seed, _, _, _, _)| *seed)
            .collect();
        let agg = metrics::aggregate(&scores, &labels)?;
        let cell_divs: Vec<f64> = summaries
            .iter()
            .filter(|c| c.ratio == ratio && c.lambda == lambda && c.shots == shots)
            .filter_map(|c| c.mean_pairwise_sim)
            .collect();
        groups.push(GroupSummary {
            ratio,
            lambda,
            shots,
            n_seeds: agg.per_seed.len(),
            exact_acc_mean: agg.seed_mean_exact,
            exact_acc_std: agg.seed_std_exact,
            soft_acc_mean: agg.seed_mean_soft,
            soft_acc_std: agg.seed_std_soft,
            mean_pairwise_sim: if cell_divs.is_empty() {
                None
            } else {
                Some(cell_divs.iter().sum::<f64>() / cell_divs.len() as f64)
            },
        });
    }

    let aggregate = AggregateReport {
        model: cfg.model_label.clone(),
        cells: summaries,
        groups,
    };
    let aggregate_path = cfg.output_dir.join("aggregate.json");
    std::fs::write(&aggregate_path, serde_json::to_string_pretty(&aggregate)?)?;

    let manifest = RunManifest {
        config: cfg.clone(),
        cells,
        aggregate: aggregate_path.clone(),
    };
    let manifest_path = cfg.output_dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Load a manifest written by [`run_experiment`].
pub fn load_manifest(path: impl AsRef<Path>) -> Result<RunManifest, RunnerError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|_| RunnerError::MissingManifest(path.display().to_string()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Load the aggregate report referenced by a manifest.
pub fn load_aggregate(manifest: &RunManifest) -> Result<AggregateReport, RunnerError> {
    let text = std::fs::read_to_string(&manifest.aggregate)
        .map_err(|_| RunnerError::MissingManifest(manifest.aggregate.display().to_string()))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shot_spec_parses_and_displays() {
        assert_eq!("3c".parse::<ShotSpec>().unwrap(), ShotSpec::new(3, 0));
        assert_eq!("5c".parse::<ShotSpec>().unwrap(), ShotSpec::new(5, 0));
        assert_eq!("3t".parse::<ShotSpec>().unwrap(), ShotSpec::new(0, 3));
        assert_eq!("3c+3t".parse::<ShotSpec>().unwrap(), ShotSpec::new(3, 3));
        assert_eq!(ShotSpec::new(3, 3).to_string(), "3c+3t");
        assert_eq!(ShotSpec::new(5, 0).to_string(), "5c");
        assert_eq!(ShotSpec::new(0, 2).to_string(), "2t");
        assert!("0c".parse::<ShotSpec>().is_err());
        assert!("3x".parse::<ShotSpec>().is_err());
        assert!("".parse::<ShotSpec>().is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        let cfg = ExperimentConfig {
            seen_ratios: vec![1.5],
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            seeds: vec![],
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig {
            lambdas: vec![-0.1],
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_round_trips_json() {
        let cfg = ExperimentConfig {
            corpus_path: "corpus.jsonl".into(),
            output_dir: "out".into(),
            shots: vec![ShotSpec::new(3, 0), ShotSpec::new(3, 3)],
            ..ExperimentConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.shots, cfg.shots);
        assert_eq!(back.seeds, cfg.seeds);
    }
}
