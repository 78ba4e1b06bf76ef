//! `legal2logic` command line.
//!
//! Subcommands: `validate`, `split`, `run`, `report`, `synth`. Any error
//! prints one `error: ...` line to stderr and exits nonzero.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use legal2logic::dataset::{
    self, corpus_stats, make_split, save_corpus, synthetic_corpus, SynthConfig,
};
use legal2logic::runner::{
    self, EmbeddingChoice, ExperimentConfig, LlmChoice, RunManifest, ShotSpec,
};
use legal2logic::selection::BoundaryMode;

#[derive(Parser)]
#[command(
    name = "legal2logic",
    about = "Diversity-aware few-shot translation of legal cases into PROLEG fact formulas",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a JSONL corpus and print statistics.
    Validate {
        /// Corpus path (JSONL, schema v1).
        #[arg(long)]
        corpus: PathBuf,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build one template-disjoint split and print or save its manifest.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: i64,
        /// Fraction of records (by whole template groups) on the train side.
        #[arg(long, default_value_t = 0.6)]
        ratio: f64,
        /// Write the split manifest here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the selection -> prompt -> generate -> score pipeline over a grid.
    Run(RunArgs),
    /// Export a long-format CSV over one or more runs.
    Report {
        /// Run output directories (or manifest.json paths).
        #[arg(long = "run", required = true)]
        runs: Vec<PathBuf>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus for offline experiments.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        issues: usize,
        #[arg(long, default_value_t = 6)]
        templates_per_issue: usize,
        #[arg(long, default_value_t = 1)]
        records_per_template: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Declarative config file (TOML mirroring the run flags).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds, e.g. `0,1,2,3,4`.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<i64>>,
    /// Comma-separated seen-data ratios, e.g. `0.2,0.6`.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Comma-separated lambda values, e.g. `0.2,0.4,0.6,0.8`.
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// Comma-separated shot mixes, e.g. `3c,5c,3c+3t`.
    #[arg(long, value_delimiter = ',')]
    shots: Option<Vec<String>>,
    #[arg(long)]
    boundary_size: Option<usize>,
    /// Re-rank over the full pool each step instead of the shrinking boundary.
    #[arg(long)]
    full_pool: bool,
    /// Keep duplicate templates in the template pool.
    #[arg(long)]
    no_dedup_templates: bool,
    /// Drop the skeleton block from prompts.
    #[arg(long)]
    no_skeleton_block: bool,
    /// Embedding backend: `local` or `remote` (env-configured).
    #[arg(long)]
    embedding: Option<String>,
    /// Generation backend: `mock-echo`, `fixture:<path>`, or `remote`.
    #[arg(long)]
    llm: Option<String>,
    /// Model name sent to a remote backend and written into reports.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Decoding seed passed to the backend (best-effort determinism).
    #[arg(long)]
    gen_seed: Option<i64>,
    #[arg(long)]
    concurrency: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                toml::from_str(&text).context("cannot parse config")?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(corpus) = self.corpus {
            cfg.corpus_path = corpus;
        }
        if let Some(out) = self.out {
            cfg.output_dir = out;
        }
        if let Some(seeds) = self.seeds {
            cfg.seeds = seeds;
        }
        if let Some(ratios) = self.ratios {
            cfg.seen_ratios = ratios;
        }
        if let Some(lambdas) = self.lambdas {
            cfg.lambdas = lambdas;
        }
        if let Some(shots) = self.shots {
            cfg.shots = shots
                .iter()
                .map(|s| s.parse::<ShotSpec>())
                .collect::<Result<_, _>>()?;
        }
        if let Some(boundary_size) = self.boundary_size {
            cfg.boundary_size = boundary_size;
        }
        if self.full_pool {
            cfg.boundary_mode = BoundaryMode::FullPool;
        }
        if self.no_dedup_templates {
            cfg.dedup_template_pool = false;
        }
        if self.no_skeleton_block {
            cfg.include_skeleton_block = false;
        }
        if let Some(embedding) = self.embedding {
            cfg.embedding = match embedding.as_str() {
                "local" => EmbeddingChoice::Local,
                "remote" => EmbeddingChoice::RemoteFromEnv,
                other => bail!("unknown embedding backend `{other}`"),
            };
        }
        if let Some(llm) = self.llm {
            cfg.llm = if llm == "mock-echo" {
                LlmChoice::MockEcho
            } else if llm == "remote" {
                LlmChoice::RemoteFromEnv {
                    requests_per_sec: 2.0,
                    use_system_role: false,
                }
            } else if let Some(path) = llm.strip_prefix("fixture:") {
                LlmChoice::Fixture { path: path.into() }
            } else {
                bail!("unknown llm backend `{llm}`")
            };
        }
        if let Some(model) = self.model {
            cfg.generation.model = model.clone();
            cfg.model_label = model;
        }
        if let Some(temperature) = self.temperature {
            cfg.generation.temperature = temperature;
        }
        if let Some(max_tokens) = self.max_tokens {
            cfg.generation.max_tokens = max_tokens;
        }
        if let Some(gen_seed) = self.gen_seed {
            cfg.generation.seed = Some(gen_seed);
        }
        if let Some(concurrency) = self.concurrency {
            cfg.concurrency = concurrency;
        }
        if cfg.corpus_path.as_os_str().is_empty() {
            bail!("--corpus (or corpus_path in the config file) is required");
        }
        if cfg.output_dir.as_os_str().is_empty() {
            bail!("--out (or output_dir in the config file) is required");
        }
        Ok(cfg)
    }
}

fn cmd_validate(corpus: PathBuf, json: bool) -> Result<i32> {
    let report = dataset::validate_corpus(&corpus)?;
    let stats = corpus_stats(&report.records);
    if json {
        let payload = serde_json::json!({
            "records": report.records.len(),
            "errors": report.errors,
            "warnings": report.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
            "stats": stats,
        });
        println!("{}", serde_json::to_string_pretty(&payload)?);
    } else {
        println!(
            "records: {}  errors: {}  warnings: {}",
            report.records.len(),
            report.errors.len(),
            report.warnings.len()
        );
        println!(
            "templates: {}  template-vocab: {}  entity-types: {}  legal-issues: {}  unique-facts: {}",
            stats.n_templates,
            stats.template_vocab,
            stats.n_entity_types,
            stats.n_legal_issues,
            stats.n_unique_facts
        );
        for warning in &report.warnings {
            println!("warning: {warning}");
        }
        for error in &report.errors {
            println!("error: {error}");
        }
    }
    Ok(if report.ok() { 0 } else { 1 })
}

fn cmd_split(corpus: PathBuf, seed: i64, ratio: f64, out: Option<PathBuf>) -> Result<i32> {
    let (records, _) = dataset::load_corpus(&corpus)?;
    let split = make_split(&records, seed, ratio)?;
    let json = serde_json::to_string_pretty(&split)?;
    match out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(0)
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let cfg = args.into_config()?;
    let manifest = runner::run_experiment(&cfg)?;
    let aggregate = runner::load_aggregate(&manifest)?;
    for group in &aggregate.groups {
        println!(
            "ratio={} lambda={} shots={} exact={:.4}±{:.4} soft={:.4}±{:.4} ({} seeds)",
            group.ratio,
            group.lambda,
            group.shots,
            group.exact_acc_mean,
            group.exact_acc_std,
            group.soft_acc_mean,
            group.soft_acc_std,
            group.n_seeds
        );
    }
    println!(
        "manifest: {}",
        cfg.output_dir.join("manifest.json").display()
    );
    Ok(0)
}

fn cmd_report(runs: Vec<PathBuf>, out: PathBuf) -> Result<i32> {
    let manifests: Vec<RunManifest> = runs
        .iter()
        .map(|p| {
            let path = if p.is_dir() { p.join("manifest.json") } else { p.clone() };
            runner::load_manifest(path)
        })
        .collect::<Result<_, _>>()?;
    let rows = runner::write_report_csv(&manifests, &out)?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(0)
}

fn cmd_synth(
    out: PathBuf,
    seed: u64,
    issues: usize,
    templates_per_issue: usize,
    records_per_template: usize,
) -> Result<i32> {
    let corpus = synthetic_corpus(&SynthConfig {
        seed,
        issues,
        templates_per_issue,
        records_per_template,
    });
    save_corpus(&corpus, &out)?;
    println!("wrote {} records to {}", corpus.len(), out.display());
    Ok(0)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { corpus, json } => cmd_validate(corpus, json),
        Command::Split {
            corpus,
            seed,
            ratio,
            out,
        } => cmd_split(corpus, seed, ratio, out),
        Command::Run(args) => cmd_run(args),
        Command::Report { runs, out } => cmd_report(runs, out),
        Command::Synth {
            out,
            seed,
            issues,
            templates_per_issue,
            records_per_template,
        } => cmd_synth(out, seed, issues, templates_per_issue, records_per_template),
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
