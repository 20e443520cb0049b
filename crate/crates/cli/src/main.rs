use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vedsum_core::corpus::{concatenate_cluster, load_corpus, Corpus};
use vedsum_core::embed::{write_cache, EmbeddingMatrix, Provider, ProviderSpec, DEFAULT_HASH_DIM};
use vedsum_core::harness::{
    builtin_baselines, compare, evaluate_with, load_baselines, render_comparison_markdown, sweep_k, write_report,
    HarnessError, RunReport,
};
use vedsum_core::rouge::{rouge_best_with, RougeN, TokenizeOptions};
use vedsum_core::summarize::{summarize_corpus_with, write_summaries, SummarizerConfig, DEFAULT_K, DEFAULT_SEED};

/// Exit status when some clusters failed but others succeeded.
const PARTIAL_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "vedsum",
    version,
    about = "Extractive multi-document summarization and ROUGE evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize every cluster of a corpus.
    Summarize(RunArgs),
    /// Summarize and score a corpus, writing report.json and report.md.
    Evaluate(EvaluateArgs),
    /// Merge report.json files with published baselines into one table.
    Compare(CompareArgs),
    /// Evaluate once per k value.
    SweepK(SweepArgs),
    /// Embed every corpus sentence and write a cache file.
    EmbedCache(EmbedCacheArgs),
    /// Score a candidate text against one or more references.
    Rouge(RougeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderKindArg {
    Hash,
    Cache,
    Http,
}

#[derive(Args)]
struct ProviderArgs {
    #[arg(long, value_enum, default_value = "hash")]
    provider: ProviderKindArg,
    /// Hash embedding dimension.
    #[arg(long, default_value_t = DEFAULT_HASH_DIM)]
    dim: usize,
    /// Embedding cache file (provider = cache).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Embedding service base URL (provider = http).
    #[arg(long, env = "VEDSUM_ENDPOINT")]
    endpoint: Option<String>,
    /// Name reported for the provider.
    #[arg(long)]
    name: Option<String>,
}

impl ProviderArgs {
    fn spec(&self) -> Result<ProviderSpec> {
        let spec = match self.provider {
            ProviderKindArg::Hash => {
                if self.dim < 2 {
                    bail!("--dim must be at least 2");
                }
                ProviderSpec::hash(self.dim)
            }
            ProviderKindArg::Cache => match &self.cache {
                Some(path) => ProviderSpec::cache(path),
                None => bail!("--provider cache requires --cache <file>"),
            },
            ProviderKindArg::Http => match &self.endpoint {
                Some(url) => ProviderSpec::http(url.clone()),
                None => bail!("--provider http requires --endpoint <url> or VEDSUM_ENDPOINT"),
            },
        };
        Ok(match &self.name {
            Some(name) => spec.with_name(name.clone()),
            None => spec,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Maximum clusters processed concurrently.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn config(&self) -> Result<SummarizerConfig> {
        if self.k == 0 {
            bail!("--k must be at least 1");
        }
        Ok(SummarizerConfig::new(self.provider.spec()?)
            .with_k(self.k)
            .with_seed(self.seed))
    }
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Keep case when tokenizing for ROUGE.
    #[arg(long)]
    no_lowercase: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6")]
    k_values: Vec<usize>,
    #[arg(long)]
    no_lowercase: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// report.json files produced by `evaluate`.
    reports: Vec<PathBuf>,
    /// Published rows; defaults to the bundled baselines.
    #[arg(long)]
    baselines: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedCacheArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    provider: ProviderArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RougeArgs {
    #[arg(long)]
    cand: PathBuf,
    /// Reference file; repeat for best-F over several references.
    #[arg(long = "ref", required = true)]
    references: Vec<PathBuf>,
    /// N-gram order; both 1 and 2 when omitted.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    n: Option<u8>,
    #[arg(long)]
    no_lowercase: bool,
}

fn tokenize_options(no_lowercase: bool) -> TokenizeOptions {
    TokenizeOptions {
        lowercase: !no_lowercase,
    }
}

fn init_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn now_secs() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn load(corpus: &Path) -> Result<Corpus> {
    load_corpus(corpus).with_context(|| format!("loading corpus {}", corpus.display()))
}

fn report_failures(report: &RunReport) -> u8 {
    for f in &report.failures {
        eprintln!("error[cluster={}]: {}", f.cluster_id, f.error);
    }
    if report.is_complete() {
        0
    } else {
        PARTIAL_FAILURE
    }
}

fn run_summarize(args: RunArgs) -> Result<u8> {
    let config = args.config()?;
    init_jobs(args.jobs)?;
    let corpus = load(&args.corpus)?;
    let provider = Provider::from_spec(&config.provider)?;
    let outcome = summarize_corpus_with(&corpus, &config, &provider);
    write_summaries(&outcome.summaries, &args.out).context("writing summaries")?;
    for (cluster_id, err) in &outcome.errors {
        eprintln!("error[cluster={cluster_id}]: {err}");
    }
    if outcome.summaries.is_empty() {
        bail!("no cluster could be summarized");
    }
    println!("wrote {} summaries to {}", outcome.summaries.len(), args.out.display());
    Ok(if outcome.is_complete() { 0 } else { PARTIAL_FAILURE })
}

fn run_evaluate(args: EvaluateArgs) -> Result<u8> {
    let config = args.run.config()?;
    init_jobs(args.run.jobs)?;
    let corpus = load(&args.run.corpus)?;
    let provider = Provider::from_spec(&config.provider)?;
    let report = match evaluate_with(&corpus, &config, &provider, tokenize_options(args.no_lowercase)) {
        Ok(report) => report,
        Err(HarnessError::AllClustersFailed(failures)) => {
            for f in &failures {
                eprintln!("error[cluster={}]: {}", f.cluster_id, f.error);
            }
            bail!("every cluster failed");
        }
        Err(err) => return Err(err.into()),
    };
    write_report(&report, &args.run.out, now_secs()).context("writing report")?;
    println!("| Model | ROUGE-1 | ROUGE-2 |");
    println!("|---|---:|---:|");
    println!(
        "| {} | {} | {} |",
        report.provider_name, report.avg_rouge1_pct, report.avg_rouge2_pct
    );
    Ok(report_failures(&report))
}

fn run_sweep(args: SweepArgs) -> Result<u8> {
    let config = args.run.config()?;
    init_jobs(args.run.jobs)?;
    let corpus = load(&args.run.corpus)?;
    let reports = sweep_k(&corpus, &config, &args.k_values, tokenize_options(args.no_lowercase))?;

    fs::create_dir_all(&args.run.out)?;
    let curve: Vec<serde_json::Value> = reports
        .iter()
        .map(|(k, r)| {
            serde_json::json!({
                "k": k,
                "avg_rouge1_f": r.avg_rouge1_f,
                "avg_rouge2_f": r.avg_rouge2_f,
                "avg_rouge1_pct": r.avg_rouge1_pct,
                "avg_rouge2_pct": r.avg_rouge2_pct,
                "failures": r.failures.len(),
            })
        })
        .collect();
    fs::write(
        args.run.out.join("sweep.json"),
        serde_json::to_string_pretty(&curve)? + "\n",
    )?;
    let mut md = String::from("| k | ROUGE-1 | ROUGE-2 |\n|---:|---:|---:|\n");
    for (k, r) in &reports {
        md.push_str(&format!("| {k} | {} | {} |\n", r.avg_rouge1_pct, r.avg_rouge2_pct));
    }
    fs::write(args.run.out.join("sweep.md"), &md)?;
    print!("{md}");

    let codes: Vec<u8> = reports.iter().map(|(_, r)| report_failures(r)).collect();
    Ok(codes.into_iter().max().unwrap_or(0))
}

fn run_compare(args: CompareArgs) -> Result<u8> {
    let published = match &args.baselines {
        Some(path) => load_baselines(path).with_context(|| format!("reading {}", path.display()))?,
        None => builtin_baselines(),
    };
    let reports = args
        .reports
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RunReport>(&text).with_context(|| format!("parsing {}", path.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let table = compare(&reports, &published)?;
    let md = render_comparison_markdown(&table);
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        fs::write(
            out.join("comparison.json"),
            serde_json::to_string_pretty(&table)? + "\n",
        )?;
        fs::write(out.join("comparison.md"), &md)?;
    }
    print!("{md}");
    Ok(0)
}

fn run_embed_cache(args: EmbedCacheArgs) -> Result<u8> {
    let spec = args.provider.spec()?;
    let corpus = load(&args.corpus)?;
    let provider = Provider::from_spec(&spec)?;
    fs::create_dir_all(&args.out)?;

    let mut sentences_jsonl = Vec::new();
    let mut rows = Vec::new();
    let mut dim = None;
    for cluster in &corpus.clusters {
        let sentences = concatenate_cluster(cluster);
        for s in &sentences {
            serde_json::to_writer(
                &mut sentences_jsonl,
                &serde_json::json!({"key": s.key(), "text": s.text}),
            )?;
            sentences_jsonl.write_all(b"\n")?;
        }
        if sentences.is_empty() {
            continue;
        }
        let matrix = provider
            .embed(&sentences)
            .with_context(|| format!("embedding cluster {}", cluster.cluster_id))?;
        if dim.is_some_and(|d| d != matrix.dim) {
            bail!("provider changed dimension at cluster {}", cluster.cluster_id);
        }
        dim = Some(matrix.dim);
        rows.extend(matrix.rows);
    }
    fs::write(args.out.join("sentences.jsonl"), sentences_jsonl)?;
    let Some(dim) = dim else {
        bail!("corpus has no sentences");
    };
    let matrix = EmbeddingMatrix {
        provider_name: spec.name.clone(),
        dim,
        rows,
    };
    let cache_path = args.out.join("embeddings.jsonl");
    write_cache(&matrix, &cache_path)?;
    println!("wrote {} vectors (dim {dim}) to {}", matrix.len(), cache_path.display());
    Ok(0)
}

fn run_rouge(args: RougeArgs) -> Result<u8> {
    let read = |p: &PathBuf| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let candidate = read(&args.cand)?;
    let references = args.references.iter().map(read).collect::<Result<Vec<_>>>()?;
    let orders = match args.n {
        Some(n) => vec![RougeN::try_from(usize::from(n))?],
        None => vec![RougeN::One, RougeN::Two],
    };
    let options = tokenize_options(args.no_lowercase);
    for n in orders {
        let (best, score) = rouge_best_with(&candidate, &references, n, options)?;
        println!(
            "ROUGE-{} P={:.4} R={:.4} F={:.4} ref={}",
            n.order(),
            score.precision,
            score.recall,
            score.f1,
            args.references[best].display()
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Summarize(args) => run_summarize(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Compare(args) => run_compare(args),
        Command::SweepK(args) => run_sweep(args),
        Command::EmbedCache(args) => run_embed_cache(args),
        Command::Rouge(args) => run_rouge(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
