//! Corpus-level evaluation: summarize every cluster, score it against all of
//! its references with best-F ROUGE-1/2, and macro-average across clusters.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Cluster, Corpus};
use crate::embed::Provider;
use crate::rouge::{rouge_best_with, RougeError, RougeN, RougeScore, TokenizeOptions};
use crate::summarize::{map_clusters, summarize_cluster_with, SummarizeError, SummarizerConfig};

const BUILTIN_BASELINES: &str = include_str!("../data/baselines.json");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Summarize(#[from] SummarizeError),
    #[error("provider setup failed: {0}")]
    Provider(#[from] crate::embed::EmbedError),
    #[error("cluster {cluster_id}: {source}")]
    Rouge {
        cluster_id: String,
        #[source]
        source: RougeError,
    },
    #[error("every cluster failed ({} failures)", .0.len())]
    AllClustersFailed(Vec<ClusterFailure>),
    #[error("duplicate row name {0}")]
    DuplicateName(String),
    #[error("k values must be non-empty and all >= 1")]
    InvalidKValues,
    #[error("baselines: {0}")]
    Baselines(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScores {
    pub cluster_id: String,
    pub selected: Vec<usize>,
    pub rouge1: RougeScore,
    pub rouge2: RougeScore,
    /// Reference that produced the best ROUGE-1 F.
    pub rouge1_ref: String,
    pub rouge2_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterFailure {
    pub cluster_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub provider_name: String,
    pub config_echo: SummarizerConfig,
    pub corpus_fingerprint: String,
    pub tokenization: TokenizeOptions,
    /// Scoring uses corpus text exactly as stored (syllable or word-segmented).
    pub text_form: String,
    pub per_cluster: Vec<ClusterScores>,
    pub failures: Vec<ClusterFailure>,
    /// Mean of per-cluster best ROUGE-1 F, as a fraction.
    pub avg_rouge1_f: f64,
    pub avg_rouge2_f: f64,
    pub avg_rouge1_pct: String,
    pub avg_rouge2_pct: String,
}

impl RunReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Percentage with two decimals, rounding halves up.
pub fn format_pct(fraction: f64) -> String {
    let cents = (fraction * 10_000.0 + 0.5).floor();
    format!("{:.2}", cents / 100.0)
}

fn round_pct(fraction: f64) -> f64 {
    format_pct(fraction).parse().expect("format_pct produces a number")
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

fn score_cluster(
    cluster: &Cluster,
    config: &SummarizerConfig,
    provider: &Provider,
    tokenize: TokenizeOptions,
) -> Result<ClusterScores, HarnessError> {
    let summary = summarize_cluster_with(cluster, config, provider)?;
    let refs = cluster.reference_texts();
    let best = |n| {
        rouge_best_with(&summary.text, &refs, n, tokenize).map_err(|source| HarnessError::Rouge {
            cluster_id: cluster.cluster_id.clone(),
            source,
        })
    };
    let (i1, rouge1) = best(RougeN::One)?;
    let (i2, rouge2) = best(RougeN::Two)?;
    Ok(ClusterScores {
        cluster_id: cluster.cluster_id.clone(),
        selected: summary.selected,
        rouge1,
        rouge2,
        rouge1_ref: cluster.references[i1].ref_id.clone(),
        rouge2_ref: cluster.references[i2].ref_id.clone(),
    })
}

pub fn evaluate(corpus: &Corpus, config: &SummarizerConfig) -> Result<RunReport, HarnessError> {
    let provider = Provider::from_spec(&config.provider)?;
    evaluate_with(corpus, config, &provider, TokenizeOptions::default())
}

/// Evaluates with a prepared provider. Fails only when no cluster succeeds;
/// otherwise per-cluster failures are listed in the report.
pub fn evaluate_with(
    corpus: &Corpus,
    config: &SummarizerConfig,
    provider: &Provider,
    tokenize: TokenizeOptions,
) -> Result<RunReport, HarnessError> {
    let results = map_clusters(&corpus.clusters, |c| score_cluster(c, config, provider, tokenize));
    let mut per_cluster = Vec::new();
    let mut failures = Vec::new();
    for (cluster, result) in corpus.clusters.iter().zip(results) {
        match result {
            Ok(scores) => per_cluster.push(scores),
            Err(err) => {
                log::error!("{err}");
                failures.push(ClusterFailure {
                    cluster_id: cluster.cluster_id.clone(),
                    error: err.to_string(),
                });
            }
        }
    }
    if per_cluster.is_empty() {
        return Err(HarnessError::AllClustersFailed(failures));
    }

    let avg_rouge1_f = mean(per_cluster.iter().map(|c| c.rouge1.f1));
    let avg_rouge2_f = mean(per_cluster.iter().map(|c| c.rouge2.f1));
    Ok(RunReport {
        provider_name: config.provider.name.clone(),
        config_echo: config.clone(),
        corpus_fingerprint: corpus.fingerprint.clone(),
        tokenization: tokenize,
        text_form: "as-stored".into(),
        per_cluster,
        failures,
        avg_rouge1_f,
        avg_rouge2_f,
        avg_rouge1_pct: format_pct(avg_rouge1_f),
        avg_rouge2_pct: format_pct(avg_rouge2_f),
    })
}

/// Runs [`evaluate_with`] once per k, with the same provider and seed.
pub fn sweep_k(
    corpus: &Corpus,
    config: &SummarizerConfig,
    k_values: &[usize],
    tokenize: TokenizeOptions,
) -> Result<Vec<(usize, RunReport)>, HarnessError> {
    if k_values.is_empty() || k_values.contains(&0) {
        return Err(HarnessError::InvalidKValues);
    }
    let provider = Provider::from_spec(&config.provider)?;
    k_values
        .iter()
        .map(|&k| {
            let config = config.clone().with_k(k);
            evaluate_with(corpus, &config, &provider, tokenize).map(|r| (k, r))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowSource {
    Computed,
    Published,
}

/// A published result row as stored in `baselines.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub name: String,
    pub rouge1: f64,
    pub rouge2: f64,
    pub source: RowSource,
    #[serde(default)]
    pub citation: Option<String>,
}

pub fn builtin_baselines() -> Vec<PublishedRow> {
    parse_baselines(BUILTIN_BASELINES).expect("bundled baselines.json is valid")
}

pub fn parse_baselines(json: &str) -> Result<Vec<PublishedRow>, HarnessError> {
    let rows: Vec<PublishedRow> = serde_json::from_str(json).map_err(|e| HarnessError::Baselines(e.to_string()))?;
    if let Some(bad) = rows.iter().find(|r| r.source != RowSource::Published) {
        return Err(HarnessError::Baselines(format!(
            "row {} is not marked published",
            bad.name
        )));
    }
    Ok(rows)
}

pub fn load_baselines(path: impl AsRef<Path>) -> Result<Vec<PublishedRow>, HarnessError> {
    parse_baselines(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_name: String,
    pub rouge1_pct: f64,
    pub rouge2_pct: f64,
    pub source: RowSource,
    pub citation: Option<String>,
    pub best_rouge1: bool,
    pub best_rouge2: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Merges computed reports with published rows, sorted by ROUGE-1 then
/// ROUGE-2 (both descending), then name. Computed scores are compared at the
/// same two-decimal precision they are displayed with.
pub fn compare(reports: &[RunReport], published: &[PublishedRow]) -> Result<ComparisonTable, HarnessError> {
    let mut rows: Vec<ComparisonRow> = reports
        .iter()
        .map(|r| ComparisonRow {
            model_name: r.provider_name.clone(),
            rouge1_pct: round_pct(r.avg_rouge1_f),
            rouge2_pct: round_pct(r.avg_rouge2_f),
            source: RowSource::Computed,
            citation: None,
            best_rouge1: false,
            best_rouge2: false,
        })
        .chain(published.iter().map(|p| ComparisonRow {
            model_name: p.name.clone(),
            rouge1_pct: p.rouge1,
            rouge2_pct: p.rouge2,
            source: RowSource::Published,
            citation: p.citation.clone(),
            best_rouge1: false,
            best_rouge2: false,
        }))
        .collect();

    let mut names = HashSet::new();
    for row in &rows {
        if !names.insert(row.model_name.as_str()) {
            return Err(HarnessError::DuplicateName(row.model_name.clone()));
        }
    }

    rows.sort_by(|a, b| {
        b.rouge1_pct
            .partial_cmp(&a.rouge1_pct)
            .unwrap_or(Ordering::Equal)
            .then(b.rouge2_pct.partial_cmp(&a.rouge2_pct).unwrap_or(Ordering::Equal))
            .then_with(|| a.model_name.cmp(&b.model_name))
    });
    let best1 = rows.iter().map(|r| r.rouge1_pct).fold(f64::NEG_INFINITY, f64::max);
    let best2 = rows.iter().map(|r| r.rouge2_pct).fold(f64::NEG_INFINITY, f64::max);
    for row in &mut rows {
        row.best_rouge1 = row.rouge1_pct == best1;
        row.best_rouge2 = row.rouge2_pct == best2;
    }
    Ok(ComparisonTable { rows })
}

/// Serialized report with `generated_at` on its own first line, so that the
/// rest of the file depends only on inputs.
pub fn report_json(report: &RunReport, generated_at: u64) -> String {
    let body = serde_json::to_string_pretty(report).expect("report serializes");
    let rest = body.strip_prefix("{\n").expect("report is a JSON object");
    format!("{{\n  \"generated_at\": {generated_at},\n{rest}\n")
}

/// Drops the `generated_at` line written by [`report_json`].
pub fn strip_timestamp(report_json: &str) -> String {
    report_json
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .map(|l| format!("{l}\n"))
        .collect()
}

pub fn render_report_markdown(report: &RunReport) -> String {
    let mut md = String::new();
    let _ = writeln!(md, "# Evaluation: {}\n", report.provider_name);
    let _ = writeln!(
        md,
        "k = {}, seed = {}, clusters scored = {}, failed = {}\n",
        report.config_echo.k,
        report.config_echo.seed,
        report.per_cluster.len(),
        report.failures.len()
    );
    md.push_str("| Model | ROUGE-1 | ROUGE-2 |\n|---|---:|---:|\n");
    let _ = writeln!(
        md,
        "| {} | {} | {} |\n",
        report.provider_name, report.avg_rouge1_pct, report.avg_rouge2_pct
    );
    md.push_str("## Per cluster (best F over references)\n\n");
    md.push_str("| Cluster | Selected | R1 P | R1 R | R1 F | R2 P | R2 R | R2 F |\n");
    md.push_str("|---|---|---:|---:|---:|---:|---:|---:|\n");
    for c in &report.per_cluster {
        let selected: Vec<String> = c.selected.iter().map(usize::to_string).collect();
        let _ = writeln!(
            md,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} | {:.4} |",
            c.cluster_id,
            selected.join(","),
            c.rouge1.precision,
            c.rouge1.recall,
            c.rouge1.f1,
            c.rouge2.precision,
            c.rouge2.recall,
            c.rouge2.f1
        );
    }
    if !report.failures.is_empty() {
        md.push_str("\n## Failures\n\n");
        for f in &report.failures {
            let _ = writeln!(md, "- {}: {}", f.cluster_id, f.error);
        }
    }
    md
}

pub fn render_comparison_markdown(table: &ComparisonTable) -> String {
    let mut md = String::from("| Model | ROUGE-1 | ROUGE-2 | Source |\n|---|---:|---:|---|\n");
    let cell = |v: f64, best: bool| {
        if best {
            format!("**{v:.2}**")
        } else {
            format!("{v:.2}")
        }
    };
    for row in &table.rows {
        let source = match (&row.source, &row.citation) {
            (RowSource::Computed, _) => "computed".to_string(),
            (RowSource::Published, Some(c)) => format!("published ({c})"),
            (RowSource::Published, None) => "published".to_string(),
        };
        let _ = writeln!(
            md,
            "| {} | {} | {} | {} |",
            row.model_name,
            cell(row.rouge1_pct, row.best_rouge1),
            cell(row.rouge2_pct, row.best_rouge2),
            source
        );
    }
    md
}

/// Writes `report.json` and `report.md` into `out`.
pub fn write_report(report: &RunReport, out: impl AsRef<Path>, generated_at: u64) -> std::io::Result<()> {
    let out = out.as_ref();
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), report_json(report, generated_at))?;
    fs::write(out.join("report.md"), render_report_markdown(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::ProviderSpec;

    fn published(name: &str, r1: f64, r2: f64) -> PublishedRow {
        PublishedRow {
            name: name.into(),
            rouge1: r1,
            rouge2: r2,
            source: RowSource::Published,
            citation: Some("test".into()),
        }
    }

    fn report(name: &str, r1: f64, r2: f64) -> RunReport {
        RunReport {
            provider_name: name.into(),
            config_echo: SummarizerConfig::new(ProviderSpec::hash(8)),
            corpus_fingerprint: String::new(),
            tokenization: TokenizeOptions::default(),
            text_form: "as-stored".into(),
            per_cluster: vec![],
            failures: vec![],
            avg_rouge1_f: r1,
            avg_rouge2_f: r2,
            avg_rouge1_pct: format_pct(r1),
            avg_rouge2_pct: format_pct(r2),
        }
    }

    #[test]
    fn pct_rounds_half_up() {
        assert_eq!(format_pct(0.7744), "77.44");
        assert_eq!(format_pct(0.77445), "77.45");
        assert_eq!(format_pct(0.774449), "77.44");
        assert_eq!(format_pct(1.0), "100.00");
        assert_eq!(format_pct(0.0), "0.00");
    }

    #[test]
    fn computed_row_outranks_lower_published() {
        let table = compare(
            &[report("vibert-cache", 0.7744, 0.5201)],
            &[published("CFVi-2", 76.38, 49.43)],
        )
        .unwrap();
        assert_eq!(table.rows[0].model_name, "vibert-cache");
        assert_eq!(table.rows[0].source, RowSource::Computed);
        assert!(table.rows[0].best_rouge1 && table.rows[0].best_rouge2);
        assert!(!table.rows[1].best_rouge1);
    }

    #[test]
    fn empty_published_keeps_computed() {
        let table = compare(&[report("a", 0.5, 0.2), report("b", 0.6, 0.1)], &[]).unwrap();
        let names: Vec<_> = table.rows.iter().map(|r| r.model_name.as_str()).collect();
        assert_eq!(names, vec!["b", "a"]);
        assert!(table.rows[0].best_rouge1 && !table.rows[0].best_rouge2);
        assert!(table.rows[1].best_rouge2);
    }

    #[test]
    fn ties_break_on_rouge2_then_name() {
        let rows = [
            published("z", 50.0, 30.0),
            published("b", 50.0, 40.0),
            published("a", 50.0, 30.0),
        ];
        let table = compare(&[], &rows).unwrap();
        let names: Vec<_> = table.rows.iter().map(|r| r.model_name.as_str()).collect();
        assert_eq!(names, vec!["b", "a", "z"]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = compare(&[report("KL", 0.1, 0.1)], &[published("KL", 60.2, 40.4)]).unwrap_err();
        assert!(matches!(err, HarnessError::DuplicateName(n) if n == "KL"));
    }

    #[test]
    fn builtin_baselines_carry_published_rows() {
        let rows = builtin_baselines();
        let find = |n: &str| rows.iter().find(|r| r.name == n).map(|r| (r.rouge1, r.rouge2));
        assert_eq!(find("KL"), Some((60.2, 40.4)));
        assert_eq!(find("CFVi-2"), Some((76.38, 49.43)));
        assert_eq!(find("viBERT4news"), Some((77.44, 52.01)));
        assert!(rows.iter().all(|r| r.citation.is_some()));
    }

    #[test]
    fn timestamp_line_is_strippable() {
        let r = report("a", 0.5, 0.25);
        let a = report_json(&r, 1);
        let b = report_json(&r, 999);
        assert_ne!(a, b);
        assert_eq!(strip_timestamp(&a), strip_timestamp(&b));
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["generated_at"], 1);
        assert_eq!(parsed["avg_rouge1_pct"], "50.00");
    }
}
