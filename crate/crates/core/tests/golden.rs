//! Frozen pipeline outputs on the bundled mini corpus. Any behavioural
//! change to loading, hashing, K-means or scoring shows up here.
//!
//! Regenerate with `VEDSUM_BLESS=1 cargo test -p vedsum-core --test golden`.

use std::path::PathBuf;

use vedsum_core::corpus::{concatenate_cluster, load_corpus, Corpus};
use vedsum_core::embed::{embed_sentences, ProviderSpec};
use vedsum_core::harness::{evaluate, report_json, strip_timestamp, sweep_k};
use vedsum_core::kmeans::{kmeans_fit, nearest_to_centroids, KMeansConfig};
use vedsum_core::rouge::TokenizeOptions;
use vedsum_core::summarize::{summarize_cluster, summarize_corpus, SummarizerConfig};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn mini_corpus() -> Corpus {
    load_corpus(fixtures().join("mini_corpus")).unwrap()
}

fn check_golden(name: &str, actual: &str) {
    let path = fixtures().join("golden").join(name);
    if std::env::var_os("VEDSUM_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn config(k: usize) -> SummarizerConfig {
    SummarizerConfig::new(ProviderSpec::hash(256)).with_k(k).with_seed(42)
}

#[test]
fn c01_selection_k2() {
    let corpus = mini_corpus();
    let sentences = concatenate_cluster(corpus.cluster("c01").unwrap());
    let matrix = embed_sentences(&ProviderSpec::hash(256), &sentences).unwrap();
    let result = kmeans_fit(&matrix.rows, &KMeansConfig::new(2, 42)).unwrap();
    let selection = nearest_to_centroids(&result, &matrix.rows);
    check_golden(
        "c01_selection_k2.json",
        &(serde_json::to_string(&selection).unwrap() + "\n"),
    );
}

#[test]
fn c01_summary_k4() {
    let corpus = mini_corpus();
    let summary = summarize_cluster(corpus.cluster("c01").unwrap(), &config(4)).unwrap();
    check_golden(
        "c01_summary_k4.json",
        &(serde_json::to_string_pretty(&summary).unwrap() + "\n"),
    );
}

#[test]
fn corpus_summaries_in_cluster_order() {
    let corpus = mini_corpus();
    let outcome = summarize_corpus(&corpus, &config(4)).unwrap();
    assert!(outcome.is_complete());
    let ids: Vec<_> = outcome.summaries.iter().map(|s| s.cluster_id.as_str()).collect();
    assert_eq!(ids, vec!["c01", "c02", "c03"]);
    let c01 = summarize_cluster(corpus.cluster("c01").unwrap(), &config(4)).unwrap();
    assert_eq!(outcome.summaries[0], c01);
}

#[test]
fn run_report() {
    let report = evaluate(&mini_corpus(), &config(4)).unwrap();
    check_golden("report.json", &strip_timestamp(&report_json(&report, 0)));
}

#[test]
fn sweep_curve() {
    let reports = sweep_k(
        &mini_corpus(),
        &config(4),
        &[1, 2, 3, 4, 5, 6],
        TokenizeOptions::default(),
    )
    .unwrap();
    let curve: Vec<_> = reports
        .iter()
        .map(|(k, r)| {
            assert_eq!(r.config_echo.k, *k);
            serde_json::json!({"k": k, "rouge1": r.avg_rouge1_f, "rouge2": r.avg_rouge2_f})
        })
        .collect();
    check_golden(
        "sweep_k1_6.json",
        &(serde_json::to_string_pretty(&curve).unwrap() + "\n"),
    );
}
