//! Browser bindings: summarize pasted documents, score a candidate against
//! references, and run k-means on 2-D points.
//!
//! Every export takes and returns JSON strings. The `*_json` functions hold
//! the logic and are plain Rust so they can be tested natively.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use vedsum_core::corpus::{cluster_from_texts, concatenate_cluster};
use vedsum_core::embed::ProviderSpec;
use vedsum_core::kmeans::{kmeans_fit, nearest_to_centroids, KMeansConfig, KMeansResult};
use vedsum_core::rouge::{rouge_best_with, RougeN, RougeScore, TokenizeOptions};
use vedsum_core::summarize::{summarize_cluster, SummarizerConfig};

#[derive(Deserialize)]
struct SummarizeInput {
    documents: Vec<String>,
    #[serde(default)]
    references: Vec<String>,
    k: usize,
    seed: u64,
    dim: usize,
}

#[derive(Serialize)]
struct SentenceView {
    doc: usize,
    text: String,
    selected: bool,
}

#[derive(Serialize)]
struct SummarizeOutput {
    sentences: Vec<SentenceView>,
    selected: Vec<usize>,
    summary: String,
    scores: Option<ScoreOutput>,
}

#[derive(Serialize)]
struct ScoredRef {
    #[serde(flatten)]
    score: RougeScore,
    reference: usize,
}

#[derive(Serialize)]
struct ScoreOutput {
    rouge1: ScoredRef,
    rouge2: ScoredRef,
}

#[derive(Deserialize)]
struct KMeansInput {
    points: Vec<[f64; 2]>,
    k: usize,
    seed: u64,
}

#[derive(Serialize)]
struct KMeansOutput {
    #[serde(flatten)]
    result: KMeansResult,
    nearest: Vec<usize>,
}

fn parse<'a, T: Deserialize<'a>>(input: &'a str) -> Result<T, String> {
    serde_json::from_str(input).map_err(|e| format!("invalid input: {e}"))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

fn score(candidate: &str, references: &[String]) -> Result<ScoreOutput, String> {
    let best = |n| {
        rouge_best_with(candidate, references, n, TokenizeOptions::default())
            .map(|(reference, score)| ScoredRef { score, reference })
            .map_err(|e| e.to_string())
    };
    Ok(ScoreOutput {
        rouge1: best(RougeN::One)?,
        rouge2: best(RougeN::Two)?,
    })
}

/// Input: `{"documents":[..],"references":[..],"k":4,"seed":42,"dim":256}`.
pub fn summarize_json(input: &str) -> Result<String, String> {
    let input: SummarizeInput = parse(input)?;
    let docs: Vec<(String, &str)> = input
        .documents
        .iter()
        .enumerate()
        .filter(|(_, text)| !text.trim().is_empty())
        .map(|(i, text)| (format!("d{i:03}"), text.as_str()))
        .collect();
    if docs.is_empty() {
        return Err("paste at least one document".into());
    }
    let doc_refs: Vec<(&str, &str)> = docs.iter().map(|(id, t)| (id.as_str(), *t)).collect();
    let cluster = cluster_from_texts("web", &doc_refs, &[]);
    if cluster.sentence_count() == 0 {
        return Err("no sentences found".into());
    }
    let config = SummarizerConfig::new(ProviderSpec::hash(input.dim))
        .with_k(input.k)
        .with_seed(input.seed);
    let summary = summarize_cluster(&cluster, &config).map_err(|e| e.to_string())?;
    let sentences = concatenate_cluster(&cluster)
        .into_iter()
        .map(|s| SentenceView {
            doc: s.doc_id[1..].parse().unwrap_or(0),
            selected: summary.selected.contains(&s.global_index),
            text: s.text,
        })
        .collect();
    let references: Vec<String> = input.references.into_iter().filter(|r| !r.trim().is_empty()).collect();
    let scores = if references.is_empty() {
        None
    } else {
        Some(score(&summary.text, &references)?)
    };
    to_json(&SummarizeOutput {
        sentences,
        selected: summary.selected,
        summary: summary.text,
        scores,
    })
}

/// Input: `{"candidate":"..","references":[..]}`.
pub fn rouge_json(input: &str) -> Result<String, String> {
    #[derive(Deserialize)]
    struct RougeInput {
        candidate: String,
        references: Vec<String>,
    }
    let input: RougeInput = parse(input)?;
    to_json(&score(&input.candidate, &input.references)?)
}

/// Input: `{"points":[[x,y],..],"k":3,"seed":42}`.
pub fn kmeans_json(input: &str) -> Result<String, String> {
    let input: KMeansInput = parse(input)?;
    let config = KMeansConfig::new(input.k, input.seed);
    let result = kmeans_fit(&input.points, &config).map_err(|e| e.to_string())?;
    let nearest = nearest_to_centroids(&result, &input.points);
    to_json(&KMeansOutput { result, nearest })
}

#[wasm_bindgen]
pub fn summarize(input: &str) -> Result<String, JsValue> {
    summarize_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn rouge(input: &str) -> Result<String, JsValue> {
    rouge_json(input).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn kmeans(input: &str) -> Result<String, JsValue> {
    kmeans_json(input).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::{json, Value};

    fn call(f: fn(&str) -> Result<String, String>, input: Value) -> Value {
        serde_json::from_str(&f(&input.to_string()).unwrap()).unwrap()
    }

    #[test]
    fn summarize_marks_selected_sentences() {
        let out = call(
            summarize_json,
            json!({
                "documents": ["Mưa lớn gây ngập. Người dân sơ tán.", "", "Chính quyền hỗ trợ. Trường học đóng cửa."],
                "references": ["Mưa lớn gây ngập và người dân sơ tán."],
                "k": 2, "seed": 42, "dim": 64
            }),
        );
        let sentences = out["sentences"].as_array().unwrap();
        assert_eq!(sentences.len(), 4);
        assert_eq!(sentences[2]["doc"], 2);
        let flagged = sentences.iter().filter(|s| s["selected"] == true).count();
        assert_eq!(flagged, 2);
        assert_eq!(out["selected"].as_array().unwrap().len(), 2);
        assert!(out["scores"]["rouge1"]["f1"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn summarize_without_references_has_no_scores() {
        let out = call(
            summarize_json,
            json!({"documents": ["Một câu."], "k": 4, "seed": 1, "dim": 16}),
        );
        assert_eq!(out["selected"], json!([0]));
        assert_eq!(out["summary"], "Một câu.");
        assert!(out["scores"].is_null());
    }

    #[test]
    fn summarize_rejects_empty_input() {
        let err = summarize_json(&json!({"documents": ["  "], "k": 2, "seed": 0, "dim": 16}).to_string());
        assert!(err.is_err());
        assert!(summarize_json("not json").unwrap_err().starts_with("invalid input"));
    }

    #[test]
    fn rouge_hand_case() {
        let out = call(
            rouge_json,
            json!({"candidate": "the cat sat", "references": ["a dog ran", "the cat sat on the mat"]}),
        );
        assert_eq!(out["rouge1"]["reference"], 1);
        assert_eq!(out["rouge1"]["precision"], 1.0);
        assert_eq!(out["rouge1"]["recall"], 0.5);
        assert_eq!(out["rouge2"]["n"], 2);
        assert!(rouge_json(&json!({"candidate": "x", "references": []}).to_string()).is_err());
    }

    #[test]
    fn kmeans_separates_two_groups() {
        let out = call(
            kmeans_json,
            json!({"points": [[0,0],[1,0],[0,1],[10,10],[11,10],[10,11]], "k": 2, "seed": 7}),
        );
        let a: Vec<u64> = out["assignments"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        assert_eq!(a[0], a[1]);
        assert_eq!(a[0], a[2]);
        assert_eq!(a[3], a[4]);
        assert_ne!(a[0], a[3]);
        assert_eq!(out["nearest"].as_array().unwrap().len(), 2);
        assert!(kmeans_json(&json!({"points": [[0,0]], "k": 2, "seed": 0}).to_string()).is_err());
    }
}
