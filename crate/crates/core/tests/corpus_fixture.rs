use std::path::PathBuf;

use serde_json::Value;
use vedsum_core::corpus::{concatenate_cluster, load_corpus};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

#[test]
fn mini_corpus_matches_manifest() {
    let corpus = load_corpus(fixtures().join("mini_corpus")).unwrap();
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("mini_corpus.manifest.json")).unwrap()).unwrap();
    let totals = &manifest["totals"];
    assert_eq!(corpus.clusters.len() as u64, totals["clusters"].as_u64().unwrap());
    assert_eq!(corpus.document_count() as u64, totals["documents"].as_u64().unwrap());
    assert_eq!(corpus.sentence_count() as u64, totals["sentences"].as_u64().unwrap());
    assert_eq!(corpus.reference_count() as u64, totals["references"].as_u64().unwrap());
    for cluster in &corpus.clusters {
        let expected = &manifest["clusters"][&cluster.cluster_id];
        for doc in &cluster.documents {
            assert_eq!(
                doc.sentences.len() as u64,
                expected["documents"][&doc.doc_id].as_u64().unwrap(),
                "{}/{}",
                cluster.cluster_id,
                doc.doc_id
            );
        }
        assert_eq!(
            cluster.references.len() as u64,
            expected["references"].as_u64().unwrap()
        );
    }
}

#[test]
fn c01_concatenation_matches_golden() {
    let corpus = load_corpus(fixtures().join("mini_corpus")).unwrap();
    let c01 = corpus.cluster("c01").unwrap();
    let sentences = concatenate_cluster(c01);
    let got: Vec<Value> = sentences
        .iter()
        .map(|s| serde_json::json!({"key": s.key(), "global_index": s.global_index, "text": s.text}))
        .collect();
    let golden: Vec<Value> =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("golden/c01_sentences.json")).unwrap()).unwrap();
    assert_eq!(got, golden);
    assert_eq!(sentences.len(), c01.sentence_count());
}

#[test]
fn loading_is_deterministic() {
    let a = load_corpus(fixtures().join("mini_corpus")).unwrap();
    let b = load_corpus(fixtures().join("mini_corpus")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.fingerprint.len(), 64);
}

#[test]
fn global_index_is_dense_and_document_major() {
    let corpus = load_corpus(fixtures().join("mini_corpus")).unwrap();
    for cluster in &corpus.clusters {
        let sentences = concatenate_cluster(cluster);
        for (i, s) in sentences.iter().enumerate() {
            assert_eq!(s.global_index, i);
            assert!(!s.text.trim().is_empty());
        }
        let order: Vec<(String, usize)> = sentences
            .iter()
            .map(|s| (s.doc_id.clone(), s.sent_index_in_doc))
            .collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
    }
}
