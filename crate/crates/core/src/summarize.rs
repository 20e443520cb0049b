//! Per-cluster extractive pipeline: concatenate, embed, cluster, select.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{concatenate_cluster, Cluster, Corpus};
use crate::embed::{EmbedError, Provider, ProviderSpec};
use crate::kmeans::{kmeans_fit, nearest_to_centroids, KMeansConfig, KMeansError};

pub const DEFAULT_K: usize = 4;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("cluster {cluster_id}: {source}")]
    Embed {
        cluster_id: String,
        #[source]
        source: EmbedError,
    },
    #[error("cluster {cluster_id}: {source}")]
    KMeans {
        cluster_id: String,
        #[source]
        source: KMeansError,
    },
    #[error("cluster {0} has no sentences")]
    NoSentences(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl SummarizeError {
    pub fn cluster_id(&self) -> Option<&str> {
        match self {
            SummarizeError::Embed { cluster_id, .. } | SummarizeError::KMeans { cluster_id, .. } => Some(cluster_id),
            SummarizeError::NoSentences(id) => Some(id),
            SummarizeError::InvalidConfig(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummarizerConfig {
    pub provider: ProviderSpec,
    /// Desired number of summary sentences (and K-means clusters).
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl SummarizerConfig {
    pub fn new(provider: ProviderSpec) -> Self {
        let defaults = KMeansConfig::default();
        Self {
            provider,
            k: DEFAULT_K,
            seed: DEFAULT_SEED,
            max_iters: defaults.max_iters,
            rel_tol: defaults.rel_tol,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// K-means settings for a cluster with `n` sentences; k is clamped to `n`.
    pub fn kmeans_config(&self, n: usize) -> KMeansConfig {
        KMeansConfig {
            k: self.k.min(n),
            seed: self.seed,
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
        }
    }

    fn validate(&self) -> Result<(), SummarizeError> {
        if self.k == 0 {
            return Err(SummarizeError::InvalidConfig("k must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub cluster_id: String,
    /// Selected `global_index` values, ascending.
    pub selected: Vec<usize>,
    pub text: String,
}

pub fn summarize_cluster(cluster: &Cluster, config: &SummarizerConfig) -> Result<Summary, SummarizeError> {
    let provider = Provider::from_spec(&config.provider).map_err(|source| SummarizeError::Embed {
        cluster_id: cluster.cluster_id.clone(),
        source,
    })?;
    summarize_cluster_with(cluster, config, &provider)
}

/// Like [`summarize_cluster`] but reuses an already constructed provider.
pub fn summarize_cluster_with(
    cluster: &Cluster,
    config: &SummarizerConfig,
    provider: &Provider,
) -> Result<Summary, SummarizeError> {
    config.validate()?;
    let cluster_id = &cluster.cluster_id;
    let sentences = concatenate_cluster(cluster);
    if sentences.is_empty() {
        return Err(SummarizeError::NoSentences(cluster_id.clone()));
    }

    let matrix = provider.embed(&sentences).map_err(|source| SummarizeError::Embed {
        cluster_id: cluster_id.clone(),
        source,
    })?;
    let result =
        kmeans_fit(&matrix.rows, &config.kmeans_config(sentences.len())).map_err(|source| SummarizeError::KMeans {
            cluster_id: cluster_id.clone(),
            source,
        })?;
    let mut selected: Vec<usize> = nearest_to_centroids(&result, &matrix.rows)
        .into_iter()
        .map(|i| sentences[i].global_index)
        .collect();
    selected.sort_unstable();

    let text = selected
        .iter()
        .map(|&g| sentences[g].text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Summary {
        cluster_id: cluster_id.clone(),
        selected,
        text,
    })
}

/// Per-cluster outcomes of a batch run, in corpus cluster order.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub summaries: Vec<Summary>,
    pub errors: Vec<(String, SummarizeError)>,
}

impl BatchOutcome {
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Maps `f` over clusters, in parallel when the `parallel` feature is on.
/// Output order always follows `clusters`.
pub(crate) fn map_clusters<T, F>(clusters: &[Cluster], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Cluster) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        clusters.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        clusters.iter().map(f).collect()
    }
}

pub fn summarize_corpus(corpus: &Corpus, config: &SummarizerConfig) -> Result<BatchOutcome, SummarizeError> {
    config.validate()?;
    let provider = match Provider::from_spec(&config.provider) {
        Ok(p) => p,
        Err(source) => {
            // Nothing can succeed without a provider; report it once per cluster.
            let message = source.to_string();
            let errors = corpus
                .clusters
                .iter()
                .map(|c| {
                    let err = SummarizeError::Embed {
                        cluster_id: c.cluster_id.clone(),
                        source: EmbedError::InvalidSpec(message.clone()),
                    };
                    (c.cluster_id.clone(), err)
                })
                .collect();
            return Ok(BatchOutcome {
                summaries: Vec::new(),
                errors,
            });
        }
    };
    Ok(summarize_corpus_with(corpus, config, &provider))
}

pub fn summarize_corpus_with(corpus: &Corpus, config: &SummarizerConfig, provider: &Provider) -> BatchOutcome {
    let results = map_clusters(&corpus.clusters, |c| summarize_cluster_with(c, config, provider));
    let mut outcome = BatchOutcome::default();
    for (cluster, result) in corpus.clusters.iter().zip(results) {
        match result {
            Ok(summary) => outcome.summaries.push(summary),
            Err(err) => {
                log::error!("{err}");
                outcome.errors.push((cluster.cluster_id.clone(), err));
            }
        }
    }
    outcome
}

/// Writes `<out>/<cluster_id>.sum.txt` for each summary plus `<out>/summaries.jsonl`.
pub fn write_summaries(summaries: &[Summary], out: impl AsRef<Path>) -> std::io::Result<()> {
    let out = out.as_ref();
    fs::create_dir_all(out)?;
    let mut jsonl = Vec::new();
    for summary in summaries {
        fs::write(
            out.join(format!("{}.sum.txt", summary.cluster_id)),
            format!("{}\n", summary.text),
        )?;
        serde_json::to_writer(&mut jsonl, summary)?;
        jsonl.write_all(b"\n")?;
    }
    fs::write(out.join("summaries.jsonl"), jsonl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::cluster_from_texts;

    fn config(k: usize) -> SummarizerConfig {
        SummarizerConfig::new(ProviderSpec::hash(64)).with_k(k)
    }

    #[test]
    fn fewer_sentences_than_k_keeps_everything() {
        let c = cluster_from_texts("c", &[("d1", "Một hai. Ba bốn."), ("d2", "Năm sáu.")], &[("r", "x")]);
        let s = summarize_cluster(&c, &config(4)).unwrap();
        assert_eq!(s.selected, vec![0, 1, 2]);
        assert_eq!(s.text, "Một hai. Ba bốn. Năm sáu.");
    }

    #[test]
    fn single_sentence_cluster() {
        let c = cluster_from_texts("c", &[("d1", "Chỉ một câu.")], &[("r", "x")]);
        for k in [1, 2, 7] {
            let s = summarize_cluster(&c, &config(k)).unwrap();
            assert_eq!(s.selected, vec![0]);
            assert_eq!(s.text, "Chỉ một câu.");
        }
    }

    #[test]
    fn selection_is_sorted_distinct_and_sized() {
        let text = "Mưa lớn gây ngập. Nước sông dâng cao. Người dân sơ tán. Trường học đóng cửa. \
                    Giao thông tê liệt. Chính quyền hỗ trợ. Thiệt hại được thống kê.";
        let c = cluster_from_texts("c", &[("d", text)], &[("r", "x")]);
        for k in 1..=7 {
            let s = summarize_cluster(&c, &config(k)).unwrap();
            assert_eq!(s.selected.len(), k);
            assert!(s.selected.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn zero_k_rejected() {
        let c = cluster_from_texts("c", &[("d", "A.")], &[("r", "x")]);
        assert!(matches!(
            summarize_cluster(&c, &config(0)),
            Err(SummarizeError::InvalidConfig(_))
        ));
    }

    #[test]
    fn empty_cluster_reports_no_sentences() {
        let c = cluster_from_texts("c", &[("d", "   ")], &[("r", "x")]);
        assert!(matches!(summarize_cluster(&c, &config(2)), Err(SummarizeError::NoSentences(id)) if id == "c"));
    }

    #[test]
    fn writes_sum_files_and_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let summaries = vec![Summary {
            cluster_id: "c01".into(),
            selected: vec![0, 2],
            text: "A. C.".into(),
        }];
        write_summaries(&summaries, dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("c01.sum.txt")).unwrap(), "A. C.\n");
        assert_eq!(
            fs::read_to_string(dir.path().join("summaries.jsonl")).unwrap(),
            "{\"cluster_id\":\"c01\",\"selected\":[0,2],\"text\":\"A. C.\"}\n"
        );
    }
}
