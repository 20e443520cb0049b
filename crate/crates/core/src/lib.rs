//! Extractive multi-document summarization by clustering sentence embeddings.
//!
//! The pipeline concatenates a cluster's documents, embeds each sentence,
//! runs seeded K-means, and keeps the sentence nearest each centroid. Output
//! is scored with multi-reference best-F ROUGE-1/2.
//!
//! ```
//! use vedsum_core::corpus::cluster_from_texts;
//! use vedsum_core::embed::ProviderSpec;
//! use vedsum_core::summarize::{summarize_cluster, SummarizerConfig};
//!
//! let cluster = cluster_from_texts(
//!     "c01",
//!     &[("d1", "Trời mưa to. Đường ngập nặng."), ("d2", "Học sinh được nghỉ học.")],
//!     &[("r1", "Mưa to, đường ngập, học sinh nghỉ học.")],
//! );
//! let config = SummarizerConfig::new(ProviderSpec::hash(256)).with_k(2);
//! let summary = summarize_cluster(&cluster, &config).unwrap();
//! assert_eq!(summary.selected.len(), 2);
//! ```

pub mod corpus;
pub mod embed;
pub mod harness;
pub mod kmeans;
pub mod rouge;
pub mod summarize;

pub use corpus::{load_corpus, Cluster, Corpus, SentenceRecord};
pub use embed::{EmbeddingMatrix, Provider, ProviderSpec};
pub use harness::{compare, evaluate, sweep_k, RunReport};
pub use kmeans::{kmeans_fit, nearest_to_centroids, KMeansConfig, KMeansResult};
pub use rouge::{rouge_best, rouge_n, RougeN, RougeScore};
pub use summarize::{summarize_cluster, summarize_corpus, SummarizerConfig, Summary};
