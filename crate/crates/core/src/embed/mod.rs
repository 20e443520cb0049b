//! Sentence embedding providers.
//!
//! Every provider turns a list of [`SentenceRecord`]s into an
//! [`EmbeddingMatrix`] with one row per sentence, in input order. Vectors are
//! opaque here: pooling, truncation and model choice belong to whoever
//! produced them.

mod cache;
mod hash;
#[cfg(feature = "http")]
mod http;

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SentenceRecord;

pub use cache::{read_cache, write_cache};
pub use hash::{fnv1a_64, hash_counts, hash_embed, l2_normalize, BIGRAM_SEPARATOR, DEFAULT_HASH_DIM};
#[cfg(feature = "http")]
pub use http::{HttpEmbedder, DEFAULT_BATCH_SIZE};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no embedding cached for key {0}")]
    CacheMiss(String),
    #[error("dimension mismatch ({context}): expected {expected}, found {found}")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: String,
    },
    #[error("transport error talking to {url}: {cause}")]
    Transport { url: String, cause: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("nothing to embed")]
    EmptyInput,
    #[error("cache parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("non-finite component in row {0}")]
    NonFinite(String),
    #[error("invalid provider: {0}")]
    InvalidSpec(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EmbedError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        EmbedError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub key: String,
    pub vector: Vec<f64>,
}

impl AsRef<[f64]> for EmbeddingRow {
    fn as_ref(&self) -> &[f64] {
        &self.vector
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMatrix {
    pub provider_name: String,
    pub dim: usize,
    pub rows: Vec<EmbeddingRow>,
}

impl EmbeddingMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Checks the dim, finiteness and key-uniqueness invariants.
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::InvalidSpec("dim must be positive".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(self.rows.len());
        for row in &self.rows {
            if row.vector.len() != self.dim {
                return Err(EmbedError::DimensionMismatch {
                    expected: self.dim,
                    found: row.vector.len(),
                    context: format!("row {}", row.key),
                });
            }
            if row.vector.iter().any(|v| !v.is_finite()) {
                return Err(EmbedError::NonFinite(row.key.clone()));
            }
            if !seen.insert(row.key.as_str()) {
                return Err(EmbedError::DuplicateKey(row.key.clone()));
            }
        }
        Ok(())
    }
}

/// Which backend to use and its settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProviderKind {
    Hash { dim: usize },
    Cache { cache_path: PathBuf },
    Http { endpoint_url: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: ProviderKind,
}

impl ProviderSpec {
    pub fn hash(dim: usize) -> Self {
        Self {
            name: format!("hash-{dim}"),
            kind: ProviderKind::Hash { dim },
        }
    }

    pub fn cache(path: impl Into<PathBuf>) -> Self {
        let cache_path = path.into();
        let name = cache_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cache".into());
        Self {
            name,
            kind: ProviderKind::Cache { cache_path },
        }
    }

    pub fn http(endpoint_url: impl Into<String>) -> Self {
        let endpoint_url = endpoint_url.into();
        Self {
            name: endpoint_url.clone(),
            kind: ProviderKind::Http { endpoint_url },
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// A ready-to-use provider built from a [`ProviderSpec`].
///
/// Cache files are read once at construction; all variants are `Sync`.
#[derive(Debug)]
pub enum Provider {
    Hash {
        name: String,
        dim: usize,
    },
    Cache {
        name: String,
        dim: usize,
        vectors: HashMap<String, Vec<f64>>,
    },
    #[cfg(feature = "http")]
    Http {
        name: String,
        client: HttpEmbedder,
    },
}

impl Provider {
    pub fn from_spec(spec: &ProviderSpec) -> Result<Self, EmbedError> {
        match &spec.kind {
            ProviderKind::Hash { dim } => {
                if *dim < 2 {
                    return Err(EmbedError::InvalidSpec(format!("hash dim must be >= 2, got {dim}")));
                }
                Ok(Provider::Hash {
                    name: spec.name.clone(),
                    dim: *dim,
                })
            }
            ProviderKind::Cache { cache_path } => {
                let matrix = read_cache(cache_path)?;
                Ok(Self::from_matrix(spec.name.clone(), matrix))
            }
            #[cfg(feature = "http")]
            ProviderKind::Http { endpoint_url } => Ok(Provider::Http {
                name: spec.name.clone(),
                client: HttpEmbedder::new(endpoint_url),
            }),
            #[cfg(not(feature = "http"))]
            ProviderKind::Http { .. } => Err(EmbedError::InvalidSpec(
                "http provider not available in this build".into(),
            )),
        }
    }

    /// Cache provider backed by an in-memory matrix.
    pub fn from_matrix(name: String, matrix: EmbeddingMatrix) -> Self {
        let dim = matrix.dim;
        let vectors = matrix.rows.into_iter().map(|r| (r.key, r.vector)).collect();
        Provider::Cache { name, dim, vectors }
    }

    pub fn name(&self) -> &str {
        match self {
            Provider::Hash { name, .. } | Provider::Cache { name, .. } => name,
            #[cfg(feature = "http")]
            Provider::Http { name, .. } => name,
        }
    }

    pub fn embed(&self, sentences: &[SentenceRecord]) -> Result<EmbeddingMatrix, EmbedError> {
        if sentences.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let keys = sentences.iter().map(SentenceRecord::key);
        let (dim, rows) = match self {
            Provider::Hash { dim, .. } => {
                let rows = keys
                    .zip(sentences)
                    .map(|(key, s)| EmbeddingRow {
                        key,
                        vector: hash_embed(&s.text, *dim),
                    })
                    .collect();
                (*dim, rows)
            }
            Provider::Cache { dim, vectors, .. } => {
                let rows = keys
                    .map(|key| match vectors.get(&key) {
                        Some(v) => Ok(EmbeddingRow { vector: v.clone(), key }),
                        None => Err(EmbedError::CacheMiss(key)),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                (*dim, rows)
            }
            #[cfg(feature = "http")]
            Provider::Http { client, .. } => {
                let texts: Vec<&str> = sentences.iter().map(|s| s.text.as_str()).collect();
                let (dim, vectors) = client.embed(&texts)?;
                let rows = keys
                    .zip(vectors)
                    .map(|(key, vector)| EmbeddingRow { key, vector })
                    .collect();
                (dim, rows)
            }
        };
        let matrix = EmbeddingMatrix {
            provider_name: self.name().to_string(),
            dim,
            rows,
        };
        matrix.validate()?;
        Ok(matrix)
    }
}

/// One-shot convenience over [`Provider::from_spec`] + [`Provider::embed`].
pub fn embed_sentences(spec: &ProviderSpec, sentences: &[SentenceRecord]) -> Result<EmbeddingMatrix, EmbedError> {
    Provider::from_spec(spec)?.embed(sentences)
}
