//! Client for a remote embedding service.
//!
//! `POST <endpoint>/embed` with `{"sentences":[...]}`; the service answers
//! `{"dim":d,"vectors":[[...],...]}` or, on failure, a status >= 400 with
//! `{"error":"..."}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EmbedError;

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Serialize)]
struct EmbedRequest<'a> {
    sentences: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct ErrorResponse {
    error: String,
}

/// Blocking HTTP embedder. Cloning shares the underlying connection pool,
/// and `&self` methods may be called from several threads at once.
#[derive(Clone)]
pub struct HttpEmbedder {
    endpoint: String,
    batch_size: usize,
    agent: ureq::Agent,
}

impl std::fmt::Debug for HttpEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpEmbedder")
            .field("endpoint", &self.endpoint)
            .field("batch_size", &self.batch_size)
            .finish()
    }
}

impl HttpEmbedder {
    pub fn new(endpoint: &str) -> Self {
        Self::with_batch_size(endpoint, DEFAULT_BATCH_SIZE)
    }

    pub fn with_batch_size(endpoint: &str, batch_size: usize) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .new_agent();
        Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            batch_size: batch_size.max(1),
            agent,
        }
    }

    pub fn url(&self) -> String {
        format!("{}/embed", self.endpoint)
    }

    /// Embeds `texts` in batches, returning `(dim, vectors)` in input order.
    pub fn embed(&self, texts: &[&str]) -> Result<(usize, Vec<Vec<f64>>), EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let mut dim = None;
        let mut vectors = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            let (batch_dim, batch_vectors) = self.embed_batch(batch)?;
            match dim {
                Some(d) if d != batch_dim => {
                    return Err(EmbedError::DimensionMismatch {
                        expected: d,
                        found: batch_dim,
                        context: format!("response from {}", self.url()),
                    })
                }
                _ => dim = Some(batch_dim),
            }
            vectors.extend(batch_vectors);
        }
        Ok((dim.unwrap_or(0), vectors))
    }

    fn embed_batch(&self, batch: &[&str]) -> Result<(usize, Vec<Vec<f64>>), EmbedError> {
        let url = self.url();
        let transport = |cause: String| EmbedError::Transport {
            url: url.clone(),
            cause,
        };
        let mut response = self
            .agent
            .post(&url)
            .send_json(EmbedRequest { sentences: batch })
            .map_err(|e| transport(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| transport(e.to_string()))?;

        if status >= 400 {
            let message = serde_json::from_str::<ErrorResponse>(&body)
                .map(|e| e.error)
                .unwrap_or(body);
            return Err(transport(format!("status {status}: {message}")));
        }
        let parsed: EmbedResponse = serde_json::from_str(&body)
            .map_err(|e| EmbedError::Protocol(format!("malformed response from {url}: {e}")))?;
        if parsed.vectors.len() != batch.len() {
            return Err(EmbedError::Protocol(format!(
                "{url} returned {} vectors for {} sentences",
                parsed.vectors.len(),
                batch.len()
            )));
        }
        if parsed.dim == 0 {
            return Err(EmbedError::Protocol(format!("{url} reported dim 0")));
        }
        if let Some(bad) = parsed.vectors.iter().find(|v| v.len() != parsed.dim) {
            return Err(EmbedError::DimensionMismatch {
                expected: parsed.dim,
                found: bad.len(),
                context: format!("response from {url}"),
            });
        }
        Ok((parsed.dim, parsed.vectors))
    }
}
