//! Line-oriented JSON embedding cache.
//!
//! ```text
//! {"provider":"phobert-base","dim":768}          optional header
//! {"key":"c01/d1/0","dim":768,"vec":[0.013,...]}
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbedError, EmbeddingMatrix, EmbeddingRow};

#[derive(Deserialize)]
struct CacheLine {
    key: Option<String>,
    provider: Option<String>,
    dim: usize,
    vec: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct HeaderOut<'a> {
    provider: &'a str,
    dim: usize,
}

#[derive(Serialize)]
struct RowOut<'a> {
    key: &'a str,
    dim: usize,
    vec: &'a [f64],
}

pub fn write_cache(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<(), EmbedError> {
    matrix.validate()?;
    let path = path.as_ref();
    let io_err = |e: std::io::Error| EmbedError::io(path, e);
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    let header = HeaderOut {
        provider: &matrix.provider_name,
        dim: matrix.dim,
    };
    serde_json::to_writer(&mut out, &header).map_err(|e| io_err(e.into()))?;
    out.write_all(b"\n").map_err(io_err)?;
    for row in &matrix.rows {
        let line = RowOut {
            key: &row.key,
            dim: matrix.dim,
            vec: &row.vector,
        };
        serde_json::to_writer(&mut out, &line).map_err(|e| io_err(e.into()))?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Reads a cache file. Without a header the provider name is the file stem.
pub fn read_cache(path: impl AsRef<Path>) -> Result<EmbeddingMatrix, EmbedError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EmbedError::io(path, e))?;
    let default_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cache".to_string());
    parse_cache(BufReader::new(file), default_name)
}

pub(crate) fn parse_cache(reader: impl BufRead, default_name: String) -> Result<EmbeddingMatrix, EmbedError> {
    let mut provider_name = default_name;
    let mut dim: Option<usize> = None;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| EmbedError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: CacheLine = serde_json::from_str(&line).map_err(|e| EmbedError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if parsed.dim == 0 {
            return Err(EmbedError::Parse {
                line: line_no,
                message: "dim must be positive".into(),
            });
        }
        if let Some(expected) = dim {
            if parsed.dim != expected {
                return Err(EmbedError::DimensionMismatch {
                    expected,
                    found: parsed.dim,
                    context: format!("line {line_no}"),
                });
            }
        }
        match (parsed.key, parsed.vec, parsed.provider) {
            (None, None, Some(provider)) if rows.is_empty() && dim.is_none() => {
                provider_name = provider;
                dim = Some(parsed.dim);
            }
            (Some(key), Some(vector), None) => {
                if vector.len() != parsed.dim {
                    return Err(EmbedError::DimensionMismatch {
                        expected: parsed.dim,
                        found: vector.len(),
                        context: format!("line {line_no}, key {key}"),
                    });
                }
                if !seen.insert(key.clone()) {
                    return Err(EmbedError::DuplicateKey(key));
                }
                dim = Some(parsed.dim);
                rows.push(EmbeddingRow { key, vector });
            }
            _ => {
                return Err(EmbedError::Parse {
                    line: line_no,
                    message: "expected a header as the first line or a {key, dim, vec} row".into(),
                })
            }
        }
    }

    let dim = dim.ok_or(EmbedError::Parse {
        line: 0,
        message: "cache file is empty".into(),
    })?;
    Ok(EmbeddingMatrix {
        provider_name,
        dim,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<EmbeddingMatrix, EmbedError> {
        parse_cache(text.as_bytes(), "t".into())
    }

    #[test]
    fn round_trip() {
        let m = EmbeddingMatrix {
            provider_name: "demo".into(),
            dim: 3,
            rows: vec![
                EmbeddingRow {
                    key: "c/d/0".into(),
                    vector: vec![0.1, -2.5e-7, 1.0 / 3.0],
                },
                EmbeddingRow {
                    key: "c/d/1".into(),
                    vector: vec![1e300, 0.0, -0.123456789012345],
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_cache(&m, &path).unwrap();
        assert_eq!(read_cache(&path).unwrap(), m);
    }

    #[test]
    fn headerless_file_uses_stem() {
        let m = parse("{\"key\":\"a\",\"dim\":2,\"vec\":[1,0]}\n").unwrap();
        assert_eq!(m.provider_name, "t");
        assert_eq!(m.dim, 2);
        assert_eq!(m.rows[0].vector, vec![1.0, 0.0]);
    }

    #[test]
    fn mixed_dims_rejected() {
        let text = "{\"key\":\"a\",\"dim\":2,\"vec\":[1,0]}\n{\"key\":\"b\",\"dim\":3,\"vec\":[1,0,0]}\n";
        assert!(matches!(parse(text), Err(EmbedError::DimensionMismatch { .. })));
    }

    #[test]
    fn header_dim_enforced() {
        let text = "{\"provider\":\"p\",\"dim\":3}\n{\"key\":\"a\",\"dim\":2,\"vec\":[1,0]}\n";
        assert!(matches!(
            parse(text),
            Err(EmbedError::DimensionMismatch {
                expected: 3,
                found: 2,
                ..
            })
        ));
    }

    #[test]
    fn vec_length_must_match_dim() {
        let text = "{\"key\":\"a\",\"dim\":3,\"vec\":[1,0]}\n";
        assert!(matches!(parse(text), Err(EmbedError::DimensionMismatch { .. })));
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = "{\"key\":\"a\",\"dim\":1,\"vec\":[1]}\n{\"key\":\"a\",\"dim\":1,\"vec\":[2]}\n";
        assert!(matches!(parse(text), Err(EmbedError::DuplicateKey(k)) if k == "a"));
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "{\"key\":\"a\",\"dim\":1,\"vec\":[1]}\nnot json\n";
        assert!(matches!(parse(text), Err(EmbedError::Parse { line: 2, .. })));
        let late_header = "{\"key\":\"a\",\"dim\":1,\"vec\":[1]}\n{\"provider\":\"p\",\"dim\":1}\n";
        assert!(matches!(parse(late_header), Err(EmbedError::Parse { line: 2, .. })));
    }
}
