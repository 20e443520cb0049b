//! Cluster-of-documents corpora.
//!
//! A corpus lives on disk as
//!
//! ```text
//! <root>/<cluster_id>/docs/<doc_id>.txt
//! <root>/<cluster_id>/refs/<ref_id>.txt
//! <root>/<cluster_id>/sents/<doc_id>.sents   (optional, one sentence per line)
//! ```
//!
//! Everything is NFC-normalized on load so that n-gram matching and hashing
//! never depend on how a diacritic happened to be encoded.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("missing directory: {0}")]
    MissingDirectory(PathBuf),
    #[error("no cluster directories under {0}")]
    NoClusters(PathBuf),
    #[error("cluster has no {kind}: {path}")]
    EmptyCluster { kind: &'static str, path: PathBuf },
    #[error("file is not valid UTF-8: {0}")]
    EncodingError(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One sentence with its provenance inside a cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceRecord {
    pub cluster_id: String,
    pub doc_id: String,
    pub sent_index_in_doc: usize,
    /// Position in the concatenated cluster paragraph.
    pub global_index: usize,
    pub text: String,
}

impl SentenceRecord {
    /// Embedding-cache key, `<cluster_id>/<doc_id>/<sent_index_in_doc>`.
    pub fn key(&self) -> String {
        format!("{}/{}/{}", self.cluster_id, self.doc_id, self.sent_index_in_doc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Document {
    pub doc_id: String,
    pub raw_text: String,
    pub sentences: Vec<SentenceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReferenceSummary {
    pub ref_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cluster {
    pub cluster_id: String,
    pub documents: Vec<Document>,
    pub references: Vec<ReferenceSummary>,
}

impl Cluster {
    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn reference_texts(&self) -> Vec<&str> {
        self.references.iter().map(|r| r.text.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Corpus {
    pub root_path: PathBuf,
    pub clusters: Vec<Cluster>,
    /// Hex SHA-256 over every file read, keyed by its root-relative path.
    pub fingerprint: String,
}

impl Corpus {
    pub fn sentence_count(&self) -> usize {
        self.clusters.iter().map(Cluster::sentence_count).sum()
    }

    pub fn document_count(&self) -> usize {
        self.clusters.iter().map(|c| c.documents.len()).sum()
    }

    pub fn reference_count(&self) -> usize {
        self.clusters.iter().map(|c| c.references.len()).sum()
    }

    pub fn cluster(&self, cluster_id: &str) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.cluster_id == cluster_id)
    }
}

pub fn nfc(text: &str) -> String {
    text.nfc().collect()
}

/// Builds corpora in memory, e.g. for tests or the browser demo.
///
/// Documents are given as `(doc_id, raw_text)` and segmented with
/// [`segment_sentences`]; ordering follows the same lexicographic rules as
/// [`load_corpus`].
pub fn cluster_from_texts(cluster_id: &str, documents: &[(&str, &str)], references: &[(&str, &str)]) -> Cluster {
    let mut docs: Vec<(String, String)> = documents.iter().map(|(id, text)| (id.to_string(), nfc(text))).collect();
    docs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut refs: Vec<ReferenceSummary> = references
        .iter()
        .map(|(id, text)| ReferenceSummary {
            ref_id: id.to_string(),
            text: nfc(text),
        })
        .collect();
    refs.sort_by(|a, b| a.ref_id.cmp(&b.ref_id));

    let mut next_global = 0;
    let documents = docs
        .into_iter()
        .map(|(doc_id, raw_text)| {
            let sentences = segment_sentences(&raw_text);
            build_document(cluster_id, doc_id, raw_text, sentences, &mut next_global)
        })
        .collect();
    Cluster {
        cluster_id: cluster_id.to_string(),
        documents,
        references: refs,
    }
}

fn build_document(
    cluster_id: &str,
    doc_id: String,
    raw_text: String,
    sentences: Vec<String>,
    next_global: &mut usize,
) -> Document {
    let sentences = sentences
        .into_iter()
        .enumerate()
        .map(|(i, text)| {
            let record = SentenceRecord {
                cluster_id: cluster_id.to_string(),
                doc_id: doc_id.clone(),
                sent_index_in_doc: i,
                global_index: *next_global,
                text,
            };
            *next_global += 1;
            record
        })
        .collect();
    Document {
        doc_id,
        raw_text,
        sentences,
    }
}

const TERMINALS: [char; 4] = ['.', '!', '?', '…'];
const CLOSING_QUOTES: [char; 2] = ['"', '”'];

/// Fallback sentence splitter.
///
/// Splits after `.`, `!`, `?` or `…` when the next character is whitespace or
/// the end of the text, and at every newline. Closing quotes directly after the
/// terminal stay with the sentence they close.
pub fn segment_sentences(raw_text: &str) -> Vec<String> {
    let chars: Vec<char> = raw_text.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    let mut i = 0;

    let flush = |current: &mut String, out: &mut Vec<String>| {
        let trimmed = current.trim();
        if !trimmed.is_empty() {
            out.push(trimmed.to_string());
        }
        current.clear();
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            flush(&mut current, &mut out);
            i += 1;
            continue;
        }
        current.push(c);
        i += 1;
        if TERMINALS.contains(&c) {
            let mut j = i;
            while j < chars.len() && CLOSING_QUOTES.contains(&chars[j]) {
                j += 1;
            }
            if j == chars.len() || chars[j].is_whitespace() {
                current.extend(&chars[i..j]);
                i = j;
                flush(&mut current, &mut out);
            }
        }
    }
    flush(&mut current, &mut out);
    out
}

/// All sentences of a cluster, document-major, in `global_index` order.
pub fn concatenate_cluster(cluster: &Cluster) -> Vec<SentenceRecord> {
    cluster
        .documents
        .iter()
        .flat_map(|d| d.sentences.iter().cloned())
        .collect()
}

struct Loader {
    root: PathBuf,
    hasher: Sha256,
}

impl Loader {
    fn read_text(&mut self, path: &Path) -> Result<String, CorpusError> {
        let bytes = fs::read(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = String::from_utf8(bytes).map_err(|_| CorpusError::EncodingError(path.to_path_buf()))?;
        let rel = path
            .strip_prefix(&self.root)
            .unwrap_or(path)
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        self.hasher.update((rel.len() as u64).to_le_bytes());
        self.hasher.update(rel.as_bytes());
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(nfc(&text))
    }
}

/// Visible entries of `dir` as `(name, path)`, sorted by name.
fn list_entries(dir: &Path, want_dirs: bool) -> Result<Vec<(String, PathBuf)>, CorpusError> {
    let read = fs::read_dir(dir).map_err(|source| CorpusError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::new();
    for entry in read {
        let entry = entry.map_err(|source| CorpusError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        let name = entry
            .file_name()
            .into_string()
            .map_err(|_| CorpusError::EncodingError(path.clone()))?;
        if name.starts_with('.') || path.is_dir() != want_dirs {
            continue;
        }
        entries.push((name, path));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(entries)
}

/// Files in `dir` with the given extension, as `(id, path)` sorted by id.
fn list_ids(dir: &Path, ext: &str) -> Result<Vec<(String, PathBuf)>, CorpusError> {
    let mut ids: Vec<(String, PathBuf)> = list_entries(dir, false)?
        .into_iter()
        .filter_map(|(name, path)| {
            let id = name.strip_suffix(ext)?.strip_suffix('.')?;
            (!id.is_empty()).then(|| (id.to_string(), path))
        })
        .collect();
    ids.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ids)
}

fn require_dir(path: PathBuf) -> Result<PathBuf, CorpusError> {
    if path.is_dir() {
        Ok(path)
    } else {
        Err(CorpusError::MissingDirectory(path))
    }
}

pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let root = require_dir(root.as_ref().to_path_buf())?;
    let mut loader = Loader {
        root: root.clone(),
        hasher: Sha256::new(),
    };

    let cluster_dirs = list_entries(&root, true)?;
    if cluster_dirs.is_empty() {
        return Err(CorpusError::NoClusters(root));
    }

    let mut clusters = Vec::with_capacity(cluster_dirs.len());
    for (cluster_id, dir) in cluster_dirs {
        clusters.push(load_cluster(&mut loader, cluster_id, &dir)?);
    }

    let fingerprint = loader.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(Corpus {
        root_path: root,
        clusters,
        fingerprint,
    })
}

fn load_cluster(loader: &mut Loader, cluster_id: String, dir: &Path) -> Result<Cluster, CorpusError> {
    let docs_dir = require_dir(dir.join("docs"))?;
    let refs_dir = require_dir(dir.join("refs"))?;
    let sents_dir = dir.join("sents");

    let doc_files = list_ids(&docs_dir, "txt")?;
    if doc_files.is_empty() {
        return Err(CorpusError::EmptyCluster {
            kind: "documents",
            path: docs_dir,
        });
    }
    let ref_files = list_ids(&refs_dir, "txt")?;
    if ref_files.is_empty() {
        return Err(CorpusError::EmptyCluster {
            kind: "references",
            path: refs_dir,
        });
    }

    let mut next_global = 0;
    let mut documents = Vec::with_capacity(doc_files.len());
    for (doc_id, path) in doc_files {
        let raw_text = loader.read_text(&path)?;
        let sents_path = sents_dir.join(format!("{doc_id}.sents"));
        let sentences = if sents_path.is_file() {
            loader
                .read_text(&sents_path)?
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect()
        } else {
            segment_sentences(&raw_text)
        };
        documents.push(build_document(
            &cluster_id,
            doc_id,
            raw_text,
            sentences,
            &mut next_global,
        ));
    }

    let mut references = Vec::with_capacity(ref_files.len());
    for (ref_id, path) in ref_files {
        let text = loader.read_text(&path)?.trim().to_string();
        if text.is_empty() {
            return Err(CorpusError::EmptyCluster {
                kind: "non-empty references",
                path,
            });
        }
        references.push(ReferenceSummary { ref_id, text });
    }

    if documents.len() < 2 {
        log::warn!("cluster {cluster_id}: only {} document(s)", documents.len());
    }
    if references.len() != 2 {
        log::warn!("cluster {cluster_id}: {} references (expected 2)", references.len());
    }

    Ok(Cluster {
        cluster_id,
        documents,
        references,
    })
}
