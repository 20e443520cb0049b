//! ROUGE-1/2 with clipped n-gram counts and multi-reference best-F.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RougeError {
    #[error("no references to score against")]
    EmptyReferences,
    #[error("unsupported n-gram order {0}; use 1 or 2")]
    UnsupportedOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum RougeN {
    One,
    Two,
}

impl RougeN {
    pub fn order(self) -> usize {
        match self {
            RougeN::One => 1,
            RougeN::Two => 2,
        }
    }
}

impl TryFrom<usize> for RougeN {
    type Error = RougeError;

    fn try_from(n: usize) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(RougeN::One),
            2 => Ok(RougeN::Two),
            other => Err(RougeError::UnsupportedOrder(other)),
        }
    }
}

impl From<RougeN> for usize {
    fn from(n: RougeN) -> usize {
        n.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub n: RougeN,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub fn from_counts(n: RougeN, overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(overlap, candidate_total);
        let recall = ratio(overlap, reference_total);
        // 2PR/(P+R) reduced to counts: one rounding instead of four.
        let f1 = if overlap > 0 {
            2.0 * overlap as f64 / (candidate_total + reference_total) as f64
        } else {
            0.0
        };
        Self {
            n,
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizeOptions {
    pub lowercase: bool,
}

impl Default for TokenizeOptions {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

pub fn tokenize_for_rouge(text: &str) -> Vec<String> {
    tokenize_with(text, TokenizeOptions::default())
}

/// NFC, optional lowercasing, whitespace split, and stripping of leading and
/// trailing punctuation (Unicode category P) from each token.
pub fn tokenize_with(text: &str, options: TokenizeOptions) -> Vec<String> {
    let mut normalized: String = text.nfc().collect();
    if options.lowercase {
        normalized = normalized.to_lowercase();
    }
    normalized
        .split_whitespace()
        .map(|t| t.trim_matches(is_punctuation))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Multiset of n-grams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramBag<'a> {
    pub n: usize,
    pub counts: HashMap<&'a [String], usize>,
}

impl<'a> NGramBag<'a> {
    pub fn new(tokens: &'a [String], n: usize) -> Self {
        let mut counts = HashMap::new();
        if n > 0 {
            for gram in tokens.windows(n) {
                *counts.entry(gram).or_insert(0) += 1;
            }
        }
        Self { n, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Sum over shared n-grams of the smaller count.
    pub fn clipped_overlap(&self, other: &NGramBag<'_>) -> usize {
        let (small, large) = if self.counts.len() <= other.counts.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .counts
            .iter()
            .map(|(gram, &c)| large.counts.get(gram).map_or(0, |&o| c.min(o)))
            .sum()
    }
}

/// ROUGE-N over pre-tokenized input.
pub fn rouge_n_tokens(candidate: &[String], reference: &[String], n: RougeN) -> RougeScore {
    let cand = NGramBag::new(candidate, n.order());
    let refs = NGramBag::new(reference, n.order());
    RougeScore::from_counts(n, cand.clipped_overlap(&refs), cand.total(), refs.total())
}

pub fn rouge_n(candidate: &str, reference: &str, n: RougeN) -> RougeScore {
    rouge_n_with(candidate, reference, n, TokenizeOptions::default())
}

pub fn rouge_n_with(candidate: &str, reference: &str, n: RougeN, options: TokenizeOptions) -> RougeScore {
    rouge_n_tokens(
        &tokenize_with(candidate, options),
        &tokenize_with(reference, options),
        n,
    )
}

/// Best-F score over all references, with the index of the winning reference.
/// Ties keep the lowest index.
pub fn rouge_best_with<S: AsRef<str>>(
    candidate: &str,
    references: &[S],
    n: RougeN,
    options: TokenizeOptions,
) -> Result<(usize, RougeScore), RougeError> {
    let cand = tokenize_with(candidate, options);
    let mut best: Option<(usize, RougeScore)> = None;
    for (i, reference) in references.iter().enumerate() {
        let score = rouge_n_tokens(&cand, &tokenize_with(reference.as_ref(), options), n);
        if best.is_none_or(|(_, b)| score.f1 > b.f1) {
            best = Some((i, score));
        }
    }
    best.ok_or(RougeError::EmptyReferences)
}

pub fn rouge_best<S: AsRef<str>>(candidate: &str, references: &[S], n: RougeN) -> Result<RougeScore, RougeError> {
    rouge_best_with(candidate, references, n, TokenizeOptions::default()).map(|(_, s)| s)
}
