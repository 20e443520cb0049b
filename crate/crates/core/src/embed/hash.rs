use unicode_normalization::UnicodeNormalization;

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Joins the two halves of a bigram feature.
pub const BIGRAM_SEPARATOR: char = '\u{001F}';

pub const DEFAULT_HASH_DIM: usize = 256;

pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET_BASIS, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

fn features(text: &str) -> Vec<String> {
    let normalized: String = text.nfc().collect::<String>().to_lowercase();
    let tokens: Vec<&str> = normalized.split_whitespace().collect();
    let mut features: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
    features.extend(tokens.windows(2).map(|w| format!("{}{BIGRAM_SEPARATOR}{}", w[0], w[1])));
    features
}

/// Signed feature counts before normalization.
pub fn hash_counts(text: &str, dim: usize) -> Vec<f64> {
    assert!(dim >= 2, "hash embedding needs dim >= 2, got {dim}");
    let mut vector = vec![0.0f64; dim];
    for feature in features(text) {
        let h = fnv1a_64(feature.as_bytes());
        let index = (h % dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        vector[index] += sign;
    }
    vector
}

/// Scales to unit L2 norm; an all-zero vector is returned unchanged.
pub fn l2_normalize(mut vector: Vec<f64>) -> Vec<f64> {
    let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        vector.iter_mut().for_each(|v| *v /= norm);
    }
    vector
}

/// Signed feature-hashing embedding over unigrams and adjacent bigrams.
///
/// Each feature lands at `fnv1a(feature) mod dim` with sign taken from the
/// hash's top bit; the result is L2-normalized unless it is all zeros.
pub fn hash_embed(text: &str, dim: usize) -> Vec<f64> {
    l2_normalize(hash_counts(text, dim))
}
