//! Seeded K-means: kmeans++ initialization followed by Lloyd iterations.
//!
//! All arithmetic is sequential `f64`, and every random draw comes from a
//! SplitMix64 stream, so a given `(points, config)` pair produces bit-identical
//! output on every platform. Ties always go to the lowest index.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KMeansError {
    #[error("k = {k} exceeds the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("no points to cluster")]
    EmptyInput,
    #[error("point {0} has a non-finite component or inconsistent dimension")]
    NonFiniteInput(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub rel_tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            ..Self::default()
        }
    }
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            k: 4,
            seed: 42,
            max_iters: 300,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Number of Lloyd update steps performed.
    pub iterations: usize,
    /// Inertia of the initial assignment followed by one entry per update.
    pub inertia_history: Vec<f64>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Index of the nearest centroid and its squared distance; ties to lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign<P: AsRef<[f64]>>(points: &[P], centroids: &[Vec<f64>], assignments: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (i, p) in points.iter().enumerate() {
        let (j, d) = nearest(p.as_ref(), centroids);
        assignments[i] = j;
        inertia += d;
    }
    inertia
}

fn validate<P: AsRef<[f64]>>(points: &[P], config: &KMeansConfig) -> Result<usize, KMeansError> {
    if config.k == 0 {
        return Err(KMeansError::InvalidConfig("k must be at least 1"));
    }
    if config.max_iters == 0 {
        return Err(KMeansError::InvalidConfig("max_iters must be at least 1"));
    }
    if config.rel_tol.is_nan() || config.rel_tol <= 0.0 {
        return Err(KMeansError::InvalidConfig("rel_tol must be positive"));
    }
    let first = points.first().ok_or(KMeansError::EmptyInput)?;
    let dim = first.as_ref().len();
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
            return Err(KMeansError::NonFiniteInput(i));
        }
    }
    if config.k > points.len() {
        return Err(KMeansError::KTooLarge {
            k: config.k,
            n: points.len(),
        });
    }
    Ok(dim)
}

/// kmeans++ seeding. Returns the indices of the points chosen as centroids.
pub fn kmeans_plus_plus<P: AsRef<[f64]>>(points: &[P], k: usize, rng: &mut SplitMix64) -> Vec<usize> {
    let n = points.len();
    let mut chosen = Vec::with_capacity(k);
    chosen.push((rng.next_u64() % n as u64) as usize);
    let mut weights: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p.as_ref(), points[chosen[0]].as_ref()))
        .collect();

    while chosen.len() < k {
        let total: f64 = weights.iter().sum();
        let u = rng.next_f64();
        let next = if total > 0.0 {
            let target = u * total;
            let mut cumulative = 0.0;
            let mut pick = None;
            for (i, w) in weights.iter().enumerate() {
                cumulative += w;
                if cumulative > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave the walk short of the target; fall back to the
            // last point that still carries weight.
            pick.unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
        } else {
            // Every point coincides with a chosen centroid.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        let c = points[next].as_ref();
        for (w, p) in weights.iter_mut().zip(points) {
            *w = w.min(squared_distance(p.as_ref(), c));
        }
    }
    chosen
}

/// Means of the assigned points. Empty clusters take the point farthest from
/// its current centroid, drawn only from clusters that keep at least one
/// other member.
fn update_centroids<P: AsRef<[f64]>>(
    points: &[P],
    centroids: &[Vec<f64>],
    assignments: &mut [usize],
    dim: usize,
) -> Vec<Vec<f64>> {
    let k = centroids.len();
    let mut counts = vec![0usize; k];
    for &a in assignments.iter() {
        counts[a] += 1;
    }

    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut donor: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            let from = assignments[i];
            if counts[from] < 2 {
                continue;
            }
            let d = squared_distance(p.as_ref(), &centroids[from]);
            if donor.is_none_or(|(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        if let Some((i, _)) = donor {
            counts[assignments[i]] -= 1;
            assignments[i] = empty;
            counts[empty] = 1;
        }
    }

    let mut sums = vec![vec![0.0f64; dim]; k];
    for (p, &a) in points.iter().zip(assignments.iter()) {
        for (s, v) in sums[a].iter_mut().zip(p.as_ref()) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(j, (sum, count))| {
            if count == 0 {
                centroids[j].clone()
            } else {
                sum.into_iter().map(|s| s / count as f64).collect()
            }
        })
        .collect()
}

pub fn kmeans_fit<P: AsRef<[f64]>>(points: &[P], config: &KMeansConfig) -> Result<KMeansResult, KMeansError> {
    let dim = validate(points, config)?;
    let mut rng = SplitMix64::new(config.seed);
    let mut centroids: Vec<Vec<f64>> = kmeans_plus_plus(points, config.k, &mut rng)
        .into_iter()
        .map(|i| points[i].as_ref().to_vec())
        .collect();

    let mut assignments = vec![0usize; points.len()];
    let mut inertia_history = vec![assign(points, &centroids, &mut assignments)];
    let mut iterations = 0;

    while iterations < config.max_iters {
        let updated = update_centroids(points, &centroids, &mut assignments, dim);
        iterations += 1;
        let converged = centroids
            .iter()
            .zip(&updated)
            .all(|(old, new)| squared_distance(old, new).sqrt() < config.rel_tol * (1.0 + norm(old)));
        centroids = updated;
        inertia_history.push(assign(points, &centroids, &mut assignments));
        if converged {
            break;
        }
    }

    Ok(KMeansResult {
        centroids,
        assignments,
        inertia: *inertia_history.last().expect("history is never empty"),
        iterations,
        inertia_history,
    })
}

/// For each centroid in order, the closest point not already taken by an
/// earlier centroid. Ties go to the lowest point index.
pub fn nearest_to_centroids<P: AsRef<[f64]>>(result: &KMeansResult, points: &[P]) -> Vec<usize> {
    let mut taken = vec![false; points.len()];
    let mut selected = Vec::with_capacity(result.centroids.len());
    for c in &result.centroids {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d = squared_distance(p.as_ref(), c);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        if let Some((i, _)) = best {
            taken[i] = true;
            selected.push(i);
        }
    }
    selected
}
