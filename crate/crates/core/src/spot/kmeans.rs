//! Seeded Lloyd k-means over 2-D points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SpotError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-4, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub centroids: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned centroid, one entry per assignment step.
    pub inertia: Vec<f64>,
    pub iterations: usize,
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn nearest(p: [f64; 2], centroids: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, *c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Greedy k-means++ seeding: the first center uniformly, then the best of
/// `2 + ln k` draws proportional to squared distance.
fn seed_centroids(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(*p, points[first])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut best: Option<(f64, usize)> = None;
            for _ in 0..trials {
                let cand = draw_weighted(&d2, rng.random::<f64>() * total);
                let potential: f64 = d2.iter().zip(points).map(|(d, p)| d.min(dist2(*p, points[cand]))).sum();
                if best.is_none_or(|(bp, _)| potential < bp) {
                    best = Some((potential, cand));
                }
            }
            best.expect("trials >= 2").1
        } else {
            chosen.iter().position(|c| !c).expect("n >= k")
        };
        chosen[idx] = true;
        centroids.push(points[idx]);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(*p, points[idx]));
        }
    }
    centroids
}

/// Index whose cumulative weight first exceeds `target`; only positive weights are eligible.
fn draw_weighted(weights: &[f64], mut target: f64) -> usize {
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        if target < *w {
            return i;
        }
        target -= w;
    }
    // rounding can walk off the end; take the last positive-weight point
    weights.iter().rposition(|w| *w > 0.0).expect("some weight > 0")
}

/// Cluster `points` into `k` groups.
///
/// Deterministic for a given seed. Empty clusters are re-seeded at the point
/// farthest from its current centroid.
pub fn kmeans(points: &[[f64; 2]], k: usize, cfg: &KMeansConfig) -> Result<KMeansFit, SpotError> {
    if k == 0 {
        return Err(SpotError::InvalidK(k));
    }
    if k > points.len() {
        return Err(SpotError::TooFewPoints { k, n: points.len() });
    }
    if cfg.max_iter == 0 || !(cfg.tol > 0.0) {
        return Err(SpotError::InvalidConfig("kmeans needs max_iter >= 1 and tol > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut labels = vec![0usize; points.len()];
    let mut inertia = Vec::new();
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        let mut cost = 0.0;
        for (l, p) in labels.iter_mut().zip(points) {
            let (j, d) = nearest(*p, &centroids);
            *l = j;
            cost += d;
        }
        inertia.push(cost);

        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (l, p) in labels.iter().zip(points) {
            sums[*l][0] += p[0];
            sums[*l][1] += p[1];
            counts[*l] += 1;
        }
        let mut next: Vec<[f64; 2]> = (0..k)
            .map(|j| {
                if counts[j] > 0 {
                    [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64]
                } else {
                    centroids[j]
                }
            })
            .collect();
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let (far, _) = labels
                .iter()
                .zip(points)
                .enumerate()
                .map(|(i, (l, p))| (i, dist2(*p, next[*l])))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            next[j] = points[far];
            counts[labels[far]] -= 1;
            labels[far] = j;
            counts[j] = 1;
        }

        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| dist2(*a, *b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < cfg.tol {
            break;
        }
    }

    let mut cost = 0.0;
    for (l, p) in labels.iter_mut().zip(points) {
        let (j, d) = nearest(*p, &centroids);
        *l = j;
        cost += d;
    }
    inertia.push(cost);

    Ok(KMeansFit { centroids, labels, inertia, iterations })
}
