use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, Rng};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitDecision {
    Split,
    Keep,
    /// The criterion rejected unimodality but a child fell below the minimum size.
    ChildTooSmall,
    /// The criterion could not be evaluated (e.g. all projections equal).
    Untestable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub round: usize,
    pub cluster: usize,
    pub size: usize,
    pub statistic: Option<f64>,
    pub decision: SplitDecision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub k: usize,
    /// Sum of squared distances to the assigned centroid.
    pub cost: f64,
    pub split_log: Vec<SplitRecord>,
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_dist(x, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding.
fn plus_plus(data: &Dataset, k: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let first = rng.random_range(0..n);
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut centroids = vec![data.row(first).to_vec()];
    let mut d2: Vec<f64> = data.rows().map(|x| sq_dist(x, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                pick = Some(i);
                if target < w {
                    break;
                }
                target -= w;
            }
            pick.expect("positive total has a positive weight")
        } else {
            // Every remaining point coincides with a centroid.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = data.row(pick).to_vec();
        for (i, x) in data.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn means(data: &Dataset, assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let d = data.dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in data.rows().zip(assignment) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &m) in sums.iter_mut().zip(&counts) {
        for v in s.iter_mut() {
            *v /= m as f64;
        }
    }
    sums
}

/// Lloyd iterations from the given centroids until the assignment stops
/// changing or [`MAX_ITERATIONS`] is reached. An emptied cluster is reseeded
/// with the point farthest from its own centroid.
pub fn lloyd(data: &Dataset, mut centroids: Vec<Vec<f64>>) -> ClusteringResult {
    let k = centroids.len();
    let mut assignment = vec![usize::MAX; data.len()];
    for _ in 0..MAX_ITERATIONS {
        let nearest: Vec<(usize, f64)> = data.rows().map(|x| nearest(x, &centroids)).collect();
        let mut next: Vec<usize> = nearest.iter().map(|p| p.0).collect();
        let mut dist: Vec<f64> = nearest.iter().map(|p| p.1).collect();
        let mut counts = vec![0usize; k];
        for &c in &next {
            counts[c] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let far = (0..data.len())
                .filter(|&i| counts[next[i]] > 1)
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                })
                .expect("k <= n leaves a cluster with two members");
            counts[next[far]] -= 1;
            counts[empty] = 1;
            next[far] = empty;
            dist[far] = 0.0;
        }
        let changed = next != assignment;
        assignment = next;
        centroids = means(data, &assignment, k);
        if !changed {
            break;
        }
    }
    let cost = data
        .rows()
        .zip(&assignment)
        .map(|(x, &c)| sq_dist(x, &centroids[c]))
        .sum();
    ClusteringResult {
        assignment,
        centroids,
        k,
        cost,
        split_log: Vec::new(),
    }
}

/// Lloyd's k-means from k-means++ seeding.
pub fn kmeans(data: &Dataset, k: usize, seed: u64) -> Result<ClusteringResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if k > data.len() {
        return Err(Error::KTooLarge { k, n: data.len() });
    }
    let mut rng = rng_from_seed(seed);
    let init = plus_plus(data, k, &mut rng);
    Ok(lloyd(data, init))
}
