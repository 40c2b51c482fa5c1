//! Seeded Gaussian generators for the synthetic experiments.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Two equal-size spherical Gaussian clusters whose centers lie
/// `separation * sigma` apart along the first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoClusterSpec {
    pub n_per_cluster: usize,
    pub sigma: f64,
    /// Distance between centers in units of `sigma`.
    pub separation: f64,
    pub dimension: usize,
    pub seed: u64,
}

impl TwoClusterSpec {
    pub fn new(separation: f64, seed: u64) -> Self {
        Self {
            n_per_cluster: 100,
            sigma: 1.0,
            separation,
            dimension: 1,
            seed,
        }
    }
}

fn check(n: usize, sigma: f64, dimension: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be > 0, got {sigma}"
        )));
    }
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(())
}

/// `n` i.i.d. draws from `N(mean * 1, sigma^2 I)` in `dimension` dimensions.
pub fn gen_gaussian(
    n: usize,
    mean: f64,
    sigma: f64,
    dimension: usize,
    seed: u64,
) -> Result<Dataset> {
    check(n, sigma, dimension)?;
    let mut rng = rng_from_seed(seed);
    let values = (0..n * dimension)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            mean + sigma * z
        })
        .collect();
    Dataset::new("gaussian", dimension, values, None)
}

/// One-dimensional standard-normal draws.
pub fn standard_normal(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn gen_two_clusters(spec: &TwoClusterSpec) -> Result<Dataset> {
    if spec.n_per_cluster < 2 {
        return Err(Error::InvalidParameter("n_per_cluster must be >= 2".into()));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "separation must be >= 0, got {}",
            spec.separation
        )));
    }
    check(spec.n_per_cluster, spec.sigma, spec.dimension)?;
    let mut rng = rng_from_seed(spec.seed);
    let offset = spec.separation * spec.sigma / 2.0;
    let total = 2 * spec.n_per_cluster;
    let mut values = Vec::with_capacity(total * spec.dimension);
    let mut labels = Vec::with_capacity(total);
    for (label, center) in [("0", -offset), ("1", offset)] {
        for _ in 0..spec.n_per_cluster {
            for j in 0..spec.dimension {
                let z: f64 = StandardNormal.sample(&mut rng);
                let shift = if j == 0 { center } else { 0.0 };
                values.push(shift + spec.sigma * z);
            }
            labels.push(label.to_string());
        }
    }
    Dataset::new(
        format!("two-clusters-{}sigma", spec.separation),
        spec.dimension,
        values,
        Some(labels),
    )
}
