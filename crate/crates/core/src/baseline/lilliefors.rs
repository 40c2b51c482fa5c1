use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::{mean_and_sample_std, normal_cdf, SampleVector};

use super::{BaselineDecision, BaselineMethod};

/// Monte-Carlo replicates behind each null table.
pub const LILLIEFORS_REPLICATES: usize = 10_000;

const NULL_SEED: u64 = 0x1111_EF0B_5EED;

/// Kolmogorov-Smirnov distance between the empirical CDF and a normal CDF
/// with the sample mean and (n - 1) standard deviation.
pub fn ks_statistic(y: &SampleVector) -> Result<f64> {
    let n = y.len();
    if n < 8 {
        return Err(Error::TooFewSamples { needed: 8, got: n });
    }
    let mut x = y.as_slice().to_vec();
    x.sort_unstable_by(f64::total_cmp);
    ks_sorted(&x)
}

fn ks_sorted(x: &[f64]) -> Result<f64> {
    let (mean, std) = mean_and_sample_std(x);
    if std <= 0.0 {
        return Err(Error::DegenerateInput("all samples are equal"));
    }
    let nf = x.len() as f64;
    let mut d = 0.0f64;
    for (i, v) in x.iter().enumerate() {
        let f = normal_cdf((v - mean) / std);
        d = d.max((i + 1) as f64 / nf - f).max(f - i as f64 / nf);
    }
    Ok(d)
}

type NullCache = Mutex<HashMap<usize, Arc<Vec<f64>>>>;

/// Sorted null distribution of the statistic for samples of size `n`.
/// Built once per size from a fixed seed, then cached for the process.
fn null_distribution(n: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<NullCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&n) {
        return Arc::clone(hit);
    }
    let mut stats: Vec<f64> = (0..LILLIEFORS_REPLICATES)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(NULL_SEED, &[n as u64, r as u64]);
            let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            x.sort_unstable_by(f64::total_cmp);
            ks_sorted(&x).expect("normal draws have spread")
        })
        .collect();
    stats.sort_unstable_by(f64::total_cmp);
    let stats = Arc::new(stats);
    cache
        .lock()
        .expect("cache poisoned")
        .entry(n)
        .or_insert(stats)
        .clone()
}

/// Upper `alpha` quantile of the statistic under normality.
pub fn lilliefors_critical_value(n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if n < 8 {
        return Err(Error::TooFewSamples { needed: 8, got: n });
    }
    let null = null_distribution(n);
    let rank = ((1.0 - alpha) * null.len() as f64).ceil() as usize;
    Ok(null[rank.clamp(1, null.len()) - 1])
}

pub fn ks_lilliefors(y: &SampleVector, alpha: f64) -> Result<BaselineDecision> {
    let statistic = ks_statistic(y)?;
    let critical = lilliefors_critical_value(y.len(), alpha)?;
    let null = null_distribution(y.len());
    let exceed = null.len() - null.partition_point(|&d| d < statistic);
    Ok(BaselineDecision {
        statistic,
        p_value: Some(exceed as f64 / null.len() as f64),
        reject_unimodal: statistic > critical,
        method: BaselineMethod::Lilliefors,
    })
}
