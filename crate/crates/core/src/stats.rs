//! Numerical primitives shared by every test in the crate: validated sample
//! vectors, normalization, the sorted-absolute transform, the half-normal
//! reference distribution and uniform order-statistic moments.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

/// One-dimensional real observations. Always non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(pub(crate) Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for SampleVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Expected CDF level and variance of the `index`-th of `len` uniform order statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatMoments {
    pub index: usize,
    pub p: f64,
    pub var: f64,
}

/// Mean and population standard deviation.
pub(crate) fn mean_and_pop_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / n).sqrt())
}

/// Mean and sample (n - 1) standard deviation.
pub(crate) fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Centers to mean 0 and scales to population standard deviation 1.
/// Element order is preserved.
pub fn normalize(samples: &SampleVector) -> Result<SampleVector> {
    let values = samples.as_slice();
    if values.len() < 2 {
        return Err(Error::DegenerateInput(
            "normalization needs at least two samples",
        ));
    }
    let (mean, std) = mean_and_pop_std(values);
    if std <= 0.0 || !std.is_finite() {
        return Err(Error::DegenerateInput("all samples are equal"));
    }
    Ok(SampleVector(
        values.iter().map(|v| (v - mean) / std).collect(),
    ))
}

/// Absolute values sorted ascending. The sort is stable.
pub fn sorted_abs(samples: &SampleVector) -> SampleVector {
    let mut out: Vec<f64> = samples.as_slice().iter().map(|v| v.abs()).collect();
    out.sort_by(f64::total_cmp);
    SampleVector(out)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal upper tail, `1 - normal_cdf(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// `P(|Z| <= t)` for standard normal `Z`.
pub fn half_normal_cdf(t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeInput(t));
    }
    Ok(libm::erf(t * FRAC_1_SQRT_2))
}

/// Moments of the `index`-th uniform order statistic out of `len`, used as the
/// center and spread of the signature band.
pub fn order_statistic_moments(index: usize, len: usize) -> Result<OrderStatMoments> {
    if index == 0 || index > len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let m = len as u128 + 1;
    let p = index as f64 / m as f64;
    // p(1-p)/N as one integer ratio so that index <-> len+1-index is exact.
    let numer = (index as u128 * (m - index as u128)) as f64;
    let denom = (m * m * len as u128) as f64;
    Ok(OrderStatMoments {
        index,
        p,
        var: numer / denom,
    })
}
