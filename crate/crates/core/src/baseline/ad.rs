use crate::error::{Error, Result};
use crate::stats::{mean_and_sample_std, normal_cdf, normal_sf, SampleVector};

use super::{BaselineDecision, BaselineMethod};

/// Significance level to critical value of the small-sample corrected
/// statistic `A*^2`, for the case where both mean and variance are estimated.
#[derive(Debug, Clone, PartialEq)]
pub struct AdCriticalTable {
    entries: Vec<(f64, f64)>,
}

impl Default for AdCriticalTable {
    fn default() -> Self {
        Self {
            entries: vec![
                (0.15, 0.576),
                (0.10, 0.656),
                (0.05, 0.787),
                (0.025, 0.918),
                (0.01, 1.092),
                (0.005, 1.159),
                // Level used by G-means.
                (0.0001, 1.8692),
            ],
        }
    }
}

impl AdCriticalTable {
    pub fn new(entries: Vec<(f64, f64)>) -> Self {
        Self { entries }
    }

    pub fn insert(&mut self, alpha: f64, critical: f64) {
        self.entries.retain(|(a, _)| (a - alpha).abs() > 1e-12);
        self.entries.push((alpha, critical));
    }

    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        self.entries
            .iter()
            .find(|(a, _)| (a - alpha).abs() <= 1e-12)
            .map(|&(_, c)| c)
            .ok_or_else(|| {
                let known: Vec<String> = self.entries.iter().map(|(a, _)| a.to_string()).collect();
                Error::InvalidParameter(format!(
                    "no Anderson-Darling critical value for alpha = {alpha} (known: {})",
                    known.join(", ")
                ))
            })
    }
}

/// Corrected Anderson-Darling statistic `A^2 (1 + 0.75/N + 2.25/N^2)` against
/// a normal law with estimated mean and variance.
pub fn ad_statistic(y: &SampleVector) -> Result<f64> {
    let n = y.len();
    if n < 8 {
        return Err(Error::TooFewSamples { needed: 8, got: n });
    }
    let mut x = y.as_slice().to_vec();
    x.sort_unstable_by(f64::total_cmp);
    let (mean, std) = mean_and_sample_std(&x);
    if std <= 0.0 {
        return Err(Error::DegenerateInput("all samples are equal"));
    }
    let z: Vec<f64> = x.iter().map(|v| (v - mean) / std).collect();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let lower = normal_cdf(z[i]).max(f64::MIN_POSITIVE).ln();
        let upper = normal_sf(z[n - 1 - i]).max(f64::MIN_POSITIVE).ln();
        acc += (2 * i + 1) as f64 * (lower + upper);
    }
    let a2 = -nf - acc / nf;
    Ok(a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf)))
}

pub fn anderson_darling(y: &SampleVector, alpha: f64) -> Result<BaselineDecision> {
    anderson_darling_with_table(y, alpha, &AdCriticalTable::default())
}

pub fn anderson_darling_with_table(
    y: &SampleVector,
    alpha: f64,
    table: &AdCriticalTable,
) -> Result<BaselineDecision> {
    let critical = table.critical_value(alpha)?;
    let statistic = ad_statistic(y)?;
    Ok(BaselineDecision {
        statistic,
        p_value: None,
        reject_unimodal: statistic > critical,
        method: BaselineMethod::AndersonDarling,
    })
}
