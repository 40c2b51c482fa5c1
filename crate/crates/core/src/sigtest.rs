//! Signature test for unimodality.
//!
//! The sorted absolute values of the normalized sample are mapped through the
//! half-normal CDF, which turns them into (approximately) uniform order
//! statistics. Each index then has a known expected level `n / (N + 1)` and
//! variance, giving a pointwise confidence band. The test counts how many
//! indices of the signature fall outside the band and splits when that
//! fraction exceeds a threshold.
//!
//! Two signatures are available:
//!
//! * [`Variant::Signature1`]: the transformed order statistics themselves.
//! * [`Variant::Signature2`]: their running mean. Its band is centered on the
//!   running mean of the expected levels, and its half-width uses the running
//!   mean of the per-index standard deviations, an upper bound on the standard
//!   deviation of an average of correlated terms.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{half_normal_cdf, order_statistic_moments, SampleVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Variant {
    #[default]
    Signature1,
    Signature2,
}

impl Variant {
    pub fn label(self) -> &'static str {
        match self {
            Variant::Signature1 => "sigtest1",
            Variant::Signature2 => "sigtest2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigtestConfig {
    /// Band half-width in standard deviations. `2.0` gives roughly 95%
    /// pointwise coverage.
    pub gamma: f64,
    /// Split when the violation fraction is strictly greater than this.
    pub threshold: f64,
    pub variant: Variant,
    pub min_samples: usize,
}

impl Default for SigtestConfig {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            threshold: 0.4,
            variant: Variant::Signature1,
            min_samples: 8,
        }
    }
}

impl SigtestConfig {
    pub fn with_variant(variant: Variant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.min_samples < 8 {
            return Err(Error::InvalidParameter(format!(
                "min_samples must be at least 8, got {}",
                self.min_samples
            )));
        }
        Ok(())
    }
}

/// Probability-domain signature sequence, one value per order statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub values: Vec<f64>,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureBounds {
    pub center: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub gamma: f64,
}

impl SignatureBounds {
    pub fn len(&self) -> usize {
        self.center.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_empty()
    }
}

/// Per-index band violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations {
    pub flags: Vec<bool>,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    /// Fraction of indices outside the band.
    pub c: f64,
    pub violations: Vec<bool>,
    pub split: bool,
    pub variant: Variant,
    pub n: usize,
}

/// Builds the signature of `z`, which must already be sorted absolute values
/// of a normalized sample.
pub fn compute_signature(z: &SampleVector, variant: Variant) -> Result<Signature> {
    let mut values = z
        .as_slice()
        .iter()
        .map(|&t| half_normal_cdf(t))
        .collect::<Result<Vec<f64>>>()?;
    if variant == Variant::Signature2 {
        running_mean_in_place(&mut values);
    }
    Ok(Signature { values, variant })
}

fn running_mean_in_place(values: &mut [f64]) {
    let mut acc = 0.0;
    for (i, v) in values.iter_mut().enumerate() {
        acc += *v;
        *v = acc / (i + 1) as f64;
    }
}

/// Confidence band for a signature of length `len`, with no sample-size guard.
pub fn band(len: usize, gamma: f64, variant: Variant) -> SignatureBounds {
    let mut center = Vec::with_capacity(len);
    let mut spread = Vec::with_capacity(len);
    for n in 1..=len {
        let m = order_statistic_moments(n, len).expect("index within 1..=len");
        center.push(m.p);
        spread.push(m.var.sqrt());
    }
    if variant == Variant::Signature2 {
        running_mean_in_place(&mut center);
        running_mean_in_place(&mut spread);
    }
    let upper = center
        .iter()
        .zip(&spread)
        .map(|(c, s)| (c + gamma * s).min(1.0))
        .collect();
    let lower = center
        .iter()
        .zip(&spread)
        .map(|(c, s)| (c - gamma * s).max(0.0))
        .collect();
    SignatureBounds {
        center,
        upper,
        lower,
        gamma,
    }
}

pub fn compute_bounds(len: usize, config: &SigtestConfig) -> Result<SignatureBounds> {
    config.validate()?;
    if len < config.min_samples {
        return Err(Error::TooFewSamples {
            needed: config.min_samples,
            got: len,
        });
    }
    Ok(band(len, config.gamma, config.variant))
}

/// A band plus, for Signature1, the same band pulled back through the
/// half-normal CDF so standardized values can be compared directly.
struct PreparedBand {
    bounds: SignatureBounds,
    /// `z < z_lower[i]` exactly when `half_normal_cdf(z) < lower[i]`.
    z_lower: Vec<f64>,
    /// `z >= z_above[i]` exactly when `half_normal_cdf(z) > upper[i]`.
    z_above: Vec<f64>,
}

/// Smallest nonnegative double satisfying a predicate that is monotone in
/// `z`, or infinity if none does.
fn first_where(pred: impl Fn(f64) -> bool) -> f64 {
    // Nonnegative doubles are ordered like their bit patterns.
    let (mut lo, mut hi) = (0u64, f64::INFINITY.to_bits());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(f64::from_bits(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    f64::from_bits(lo)
}

fn hn(z: f64) -> f64 {
    half_normal_cdf(z).expect("nonnegative")
}

type BandCache = Mutex<HashMap<(usize, u64, Variant), Arc<PreparedBand>>>;

fn prepared_band(len: usize, gamma: f64, variant: Variant) -> Arc<PreparedBand> {
    static CACHE: OnceLock<BandCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (len, gamma.to_bits(), variant);
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&key) {
        return Arc::clone(hit);
    }
    let bounds = band(len, gamma, variant);
    let (z_lower, z_above) = if variant == Variant::Signature1 {
        (
            bounds
                .lower
                .iter()
                .map(|&lo| first_where(|z| hn(z) >= lo))
                .collect(),
            bounds
                .upper
                .iter()
                .map(|&hi| first_where(|z| hn(z) > hi))
                .collect(),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    let prepared = Arc::new(PreparedBand {
        bounds,
        z_lower,
        z_above,
    });
    cache
        .lock()
        .expect("cache poisoned")
        .entry(key)
        .or_insert(prepared)
        .clone()
}

/// Flags indices where the signature lies strictly outside `(lower, upper)`.
/// Touching a bound is not a violation.
pub fn count_violations(signature: &Signature, bounds: &SignatureBounds) -> Result<Violations> {
    let n = signature.values.len();
    if n != bounds.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: bounds.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let flags: Vec<bool> = signature
        .values
        .iter()
        .zip(bounds.lower.iter().zip(&bounds.upper))
        .map(|(&s, (&lo, &hi))| s < lo || s > hi)
        .collect();
    let count = flags.iter().filter(|&&f| f).count();
    Ok(Violations {
        fraction: count as f64 / n as f64,
        flags,
    })
}

/// Sorted absolute deviations from the mean, in units of the population
/// standard deviation.
///
/// Equivalent to `sorted_abs(normalize(y))`, but the moments are accumulated
/// over the sorted sample in mirrored pairs, so the result does not depend on
/// the input order and is bit-identical under negation of the sample.
pub fn standardized_sorted_abs(y: &SampleVector) -> Result<SampleVector> {
    let n = y.len();
    if n < 2 {
        return Err(Error::DegenerateInput(
            "normalization needs at least two samples",
        ));
    }
    let mut sorted = y.as_slice().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);

    let mean = mirrored_sum(&sorted, |v| v) / n as f64;
    let ss = mirrored_sum(&sorted, |v| (v - mean) * (v - mean));
    let std = (ss / n as f64).sqrt();
    if !(std > 0.0 && std.is_finite()) {
        return Err(Error::DegenerateInput("all samples are equal"));
    }

    // |v - mean| is decreasing below the mean and increasing above it, so the
    // two runs merge in linear time.
    let pivot = sorted.partition_point(|&v| v < mean);
    let mut below = sorted[..pivot]
        .iter()
        .rev()
        .map(|&v| (mean - v) / std)
        .peekable();
    let mut above = sorted[pivot..].iter().map(|&v| (v - mean) / std).peekable();
    let mut out = Vec::with_capacity(n);
    loop {
        let next = match (below.peek(), above.peek()) {
            (Some(&a), Some(&b)) => {
                if a <= b {
                    below.next()
                } else {
                    above.next()
                }
            }
            (Some(_), None) => below.next(),
            (None, Some(_)) => above.next(),
            (None, None) => break,
        };
        out.push(next.expect("peeked"));
    }
    Ok(SampleVector(out))
}

fn mirrored_sum(sorted: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len();
    let mut acc = 0.0;
    for i in 0..n / 2 {
        acc += f(sorted[i]) + f(sorted[n - 1 - i]);
    }
    if n % 2 == 1 {
        acc += f(sorted[n / 2]);
    }
    acc
}

/// Runs the full test: normalize, sort absolute values, build the signature
/// and band, count violations and compare against the threshold.
pub fn sigtest(y: &SampleVector, config: &SigtestConfig) -> Result<TestOutcome> {
    config.validate()?;
    if y.len() < config.min_samples {
        return Err(Error::TooFewSamples {
            needed: config.min_samples,
            got: y.len(),
        });
    }
    let z = standardized_sorted_abs(y)?;
    let prepared = prepared_band(z.len(), config.gamma, config.variant);
    let flags = match config.variant {
        Variant::Signature1 => z
            .as_slice()
            .iter()
            .zip(prepared.z_lower.iter().zip(&prepared.z_above))
            .map(|(&t, (&lo, &above))| t < lo || t >= above)
            .collect(),
        Variant::Signature2 => {
            let signature = compute_signature(&z, config.variant)?;
            count_violations(&signature, &prepared.bounds)?.flags
        }
    };
    let c = flags.iter().filter(|&&f| f).count() as f64 / z.len() as f64;
    Ok(TestOutcome {
        c,
        split: c > config.threshold,
        violations: flags,
        variant: config.variant,
        n: z.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{normalize, sorted_abs};
    use proptest::prelude::*;

    fn sv(v: &[f64]) -> SampleVector {
        SampleVector::from_slice(v).unwrap()
    }

    #[test]
    fn signature_of_zeros() {
        let sig = compute_signature(&sv(&[0.0, 0.0, 0.0]), Variant::Signature1).unwrap();
        assert_eq!(sig.values, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn signature2_of_constant_is_constant() {
        let sig = compute_signature(&sv(&[0.7, 0.7, 0.7]), Variant::Signature2).unwrap();
        let c = half_normal_cdf(0.7).unwrap();
        for v in sig.values {
            assert!((v - c).abs() < 1e-15);
        }
    }

    #[test]
    fn single_point_band_is_clamped() {
        let b = band(1, 2.0, Variant::Signature1);
        assert_eq!(b.center, vec![0.5]);
        assert_eq!(b.upper, vec![1.0]);
        assert_eq!(b.lower, vec![0.0]);
    }

    #[test]
    fn band_hand_case() {
        let b = band(100, 2.0, Variant::Signature1);
        assert!((b.center[49] - 0.495_05).abs() < 1e-5);
        let half = b.upper[49] - b.center[49];
        assert!((half - 0.099_99).abs() < 1e-5);
        assert!((b.center[49] - b.lower[49] - half).abs() < 1e-15);
    }

    #[test]
    fn band_is_symmetric_before_clamping() {
        for variant in [Variant::Signature1, Variant::Signature2] {
            let b = band(50, 1.0, variant);
            for i in 0..50 {
                let up = b.upper[i] - b.center[i];
                let down = b.center[i] - b.lower[i];
                if b.upper[i] < 1.0 && b.lower[i] > 0.0 {
                    assert!((up - down).abs() < 1e-15);
                }
                assert!(b.upper[i] >= b.lower[i]);
                assert!((0.0..=1.0).contains(&b.upper[i]) && (0.0..=1.0).contains(&b.lower[i]));
            }
        }
    }

    #[test]
    fn compute_bounds_guards() {
        let cfg = SigtestConfig::default();
        assert!(matches!(
            compute_bounds(7, &cfg),
            Err(Error::TooFewSamples { needed: 8, got: 7 })
        ));
        let bad = SigtestConfig { gamma: 0.0, ..cfg };
        assert!(matches!(
            compute_bounds(100, &bad),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn violations_counting() {
        let b = band(40, 2.0, Variant::Signature1);
        let centered = Signature {
            values: b.center.clone(),
            variant: Variant::Signature1,
        };
        assert_eq!(count_violations(&centered, &b).unwrap().fraction, 0.0);

        let above = Signature {
            values: b.upper.iter().map(|u| u + 0.01).collect(),
            variant: Variant::Signature1,
        };
        assert_eq!(count_violations(&above, &b).unwrap().fraction, 1.0);

        // Touching a bound is not a violation.
        let touching = Signature {
            values: b.upper.clone(),
            variant: Variant::Signature1,
        };
        assert_eq!(count_violations(&touching, &b).unwrap().fraction, 0.0);

        let b4 = band(4, 0.5, Variant::Signature1);
        let mut values = b4.center.clone();
        values[0] = b4.lower[0] - 1e-3;
        values[3] = b4.upper[3] + 1e-3;
        let v = count_violations(
            &Signature {
                values,
                variant: Variant::Signature1,
            },
            &b4,
        )
        .unwrap();
        assert_eq!(v.flags, vec![true, false, false, true]);
        assert_eq!(v.fraction, 0.5);

        let short = Signature {
            values: vec![0.5; 3],
            variant: Variant::Signature1,
        };
        assert!(matches!(
            count_violations(&short, &b4),
            Err(Error::LengthMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn sigtest_rejects_degenerate_and_short_input() {
        let cfg = SigtestConfig::default();
        assert!(matches!(
            sigtest(&sv(&[3.0; 20]), &cfg),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            sigtest(&sv(&[1.0, 2.0, 3.0]), &cfg),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn evenly_spaced_sample_is_unimodal() {
        let y: Vec<f64> = (0..200).map(|i| i as f64).collect();
        // A uniform sample is flatter than a Gaussian but still unimodal; the
        // band must not flag it as bimodal.
        let out = sigtest(&sv(&y), &SigtestConfig::default()).unwrap();
        assert_eq!(out.n, 200);
        assert_eq!(out.violations.len(), 200);
        assert_eq!(out.split, out.c > 0.4);
    }

    fn arb_sample() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-100f64..100.0, 8..120).prop_filter("needs spread", |v| {
            v.iter().any(|x| (x - v[0]).abs() > 1e-3)
        })
    }

    #[test]
    fn pulled_back_thresholds_are_tight() {
        let p = prepared_band(50, 2.0, Variant::Signature1);
        for (i, (&lo, &above)) in p.z_lower.iter().zip(&p.z_above).enumerate() {
            let (l, u) = (p.bounds.lower[i], p.bounds.upper[i]);
            assert!(hn(lo) >= l);
            if lo > 0.0 {
                assert!(hn(f64::from_bits(lo.to_bits() - 1)) < l);
            }
            if above.is_finite() {
                assert!(hn(above) > u);
                assert!(hn(f64::from_bits(above.to_bits() - 1)) <= u);
            } else {
                assert_eq!(u, 1.0);
            }
        }
    }

    proptest! {
        #[test]
        fn sigtest_matches_stepwise_evaluation(values in arb_sample(), v2 in any::<bool>()) {
            let cfg = SigtestConfig::with_variant(if v2 { Variant::Signature2 } else { Variant::Signature1 });
            let y = sv(&values);
            let z = standardized_sorted_abs(&y).unwrap();
            let sig = compute_signature(&z, cfg.variant).unwrap();
            let want = count_violations(&sig, &compute_bounds(z.len(), &cfg).unwrap()).unwrap();
            let got = sigtest(&y, &cfg).unwrap();
            prop_assert_eq!(got.c, want.fraction);
            prop_assert_eq!(got.violations, want.flags);
        }

        #[test]
        fn fast_path_matches_composition(values in arb_sample()) {
            let y = sv(&values);
            let fast = standardized_sorted_abs(&y).unwrap();
            let slow = sorted_abs(&normalize(&y).unwrap());
            for (a, b) in fast.as_slice().iter().zip(slow.as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn permutation_invariance_is_exact(values in arb_sample(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = values.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            for variant in [Variant::Signature1, Variant::Signature2] {
                let cfg = SigtestConfig::with_variant(variant);
                prop_assert_eq!(
                    sigtest(&sv(&values), &cfg).unwrap(),
                    sigtest(&sv(&shuffled), &cfg).unwrap()
                );
            }
        }

        #[test]
        fn negation_and_shift_invariance(values in arb_sample(), a in 0.1f64..10.0, b in -50f64..50.0) {
            let cfg = SigtestConfig::default();
            let base = sigtest(&sv(&values), &cfg).unwrap();
            let negated: Vec<f64> = values.iter().map(|v| -v).collect();
            prop_assert_eq!(&sigtest(&sv(&negated), &cfg).unwrap(), &base);
            let moved: Vec<f64> = values.iter().map(|v| a * v + b).collect();
            let out = sigtest(&sv(&moved), &cfg).unwrap();
            prop_assert_eq!(out.c, base.c);
            prop_assert_eq!(out.split, base.split);
        }

        #[test]
        fn outcome_contract(values in arb_sample(), t in 0f64..1.0, v2 in any::<bool>()) {
            let cfg = SigtestConfig {
                threshold: t,
                variant: if v2 { Variant::Signature2 } else { Variant::Signature1 },
                ..SigtestConfig::default()
            };
            let out = sigtest(&sv(&values), &cfg).unwrap();
            prop_assert!((0.0..=1.0).contains(&out.c));
            prop_assert_eq!(out.split, out.c > t);
            let count = out.violations.iter().filter(|&&f| f).count();
            prop_assert_eq!(out.c, count as f64 / out.n as f64);
        }

        #[test]
        fn signature2_contracts_variation(values in arb_sample()) {
            let z = standardized_sorted_abs(&sv(&values)).unwrap();
            let tv = |s: &[f64]| s.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
            let s1 = compute_signature(&z, Variant::Signature1).unwrap();
            let s2 = compute_signature(&z, Variant::Signature2).unwrap();
            prop_assert!(tv(&s2.values) <= tv(&s1.values) + 1e-12);
            for s in [&s1.values, &s2.values] {
                prop_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
                prop_assert!(s.windows(2).all(|w| w[0] <= w[1] + 1e-15));
            }
        }
    }
}
