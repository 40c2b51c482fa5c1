//! Hartigan's dip statistic and a uniform-bootstrap dip test.
//!
//! The statistic follows the greatest-convex-minorant / least-concave-majorant
//! algorithm of Hartigan & Hartigan (1985), including the later fixes that
//! guarantee termination. The reported dip is `D / (2n)` where `D` is computed
//! in counts, so it is always at least `1 / (2n)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stats::SampleVector;

use super::{BaselineDecision, BaselineMethod};

pub const DEFAULT_BOOTSTRAP: usize = 1000;

pub fn dip_statistic(y: &SampleVector) -> Result<f64> {
    if y.len() < 4 {
        return Err(Error::TooFewSamples {
            needed: 4,
            got: y.len(),
        });
    }
    let mut x = y.as_slice().to_vec();
    x.sort_unstable_by(f64::total_cmp);
    Ok(dip_sorted(&x))
}

/// Dip of an ascending sample. Indices below are 1-based to follow the
/// reference algorithm; slot 0 of every work array is unused.
pub(crate) fn dip_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    let two_n = 2.0 * n as f64;
    let mut dip = 1.0;
    if n < 2 || sorted[n - 1] == sorted[0] {
        return dip / two_n;
    }
    let x = |i: usize| sorted[i - 1];
    let f = |i: usize| i as f64;

    // Predecessors on the convex minorant.
    let mut mn = vec![0usize; n + 1];
    mn[1] = 1;
    for j in 2..=n {
        mn[j] = j - 1;
        loop {
            let mnj = mn[j];
            let mnmnj = mn[mnj];
            if mnj == 1
                || (x(j) - x(mnj)) * (f(mnj) - f(mnmnj)) < (x(mnj) - x(mnmnj)) * (f(j) - f(mnj))
            {
                break;
            }
            mn[j] = mnmnj;
        }
    }

    // Successors on the concave majorant.
    let mut mj = vec![0usize; n + 1];
    mj[n] = n;
    for k in (1..n).rev() {
        mj[k] = k + 1;
        loop {
            let mjk = mj[k];
            let mjmjk = mj[mjk];
            if mjk == n
                || (x(k) - x(mjk)) * (f(mjk) - f(mjmjk)) < (x(mjk) - x(mjmjk)) * (f(k) - f(mjk))
            {
                break;
            }
            mj[k] = mjmjk;
        }
    }

    let mut gcm = vec![0usize; n + 2];
    let mut lcm = vec![0usize; n + 2];
    let (mut low, mut high) = (1usize, n);
    loop {
        // Convex minorant vertices from high down to low.
        let mut ig = 1;
        gcm[1] = high;
        while gcm[ig] > low {
            gcm[ig + 1] = mn[gcm[ig]];
            ig += 1;
        }
        let l_gcm = ig;
        let mut ix = ig - 1;

        // Concave majorant vertices from low up to high.
        let mut ih = 1;
        lcm[1] = low;
        while lcm[ih] < high {
            lcm[ih + 1] = mj[lcm[ih]];
            ih += 1;
        }
        let l_lcm = ih;
        let mut iv = 2;

        // Largest distance between the two fits on [low, high].
        let mut d = 0.0;
        if l_gcm != 2 || l_lcm != 2 {
            loop {
                let gcmix = gcm[ix];
                let lcmiv = lcm[iv];
                if gcmix > lcmiv {
                    let gcmi1 = gcm[ix + 1];
                    let dx = (f(lcmiv) - f(gcmi1) + 1.0)
                        - (x(lcmiv) - x(gcmi1)) * (f(gcmix) - f(gcmi1)) / (x(gcmix) - x(gcmi1));
                    iv += 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv - 1;
                    }
                } else {
                    let lcmiv1 = lcm[iv - 1];
                    let dx = (x(gcmix) - x(lcmiv1)) * (f(lcmiv) - f(lcmiv1))
                        / (x(lcmiv) - x(lcmiv1))
                        - (f(gcmix) - f(lcmiv1) - 1.0);
                    ix -= 1;
                    if dx >= d {
                        d = dx;
                        ig = ix + 1;
                        ih = iv;
                    }
                }
                ix = ix.max(1);
                iv = iv.min(l_lcm);
                if gcm[ix] == lcm[iv] {
                    break;
                }
            }
        } else {
            d = 1.0;
        }

        if d < dip {
            break;
        }

        // Dip of the convex minorant on [low, gcm[ig]].
        let mut dip_l = 0.0f64;
        for j in ig..l_gcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (gcm[j + 1], gcm[j]);
            if je - jb > 1 && x(je) != x(jb) {
                let c = f(je - jb) / (x(je) - x(jb));
                for jj in jb..=je {
                    let t = f(jj - jb + 1) - (x(jj) - x(jb)) * c;
                    max_t = max_t.max(t);
                }
            }
            dip_l = dip_l.max(max_t);
        }

        // Dip of the concave majorant on [lcm[ih], high].
        let mut dip_u = 0.0f64;
        for j in ih..l_lcm {
            let mut max_t = 1.0f64;
            let (jb, je) = (lcm[j], lcm[j + 1]);
            if je - jb > 1 && x(je) != x(jb) {
                let c = f(je - jb) / (x(je) - x(jb));
                for jj in jb..=je {
                    let t = (x(jj) - x(jb)) * c - (f(jj) - f(jb) - 1.0);
                    max_t = max_t.max(t);
                }
            }
            dip_u = dip_u.max(max_t);
        }

        dip = dip.max(dip_l.max(dip_u));

        // Stop once the modal interval no longer shrinks.
        if low == gcm[ig] && high == lcm[ih] {
            break;
        }
        low = gcm[ig];
        high = lcm[ih];
    }
    dip / two_n
}

fn uniform_dips(n: usize, bootstrap: usize, seed: u64) -> Vec<f64> {
    (0..bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, &[n as u64, b as u64]);
            let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            u.sort_unstable_by(f64::total_cmp);
            dip_sorted(&u)
        })
        .collect()
}

type DipCache = Mutex<HashMap<(usize, usize, u64), Arc<Vec<f64>>>>;

/// Sorted dips of `bootstrap` uniform samples of size `n`. Replicate `b`
/// draws from substream `(seed, n, b)`. Cached per `(n, bootstrap, seed)`.
pub fn dip_null_distribution(n: usize, bootstrap: usize, seed: u64) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<DipCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, bootstrap, seed);
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&key) {
        return Arc::clone(hit);
    }
    let mut dips = uniform_dips(n, bootstrap, seed);
    dips.sort_unstable_by(f64::total_cmp);
    let dips = Arc::new(dips);
    cache
        .lock()
        .expect("cache poisoned")
        .entry(key)
        .or_insert(dips)
        .clone()
}

fn check_bootstrap(n: usize, bootstrap: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::TooFewSamples { needed: 4, got: n });
    }
    if bootstrap < 100 {
        return Err(Error::InvalidParameter(format!(
            "bootstrap size must be >= 100, got {bootstrap}"
        )));
    }
    Ok(())
}

fn decide(statistic: f64, exceed: usize, bootstrap: usize) -> BaselineDecision {
    BaselineDecision {
        statistic,
        p_value: Some(exceed as f64 / bootstrap as f64),
        // Level zero: reject only if no reference dip reaches the observed one.
        reject_unimodal: exceed == 0,
        method: BaselineMethod::Dip,
    }
}

/// Dip test with a fresh uniform bootstrap of `bootstrap` replicates.
pub fn dip_test(y: &SampleVector, bootstrap: usize, seed: u64) -> Result<BaselineDecision> {
    check_bootstrap(y.len(), bootstrap)?;
    let statistic = dip_statistic(y)?;
    let exceed = uniform_dips(y.len(), bootstrap, seed)
        .into_iter()
        .filter(|&d| d >= statistic)
        .count();
    Ok(decide(statistic, exceed, bootstrap))
}

/// Dip test against a precomputed sorted null distribution for `y.len()`.
pub fn dip_test_with_null(y: &SampleVector, null: &[f64]) -> Result<BaselineDecision> {
    check_bootstrap(y.len(), null.len())?;
    let statistic = dip_statistic(y)?;
    let exceed = null.len() - null.partition_point(|&d| d < statistic);
    Ok(decide(statistic, exceed, null.len()))
}
