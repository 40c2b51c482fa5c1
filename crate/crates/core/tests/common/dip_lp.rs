//! Exact dip by linear programming in rational arithmetic.
//!
//! For distinct sorted points `x_1 < ... < x_n`, the closest unimodal CDF can
//! be taken piecewise linear between the sample points. With `g_i = G(x_i)`
//! the problem is
//!
//!   minimize d  s.t.  |g_i - (i-1)/n| <= d,  |g_i - i/n| <= d,
//!                     g nondecreasing, g_n <= 1,
//!                     chord slopes nondecreasing up to a peak chord p and
//!                     nonincreasing after it,
//!
//! and the dip is the minimum over every candidate peak chord. Each LP is
//! solved with a two-phase tableau simplex (Bland's rule) over BigRational.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

type Q = BigRational;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Minimizes `cost . x` subject to `a x <= b`, `x >= 0`. Returns `None` when
/// infeasible. Assumes the problem is bounded.
pub fn simplex_min(cost: &[Q], a: &[Vec<Q>], b: &[Q]) -> Option<Q> {
    let m = a.len();
    let nv = cost.len();
    let n_art = b.iter().filter(|v| v.is_negative()).count();
    let cols = nv + m + n_art;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = nv + m;
    for r in 0..m {
        let mut row = vec![Q::zero(); cols + 1];
        let neg = b[r].is_negative();
        let sign = if neg { -Q::one() } else { Q::one() };
        for j in 0..nv {
            row[j] = &a[r][j] * &sign;
        }
        row[nv + r] = sign.clone();
        row[cols] = &b[r] * &sign;
        if neg {
            row[art] = Q::one();
            basis.push(art);
            art += 1;
        } else {
            basis.push(nv + r);
        }
        t.push(row);
    }

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let mut c1 = vec![Q::zero(); cols];
        for c in c1.iter_mut().skip(nv + m) {
            *c = Q::one();
        }
        let v = run(&mut t, &mut basis, &c1, cols);
        if !v.is_zero() {
            return None;
        }
        // Pivot remaining (zero-level) artificials out of the basis.
        let mut r = 0;
        while r < t.len() {
            if basis[r] >= nv + m {
                if let Some(j) = (0..nv + m).find(|&j| !t[r][j].is_zero()) {
                    pivot(&mut t, &mut basis, r, j);
                } else {
                    t.remove(r);
                    basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
        for row in t.iter_mut() {
            for cell in &mut row[nv + m..cols] {
                *cell = Q::zero();
            }
        }
    }

    let mut c2 = vec![Q::zero(); cols];
    c2[..nv].clone_from_slice(cost);
    // Artificial columns are zeroed, so they never enter.
    Some(run(&mut t, &mut basis, &c2, nv + m))
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], r: usize, j: usize) {
    let p = t[r][j].clone();
    for v in t[r].iter_mut() {
        *v = &*v / &p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[j].is_zero() {
            let f = row[j].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v = &*v - &f * pv;
            }
        }
    }
    basis[r] = j;
}

fn run(t: &mut [Vec<Q>], basis: &mut [usize], cost: &[Q], enter_limit: usize) -> Q {
    let rhs = t.first().map_or(0, |r| r.len() - 1);
    loop {
        // Reduced costs c_j - c_B B^-1 A_j.
        let entering = (0..enter_limit).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut rc = cost[j].clone();
            for (r, &bv) in basis.iter().enumerate() {
                if !cost[bv].is_zero() {
                    rc -= &cost[bv] * &t[r][j];
                }
            }
            rc.is_negative()
        });
        let Some(j) = entering else {
            let mut obj = Q::zero();
            for (r, &bv) in basis.iter().enumerate() {
                obj += &cost[bv] * &t[r][rhs];
            }
            return obj;
        };
        let mut leave: Option<(usize, Q)> = None;
        for r in 0..t.len() {
            if t[r][j].is_positive() {
                let ratio = &t[r][rhs] / &t[r][j];
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let (r, _) = leave.expect("LP is bounded");
        pivot(t, basis, r, j);
    }
}

/// Exact dip of a sample with distinct values (any order).
pub fn dip_by_lp(sample: &[f64]) -> f64 {
    let mut x: Vec<f64> = sample.to_vec();
    x.sort_by(f64::total_cmp);
    assert!(
        x.windows(2).all(|w| w[0] < w[1]),
        "oracle needs distinct values"
    );
    let n = x.len();
    let nn = q(n as i64);
    let xs: Vec<Q> = x.iter().map(|&v| Q::from_float(v).unwrap()).collect();
    let gaps: Vec<Q> = xs.windows(2).map(|w| &w[1] - &w[0]).collect();
    let nv = n + 1;
    let d = n;

    let mut best: Option<Q> = None;
    for peak in 0..n - 1 {
        let mut a: Vec<Vec<Q>> = Vec::new();
        let mut b: Vec<Q> = Vec::new();
        let row = || vec![Q::zero(); nv];
        for i in 0..n {
            // g_i - d <= i / n  (left limit (i-1)/n in 1-based terms)
            let mut r = row();
            r[i] = q(1);
            r[d] = q(-1);
            a.push(r);
            b.push(q(i as i64) / &nn);
            // -g_i - d <= -(i+1) / n
            let mut r = row();
            r[i] = q(-1);
            r[d] = q(-1);
            a.push(r);
            b.push(-q(i as i64 + 1) / &nn);
        }
        for i in 0..n - 1 {
            let mut r = row();
            r[i] = q(1);
            r[i + 1] = q(-1);
            a.push(r);
            b.push(Q::zero());
        }
        let mut r = row();
        r[n - 1] = q(1);
        a.push(r);
        b.push(q(1));
        // Chord k joins points k and k+1 (0-based), slope (g_{k+1} - g_k) / gap_k.
        for k in 0..n.saturating_sub(2) {
            let (lhs, rhs) = if k < peak { (k, k + 1) } else { (k + 1, k) };
            // slope(lhs) - slope(rhs) <= 0
            let mut r = row();
            let il = Q::one() / &gaps[lhs];
            let ir = Q::one() / &gaps[rhs];
            r[lhs + 1] += &il;
            r[lhs] -= &il;
            r[rhs + 1] -= &ir;
            r[rhs] += &ir;
            a.push(r);
            b.push(Q::zero());
        }
        let mut cost = vec![Q::zero(); nv];
        cost[d] = q(1);
        if let Some(v) = simplex_min(&cost, &a, &b) {
            if best.as_ref().is_none_or(|bst| v < *bst) {
                best = Some(v);
            }
        }
    }
    let best = best.expect("some peak is feasible");
    let num: f64 = best.numer().to_string().parse().unwrap();
    let den: f64 = best.denom().to_string().parse().unwrap();
    num / den
}
