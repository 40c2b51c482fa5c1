/// Adjusted Rand index by enumerating every unordered pair of points.
pub fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            in_a += sa as u64;
            in_b += sb as u64;
            both += (sa && sb) as u64;
        }
    }
    let total = (n * (n - 1) / 2) as f64;
    let expected = in_a as f64 * in_b as f64 / total;
    let max = 0.5 * (in_a + in_b) as f64;
    if max == expected {
        return 1.0;
    }
    (both as f64 - expected) / (max - expected)
}
