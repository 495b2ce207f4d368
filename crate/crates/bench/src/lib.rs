//! Shared inputs for the benchmarks.

/// `p_i = 1 / i` for `i = 1..=n`.
pub fn harmonic(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 1.0 / i as f64).collect()
}

/// `k` on the scale `theta * n^{2/3}` used by the triple-match sweeps.
pub fn triples_k(n: usize, theta: f64) -> usize {
    (theta * (n as f64).powf(2.0 / 3.0)).round() as usize
}
