use serde::Serialize;

use crate::error::{invalid, Result};

/// Tolerance on `sum(mass) + tail == 1` accepted at construction. Exact paths
/// meet 1e-12; the long floating-point DP chains get a little more room.
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A probability mass function on `0..=support_max` together with the mass it
/// leaves unaccounted for beyond `support_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pmf {
    mass: Vec<f64>,
    tail: f64,
}

impl Pmf {
    pub fn new(mass: Vec<f64>, tail: f64) -> Result<Self> {
        if mass.is_empty() {
            return invalid("pmf needs at least one support point");
        }
        if let Some(bad) = mass.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return invalid(format!("pmf entry {bad} outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&tail) {
            return invalid(format!("pmf tail {tail} outside [0, 1]"));
        }
        let total: f64 = mass.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return invalid(format!("pmf mass sums to {total}, expected 1"));
        }
        Ok(Self { mass, tail })
    }

    /// Builds a finite-support law, clearing rounding noise: tiny negatives
    /// produced by cancellation are set to zero.
    pub(crate) fn from_finite(mut mass: Vec<f64>) -> Result<Self> {
        for m in &mut mass {
            if *m < 0.0 && *m > -1e-15 {
                *m = 0.0;
            }
        }
        Self::new(mass, 0.0)
    }

    pub fn point_mass(at: usize) -> Self {
        let mut mass = vec![0.0; at + 1];
        mass[at] = 1.0;
        Self { mass, tail: 0.0 }
    }

    /// Empirical law of a histogram of counts indexed by value.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return invalid("empirical pmf needs at least one observation");
        }
        let mass = counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect::<Vec<_>>();
        Self::new(mass, 0.0)
    }

    pub fn support_max(&self) -> usize {
        self.mass.len() - 1
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `P(X = j)`, zero outside the stored support.
    pub fn prob(&self, j: usize) -> f64 {
        self.mass.get(j).copied().unwrap_or(0.0)
    }

    /// Mean over the stored support; the tail contributes nothing.
    pub fn mean(&self) -> f64 {
        self.mass
            .iter()
            .enumerate()
            .map(|(j, &m)| j as f64 * m)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.mass
            .iter()
            .enumerate()
            .map(|(j, &m)| (j as f64 - mean).powi(2) * m)
            .sum()
    }

    /// Expectation of `f` over the stored support.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.mass.iter().enumerate().map(|(j, &m)| m * f(j)).sum()
    }

    /// Drops trailing zero entries, keeping at least one support point.
    pub fn trimmed(mut self) -> Self {
        while self.mass.len() > 1 && self.mass.last() == Some(&0.0) {
            self.mass.pop();
        }
        self
    }
}

/// Total-variation distance `sup_A |p(A) - q(A)|`.
///
/// Computed as half the l1 distance over the union of the stored supports.
/// Tail mass cannot be compared pointwise, so both tails are charged in full;
/// the result is an upper bound on the true distance, exceeding it by at most
/// `p.tail + q.tail`, and is exact when both tails are zero.
pub fn tv_distance(p: &Pmf, q: &Pmf) -> f64 {
    let len = p.mass.len().max(q.mass.len());
    let l1: f64 = (0..len).map(|j| (p.prob(j) - q.prob(j)).abs()).sum();
    (0.5 * (l1 + p.tail + q.tail)).min(1.0)
}
