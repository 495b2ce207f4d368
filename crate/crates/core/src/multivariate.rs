//! Joint laws of several counts and laws of whole indicator configurations,
//! with their product-Poisson references and distances.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::bounds::{BoundKind, BoundReport, Convention};
use crate::error::{invalid, Error, Result};
use crate::perm::{fixed_points, for_each_permutation};
use crate::pmf::Pmf;
use crate::rational::{derangements, factorial, ratio_to_f64};
use crate::stein::{poisson_pmf, SteinParams};

pub const JOINT_ENUMERATION_CAP: usize = 9;
pub const CONFIG_MATCHING_CAP: usize = 14;
/// Largest index set whose `2^J` binary configurations are tabulated.
pub const CONFIG_INDEX_CAP: usize = 20;

/// Probability mass on `N^d`, sparse, plus the mass not represented.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dim: usize,
    mass: BTreeMap<Vec<usize>, f64>,
    tail: f64,
}

impl JointPmf {
    pub fn new(dim: usize, mass: BTreeMap<Vec<usize>, f64>, tail: f64) -> Result<Self> {
        if let Some(v) = mass.keys().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: v.len(),
            });
        }
        if mass.values().any(|&p| !(0.0..=1.0).contains(&p)) || !(0.0..=1.0).contains(&tail) {
            return invalid("joint masses must lie in [0, 1]");
        }
        let total: f64 = mass.values().sum::<f64>() + tail;
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("joint masses sum to {total}, not 1"));
        }
        Ok(Self { dim, mass, tail })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn prob(&self, at: &[usize]) -> f64 {
        self.mass.get(at).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.mass.iter().map(|(k, &v)| (k, v))
    }

    pub fn mean(&self, coord: usize) -> f64 {
        self.mass.iter().map(|(k, &v)| k[coord] as f64 * v).sum()
    }

    /// Law of one coordinate; the joint tail carries over.
    pub fn marginal(&self, coord: usize) -> Result<Pmf> {
        if coord >= self.dim {
            return invalid(format!("coordinate {coord} out of range for dimension {}", self.dim));
        }
        let top = self.mass.keys().map(|k| k[coord]).max().unwrap_or(0);
        let mut mass = vec![0.0; top + 1];
        for (k, &v) in &self.mass {
            mass[k[coord]] += v;
        }
        Pmf::new(mass, self.tail)
    }
}

/// `(W1, W2)` = (fixed points, cyclic successions `sigma(i) = i + 1 mod n`)
/// of a uniform permutation.
pub fn joint_fixed_point_succession_pmf(n: usize) -> Result<JointPmf> {
    if n == 0 || n > JOINT_ENUMERATION_CAP {
        return Err(Error::OverCap {
            what: "joint fixed-point/succession enumeration".into(),
            estimate: (1..=n.max(1)).map(|i| i as f64).product(),
            cap: (1..=JOINT_ENUMERATION_CAP).map(|i| i as f64).product(),
        });
    }
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for_each_permutation(n, |sigma| {
        let successions = sigma.iter().enumerate().filter(|&(i, &s)| s == (i + 1) % n).count();
        *counts.entry(vec![fixed_points(sigma), successions]).or_insert(0) += 1;
    });
    let total: u64 = counts.values().sum();
    let mass = counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect();
    JointPmf::new(2, mass, 0.0)
}

/// Independent `Poi(lambda_i)` coordinates on the product of the
/// per-coordinate truncation boxes. The tail is `1 - prod(1 - tail_i)`.
pub fn product_poisson_joint(lambdas: &[f64], truncation_eps: f64) -> Result<JointPmf> {
    if lambdas.is_empty() {
        return invalid("need at least one coordinate");
    }
    let marginals = lambdas
        .iter()
        .map(|&l| SteinParams::new(l, truncation_eps).map(|p| poisson_pmf(&p)))
        .collect::<Result<Vec<_>>>()?;
    let cells: f64 = marginals.iter().map(|m| m.mass().len() as f64).product();
    if cells > 1e7 {
        return Err(Error::OverCap {
            what: "product Poisson box".into(),
            estimate: cells,
            cap: 1e7,
        });
    }
    let mut mass = BTreeMap::new();
    let mut idx = vec![0usize; lambdas.len()];
    'outer: loop {
        let p: f64 = idx.iter().zip(&marginals).map(|(&j, m)| m.prob(j)).product();
        mass.insert(idx.clone(), p);
        for c in (0..idx.len()).rev() {
            idx[c] += 1;
            if idx[c] < marginals[c].mass().len() {
                continue 'outer;
            }
            idx[c] = 0;
        }
        break;
    }
    let log_kept: f64 = marginals.iter().map(|m| (-m.tail()).ln_1p()).sum();
    JointPmf::new(lambdas.len(), mass, -log_kept.exp_m1())
}

/// `1/2 sum |p - q|` over the union of supports, with the tails counted
/// conservatively as `p.tail + q.tail`.
pub fn joint_tv(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim,
            right: q.dim,
        });
    }
    let mut sum = 0.0;
    for (k, &a) in &p.mass {
        sum += (a - q.prob(k)).abs();
    }
    for (k, &b) in &q.mass {
        if !p.mass.contains_key(k) {
            sum += b;
        }
    }
    Ok((0.5 * (sum + p.tail + q.tail)).min(1.0))
}

/// Law of a binary configuration `(x_1, ..., x_J)`, indexed by bitmask
/// (bit `i` is `x_i`). `tail` is mass on configurations with some `x_i >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigLaw {
    size: usize,
    mass: Vec<f64>,
    tail: f64,
}

impl ConfigLaw {
    pub fn new(size: usize, mass: Vec<f64>, tail: f64) -> Result<Self> {
        if size > CONFIG_INDEX_CAP {
            return Err(Error::OverCap {
                what: "binary configurations".into(),
                estimate: 2f64.powi(size as i32),
                cap: 2f64.powi(CONFIG_INDEX_CAP as i32),
            });
        }
        if mass.len() != 1 << size {
            return Err(Error::DimensionMismatch {
                left: 1 << size,
                right: mass.len(),
            });
        }
        let total: f64 = mass.iter().sum::<f64>() + tail;
        if (total - 1.0).abs() > 1e-9 || mass.iter().any(|&p| p < 0.0) {
            return invalid(format!("configuration masses sum to {total}, not 1"));
        }
        Ok(Self { size, mass, tail })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn prob(&self, mask: usize) -> f64 {
        self.mass.get(mask).copied().unwrap_or(0.0)
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Law of `sum x_i` over binary configurations; the tail carries over.
    pub fn count_pmf(&self) -> Result<Pmf> {
        let mut mass = vec![0.0; self.size + 1];
        for (mask, &p) in self.mass.iter().enumerate() {
            mass[mask.count_ones() as usize] += p;
        }
        Pmf::new(mass, self.tail)
    }
}

/// Fixed-point indicators of a uniform permutation of `n`: a configuration
/// with support `S` has probability `D_{n-|S|} / n!`.
pub fn matching_config_law(n: usize) -> Result<ConfigLaw> {
    if n == 0 || n > CONFIG_MATCHING_CAP {
        return Err(Error::OverCap {
            what: "matching configuration law".into(),
            estimate: 2f64.powi(n as i32),
            cap: 2f64.powi(CONFIG_MATCHING_CAP as i32),
        });
    }
    let d = derangements(n);
    let total = factorial(n);
    let by_size: Vec<f64> = (0..=n).map(|s| ratio_to_f64(&d[n - s], &total)).collect();
    let mass = (0..1usize << n)
        .map(|mask| by_size[mask.count_ones() as usize])
        .collect();
    ConfigLaw::new(n, mass, 0.0)
}

/// Exact counts behind [`matching_config_law`], for callers that want to
/// stay rational.
pub fn matching_config_counts(n: usize) -> Vec<BigUint> {
    let d = derangements(n);
    (0..=n).map(|s| d[n - s].clone()).collect()
}

/// Independent `Poi(p_i)` restricted to binary configurations; `tail` is
/// `1 - prod e^{-p_i}(1 + p_i)`.
pub fn product_poisson_config_law(p: &[f64]) -> Result<ConfigLaw> {
    if p.is_empty() {
        return invalid("need at least one index");
    }
    if let Some(bad) = p.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return invalid(format!("rates must be positive, got {bad}"));
    }
    let size = p.len();
    if size > CONFIG_INDEX_CAP {
        return Err(Error::OverCap {
            what: "binary configurations".into(),
            estimate: 2f64.powi(size as i32),
            cap: 2f64.powi(CONFIG_INDEX_CAP as i32),
        });
    }
    let zero: f64 = (-p.iter().sum::<f64>()).exp();
    let mut mass = vec![0.0; 1 << size];
    mass[0] = zero;
    for mask in 1usize..1 << size {
        let low = mask.trailing_zeros() as usize;
        mass[mask] = mass[mask & (mask - 1)] * p[low];
    }
    let log_kept: f64 = p.iter().map(|&x| x.ln_1p() - x).sum();
    ConfigLaw::new(size, mass, -log_kept.exp_m1())
}

/// `1/2 [sum_binary |a - b| + a.tail + b.tail]`.
pub fn process_tv(a: &ConfigLaw, b: &ConfigLaw) -> Result<f64> {
    if a.size != b.size {
        return Err(Error::DimensionMismatch {
            left: a.size,
            right: b.size,
        });
    }
    let sum: f64 = a.mass.iter().zip(&b.mass).map(|(x, y)| (x - y).abs()).sum();
    Ok((0.5 * (sum + a.tail + b.tail)).min(1.0))
}

/// Counts `x_i` of a point configuration on a finite index set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    counts: Vec<usize>,
}

impl Configuration {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn empty(size: usize) -> Self {
        Self {
            counts: vec![0; size],
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn plus(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.counts[i] += 1;
        c
    }

    /// `None` when `x_i = 0`.
    pub fn minus(&self, i: usize) -> Option<Self> {
        let mut c = self.clone();
        c.counts[i] = c.counts[i].checked_sub(1)?;
        Some(c)
    }
}

/// Immigration-death generator:
/// `sum_i p_i [h(xi + d_i) - h(xi)] + sum_i x_i [h(xi - d_i) - h(xi)]`.
pub fn config_generator_apply(
    h: impl Fn(&Configuration) -> f64,
    p: &[f64],
    xi: &Configuration,
) -> Result<f64> {
    if p.len() != xi.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: xi.len(),
        });
    }
    let here = h(xi);
    let mut acc = 0.0;
    for (i, &rate) in p.iter().enumerate() {
        acc += rate * (h(&xi.plus(i)) - here);
        if let Some(down) = xi.minus(i) {
            acc += xi.counts[i] as f64 * (h(&down) - here);
        }
    }
    Ok(acc)
}

/// The worked two-dimensional bound for (fixed points, successions): `13/n`.
pub fn bound_fixed_point_succession(n: usize) -> Result<BoundReport> {
    if n < 3 {
        return invalid(format!("fixed-point/succession bound needs n >= 3, got {n}"));
    }
    Ok(BoundReport::new(
        BoundKind::FixedPointSuccession,
        1.0,
        13.0 / n as f64,
        Convention::SetDistance,
        format!("n={n}"),
    ))
}

/// Fixed-point indicators against independent `Poi(1/n)`: `4/n`.
pub fn bound_matching_process(n: usize) -> Result<BoundReport> {
    if n < 2 {
        return invalid(format!("matching process bound needs n >= 2, got {n}"));
    }
    Ok(BoundReport::new(
        BoundKind::MatchingProcess,
        1.0,
        4.0 / n as f64,
        Convention::SetDistance,
        format!("n={n}"),
    ))
}

/// Multivariate pair bound `sum_k alpha_k (a_k + b_k)` with
/// `alpha_k = min(1, 1.4 lambda_k^{-1/2})`, where `a_k`, `b_k` are the
/// caller's per-coordinate error expectations.
pub fn bound_multivariate_pair(lambdas: &[f64], a: &[f64], b: &[f64]) -> Result<BoundReport> {
    if lambdas.is_empty() || lambdas.len() != a.len() || lambdas.len() != b.len() {
        return invalid("need one lambda and two error terms per coordinate");
    }
    if lambdas.iter().any(|&l| !(l > 0.0)) || a.iter().chain(b).any(|&x| !(x >= 0.0)) {
        return invalid("rates must be positive and error terms nonnegative");
    }
    let raw: f64 = lambdas
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&l, (&x, &y))| (1.4 / l.sqrt()).min(1.0) * (x + y))
        .sum();
    Ok(BoundReport::new(
        BoundKind::MultivariatePair,
        lambdas.iter().sum(),
        raw,
        Convention::SetDistance,
        format!("d={}", lambdas.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_from_error_terms;
    use crate::exact::{matching_pmf, MatchingSpec};
    use crate::pairs::ErrorTerms;
    use crate::pmf::tv_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn joint_law_small_cases() {
        let j = joint_fixed_point_succession_pmf(2).unwrap();
        assert_eq!(j.prob(&[2, 0]), 0.5);
        assert_eq!(j.prob(&[0, 2]), 0.5);
        for n in 2..=7 {
            let j = joint_fixed_point_succession_pmf(n).unwrap();
            assert!((j.mean(0) - 1.0).abs() < 1e-12);
            assert!((j.mean(1) - 1.0).abs() < 1e-12);
            let m = j.marginal(0).unwrap();
            let exact = matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap();
            assert!(tv_distance(&m, &exact) < 1e-14);
        }
        assert!(joint_fixed_point_succession_pmf(10).is_err());
    }

    #[test]
    fn succession_marginal_is_brute_force() {
        // sigma(i) = i + 1 cyclically is fixed-point counting for the shifted
        // permutation, so the two marginals coincide.
        for n in 3..=6 {
            let j = joint_fixed_point_succession_pmf(n).unwrap();
            let a = j.marginal(0).unwrap();
            let b = j.marginal(1).unwrap();
            assert!(tv_distance(&a, &b) < 1e-14);
        }
    }

    #[test]
    fn product_poisson_joint_properties() {
        let eps = 1e-12;
        let one = product_poisson_joint(&[2.5], eps).unwrap();
        let direct = poisson_pmf(&SteinParams::new(2.5, eps).unwrap());
        let marginal = one.marginal(0).unwrap();
        assert_eq!(marginal.mass(), direct.mass());
        assert!((marginal.tail() - direct.tail()).abs() < 1e-18);
        let two = product_poisson_joint(&[1.0, 1.0], eps).unwrap();
        assert!((two.prob(&[0, 0]) - (-2.0f64).exp()).abs() < 1e-16);
        assert!(two.tail() <= 2.0 * eps);
        let summed: f64 = two.iter().map(|(_, v)| v).sum();
        assert!((1.0 - summed - two.tail()).abs() < 1e-13);
    }

    #[test]
    fn joint_tv_properties() {
        let j = joint_fixed_point_succession_pmf(5).unwrap();
        assert_eq!(joint_tv(&j, &j).unwrap(), 0.0);
        let prod = product_poisson_joint(&[1.0, 1.0], 1e-14).unwrap();
        for n in 4..=8 {
            let j = joint_fixed_point_succession_pmf(n).unwrap();
            let tv = joint_tv(&j, &prod).unwrap();
            assert!(tv <= 13.0 / n as f64);
            let uni = tv_distance(&j.marginal(0).unwrap(), &prod.marginal(0).unwrap());
            assert!(tv >= uni - 1e-12);
        }
        let other = product_poisson_joint(&[1.0], 1e-14).unwrap();
        assert!(joint_tv(&j, &other).is_err());
    }

    #[test]
    fn matching_config_law_properties() {
        let law = matching_config_law(2).unwrap();
        assert_eq!(law.prob(0b11), 0.5);
        assert_eq!(law.prob(0b00), 0.5);
        assert_eq!(law.prob(0b01), 0.0);
        assert_eq!(law.prob(0b10), 0.0);
        for n in 1..=10 {
            let law = matching_config_law(n).unwrap();
            let total: f64 = law.masses().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let counts = law.count_pmf().unwrap();
            let exact = matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap();
            assert!(tv_distance(&counts, &exact) < 1e-13);
        }
        // Exact partition of n! by fixed-point set.
        for n in 1..=12 {
            let c = matching_config_counts(n);
            let total: BigUint = (0..=n).map(|s| crate::rational::binomial(n, s) * &c[s]).sum();
            assert_eq!(total, factorial(n));
        }
    }

    #[test]
    fn matching_config_law_matches_enumeration() {
        let n = 5;
        let mut counts = vec![0u64; 1 << n];
        for_each_permutation(n, |s| {
            let mask = (0..n).filter(|&i| s[i] == i).fold(0usize, |m, i| m | 1 << i);
            counts[mask] += 1;
        });
        let law = matching_config_law(n).unwrap();
        for (mask, &c) in counts.iter().enumerate() {
            assert!((law.prob(mask) - c as f64 / 120.0).abs() < 1e-15);
        }
    }

    #[test]
    fn product_config_law_properties() {
        let law = product_poisson_config_law(&[0.5, 0.5]).unwrap();
        assert!((law.prob(0) - (-1.0f64).exp()).abs() < 1e-16);
        assert!((law.prob(0b11) - (-1.0f64).exp() / 4.0).abs() < 1e-16);
        // Tail by direct series: 1 - sum over binary configurations.
        for p in [vec![0.1, 0.2, 0.3], vec![1.0 / 7.0; 7], vec![2.0, 0.01]] {
            let law = product_poisson_config_law(&p).unwrap();
            let series: f64 = 1.0
                - (0..1usize << p.len())
                    .map(|mask| {
                        p.iter()
                            .enumerate()
                            .map(|(i, &x)| if mask >> i & 1 == 1 { x * (-x).exp() } else { (-x).exp() })
                            .product::<f64>()
                    })
                    .sum::<f64>();
            assert!((law.tail() - series).abs() < 1e-14);
        }
        assert!(product_poisson_config_law(&[0.0]).is_err());
    }

    #[test]
    fn process_tv_is_dominated_and_coherent() {
        for n in 3..=12 {
            let a = matching_config_law(n).unwrap();
            let b = product_poisson_config_law(&vec![1.0 / n as f64; n]).unwrap();
            let tv = process_tv(&a, &b).unwrap();
            assert!(tv <= 4.0 / n as f64, "n={n}: {tv}");
            let poi = poisson_pmf(&SteinParams::new(1.0, 1e-15).unwrap());
            let uni = tv_distance(&matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap(), &poi);
            assert!(tv >= uni - 1e-12);
            assert_eq!(process_tv(&a, &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn generator_basics() {
        let p = [0.3, 0.7, 1.1];
        let h = |c: &Configuration| (c.counts()[0] * 2 + c.counts()[2]) as f64;
        let empty = Configuration::empty(3);
        let v = config_generator_apply(h, &p, &empty).unwrap();
        assert!((v - (0.3 * 2.0 + 1.1)).abs() < 1e-15);
        let xi = Configuration::new(vec![1, 4, 2]);
        assert_eq!(config_generator_apply(|_| 5.0, &p, &xi).unwrap(), 0.0);
        // Linear h: drift is sum p_i a_i - sum x_i a_i.
        let v = config_generator_apply(h, &p, &xi).unwrap();
        assert!((v - ((0.6 + 1.1) - (2.0 + 2.0))).abs() < 1e-14);
        assert!(config_generator_apply(h, &p[..2], &xi).is_err());
    }

    #[test]
    fn generator_is_stationary_under_product_poisson() {
        let p = [0.4f64, 0.9, 1.6];
        let cut = 6usize;
        let pois: Vec<Vec<f64>> = p
            .iter()
            .map(|&l| {
                let mut v = vec![(-l).exp()];
                for j in 1..=cut + 1 {
                    let prev = v[j - 1];
                    v.push(prev * l / j as f64);
                }
                v
            })
            .collect();
        let kept: f64 = pois.iter().map(|v| v[..=cut].iter().sum::<f64>()).product();
        let tail = 1.0 - kept;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let side = cut + 2;
        for _ in 0..50 {
            let table: Vec<f64> = (0..side.pow(3)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = |c: &Configuration| {
                let x = c.counts();
                table[(x[0] * side + x[1]) * side + x[2]]
            };
            let max_diff = 2.0;
            let mut mean = 0.0f64;
            for a in 0..=cut {
                for b in 0..=cut {
                    for c in 0..=cut {
                        let w = pois[0][a] * pois[1][b] * pois[2][c];
                        let xi = Configuration::new(vec![a, b, c]);
                        mean += w * config_generator_apply(h, &p, &xi).unwrap();
                    }
                }
            }
            assert!(mean.abs() <= 10.0 * tail * max_diff, "{mean} vs tail {tail}");
        }
    }

    #[test]
    fn multivariate_bounds() {
        assert_eq!(bound_fixed_point_succession(13).unwrap().value, 1.0);
        assert!((bound_fixed_point_succession(100).unwrap().value - 0.13).abs() < 1e-15);
        assert!((bound_matching_process(8).unwrap().value - 0.5).abs() < 1e-15);
        let terms = ErrorTerms {
            lambda: 2.3,
            e1: 0.11,
            e2: 0.07,
        };
        let uni = bound_from_error_terms(&terms).unwrap();
        let multi = bound_multivariate_pair(&[2.3], &[0.11], &[0.07]).unwrap();
        assert!((uni.raw - multi.raw).abs() < 1e-15);
        let two = bound_multivariate_pair(&[1.0, 4.0], &[0.1, 0.2], &[0.3, 0.4]).unwrap();
        assert!((two.raw - (0.4 + 0.7 * 0.6)).abs() < 1e-15);
    }
}
