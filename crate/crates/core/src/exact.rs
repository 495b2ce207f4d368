//! Exact reference distributions for the combinatorial problems: independent
//! trials, matching (plain and multiset), balls in boxes, monochromatic
//! tuples and the coupon collector.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::perm::for_each_permutation;
use crate::pmf::Pmf;
use crate::rational::{binomial, derangements, factorial, ratio_to_f64, to_f64};

/// Largest `n` for the rencontres closed form.
pub const MATCHING_PLAIN_CAP: usize = 500;
/// Largest `n` for multiset matching, enumerated over all `n!` permutations.
pub const MATCHING_ENUMERATION_CAP: usize = 10;
/// Cap on `n_boxes * k_balls * max_statistic` for the occupancy recursion.
pub const OCCUPANCY_DP_CAP: f64 = 1e8;
/// Cap on `n_boxes * k_balls` for the empty-box chain.
pub const EMPTY_CHAIN_CAP: f64 = 5e9;
/// Mass below this is dropped from the empty-box chain and charged to the tail.
const CHAIN_FLOOR: f64 = 1e-300;

/// Exact law of a sum of independent Bernoulli(`p_i`) variables.
pub fn poisson_binomial_pmf(p: &[f64]) -> Result<Pmf> {
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return invalid(format!("success probability {bad} outside [0, 1]"));
    }
    let mut law = vec![1.0];
    for &pi in p {
        let mut next = vec![0.0; law.len() + 1];
        for (j, &m) in law.iter().enumerate() {
            next[j] += m * (1.0 - pi);
            next[j + 1] += m * pi;
        }
        law = next;
    }
    Pmf::from_finite(law)
}

/// A deck of `n` cards; with multiplicities, symbol `i` appears `l_i` times.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingSpec {
    n: usize,
    multiplicities: Option<Vec<usize>>,
}

impl MatchingSpec {
    pub fn plain(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("matching needs at least one card");
        }
        Ok(Self {
            n,
            multiplicities: None,
        })
    }

    pub fn with_multiplicities(l: Vec<usize>) -> Result<Self> {
        if l.is_empty() || l.contains(&0) {
            return invalid("multiplicities must be a nonempty list of positive integers");
        }
        Ok(Self {
            n: l.iter().sum(),
            multiplicities: Some(l),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_plain(&self) -> bool {
        self.multiplicities.is_none()
    }

    /// The multiplicity table, all ones in the plain case.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.multiplicities
            .clone()
            .unwrap_or_else(|| vec![1; self.n])
    }

    /// Symbol carried by each position: the first `l_1` positions hold
    /// symbol 0, the next `l_2` symbol 1, and so on.
    pub fn symbols(&self) -> Vec<usize> {
        self.multiplicities()
            .iter()
            .enumerate()
            .flat_map(|(s, &l)| std::iter::repeat(s).take(l))
            .collect()
    }

    /// `lambda = (1/n) sum l_i^2`.
    pub fn lambda(&self) -> f64 {
        let sq: usize = self.multiplicities().iter().map(|l| l * l).sum();
        sq as f64 / self.n as f64
    }

    /// `mu = sum l_i^3`.
    pub fn mu(&self) -> f64 {
        self.multiplicities()
            .iter()
            .map(|&l| (l * l * l) as f64)
            .sum()
    }
}

/// Exact rencontres law `P(W = m) = D_{n-m} / (m! (n-m)!)`.
pub fn rencontres_law(n: usize) -> Vec<BigRational> {
    let d = derangements(n);
    (0..=n)
        .map(|m| {
            BigRational::new(
                BigInt::from(d[n - m].clone()),
                BigInt::from(factorial(m) * factorial(n - m)),
            )
        })
        .collect()
}

pub fn matching_pmf(spec: &MatchingSpec) -> Result<Pmf> {
    let n = spec.n;
    if spec.is_plain() {
        if n > MATCHING_PLAIN_CAP {
            return Err(Error::OverCap {
                what: "rencontres law".into(),
                estimate: n as f64,
                cap: MATCHING_PLAIN_CAP as f64,
            });
        }
        let d = derangements(n);
        let mass = (0..=n)
            .map(|m| ratio_to_f64(&d[n - m], &(factorial(m) * factorial(n - m))))
            .collect();
        return Pmf::from_finite(mass);
    }
    if n > MATCHING_ENUMERATION_CAP {
        return Err(Error::OverCap {
            what: "multiset matching enumeration (n!)".into(),
            estimate: to_f64(&BigRational::from_integer(BigInt::from(factorial(n)))),
            cap: to_f64(&BigRational::from_integer(BigInt::from(factorial(
                MATCHING_ENUMERATION_CAP,
            )))),
        });
    }
    let symbols = spec.symbols();
    let mut counts = vec![0u64; n + 1];
    for_each_permutation(n, |perm| {
        let w = (0..n).filter(|&i| symbols[perm[i]] == symbols[i]).count();
        counts[w] += 1;
    });
    let total = counts.iter().sum::<u64>() as f64;
    Pmf::from_finite(counts.iter().map(|&c| c as f64 / total).collect())
}

/// Moments of the matching statistic. `W_i` counts positions of symbol `i`
/// that receive a card of symbol `i`, `W_ij` those receiving symbol `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingMoments {
    pub lambda: f64,
    pub ew2: f64,
    /// `E(2 a_2)`, with `a_2` the number of 2-cycles.
    pub e2a2: f64,
    pub ewi: Vec<f64>,
    pub ewi2: Vec<f64>,
    /// `E(W_ij W_ji)`; zero on the diagonal.
    pub ewij_wji: Vec<Vec<f64>>,
    /// `E(W^2 - sum_i W_i^2)`.
    pub cross_term: f64,
}

pub fn matching_moments(spec: &MatchingSpec) -> Result<MatchingMoments> {
    let n = spec.n;
    if n < 2 {
        return invalid("matching moments need n >= 2");
    }
    let l: Vec<f64> = spec.multiplicities().iter().map(|&x| x as f64).collect();
    let nf = n as f64;
    let nn1 = nf * (nf - 1.0);
    let ewi: Vec<f64> = l.iter().map(|li| li * li / nf).collect();
    let ewi2: Vec<f64> = l
        .iter()
        .map(|li| li * li * (nf + li * li - 2.0 * li) / nn1)
        .collect();
    let ewij_wji: Vec<Vec<f64>> = (0..l.len())
        .map(|i| {
            (0..l.len())
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        l[i] * l[i] * l[j] * l[j] / nn1
                    }
                })
                .collect()
        })
        .collect();
    let sq_sum: f64 = l.iter().map(|x| x * x).sum();
    let sq4_sum: f64 = l.iter().map(|x| x.powi(4)).sum();
    let cross_term = (sq_sum * sq_sum - sq4_sum) / nn1;
    let ew2 = ewi2.iter().sum::<f64>() + cross_term;
    Ok(MatchingMoments {
        lambda: sq_sum / nf,
        ew2,
        e2a2: 1.0,
        ewi,
        ewi2,
        ewij_wji,
        cross_term,
    })
}

/// Which function of the box counts is being tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OccupancyStatistic {
    /// Boxes with at least two balls.
    AtLeastTwo,
    /// Groups of `r` balls sharing a box: `sum_boxes C(count, r)`.
    /// `Matches(3)` counts triples, `Matches(2)` colliding pairs.
    Matches(usize),
    /// Empty boxes.
    Empty,
    /// Boxes with exactly `m` balls.
    ExactLevel(usize),
}

impl OccupancyStatistic {
    /// Contribution of one box holding `count` balls.
    pub fn box_value(&self, count: usize) -> usize {
        match *self {
            Self::AtLeastTwo => usize::from(count >= 2),
            Self::Matches(r) => small_binomial(count, r),
            Self::Empty => usize::from(count == 0),
            Self::ExactLevel(m) => usize::from(count == m),
        }
    }
}

fn small_binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `k` balls dropped independently and uniformly into `n` boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OccupancySpec {
    pub n_boxes: usize,
    pub k_balls: usize,
    pub statistic: OccupancyStatistic,
}

impl OccupancySpec {
    pub fn new(n_boxes: usize, k_balls: usize, statistic: OccupancyStatistic) -> Result<Self> {
        if n_boxes == 0 {
            return invalid("occupancy needs at least one box");
        }
        if let OccupancyStatistic::Matches(0) = statistic {
            return invalid("match order must be at least 1");
        }
        Ok(Self {
            n_boxes,
            k_balls,
            statistic,
        })
    }

    pub fn pairs(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, OccupancyStatistic::AtLeastTwo)
    }

    pub fn triples(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, OccupancyStatistic::Matches(3))
    }

    pub fn empty(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, OccupancyStatistic::Empty)
    }

    /// Largest value the statistic can take.
    pub fn max_statistic(&self) -> usize {
        let (n, k) = (self.n_boxes, self.k_balls);
        match self.statistic {
            OccupancyStatistic::AtLeastTwo => n.min(k / 2),
            OccupancyStatistic::Matches(r) => small_binomial(k, r).max(usize::from(k >= r)),
            OccupancyStatistic::Empty => n,
            OccupancyStatistic::ExactLevel(0) => n,
            OccupancyStatistic::ExactLevel(m) => n.min(k / m),
        }
    }

    fn dp_cost(&self) -> f64 {
        self.n_boxes as f64 * self.k_balls.max(1) as f64 * self.max_statistic().max(1) as f64
    }
}

pub fn occupancy_pmf(spec: &OccupancySpec) -> Result<Pmf> {
    if spec.statistic == OccupancyStatistic::Empty {
        return empty_box_pmf(spec.n_boxes, spec.k_balls);
    }
    let cost = spec.dp_cost();
    if cost > OCCUPANCY_DP_CAP {
        return Err(Error::OverCap {
            what: "occupancy recursion (boxes x balls x statistic range)".into(),
            estimate: cost,
            cap: OCCUPANCY_DP_CAP,
        });
    }
    Ok(occupancy_dp(spec.n_boxes, spec.k_balls, |c| {
        spec.statistic.box_value(c)
    }))
}

/// `Bin(r, q)` probabilities, computed outward from the mode by ratios so
/// that nothing underflows before it has to.
fn binomial_pmf(r: usize, q: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; r + 1];
    if q >= 1.0 {
        pmf[r] = 1.0;
        return pmf;
    }
    if q <= 0.0 {
        pmf[0] = 1.0;
        return pmf;
    }
    let mode = (((r + 1) as f64 * q).floor() as usize).min(r);
    let odds = q / (1.0 - q);
    pmf[mode] = 1.0;
    for j in mode..r {
        pmf[j + 1] = pmf[j] * (r - j) as f64 / (j + 1) as f64 * odds;
    }
    for j in (1..=mode).rev() {
        pmf[j - 1] = pmf[j] * j as f64 / (r - j + 1) as f64 / odds;
    }
    let total: f64 = pmf.iter().sum();
    pmf.iter_mut().for_each(|x| *x /= total);
    pmf
}

/// Law of `sum_boxes value(count)` for `k` balls in `n` boxes. Boxes are
/// filled one at a time: given `r` balls still unplaced, box `b` receives
/// `Bin(r, 1/(n-b))` of them. State: (balls left, statistic so far).
fn occupancy_dp(n: usize, k: usize, value: impl Fn(usize) -> usize) -> Pmf {
    let mut dp: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
    dp[k] = vec![1.0];
    for b in 0..n {
        let last = b + 1 == n;
        let q = 1.0 / (n - b) as f64;
        let mut next: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
        for (r, row) in dp.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let split = if last {
                let mut v = vec![0.0; r + 1];
                v[r] = 1.0;
                v
            } else {
                binomial_pmf(r, q)
            };
            for (j, &pj) in split.iter().enumerate() {
                if pj == 0.0 {
                    continue;
                }
                let add = value(j);
                let target = &mut next[r - j];
                if target.len() < row.len() + add {
                    target.resize(row.len() + add, 0.0);
                }
                for (s, &v) in row.iter().enumerate() {
                    if v != 0.0 {
                        target[s + add] += v * pj;
                    }
                }
            }
        }
        dp = next;
    }
    let mass = std::mem::take(&mut dp[0]);
    let total: f64 = mass.iter().sum();
    let mass = mass.into_iter().map(|m| m / total).collect();
    Pmf::from_finite(mass).expect("dp law is normalized").trimmed()
}

/// Empty-box law: inclusion-exclusion in exact rationals on small instances,
/// otherwise the occupied-box chain in floating point.
fn empty_box_pmf(n: usize, k: usize) -> Result<Pmf> {
    if n <= 50 && k <= 1000 {
        return Pmf::from_finite(empty_box_law_rational(n, k).iter().map(to_f64).collect())
            .map(Pmf::trimmed);
    }
    let cost = n as f64 * k as f64;
    if cost > EMPTY_CHAIN_CAP {
        return Err(Error::OverCap {
            what: "empty-box chain (boxes x balls)".into(),
            estimate: cost,
            cap: EMPTY_CHAIN_CAP,
        });
    }
    Ok(empty_box_chain(n, k))
}

/// `P(W = w) = C(n,w) sum_j (-1)^j C(n-w,j) ((n-w-j)/n)^k`, exactly.
pub fn empty_box_law_rational(n: usize, k: usize) -> Vec<BigRational> {
    let denom = BigInt::from(BigUint::from(n).pow(k as u32));
    (0..=n)
        .map(|w| {
            let m = n - w;
            let mut acc = BigInt::zero();
            for j in 0..=m {
                let term = BigInt::from(binomial(m, j)) * BigInt::from(BigUint::from(m - j).pow(k as u32));
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            BigRational::new(BigInt::from(binomial(n, w)) * acc, denom.clone())
        })
        .collect()
}

/// Tracks the number of occupied boxes ball by ball:
/// `p_{t+1}(j) = p_t(j) j/n + p_t(j-1) (n-j+1)/n`.
fn empty_box_chain(n: usize, k: usize) -> Pmf {
    let nf = n as f64;
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut lost = 0.0;
    for _ in 0..k {
        let new_hi = (hi + 1).min(n);
        for j in (lo..=new_hi).rev() {
            let stay = p[j] * j as f64 / nf;
            let arrive = if j > lo { p[j - 1] * (n - j + 1) as f64 / nf } else { 0.0 };
            p[j] = stay + arrive;
        }
        hi = new_hi;
        while lo < hi && p[lo] < CHAIN_FLOOR {
            lost += p[lo];
            p[lo] = 0.0;
            lo += 1;
        }
        while hi > lo && p[hi] < CHAIN_FLOOR {
            lost += p[hi];
            p[hi] = 0.0;
            hi -= 1;
        }
    }
    let mass: Vec<f64> = (0..=n).map(|w| p[n - w]).collect();
    let total: f64 = mass.iter().sum();
    let tail = (1.0 - total).max(lost).clamp(0.0, 1.0);
    Pmf::new(mass, tail).expect("chain law is normalized").trimmed()
}

/// First and second moments of the level counts `M_l`, plus `E W` for the
/// spec's statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyMoments {
    /// `E M_l`, `l = 0..=k`.
    pub em: Vec<f64>,
    /// `E M_l^2`, `l = 0..=k`.
    pub em2: Vec<f64>,
    pub ew: f64,
}

fn ln_factorials(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=m {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// `e * ln(base)` with the convention `0^0 = 1`.
fn ln_pow(base: f64, e: usize) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * base.ln()
    }
}

pub fn occupancy_moments(spec: &OccupancySpec) -> OccupancyMoments {
    let (n, k) = (spec.n_boxes, spec.k_balls);
    let nf = n as f64;
    let lf = ln_factorials(k);
    let ln_n = nf.ln();
    let em: Vec<f64> = (0..=k)
        .map(|l| {
            let ln = ln_n + lf[k] - lf[l] - lf[k - l] - l as f64 * ln_n
                + ln_pow(1.0 - 1.0 / nf, k - l);
            ln.exp()
        })
        .collect();
    let em2: Vec<f64> = (0..=k)
        .map(|l| {
            let mut v = em[l];
            if n >= 2 && 2 * l <= k {
                let ln = ln_n + (nf - 1.0).ln() + lf[k] - 2.0 * lf[l] - lf[k - 2 * l]
                    - 2.0 * l as f64 * ln_n
                    + ln_pow(1.0 - 2.0 / nf, k - 2 * l);
                v += ln.exp();
            }
            v
        })
        .collect();
    let ew = match spec.statistic {
        OccupancyStatistic::AtLeastTwo => {
            nf - em[0] - em.get(1).copied().unwrap_or(0.0)
        }
        OccupancyStatistic::Matches(r) => {
            if r > k {
                0.0
            } else {
                (lf[k] - lf[r] - lf[k - r] - (r as f64 - 1.0) * ln_n).exp()
            }
        }
        OccupancyStatistic::Empty => em[0],
        OccupancyStatistic::ExactLevel(m) => em.get(m).copied().unwrap_or(0.0),
    };
    OccupancyMoments { em, em2, ew }
}

fn big_pow(base: usize, e: usize) -> BigInt {
    BigInt::from(BigUint::from(base).pow(e as u32))
}

/// `Var(M_l)` from the per-level catalogue of closed forms (separate
/// expressions for `l = 0, 1, 2, 3`, for `4 <= l <= k/2` and for `l > k/2`),
/// in exact arithmetic. `None` where a displayed exponent would be negative.
pub fn level_variance_catalogue(n: usize, k: usize, l: usize) -> Option<f64> {
    if n < 2 || k == 0 || l > k {
        return None;
    }
    let b = |a: usize, c: usize| BigInt::from(binomial(a, c));
    let i = |x: usize| BigInt::from(x);
    let nk1 = big_pow(n, k - 1);
    let (num, den) = match l {
        0 => (
            big_pow(n - 1, k) * &nk1 + big_pow(n - 2, k) * i(n - 1) * &nk1
                - big_pow(n - 1, 2 * k),
            BigInt::one(),
        ),
        1 if k >= 2 => (
            i(k) * i(n - 1) * &nk1 * (big_pow(n - 1, k - 2) + i(k - 1) * big_pow(n - 2, k - 2))
                - i(k * k) * big_pow(n - 1, 2 * k - 2),
            BigInt::one(),
        ),
        2 if k >= 4 => (
            i(k * (k - 1)) * i(n - 1) * &nk1
                * (i(2) * big_pow(n - 1, k - 3) + i((k - 2) * (k - 3)) * big_pow(n - 2, k - 4))
                - i(k * k * (k - 1) * (k - 1)) * big_pow(n - 1, 2 * k - 4),
            i(4),
        ),
        3 if k >= 6 => (
            &nk1 * i(k * (k - 1) * (k - 2))
                * (i(6) * big_pow(n - 1, k - 3)
                    + i((k - 3) * (k - 4) * (k - 5)) * i(n - 1) * big_pow(n - 2, k - 6))
                - i(k * (k - 1) * (k - 2)).pow(2) * big_pow(n - 1, 2 * k - 6),
            i(36),
        ),
        l if l >= 4 && 2 * l <= k => (
            &nk1 * (big_pow(n - 1, k - l) * b(k, l)
                + b(k, l) * b(k - l, l) * i(n - 1) * big_pow(n - 2, k - 2 * l))
                - b(k, l).pow(2) * big_pow(n - 1, 2 * k - 2 * l),
            BigInt::one(),
        ),
        l if l >= 4 => (
            big_pow(n - 1, k - l) * &nk1 * b(k, l) - b(k, l).pow(2) * big_pow(n - 1, 2 * k - 2 * l),
            BigInt::one(),
        ),
        _ => return None,
    };
    let den = den * big_pow(n, 2 * k - 2);
    Some(to_f64(&BigRational::new(num, den)))
}

/// `n` points, each colored uniformly from `c` colors; `W` counts
/// monochromatic `k`-subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColoringSpec {
    pub n_points: usize,
    pub k: usize,
    pub colors: usize,
}

impl ColoringSpec {
    pub fn new(n_points: usize, k: usize, colors: usize) -> Result<Self> {
        if k < 2 || k > n_points {
            return invalid(format!("tuple size must satisfy 2 <= k <= n, got k={k}, n={n_points}"));
        }
        if colors == 0 {
            return invalid("need at least one color");
        }
        Ok(Self {
            n_points,
            k,
            colors,
        })
    }

    /// `C(n,k) c^{1-k}`.
    pub fn lambda(&self) -> f64 {
        ratio_to_f64(
            &binomial(self.n_points, self.k),
            &BigUint::from(self.colors).pow(self.k as u32 - 1),
        )
    }
}

/// Colors play the role of boxes and points of balls.
pub fn coloring_pmf(spec: &ColoringSpec) -> Result<Pmf> {
    occupancy_pmf(&OccupancySpec::new(
        spec.colors,
        spec.n_points,
        OccupancyStatistic::Matches(spec.k),
    )?)
}

/// Quantities for the empty-box problem with `N_1` the number of singleton
/// boxes and `xi_i` the indicator that box `i` is a singleton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouponDiagnostics {
    pub ew: f64,
    pub en1w: f64,
    /// `P(xi_1 = 1)`.
    pub p: f64,
    /// `P(xi_1 = 1, xi_2 = 1)`.
    pub rho: f64,
    pub var_n1_exact: f64,
    /// `k (1-1/n)^{k-1} + (2k^2/n)(1-2/n)^{k-2}`.
    pub var_n1_closed_form_bound: f64,
}

pub fn coupon_collector_diagnostics(n: usize, k: usize) -> Result<CouponDiagnostics> {
    if n < 3 {
        return invalid("coupon diagnostics need n >= 3");
    }
    let nf = n as f64;
    let kf = k as f64;
    let pow = |base: f64, e: i64| if e < 0 { 0.0 } else { base.powf(e as f64) };
    let ki = k as i64;
    let ew = nf * pow(1.0 - 1.0 / nf, ki);
    let (p, rho, en1w, bound) = if k == 0 {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        let p = kf / nf * pow(1.0 - 1.0 / nf, ki - 1);
        let rho = if k >= 2 {
            kf * (kf - 1.0) / (nf * nf) * pow(1.0 - 2.0 / nf, ki - 2)
        } else {
            0.0
        };
        let en1w = nf * (nf - 1.0) * (kf / nf) * pow(1.0 - 2.0 / nf, ki - 1);
        let bound = kf * pow(1.0 - 1.0 / nf, ki - 1)
            + if k >= 2 {
                2.0 * kf * kf / nf * pow(1.0 - 2.0 / nf, ki - 2)
            } else {
                0.0
            };
        (p, rho, en1w, bound)
    };
    let var_n1_exact = (nf * p * (1.0 - p) + nf * (nf - 1.0) * (rho - p * p)).max(0.0);
    Ok(CouponDiagnostics {
        ew,
        en1w,
        p,
        rho,
        var_n1_exact,
        var_n1_closed_form_bound: bound,
    })
}

/// Exact mean and variance of `W` as rationals, for callers that need
/// `lambda` and `sigma^2` without rounding in between.
pub fn exact_mean_variance(law: &[BigRational]) -> (f64, f64) {
    let mut mean = BigRational::zero();
    let mut second = BigRational::zero();
    for (j, p) in law.iter().enumerate() {
        let j = BigRational::from_integer(BigInt::from(j));
        mean += &j * p;
        second += &j * &j * p;
    }
    let var = &second - &mean * &mean;
    debug_assert!(!var.is_negative());
    (to_f64(&mean), to_f64(&var))
}
