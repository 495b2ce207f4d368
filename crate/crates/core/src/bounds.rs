//! Closed-form error bounds for Poisson approximation, evaluated as numbers.
//!
//! Every bound comes back as a [`BoundReport`] that records which
//! bookkeeping convention it is stated in. Two conventions circulate for the
//! same distance: a bound in the [`Convention::Tv`] form already carries the
//! factor 1/2 of the half-l1 norm, while a [`Convention::SetDistance`] bound
//! controls `|P(W in A) - Poi(A)|` directly. Converting multiplies or divides
//! by two.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::exact::coupon_collector_diagnostics;
use crate::pairs::ErrorTerms;

/// Dominance slack used when comparing a bound with an exact distance.
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;

/// Constant of the explicit triple-match surrogate `C k^4 / n^3`. Chosen
/// with headroom over the largest `TV n^3 / k^4` seen on the exactly
/// computable sweep along `k = theta n^{2/3}`.
pub const TRIPLES_SURROGATE_CONSTANT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Tv,
    SetDistance,
}

impl Convention {
    pub fn other(self) -> Self {
        match self {
            Self::Tv => Self::SetDistance,
            Self::SetDistance => Self::Tv,
        }
    }

    /// Factor taking a value stated in `self` to one stated in `to`.
    pub fn factor_to(self, to: Self) -> f64 {
        match (self, to) {
            (Self::Tv, Self::SetDistance) => 2.0,
            (Self::SetDistance, Self::Tv) => 0.5,
            _ => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tv => "tv",
            Self::SetDistance => "set",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    IndependentTrials,
    Matching,
    GeneralizedMatching,
    BirthdayPairs,
    BirthdayTriplesSurrogate,
    CouponChainSurrogate,
    Coupling,
    NegativeAssociation,
    DependencyGraph,
    DependencyGraphGeneral,
    Monochromatic,
    ExchangeablePair,
    FixedPointSuccession,
    MatchingProcess,
    MultivariatePair,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::IndependentTrials => "independent-trials",
            Self::Matching => "matching",
            Self::GeneralizedMatching => "generalized-matching",
            Self::BirthdayPairs => "birthday-pairs",
            Self::BirthdayTriplesSurrogate => "birthday-triples-surrogate",
            Self::CouponChainSurrogate => "coupon-chain-surrogate",
            Self::Coupling => "coupling",
            Self::NegativeAssociation => "negative-association",
            Self::DependencyGraph => "dependency-graph",
            Self::DependencyGraphGeneral => "dependency-graph-general",
            Self::Monochromatic => "monochromatic",
            Self::ExchangeablePair => "exchangeable-pair",
            Self::FixedPointSuccession => "fixed-point-succession",
            Self::MatchingProcess => "matching-process",
            Self::MultivariatePair => "multivariate-pair",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A secondary number reported next to a bound, such as a sharper
/// reference value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Companion {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub lambda: f64,
    /// `min(raw, 1)`.
    pub value: f64,
    pub raw: f64,
    pub convention: Convention,
    /// The value is an explicit stand-in for an order-of-magnitude statement.
    pub surrogate: bool,
    /// `lambda = 0`: the statistic is identically zero.
    pub degenerate: bool,
    pub companion: Option<Companion>,
    pub inputs: String,
}

impl BoundReport {
    pub fn new(
        kind: BoundKind,
        lambda: f64,
        raw: f64,
        convention: Convention,
        inputs: impl Into<String>,
    ) -> Self {
        let raw = raw.max(0.0);
        Self {
            kind,
            lambda,
            value: raw.min(1.0),
            raw,
            convention,
            surrogate: false,
            degenerate: lambda == 0.0,
            companion: None,
            inputs: inputs.into(),
        }
    }

    fn surrogate(mut self) -> Self {
        self.surrogate = true;
        self
    }

    fn with_companion(mut self, label: &str, value: f64) -> Self {
        self.companion = Some(Companion {
            label: label.into(),
            value,
        });
        self
    }

    /// The capped value restated in `convention`.
    pub fn value_in(&self, convention: Convention) -> f64 {
        (self.raw * self.convention.factor_to(convention)).min(1.0)
    }

    /// Whether the bound, read in its declared convention, is at least
    /// `exact_tv` (up to [`DOMINANCE_TOLERANCE`]).
    pub fn dominates(&self, exact_tv: f64) -> bool {
        self.dominates_in(self.convention, exact_tv)
    }

    pub fn dominates_in(&self, convention: Convention, exact_tv: f64) -> bool {
        self.value_in(convention) >= exact_tv - DOMINANCE_TOLERANCE
    }
}

fn one_minus_exp_neg(lambda: f64) -> f64 {
    -(-lambda).exp_m1()
}

fn fmt_list<T: fmt::Display>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    parts.join(";")
}

/// Independent trials: `((1 - e^{-lambda}) / (2 lambda)) sum p_i^2`.
pub fn bound_poisson_binomial(p: &[f64]) -> Result<BoundReport> {
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return invalid(format!("success probability {bad} outside [0, 1]"));
    }
    let lambda: f64 = p.iter().sum();
    if lambda <= 0.0 {
        return invalid("independent-trials bound needs lambda = sum p_i > 0");
    }
    let sq: f64 = p.iter().map(|x| x * x).sum();
    let raw = one_minus_exp_neg(lambda) / (2.0 * lambda) * sq;
    Ok(
        BoundReport::new(BoundKind::IndependentTrials, lambda, raw, Convention::Tv, format!("n={}", p.len()))
            .with_companion("without-half", 2.0 * raw),
    )
}

/// Fixed points of a uniform permutation: `2/n`, with `2^n / n!` alongside.
pub fn bound_matching(n: usize) -> Result<BoundReport> {
    if n < 2 {
        return invalid(format!("matching bound needs n >= 2, got {n}"));
    }
    let sharp = (1..=n).fold(1.0f64, |acc, i| acc * 2.0 / i as f64);
    Ok(BoundReport::new(
        BoundKind::Matching,
        1.0,
        2.0 / n as f64,
        Convention::SetDistance,
        format!("n={n}"),
    )
    .with_companion("2^n/n!", sharp))
}

/// Multiset matching:
/// `1.4 [lambda^{3/2}/(n-1) + 3 mu / (2 n^2 lambda^{1/2})]`.
pub fn bound_generalized_matching(l: &[usize]) -> Result<BoundReport> {
    if l.is_empty() || l.contains(&0) {
        return invalid("multiplicities must be positive");
    }
    let n: usize = l.iter().sum();
    if n < 2 {
        return invalid("generalized matching needs n >= 2");
    }
    let nf = n as f64;
    let lambda = l.iter().map(|&x| (x * x) as f64).sum::<f64>() / nf;
    let mu: f64 = l.iter().map(|&x| (x * x * x) as f64).sum();
    let raw = 1.4 * (lambda.powf(1.5) / (nf - 1.0) + 3.0 * mu / (2.0 * nf * nf * lambda.sqrt()));
    Ok(BoundReport::new(
        BoundKind::GeneralizedMatching,
        lambda,
        raw,
        Convention::SetDistance,
        format!("l={}", fmt_list(l)),
    ))
}

/// Boxes with two or more balls, `theta = k / sqrt(n)`:
/// `min{1, sqrt(2)/theta} [(19 theta^3 + 6 theta)/(12 sqrt n) + theta^2/(2n)]`
/// against `Poi(theta^2 / 2)`.
pub fn bound_birthday_pairs(n: usize, k: usize) -> Result<BoundReport> {
    if n == 0 {
        return invalid("need at least one box");
    }
    let nf = n as f64;
    let theta = k as f64 / nf.sqrt();
    let lambda = theta * theta / 2.0;
    let inputs = format!("n={n};k={k}");
    if k == 0 {
        return Ok(BoundReport::new(BoundKind::BirthdayPairs, 0.0, 0.0, Convention::Tv, inputs));
    }
    let prefactor = (2f64.sqrt() / theta).min(1.0);
    let raw = prefactor
        * ((19.0 * theta.powi(3) + 6.0 * theta) / (12.0 * nf.sqrt()) + theta * theta / (2.0 * nf));
    Ok(BoundReport::new(BoundKind::BirthdayPairs, lambda, raw, Convention::Tv, inputs))
}

/// Triple matches: the explicit surrogate `C k^4 / n^3` against
/// `Poi(C(k,3)/n^2)`.
pub fn bound_birthday_triples(n: usize, k: usize) -> Result<BoundReport> {
    bound_birthday_triples_with(n, k, TRIPLES_SURROGATE_CONSTANT)
}

pub fn bound_birthday_triples_with(n: usize, k: usize, constant: f64) -> Result<BoundReport> {
    if n == 0 || k < 3 {
        return invalid(format!("triple bound needs n >= 1 and k >= 3, got n={n}, k={k}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let lambda = kf * (kf - 1.0) * (kf - 2.0) / 6.0 / (nf * nf);
    let raw = constant * kf.powi(4) / nf.powi(3);
    Ok(BoundReport::new(
        BoundKind::BirthdayTriplesSurrogate,
        lambda,
        raw,
        Convention::SetDistance,
        format!("n={n};k={k};C={constant}"),
    )
    .surrogate())
}

/// The pieces of the empty-box chain, with `theta = (k - n log n)/n` and
/// `lambda = e^{-theta}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouponChain {
    pub theta: f64,
    pub lambda: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub prefactor: f64,
}

impl CouponChain {
    pub fn total(&self) -> f64 {
        self.prefactor * (self.b + self.c + self.d)
    }
}

/// Assembles the displayed inequalities for the empty-box problem.
/// `|theta|` replaces `theta` in the two terms where its sign matters, so
/// the chain stays an upper bound when `k < n log n`.
pub fn coupon_chain(n: usize, k: usize) -> Result<CouponChain> {
    if n < 3 || k == 0 {
        return invalid(format!("coupon chain needs n >= 3 and k >= 1, got n={n}, k={k}"));
    }
    let (nf, kf) = (n as f64, k as f64);
    let log_n = nf.ln();
    let theta = (kf - nf * log_n) / nf;
    let lambda = (-theta).exp();
    let diag = coupon_collector_diagnostics(n, k)?;
    let b = nf * (1.0 - 2.0 / nf).powf(kf - 1.0);
    let c = lambda * (theta.abs() * nf + (lambda + 1.0) * log_n) / kf;
    let inner = nf * theta.abs() * lambda / ((nf - 1.0) * log_n)
        + lambda / (nf - 1.0)
        + lambda * (log_n + theta) / (2.0 * (nf - 1.0))
        + diag.var_n1_closed_form_bound.sqrt() / log_n;
    let d = nf * log_n / kf * inner;
    Ok(CouponChain {
        theta,
        lambda,
        b,
        c,
        d,
        prefactor: (1.4 / lambda.sqrt()).min(1.0),
    })
}

pub fn bound_coupon_collector(n: usize, k: usize) -> Result<BoundReport> {
    let chain = coupon_chain(n, k)?;
    Ok(BoundReport::new(
        BoundKind::CouponChainSurrogate,
        chain.lambda,
        chain.total(),
        Convention::SetDistance,
        format!("n={n};k={k};theta={:.6}", chain.theta),
    )
    .surrogate())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CouplingProblem {
    PoissonBinomial(Vec<f64>),
    Matching(usize),
    /// Empty boxes against `Poi(n (1 - 1/n)^k)`.
    Coupon { n: usize, k: usize },
    /// Colliding pairs `sum_boxes C(count, 2)` against `Poi(C(k,2)/n)`.
    Birthday { n: usize, k: usize },
}

/// Size-bias coupling: `(1 - e^{-lambda}) E|W + 1 - W*|`.
pub fn bound_coupling(problem: &CouplingProblem) -> Result<BoundReport> {
    let (lambda, e_term, inputs) = match problem {
        CouplingProblem::PoissonBinomial(p) => {
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return invalid("success probabilities must lie in [0, 1]");
            }
            let lambda: f64 = p.iter().sum();
            if lambda <= 0.0 {
                return invalid("coupling bound needs lambda > 0");
            }
            let sq: f64 = p.iter().map(|x| x * x).sum();
            (lambda, sq / lambda, format!("independent-trials;n={}", p.len()))
        }
        CouplingProblem::Matching(n) => {
            if *n < 2 {
                return invalid("matching needs n >= 2");
            }
            (1.0, 2.0 / *n as f64, format!("matching;n={n}"))
        }
        CouplingProblem::Coupon { n, k } => {
            if *n < 2 {
                return invalid("coupon coupling needs n >= 2");
            }
            let (nf, kf) = (*n as f64, *k as f64);
            let q = (1.0 - 1.0 / nf).powf(kf);
            (nf * q, q * (1.0 + kf / nf), format!("coupon;n={n};k={k}"))
        }
        CouplingProblem::Birthday { n, k } => {
            if *n == 0 {
                return invalid("need at least one box");
            }
            let (nf, kf) = (*n as f64, *k as f64);
            let lambda = kf * (kf - 1.0) / 2.0 / nf;
            (lambda, (1.0 + 2.0 * kf) / nf, format!("birthday;n={n};k={k}"))
        }
    };
    let raw = if lambda == 0.0 {
        0.0
    } else {
        one_minus_exp_neg(lambda) * e_term
    };
    Ok(BoundReport::new(BoundKind::Coupling, lambda, raw, Convention::SetDistance, inputs))
}

/// Negatively associated indicators: `(1 - e^{-lambda})(1 - sigma^2/lambda)`.
pub fn bound_negative_association(lambda: f64, sigma2: f64) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("lambda must be positive, got {lambda}"));
    }
    if !(sigma2 > 0.0) {
        return invalid(format!("variance must be positive, got {sigma2}"));
    }
    if sigma2 > lambda * (1.0 + 1e-12) {
        return invalid(format!(
            "variance {sigma2} exceeds the mean {lambda}; negatively associated indicators cannot do that"
        ));
    }
    let raw = one_minus_exp_neg(lambda) * (1.0 - sigma2 / lambda);
    Ok(BoundReport::new(
        BoundKind::NegativeAssociation,
        lambda,
        raw,
        Convention::SetDistance,
        format!("lambda={lambda};sigma2={sigma2}"),
    ))
}

/// Indicators with marginals `p_i`, pair probabilities `p_ij` on edges and
/// neighborhoods `N_i` (each containing `i`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependencyGraph {
    p: Vec<f64>,
    neighborhoods: Vec<BTreeSet<usize>>,
    p_pair: BTreeMap<(usize, usize), f64>,
}

impl DependencyGraph {
    /// `p_pair` is keyed by `(min, max)` and must cover every edge.
    pub fn new(
        p: Vec<f64>,
        neighborhoods: Vec<Vec<usize>>,
        p_pair: BTreeMap<(usize, usize), f64>,
    ) -> Result<Self> {
        let m = p.len();
        if neighborhoods.len() != m {
            return invalid("one neighborhood per vertex is required");
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return invalid(format!("marginal {bad} outside [0, 1]"));
        }
        let neighborhoods: Vec<BTreeSet<usize>> = neighborhoods
            .into_iter()
            .map(|v| v.into_iter().collect())
            .collect();
        for (i, nb) in neighborhoods.iter().enumerate() {
            if !nb.contains(&i) {
                return invalid(format!("vertex {i} is missing from its own neighborhood"));
            }
            for &j in nb {
                if j >= m {
                    return invalid(format!("neighbor {j} of vertex {i} out of range"));
                }
                if !neighborhoods[j].contains(&i) {
                    return invalid(format!("adjacency is not symmetric: {j} in N_{i} but {i} not in N_{j}"));
                }
                if j != i {
                    let pij = p_pair.get(&(i.min(j), i.max(j))).copied();
                    match pij {
                        None => return invalid(format!("missing pair probability for edge ({i}, {j})")),
                        Some(v) if v < 0.0 || v > p[i].min(p[j]) + 1e-15 => {
                            return invalid(format!("p_{i}{j} = {v} exceeds min(p_{i}, p_{j})"))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(Self {
            p,
            neighborhoods,
            p_pair,
        })
    }

    /// Graph on the `k`-subsets of `n` points colored from `c` colors, with
    /// an edge between subsets that share a point.
    pub fn monochromatic(n: usize, k: usize, c: usize) -> Result<Self> {
        if k < 2 || k > n || c == 0 {
            return invalid(format!("need 2 <= k <= n and c >= 1, got n={n}, k={k}, c={c}"));
        }
        let subsets = k_subsets(n, k);
        if subsets.len() > 5000 {
            return invalid(format!("{} subsets is too many to build the graph explicitly", subsets.len()));
        }
        let cf = c as f64;
        let p_alpha = cf.powi(1 - k as i32);
        let masks: Vec<u64> = subsets.iter().map(|s| s.iter().fold(0u64, |m, &x| m | 1 << x)).collect();
        let mut neighborhoods = vec![Vec::new(); masks.len()];
        let mut p_pair = BTreeMap::new();
        for a in 0..masks.len() {
            neighborhoods[a].push(a);
            for b in a + 1..masks.len() {
                let overlap = (masks[a] & masks[b]).count_ones() as i32;
                if overlap > 0 {
                    neighborhoods[a].push(b);
                    neighborhoods[b].push(a);
                    p_pair.insert((a, b), cf.powi(1 - (2 * k as i32 - overlap)));
                }
            }
        }
        Self::new(vec![p_alpha; masks.len()], neighborhoods, p_pair)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn neighborhood(&self, i: usize) -> &BTreeSet<usize> {
        &self.neighborhoods[i]
    }

    pub fn pair(&self, i: usize, j: usize) -> f64 {
        self.p_pair.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    /// Inputs of the general bound that reproduce the plain one: the strong
    /// set is `N_i \ {i}`, so `E Z_i = sum p_j` and `E X_i Z_i = sum p_ij`
    /// over that set, with `eta_i = 0`.
    pub fn strong_neighborhood_inputs(&self) -> (Vec<f64>, Vec<f64>) {
        let mut z = Vec::with_capacity(self.len());
        let mut xz = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let others = self.neighborhoods[i].iter().filter(|&&j| j != i);
            z.push(others.clone().map(|&j| self.p[j]).sum());
            xz.push(others.map(|&j| self.pair(i, j)).sum());
        }
        (z, xz)
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// `min(1, 1/lambda) [sum_i sum_{j in N_i \ i} p_ij + sum_i sum_{j in N_i} p_i p_j]`.
pub fn bound_dependency_graph(g: &DependencyGraph) -> Result<BoundReport> {
    let lambda = g.lambda();
    if lambda <= 0.0 {
        return invalid("dependency-graph bound needs lambda > 0");
    }
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for i in 0..g.len() {
        for &j in g.neighborhood(i) {
            if j != i {
                b1 += g.pair(i, j);
            }
            b2 += g.p[i] * g.p[j];
        }
    }
    let raw = (1.0f64).min(1.0 / lambda) * (b1 + b2);
    Ok(BoundReport::new(
        BoundKind::DependencyGraph,
        lambda,
        raw,
        Convention::SetDistance,
        format!("vertices={}", g.len()),
    ))
}

/// `min(1, 1/lambda) sum_i [p_i^2 + p_i E Z_i + E(X_i Z_i)] + min(1, 1/lambda) sum_i eta_i`.
pub fn bound_dependency_graph_general(
    g: &DependencyGraph,
    etas: &[f64],
    z_means: &[f64],
    xz_means: &[f64],
) -> Result<BoundReport> {
    let m = g.len();
    if etas.len() != m || z_means.len() != m || xz_means.len() != m {
        return invalid("one eta, E Z_i and E X_i Z_i per vertex is required");
    }
    if etas.iter().chain(z_means).chain(xz_means).any(|&x| x < 0.0 || !x.is_finite()) {
        return invalid("correction inputs must be finite and nonnegative");
    }
    let lambda = g.lambda();
    if lambda <= 0.0 {
        return invalid("dependency-graph bound needs lambda > 0");
    }
    let scale = (1.0f64).min(1.0 / lambda);
    let main: f64 = (0..m)
        .map(|i| g.p[i] * g.p[i] + g.p[i] * z_means[i] + xz_means[i])
        .sum();
    let raw = scale * main + scale * etas.iter().sum::<f64>();
    Ok(BoundReport::new(
        BoundKind::DependencyGraphGeneral,
        lambda,
        raw,
        Convention::SetDistance,
        format!("vertices={m}"),
    ))
}

fn binom_f(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Monochromatic `k`-tuples under a uniform `c`-coloring of `n` points.
pub fn bound_monochromatic(n: usize, k: usize, c: usize) -> Result<BoundReport> {
    if k < 2 || k > n || c == 0 {
        return invalid(format!("need 2 <= k <= n and c >= 1, got n={n}, k={k}, c={c}"));
    }
    let cf = c as f64;
    let tuples = binom_f(n, k);
    let lambda = tuples * cf.powi(1 - k as i32);
    let first: f64 = (1..k)
        .map(|l| binom_f(k, l) * binom_f(n - k, k - l) * cf.powi(1 - (2 * k - l) as i32))
        .sum();
    let second: f64 = (1..=k).map(|l| binom_f(k, l) * binom_f(n - k, k - l)).sum();
    let raw = (1.0f64).min(1.0 / lambda)
        * (tuples * first + tuples * cf.powi(2 - 2 * k as i32) * second);
    Ok(BoundReport::new(
        BoundKind::Monochromatic,
        lambda,
        raw,
        Convention::SetDistance,
        format!("n={n};k={k};c={c}"),
    ))
}

/// The generic exchangeable-pair bound
/// `min(1, 1.4 lambda^{-1/2}) (E|lambda - c Q(up)| + E|W - c Q(down)|)`.
pub fn bound_from_error_terms(terms: &ErrorTerms) -> Result<BoundReport> {
    if terms.lambda <= 0.0 {
        return invalid("exchangeable-pair bound needs lambda > 0");
    }
    let alpha = (1.4 / terms.lambda.sqrt()).min(1.0);
    Ok(BoundReport::new(
        BoundKind::ExchangeablePair,
        terms.lambda,
        alpha * (terms.e1 + terms.e2),
        Convention::SetDistance,
        format!("e1={};e2={}", terms.e1, terms.e2),
    ))
}
