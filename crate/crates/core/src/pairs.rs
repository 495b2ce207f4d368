//! Exchangeable pairs for the combinatorial problems.
//!
//! Each model pairs a uniform (or product) state law with a reversible
//! one-step kernel: resample one coordinate, compose with a random
//! transposition, or move one ball to a uniform box. The analytic
//! probabilities `Q(W' = W +- 1 | state)` are what the bounds consume; the
//! enumeration and Monte Carlo routines here check them.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exact::MatchingSpec;
use crate::perm::{for_each_permutation, two_cycles};
use crate::pmf::{tv_distance, Pmf};

/// Minimum sample count for the Monte Carlo routines.
pub const MIN_MC_SAMPLES: usize = 10_000;
/// Bootstrap resamples behind `mc_tv_estimate`'s standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Standardized deviation beyond which a step-probability check fails.
pub const Z_THRESHOLD: f64 = 4.0;
/// Largest state space (times kernel size) accepted for exact enumeration.
pub const ENUMERATION_CAP: f64 = 5e7;

/// Generator for sub-stream `index` of a master seed: ChaCha8 keyed by the
/// master seed, with the stream id set to the index. Distinct indices give
/// independent, reproducible streams.
pub fn substream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Problem {
    PoissonBinomial { p: Vec<f64> },
    Matching(MatchingSpec),
    BirthdayPairs { n: usize, k: usize },
    BirthdayTriples { n: usize, k: usize },
    Coupon { n: usize, k: usize },
}

/// Bernoulli outcomes, an arrangement (position to card), or the box of
/// each ball, depending on the problem.
pub type State = Vec<usize>;

/// Observables of a state that the one-step formulas depend on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StateStats {
    PoissonBinomial {
        w: usize,
        /// `sum_i p_i omega_i`.
        weighted: f64,
    },
    Matching {
        w: usize,
        /// Number of 2-cycles.
        a2: usize,
        /// `W_i`: symbol-`i` positions holding a symbol-`i` card.
        wi: Vec<usize>,
        /// `W_ij`: symbol-`i` positions holding a symbol-`j` card.
        wij: Vec<Vec<usize>>,
    },
    Occupancy {
        /// `M_l`, boxes holding exactly `l` balls, for `l = 0..=k`.
        levels: Vec<usize>,
        w: usize,
    },
    Coupon {
        /// Empty boxes.
        w: usize,
        /// Singleton boxes.
        n1: usize,
    },
}

impl StateStats {
    pub fn w(&self) -> usize {
        match self {
            Self::PoissonBinomial { w, .. }
            | Self::Matching { w, .. }
            | Self::Occupancy { w, .. }
            | Self::Coupon { w, .. } => *w,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepProbs {
    pub up: f64,
    pub down: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairModel {
    problem: Problem,
    c: f64,
}

impl PairModel {
    /// Resample one uniformly chosen coordinate; `c = n`.
    pub fn poisson_binomial(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return invalid("need at least one trial");
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return invalid(format!("success probability {bad} outside [0, 1]"));
        }
        let c = p.len() as f64;
        Ok(Self {
            problem: Problem::PoissonBinomial { p },
            c,
        })
    }

    /// Compose with a uniform non-trivial transposition; `c = (n-1)/2`.
    pub fn matching(spec: MatchingSpec) -> Result<Self> {
        if spec.n() < 2 {
            return invalid("matching pair needs n >= 2");
        }
        let c = (spec.n() as f64 - 1.0) / 2.0;
        Ok(Self {
            problem: Problem::Matching(spec),
            c,
        })
    }

    /// Boxes with at least two balls; `c = k/2`.
    pub fn birthday_pairs(n: usize, k: usize) -> Result<Self> {
        check_balls(n, k)?;
        Ok(Self {
            problem: Problem::BirthdayPairs { n, k },
            c: k as f64 / 2.0,
        })
    }

    /// Triples of balls sharing a box; `c = k/3`.
    pub fn birthday_triples(n: usize, k: usize) -> Result<Self> {
        check_balls(n, k)?;
        Ok(Self {
            problem: Problem::BirthdayTriples { n, k },
            c: k as f64 / 3.0,
        })
    }

    /// Empty boxes; `c = n`.
    pub fn coupon(n: usize, k: usize) -> Result<Self> {
        check_balls(n, k)?;
        Ok(Self {
            problem: Problem::Coupon { n, k },
            c: n as f64,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn name(&self) -> &'static str {
        match self.problem {
            Problem::PoissonBinomial { .. } => "poisson-binomial",
            Problem::Matching(ref s) if s.is_plain() => "matching",
            Problem::Matching(_) => "generalized-matching",
            Problem::BirthdayPairs { .. } => "birthday-pairs",
            Problem::BirthdayTriples { .. } => "birthday-triples",
            Problem::Coupon { .. } => "coupon",
        }
    }

    fn boxes_and_balls(&self) -> Option<(usize, usize)> {
        match self.problem {
            Problem::BirthdayPairs { n, k }
            | Problem::BirthdayTriples { n, k }
            | Problem::Coupon { n, k } => Some((n, k)),
            _ => None,
        }
    }

    pub fn sample_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        match &self.problem {
            Problem::PoissonBinomial { p } => p
                .iter()
                .map(|&pi| usize::from(rng.random::<f64>() < pi))
                .collect(),
            Problem::Matching(spec) => {
                let mut perm: State = (0..spec.n()).collect();
                perm.shuffle(rng);
                perm
            }
            _ => {
                let (n, k) = self.boxes_and_balls().expect("occupancy problem");
                (0..k).map(|_| rng.random_range(0..n)).collect()
            }
        }
    }

    /// One draw from the pair kernel started at `state`.
    pub fn sample_pair<R: Rng + ?Sized>(&self, state: &State, rng: &mut R) -> State {
        let mut next = state.clone();
        match &self.problem {
            Problem::PoissonBinomial { p } => {
                let i = rng.random_range(0..p.len());
                next[i] = usize::from(rng.random::<f64>() < p[i]);
            }
            Problem::Matching(spec) => {
                let n = spec.n();
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                next.swap(a, b);
            }
            _ => {
                let (n, k) = self.boxes_and_balls().expect("occupancy problem");
                let ball = rng.random_range(0..k);
                next[ball] = rng.random_range(0..n);
            }
        }
        next
    }

    /// Every kernel move from `state` with its probability. Moves that leave
    /// the state unchanged are listed too, so the weights sum to one.
    pub fn kernel(&self, state: &State) -> Vec<(State, f64)> {
        match &self.problem {
            Problem::PoissonBinomial { p } => {
                let n = p.len() as f64;
                let mut out = Vec::with_capacity(2 * p.len());
                for (i, &pi) in p.iter().enumerate() {
                    for (value, weight) in [(1usize, pi), (0usize, 1.0 - pi)] {
                        let mut next = state.clone();
                        next[i] = value;
                        out.push((next, weight / n));
                    }
                }
                out
            }
            Problem::Matching(spec) => {
                let n = spec.n();
                let weight = 2.0 / (n * (n - 1)) as f64;
                let mut out = Vec::with_capacity(n * (n - 1) / 2);
                for a in 0..n {
                    for b in a + 1..n {
                        let mut next = state.clone();
                        next.swap(a, b);
                        out.push((next, weight));
                    }
                }
                out
            }
            _ => {
                let (n, k) = self.boxes_and_balls().expect("occupancy problem");
                let weight = 1.0 / (n * k) as f64;
                let mut out = Vec::with_capacity(n * k);
                for ball in 0..k {
                    for target in 0..n {
                        let mut next = state.clone();
                        next[ball] = target;
                        out.push((next, weight));
                    }
                }
                out
            }
        }
    }

    pub fn statistic(&self, state: &State) -> usize {
        self.stats(state).w()
    }

    pub fn stats(&self, state: &State) -> StateStats {
        match &self.problem {
            Problem::PoissonBinomial { p } => StateStats::PoissonBinomial {
                w: state.iter().sum(),
                weighted: p
                    .iter()
                    .zip(state)
                    .filter(|(_, &s)| s == 1)
                    .map(|(pi, _)| pi)
                    .sum(),
            },
            Problem::Matching(spec) => {
                let symbols = spec.symbols();
                let kinds = spec.multiplicities().len();
                let mut wij = vec![vec![0usize; kinds]; kinds];
                for (pos, &card) in state.iter().enumerate() {
                    wij[symbols[pos]][symbols[card]] += 1;
                }
                let wi: Vec<usize> = (0..kinds).map(|i| wij[i][i]).collect();
                StateStats::Matching {
                    w: wi.iter().sum(),
                    a2: two_cycles(state),
                    wi,
                    wij,
                }
            }
            Problem::Coupon { n, .. } => {
                let counts = box_counts(*n, state);
                StateStats::Coupon {
                    w: counts.iter().filter(|&&c| c == 0).count(),
                    n1: counts.iter().filter(|&&c| c == 1).count(),
                }
            }
            Problem::BirthdayPairs { n, k } | Problem::BirthdayTriples { n, k } => {
                let counts = box_counts(*n, state);
                let mut levels = vec![0usize; k + 1];
                for &c in &counts {
                    levels[c] += 1;
                }
                let w = if matches!(self.problem, Problem::BirthdayPairs { .. }) {
                    counts.iter().filter(|&&c| c >= 2).count()
                } else {
                    counts.iter().map(|&c| c * c.saturating_sub(1) * c.saturating_sub(2) / 6).sum()
                };
                StateStats::Occupancy { levels, w }
            }
        }
    }

    /// The analytic one-step probabilities `Q(W' = W + 1 | state)` and
    /// `Q(W' = W - 1 | state)` as functions of the state's observables.
    #[allow(clippy::needless_range_loop)]
    pub fn step_probs(&self, stats: &StateStats) -> Result<StepProbs> {
        match (&self.problem, stats) {
            (Problem::PoissonBinomial { p }, StateStats::PoissonBinomial { w, weighted }) => {
                let n = p.len() as f64;
                let lambda: f64 = p.iter().sum();
                let tol = 1e-12 * (1.0 + lambda);
                if *w > p.len() || *weighted < -tol || *weighted > lambda + tol || *weighted > *w as f64 + tol {
                    return inconsistent(format!("w={w}, sum p_i omega_i={weighted}"));
                }
                Ok(StepProbs {
                    up: (lambda - weighted) / n,
                    down: (*w as f64 - weighted) / n,
                })
            }
            (Problem::Matching(spec), StateStats::Matching { w, a2, wi, wij }) => {
                let n = spec.n();
                let l = spec.multiplicities();
                if wi.len() != l.len() || wij.len() != l.len() || wij.iter().any(|r| r.len() != l.len()) {
                    return inconsistent("symbol tables do not match the multiplicities");
                }
                if wi.iter().sum::<usize>() != *w || (0..l.len()).any(|i| wi[i] != wij[i][i]) {
                    return inconsistent("W differs from the sum of W_i");
                }
                for i in 0..l.len() {
                    let row: usize = wij[i].iter().sum();
                    let col: usize = wij.iter().map(|r| r[i]).sum();
                    if row != l[i] || col != l[i] {
                        return inconsistent(format!("W_ij margins for symbol {i} differ from l_i"));
                    }
                }
                let pairs = (n * (n - 1)) as f64 / 2.0;
                if spec.is_plain() {
                    if w + 2 * a2 > n {
                        return inconsistent(format!("W + 2 a2 = {} exceeds n = {n}", w + 2 * a2));
                    }
                    let (w, a2, n) = (*w as f64, *a2 as f64, n as f64);
                    return Ok(StepProbs {
                        up: 2.0 * (n - w - 2.0 * a2) / (n * (n - 1.0)),
                        down: 2.0 * w * (n - w) / (n * (n - 1.0)),
                    });
                }
                let mut up = 0.0;
                let mut down = 0.0;
                for i in 0..l.len() {
                    for j in 0..l.len() {
                        if j != i {
                            up += (wij[j][i] * (l[i] - wi[i] - wij[i][j])) as f64;
                        }
                    }
                    down += wi[i] as f64 * (n as f64 - *w as f64 - 2.0 * (l[i] - wi[i]) as f64);
                }
                Ok(StepProbs {
                    up: up / pairs,
                    down: down / pairs,
                })
            }
            (
                Problem::BirthdayPairs { n, k } | Problem::BirthdayTriples { n, k },
                StateStats::Occupancy { levels, w },
            ) => {
                check_levels(*n, *k, levels)?;
                let m = |l: usize| levels.get(l).copied().unwrap_or(0) as f64;
                let kn = (k * n) as f64;
                let (nf, kf) = (*n as f64, *k as f64);
                if matches!(self.problem, Problem::BirthdayPairs { .. }) {
                    let expected: usize = levels.iter().skip(2).sum();
                    if *w != expected {
                        return inconsistent(format!("W = {w} but M_2+ = {expected}"));
                    }
                    Ok(StepProbs {
                        up: m(1) * (kf - 2.0 * m(2) - 1.0) / kn,
                        down: 2.0 * m(2) * (nf - m(1) - 1.0) / kn,
                    })
                } else {
                    let expected: usize = levels
                        .iter()
                        .enumerate()
                        .map(|(c, &count)| count * c * c.saturating_sub(1) * c.saturating_sub(2) / 6)
                        .sum();
                    if *w != expected {
                        return inconsistent(format!("W = {w} but the triple count is {expected}"));
                    }
                    Ok(StepProbs {
                        up: (m(1) * m(2) + 2.0 * m(2) * m(2) - 2.0 * m(2)) / kn,
                        down: (3.0 * m(3) * m(0) + 3.0 * m(3) * m(1)) / kn,
                    })
                }
            }
            (Problem::Coupon { n, k }, StateStats::Coupon { w, n1 }) => {
                if w + n1 > *n || n1 > k || (*w == *n && *k > 0) || n1 + 2 * (n - w - n1) > *k {
                    return inconsistent(format!("W = {w}, N_1 = {n1} impossible for n = {n}, k = {k}"));
                }
                let kn = (k * n) as f64;
                Ok(StepProbs {
                    up: (*n1 * (n - w - 1)) as f64 / kn,
                    down: ((k - n1) * w) as f64 / kn,
                })
            }
            _ => inconsistent("statistics belong to a different problem"),
        }
    }

    /// `Q(W' = W +- 1 | state)` by summing the kernel, independent of the
    /// analytic formulas.
    pub fn exact_step_probs(&self, state: &State) -> (f64, f64) {
        let w = self.statistic(state);
        let mut up = 0.0;
        let mut down = 0.0;
        for (next, q) in self.kernel(state) {
            let w2 = self.statistic(&next);
            if w2 == w + 1 {
                up += q;
            } else if w2 + 1 == w {
                down += q;
            }
        }
        (up, down)
    }

    /// Rough count of (state, move) pairs visited by exact enumeration.
    pub fn enumeration_size(&self) -> f64 {
        match &self.problem {
            Problem::PoissonBinomial { p } => 2f64.powi(p.len() as i32) * 2.0 * p.len() as f64,
            Problem::Matching(spec) => {
                let n = spec.n();
                (1..=n).map(|x| x as f64).product::<f64>() * (n * (n - 1) / 2) as f64
            }
            _ => {
                let (n, k) = self.boxes_and_balls().expect("occupancy problem");
                (n as f64).powi(k as i32) * (n * k) as f64
            }
        }
    }

    /// The whole state space with its probabilities.
    pub fn enumerate_states(&self) -> Result<Vec<(State, f64)>> {
        let size = self.enumeration_size();
        if size > ENUMERATION_CAP {
            return Err(Error::NotEnumerable(format!(
                "{} instance needs about {size:.3e} state-move evaluations (cap {ENUMERATION_CAP:e})",
                self.name()
            )));
        }
        Ok(match &self.problem {
            Problem::PoissonBinomial { p } => {
                let n = p.len();
                (0..1usize << n)
                    .map(|code| {
                        let state: State = (0..n).map(|i| (code >> i) & 1).collect();
                        let prob = state
                            .iter()
                            .zip(p)
                            .map(|(&s, &pi)| if s == 1 { pi } else { 1.0 - pi })
                            .product();
                        (state, prob)
                    })
                    .collect()
            }
            Problem::Matching(spec) => {
                let n = spec.n();
                let mut out = Vec::new();
                for_each_permutation(n, |perm| out.push(perm.to_vec()));
                let prob = 1.0 / out.len() as f64;
                out.into_iter().map(|s| (s, prob)).collect()
            }
            _ => {
                let (n, k) = self.boxes_and_balls().expect("occupancy problem");
                let total = n.pow(k as u32);
                let prob = 1.0 / total as f64;
                (0..total)
                    .map(|code| {
                        let mut c = code;
                        let state: State = (0..k)
                            .map(|_| {
                                let b = c % n;
                                c /= n;
                                b
                            })
                            .collect();
                        (state, prob)
                    })
                    .collect()
            }
        })
    }
}

fn check_balls(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 {
        return invalid(format!("need at least one box and one ball, got n={n}, k={k}"));
    }
    Ok(())
}

fn inconsistent<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InconsistentStats(msg.into()))
}

fn check_levels(n: usize, k: usize, levels: &[usize]) -> Result<()> {
    let boxes: usize = levels.iter().sum();
    let balls: usize = levels.iter().enumerate().map(|(l, &m)| l * m).sum();
    if boxes != n || balls != k {
        return inconsistent(format!(
            "level counts describe {boxes} boxes and {balls} balls, expected {n} and {k}"
        ));
    }
    Ok(())
}

fn box_counts(n: usize, state: &State) -> Vec<usize> {
    let mut counts = vec![0usize; n];
    for &b in state {
        counts[b] += 1;
    }
    counts
}

/// Outcome of the exact checks on an enumerable instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExchangeabilityReport {
    pub states: usize,
    /// `max |Q(a, b) - Q(b, a)|`.
    pub max_asymmetry: f64,
    /// `max_b |sum_a Q(a, b) - P(b)|`.
    pub max_margin_error: f64,
    /// Largest per-state gap between enumerated and analytic up-probabilities.
    pub max_up_error: f64,
    pub max_down_error: f64,
    /// `E Q(W' = W + 1 | state)` and `E Q(W' = W - 1 | state)`.
    pub mean_up: f64,
    pub mean_down: f64,
}

impl ExchangeabilityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_asymmetry <= tol
            && self.max_margin_error <= tol
            && self.max_up_error <= tol
            && self.max_down_error <= tol
    }
}

/// Enumerates the pair measure `Q(a, b) = P(a) K(a, b)` and checks symmetry,
/// the second margin, and the analytic step probabilities state by state.
pub fn verify_exchangeability(model: &PairModel) -> Result<ExchangeabilityReport> {
    let states = model.enumerate_states()?;
    let index: HashMap<&State, usize> = states.iter().enumerate().map(|(i, (s, _))| (s, i)).collect();
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut margin = vec![0.0; states.len()];
    let mut report = ExchangeabilityReport {
        states: states.len(),
        max_asymmetry: 0.0,
        max_margin_error: 0.0,
        max_up_error: 0.0,
        max_down_error: 0.0,
        mean_up: 0.0,
        mean_down: 0.0,
    };
    for (a, (state, p)) in states.iter().enumerate() {
        let w = model.statistic(state);
        let (mut up, mut down) = (0.0, 0.0);
        for (next, q) in model.kernel(state) {
            let b = index[&next];
            *joint.entry((a, b)).or_insert(0.0) += p * q;
            margin[b] += p * q;
            let w2 = model.statistic(&next);
            if w2 == w + 1 {
                up += q;
            } else if w2 + 1 == w {
                down += q;
            }
        }
        let analytic = model.step_probs(&model.stats(state))?;
        report.max_up_error = report.max_up_error.max((analytic.up - up).abs());
        report.max_down_error = report.max_down_error.max((analytic.down - down).abs());
        report.mean_up += p * analytic.up;
        report.mean_down += p * analytic.down;
    }
    for (&(a, b), &q) in &joint {
        let back = joint.get(&(b, a)).copied().unwrap_or(0.0);
        report.max_asymmetry = report.max_asymmetry.max((q - back).abs());
    }
    for (b, (_, p)) in states.iter().enumerate() {
        report.max_margin_error = report.max_margin_error.max((margin[b] - p).abs());
    }
    Ok(report)
}

/// The two error expectations of the exchangeable-pair bound,
/// `E|lambda - c Q(W'=W+1|state)|` and `E|W - c Q(W'=W-1|state)|`, by exact
/// enumeration with `lambda = E W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorTerms {
    pub lambda: f64,
    pub e1: f64,
    pub e2: f64,
}

pub fn exact_error_terms(model: &PairModel) -> Result<ErrorTerms> {
    let states = model.enumerate_states()?;
    let lambda: f64 = states.iter().map(|(s, p)| p * model.statistic(s) as f64).sum();
    let c = model.c();
    let (mut e1, mut e2) = (0.0, 0.0);
    for (state, p) in &states {
        let stats = model.stats(state);
        let step = model.step_probs(&stats)?;
        e1 += p * (lambda - c * step.up).abs();
        e2 += p * (stats.w() as f64 - c * step.down).abs();
    }
    Ok(ErrorTerms { lambda, e1, e2 })
}

/// Monte Carlo check of the analytic step probabilities.
///
/// For i.i.d. states the increments `1{W' = W + 1} - up(state)` are
/// centered with conditional variance `up (1 - up)`; `z_up` is their sum over
/// the square root of the summed variances, and likewise for `z_down`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCheckReport {
    pub trials: usize,
    pub z_up: f64,
    pub z_down: f64,
    pub mean_up: f64,
    pub mean_down: f64,
    pub empirical_up: f64,
    pub empirical_down: f64,
    pub pass: bool,
}

impl StepCheckReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_up.abs().max(self.z_down.abs())
    }
}

pub fn verify_step_probs<R: Rng + ?Sized>(
    model: &PairModel,
    trials: usize,
    rng: &mut R,
) -> Result<StepCheckReport> {
    verify_step_probs_with(model, trials, rng, |s| s)
}

/// As [`verify_step_probs`], with `adjust` applied to the analytic
/// probabilities first. Used to confirm that a wrong formula is detected.
pub fn verify_step_probs_with<R: Rng + ?Sized>(
    model: &PairModel,
    trials: usize,
    rng: &mut R,
    adjust: impl Fn(StepProbs) -> StepProbs,
) -> Result<StepCheckReport> {
    if trials < MIN_MC_SAMPLES {
        return invalid(format!("need at least {MIN_MC_SAMPLES} trials, got {trials}"));
    }
    let mut sums = [0.0f64; 6]; // dev_up, var_up, dev_down, var_down, hits_up, hits_down
    let (mut mean_up, mut mean_down) = (0.0, 0.0);
    for _ in 0..trials {
        let state = model.sample_state(rng);
        let stats = model.stats(&state);
        let step = adjust(model.step_probs(&stats)?);
        let next = model.sample_pair(&state, rng);
        let (w, w2) = (stats.w(), model.statistic(&next));
        let hit_up = f64::from(u8::from(w2 == w + 1));
        let hit_down = f64::from(u8::from(w2 + 1 == w));
        sums[0] += hit_up - step.up;
        sums[1] += step.up * (1.0 - step.up);
        sums[2] += hit_down - step.down;
        sums[3] += step.down * (1.0 - step.down);
        sums[4] += hit_up;
        sums[5] += hit_down;
        mean_up += step.up;
        mean_down += step.down;
    }
    let z = |dev: f64, var: f64| {
        if var > 0.0 {
            dev / var.sqrt()
        } else if dev.abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        }
    };
    let t = trials as f64;
    let z_up = z(sums[0], sums[1]);
    let z_down = z(sums[2], sums[3]);
    Ok(StepCheckReport {
        trials,
        z_up,
        z_down,
        mean_up: mean_up / t,
        mean_down: mean_down / t,
        empirical_up: sums[4] / t,
        empirical_down: sums[5] / t,
        pass: z_up.abs() <= Z_THRESHOLD && z_down.abs() <= Z_THRESHOLD,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Plug-in TV between the empirical law of `W` over `samples` independent
/// states and `target`, with a bootstrap standard error. The plug-in
/// estimate is biased upward at finite sample sizes.
pub fn mc_tv_estimate<R: Rng + ?Sized>(
    model: &PairModel,
    target: &Pmf,
    samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if samples < MIN_MC_SAMPLES {
        return invalid(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}"));
    }
    let mut counts: Vec<u64> = Vec::new();
    for _ in 0..samples {
        let w = model.statistic(&model.sample_state(rng));
        if w >= counts.len() {
            counts.resize(w + 1, 0);
        }
        counts[w] += 1;
    }
    let estimate = tv_distance(&Pmf::from_counts(&counts)?, target);
    let mut replicates = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let resampled = multinomial_resample(&counts, rng);
        replicates.push(tv_distance(&Pmf::from_counts(&resampled)?, target));
    }
    let mean = replicates.iter().sum::<f64>() / replicates.len() as f64;
    let var = replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
        / (replicates.len() - 1) as f64;
    Ok(McEstimate {
        estimate,
        std_error: var.sqrt(),
    })
}

/// Multinomial draw with the histogram's proportions, one binomial per bin.
fn multinomial_resample<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<u64> {
    let mut remaining_n: u64 = counts.iter().sum();
    let mut remaining_mass = remaining_n;
    let mut out = vec![0u64; counts.len()];
    for (j, &c) in counts.iter().enumerate() {
        if remaining_n == 0 || remaining_mass == 0 {
            break;
        }
        let q = (c as f64 / remaining_mass as f64).min(1.0);
        let draw = Binomial::new(remaining_n, q).expect("valid binomial").sample(rng);
        out[j] = draw;
        remaining_n -= draw;
        remaining_mass -= c;
    }
    out
}
