//! Certification harness: pairs each problem with its exact (or simulated)
//! law, its Poisson target and its bound, and runs parameter sweeps.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    bound_birthday_pairs, bound_birthday_triples, bound_coupling, bound_coupon_collector,
    bound_generalized_matching, bound_matching, bound_monochromatic, bound_negative_association,
    bound_poisson_binomial, BoundReport, CouplingProblem, DOMINANCE_TOLERANCE,
};
use crate::error::{invalid, Error, Result};
use crate::exact::{
    coloring_pmf, matching_pmf, occupancy_pmf, poisson_binomial_pmf, ColoringSpec, MatchingSpec,
    OccupancySpec, OccupancyStatistic,
};
use crate::multivariate::{
    bound_fixed_point_succession, bound_matching_process, joint_fixed_point_succession_pmf,
    joint_tv, matching_config_law, process_tv, product_poisson_config_law, product_poisson_joint,
};
use crate::pairs::{
    mc_tv_estimate, substream, verify_exchangeability, verify_step_probs, ExchangeabilityReport,
    PairModel, StepCheckReport,
};
use crate::pmf::{tv_distance, Pmf};
use crate::stein::{poisson_pmf, SteinParams};

/// Version of the record layout written by [`CsvSink`] and [`JsonSink`].
pub const RECORD_SCHEMA_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 11] = [
    "problem", "params", "lambda", "exact_tv", "mc_tv", "mc_stderr", "bound", "convention",
    "surrogate", "verdict", "seconds",
];

/// Environment variable overriding the sweep worker count.
pub const THREADS_ENV: &str = "STEIN_POISSON_THREADS";

pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Truncation of the Poisson targets; well below every tolerance in use.
const TARGET_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    PoissonBinomial,
    PoissonBinomialCoupling,
    Matching,
    MatchingCoupling,
    GeneralizedMatching,
    BirthdayPairs,
    BirthdayTriples,
    BirthdayCoupling,
    Coupon,
    CouponCoupling,
    CouponNegativeAssociation,
    Monochromatic,
    JointMatching,
    ProcessMatching,
}

impl ProblemId {
    pub const ALL: [ProblemId; 14] = [
        Self::PoissonBinomial,
        Self::PoissonBinomialCoupling,
        Self::Matching,
        Self::MatchingCoupling,
        Self::GeneralizedMatching,
        Self::BirthdayPairs,
        Self::BirthdayTriples,
        Self::BirthdayCoupling,
        Self::Coupon,
        Self::CouponCoupling,
        Self::CouponNegativeAssociation,
        Self::Monochromatic,
        Self::JointMatching,
        Self::ProcessMatching,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PoissonBinomial => "poisson-binomial",
            Self::PoissonBinomialCoupling => "poisson-binomial-coupling",
            Self::Matching => "matching",
            Self::MatchingCoupling => "matching-coupling",
            Self::GeneralizedMatching => "generalized-matching",
            Self::BirthdayPairs => "birthday-pairs",
            Self::BirthdayTriples => "birthday-triples",
            Self::BirthdayCoupling => "birthday-coupling",
            Self::Coupon => "coupon",
            Self::CouponCoupling => "coupon-coupling",
            Self::CouponNegativeAssociation => "coupon-negative-association",
            Self::Monochromatic => "monochromatic",
            Self::JointMatching => "joint-matching",
            Self::ProcessMatching => "process-matching",
        }
    }

    /// Whether the problem has an exchangeable-pair sampler.
    pub fn has_pair_model(self) -> bool {
        matches!(
            self,
            Self::PoissonBinomial
                | Self::Matching
                | Self::GeneralizedMatching
                | Self::BirthdayPairs
                | Self::BirthdayTriples
                | Self::Coupon
        )
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown problem '{s}'")))
    }
}

/// How the success probabilities of independent trials are given.
#[derive(Debug, Clone, PartialEq)]
pub enum PRecipe {
    List(Vec<f64>),
    /// `p_i = lambda / n`.
    Uniform(f64),
    /// `p_i = 1 / i`.
    Harmonic,
    /// `count` vectors with lengths uniform on `1..=max_len` and entries
    /// uniform on `(0, 1)`.
    Random { count: usize, max_len: usize },
}

impl FromStr for PRecipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse p recipe '{s}'"));
        if s == "harmonic" {
            return Ok(Self::Harmonic);
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            let rest = rest.strip_suffix("/n").unwrap_or(rest);
            return rest.parse().map(Self::Uniform).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("random:") {
            let (count, max_len) = rest.split_once(':').ok_or_else(bad)?;
            return Ok(Self::Random {
                count: count.parse().map_err(|_| bad())?,
                max_len: max_len.parse().map_err(|_| bad())?,
            });
        }
        let values = s
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(Self::List(values))
    }
}

impl PRecipe {
    /// Concrete probability vectors with labels. `n` is needed by the
    /// uniform and harmonic recipes; `seed` drives the random one.
    pub fn expand(&self, n: Option<usize>, seed: u64) -> Result<Vec<PVector>> {
        let need_n = || n.ok_or_else(|| Error::InvalidParameter("this p recipe needs --n".into()));
        Ok(match self {
            Self::List(v) => vec![PVector {
                label: format!("list{}", v.len()),
                values: v.clone(),
            }],
            Self::Uniform(lambda) => {
                let n = need_n()?;
                if n == 0 || *lambda <= 0.0 || *lambda > n as f64 {
                    return invalid(format!("uniform:{lambda} needs 0 < lambda <= n = {n}"));
                }
                vec![PVector {
                    label: format!("uniform:{lambda}"),
                    values: vec![lambda / n as f64; n],
                }]
            }
            Self::Harmonic => {
                let n = need_n()?;
                vec![PVector {
                    label: "harmonic".into(),
                    values: (1..=n).map(|i| 1.0 / i as f64).collect(),
                }]
            }
            Self::Random { count, max_len } => {
                if *count == 0 || *max_len == 0 {
                    return invalid("random recipe needs positive count and length");
                }
                (0..*count)
                    .map(|i| {
                        let mut rng = substream(seed, u64::MAX - i as u64);
                        let len = rng.random_range(1..=*max_len);
                        let values = (0..len).map(|_| rng.random_range(0.001..1.0)).collect();
                        PVector {
                            label: format!("random{i}"),
                            values,
                        }
                    })
                    .collect()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PVector {
    pub label: String,
    pub values: Vec<f64>,
}

/// Parameters of one problem instance. Unused fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub c: Option<usize>,
    pub theta: Option<f64>,
    pub l: Option<Vec<usize>>,
    pub p: Option<PVector>,
}

impl Params {
    fn need_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::InvalidParameter("missing --n".into()))
    }

    fn need_c(&self) -> Result<usize> {
        self.c.ok_or_else(|| Error::InvalidParameter("missing --c".into()))
    }

    fn need_p(&self) -> Result<&[f64]> {
        self.p
            .as_ref()
            .map(|p| p.values.as_slice())
            .ok_or_else(|| Error::InvalidParameter("missing --p".into()))
    }

    fn need_l(&self) -> Result<&[usize]> {
        self.l
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("missing --l".into()))
    }

    /// `k` directly, or from `theta` on the problem's natural scale.
    pub fn resolve_k(&self, problem: ProblemId) -> Result<usize> {
        if let Some(k) = self.k {
            return Ok(k);
        }
        let (Some(theta), Some(n)) = (self.theta, self.n) else {
            return invalid("missing --k (or --theta with --n)");
        };
        let nf = n as f64;
        let k = match problem {
            ProblemId::BirthdayPairs | ProblemId::BirthdayCoupling => theta * nf.sqrt(),
            ProblemId::BirthdayTriples => theta * nf.powf(2.0 / 3.0),
            ProblemId::Coupon | ProblemId::CouponCoupling | ProblemId::CouponNegativeAssociation => {
                nf * nf.ln() + theta * nf
            }
            _ => return invalid(format!("--theta has no meaning for {problem}")),
        };
        if !(k >= 0.0) {
            return invalid(format!("theta = {theta} gives a negative number of balls"));
        }
        Ok(k.round() as usize)
    }

    fn describe(&self, problem: ProblemId) -> String {
        let mut parts = Vec::new();
        if let Some(p) = &self.p {
            parts.push(format!("p={}", p.label));
        }
        if let Some(l) = &self.l {
            let s: Vec<String> = l.iter().map(|x| x.to_string()).collect();
            parts.push(format!("l={}", s.join(",")));
        }
        if let Some(n) = self.n {
            parts.push(format!("n={n}"));
        }
        if let Ok(k) = self.resolve_k(problem) {
            if self.k.is_some() || self.theta.is_some() {
                parts.push(format!("k={k}"));
            }
        }
        if let Some(theta) = self.theta {
            parts.push(format!("theta={theta}"));
        }
        if let Some(c) = self.c {
            parts.push(format!("c={c}"));
        }
        parts.join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
        })
    }
}

/// One certified instance. Serializes to exactly [`CSV_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertRecord {
    pub problem: String,
    pub params: String,
    pub lambda: f64,
    pub exact_tv: Option<f64>,
    pub mc_tv: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub bound: f64,
    pub convention: String,
    pub surrogate: bool,
    pub verdict: Verdict,
    pub seconds: f64,
}

/// A record together with the full bound report behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub record: CertRecord,
    pub bound: BoundReport,
}

fn poisson_target(lambda: f64) -> Result<Pmf> {
    if lambda == 0.0 {
        return Ok(Pmf::point_mass(0));
    }
    Ok(poisson_pmf(&SteinParams::new(lambda, TARGET_EPS)?))
}

fn binom_f(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn occupancy(n: usize, k: usize, statistic: OccupancyStatistic) -> Result<Pmf> {
    occupancy_pmf(&OccupancySpec::new(n, k, statistic)?)
}

/// The bound a problem is certified against.
pub fn bound_for(problem: ProblemId, params: &Params) -> Result<BoundReport> {
    match problem {
        ProblemId::PoissonBinomial => bound_poisson_binomial(params.need_p()?),
        ProblemId::PoissonBinomialCoupling => {
            bound_coupling(&CouplingProblem::PoissonBinomial(params.need_p()?.to_vec()))
        }
        ProblemId::Matching => bound_matching(params.need_n()?),
        ProblemId::MatchingCoupling => bound_coupling(&CouplingProblem::Matching(params.need_n()?)),
        ProblemId::GeneralizedMatching => bound_generalized_matching(params.need_l()?),
        ProblemId::BirthdayPairs => bound_birthday_pairs(params.need_n()?, params.resolve_k(problem)?),
        ProblemId::BirthdayTriples => {
            bound_birthday_triples(params.need_n()?, params.resolve_k(problem)?)
        }
        ProblemId::BirthdayCoupling => bound_coupling(&CouplingProblem::Birthday {
            n: params.need_n()?,
            k: params.resolve_k(problem)?,
        }),
        ProblemId::Coupon => bound_coupon_collector(params.need_n()?, params.resolve_k(problem)?),
        ProblemId::CouponCoupling => bound_coupling(&CouplingProblem::Coupon {
            n: params.need_n()?,
            k: params.resolve_k(problem)?,
        }),
        ProblemId::CouponNegativeAssociation => {
            let law = occupancy(params.need_n()?, params.resolve_k(problem)?, OccupancyStatistic::Empty)?;
            bound_negative_association(law.mean(), law.variance())
        }
        ProblemId::Monochromatic => {
            bound_monochromatic(params.need_n()?, params.resolve_k(problem)?, params.need_c()?)
        }
        ProblemId::JointMatching => bound_fixed_point_succession(params.need_n()?),
        ProblemId::ProcessMatching => bound_matching_process(params.need_n()?),
    }
}

/// Exact law of the statistic and its Poisson target.
pub fn exact_law_and_target(problem: ProblemId, params: &Params) -> Result<(Pmf, Pmf)> {
    let (law, lambda) = match problem {
        ProblemId::PoissonBinomial | ProblemId::PoissonBinomialCoupling => {
            let p = params.need_p()?;
            (poisson_binomial_pmf(p)?, p.iter().sum())
        }
        ProblemId::Matching | ProblemId::MatchingCoupling => {
            (matching_pmf(&MatchingSpec::plain(params.need_n()?)?)?, 1.0)
        }
        ProblemId::GeneralizedMatching => {
            let spec = MatchingSpec::with_multiplicities(params.need_l()?.to_vec())?;
            let lambda = spec.lambda();
            (matching_pmf(&spec)?, lambda)
        }
        ProblemId::BirthdayPairs => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let law = occupancy(n, k, OccupancyStatistic::AtLeastTwo)?;
            (law, (k * k) as f64 / (2.0 * n as f64))
        }
        ProblemId::BirthdayTriples => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let law = occupancy(n, k, OccupancyStatistic::Matches(3))?;
            (law, binom_f(k, 3) / (n * n) as f64)
        }
        ProblemId::BirthdayCoupling => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let law = occupancy(n, k, OccupancyStatistic::Matches(2))?;
            (law, binom_f(k, 2) / n as f64)
        }
        ProblemId::Coupon => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let nf = n as f64;
            let theta = (k as f64 - nf * nf.ln()) / nf;
            (occupancy(n, k, OccupancyStatistic::Empty)?, (-theta).exp())
        }
        ProblemId::CouponCoupling => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let lambda = n as f64 * (1.0 - 1.0 / n as f64).powf(k as f64);
            (occupancy(n, k, OccupancyStatistic::Empty)?, lambda)
        }
        ProblemId::CouponNegativeAssociation => {
            let law = occupancy(params.need_n()?, params.resolve_k(problem)?, OccupancyStatistic::Empty)?;
            let lambda = law.mean();
            (law, lambda)
        }
        ProblemId::Monochromatic => {
            let spec = ColoringSpec::new(params.need_n()?, params.resolve_k(problem)?, params.need_c()?)?;
            let lambda = spec.lambda();
            (coloring_pmf(&spec)?, lambda)
        }
        ProblemId::JointMatching | ProblemId::ProcessMatching => {
            return invalid(format!("{problem} is multivariate; use exact_tv"))
        }
    };
    Ok((law, poisson_target(lambda)?))
}

/// Exact distance between the law of the problem's statistic (or vector, or
/// configuration) and its Poisson reference.
pub fn exact_tv(problem: ProblemId, params: &Params) -> Result<f64> {
    match problem {
        ProblemId::JointMatching => {
            let joint = joint_fixed_point_succession_pmf(params.need_n()?)?;
            let reference = product_poisson_joint(&[1.0, 1.0], TARGET_EPS)?;
            joint_tv(&joint, &reference)
        }
        ProblemId::ProcessMatching => {
            let n = params.need_n()?;
            let law = matching_config_law(n)?;
            let reference = product_poisson_config_law(&vec![1.0 / n as f64; n])?;
            process_tv(&law, &reference)
        }
        _ => {
            let (law, target) = exact_law_and_target(problem, params)?;
            Ok(tv_distance(&law, &target))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn record(
    problem: ProblemId,
    params: &Params,
    bound: &BoundReport,
    lambda: f64,
    exact: Option<f64>,
    mc: Option<(f64, f64)>,
    verdict: Verdict,
    started: Instant,
) -> CertRecord {
    CertRecord {
        problem: problem.to_string(),
        params: params.describe(problem),
        lambda,
        exact_tv: exact,
        mc_tv: mc.map(|m| m.0),
        mc_stderr: mc.map(|m| m.1),
        bound: bound.value,
        convention: bound.convention.to_string(),
        surrogate: bound.surrogate,
        verdict,
        seconds: (started.elapsed().as_secs_f64() * 1e6).round() / 1e6,
    }
}

/// Exact path: pass iff `bound >= exact_tv - 1e-12`.
pub fn evaluate_exact(problem: ProblemId, params: &Params) -> Result<Evaluation> {
    let started = Instant::now();
    let bound = bound_for(problem, params)?;
    let tv = exact_tv(problem, params)?;
    let verdict = if bound.value >= tv - DOMINANCE_TOLERANCE {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let record = record(problem, params, &bound, bound.lambda, Some(tv), None, verdict, started);
    Ok(Evaluation { record, bound })
}

/// Exchangeable-pair model of a problem, for simulation and pair checks.
pub fn pair_model(problem: ProblemId, params: &Params) -> Result<PairModel> {
    match problem {
        ProblemId::PoissonBinomial => PairModel::poisson_binomial(params.need_p()?.to_vec()),
        ProblemId::Matching => PairModel::matching(MatchingSpec::plain(params.need_n()?)?),
        ProblemId::GeneralizedMatching => {
            PairModel::matching(MatchingSpec::with_multiplicities(params.need_l()?.to_vec())?)
        }
        ProblemId::BirthdayPairs => PairModel::birthday_pairs(params.need_n()?, params.resolve_k(problem)?),
        ProblemId::BirthdayTriples => {
            PairModel::birthday_triples(params.need_n()?, params.resolve_k(problem)?)
        }
        ProblemId::Coupon => PairModel::coupon(params.need_n()?, params.resolve_k(problem)?),
        _ => invalid(format!("{problem} has no exchangeable-pair sampler")),
    }
}

fn target_for_mc(problem: ProblemId, params: &Params) -> Result<Pmf> {
    let lambda = match problem {
        ProblemId::PoissonBinomial => params.need_p()?.iter().sum(),
        ProblemId::Matching => 1.0,
        ProblemId::GeneralizedMatching => MatchingSpec::with_multiplicities(params.need_l()?.to_vec())?.lambda(),
        ProblemId::BirthdayPairs => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            (k * k) as f64 / (2.0 * n as f64)
        }
        ProblemId::BirthdayTriples => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            binom_f(k, 3) / (n * n) as f64
        }
        ProblemId::Coupon => {
            let (n, k) = (params.need_n()?, params.resolve_k(problem)?);
            let nf = n as f64;
            (-(k as f64 - nf * nf.ln()) / nf).exp()
        }
        _ => return invalid(format!("{problem} has no exchangeable-pair sampler")),
    };
    poisson_target(lambda)
}

/// Monte Carlo path: pass iff `bound >= mc_tv - 3 stderr`.
pub fn evaluate_mc<R: Rng + ?Sized>(
    problem: ProblemId,
    params: &Params,
    samples: usize,
    rng: &mut R,
) -> Result<Evaluation> {
    let started = Instant::now();
    let bound = bound_for(problem, params)?;
    let model = pair_model(problem, params)?;
    let target = target_for_mc(problem, params)?;
    let est = mc_tv_estimate(&model, &target, samples, rng)?;
    let verdict = if bound.value >= est.estimate - 3.0 * est.std_error {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let record = record(
        problem,
        params,
        &bound,
        bound.lambda,
        None,
        Some((est.estimate, est.std_error)),
        verdict,
        started,
    );
    Ok(Evaluation { record, bound })
}

/// Result of the pair checks: exact enumeration when requested, otherwise
/// simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum PairVerification {
    Exact(ExchangeabilityReport),
    MonteCarlo(StepCheckReport),
}

impl PairVerification {
    pub fn passes(&self) -> bool {
        match self {
            Self::Exact(r) => r.passes(1e-12),
            Self::MonteCarlo(r) => r.pass,
        }
    }
}

pub fn verify_pair(
    problem: ProblemId,
    params: &Params,
    trials: usize,
    seed: u64,
    exact: bool,
) -> Result<PairVerification> {
    let model = pair_model(problem, params)?;
    if exact {
        return verify_exchangeability(&model).map(PairVerification::Exact);
    }
    let mut rng = substream(seed, 0);
    verify_step_probs(&model, trials, &mut rng).map(PairVerification::MonteCarlo)
}

/// Parameter lists; the sweep runs over their Cartesian product, with empty
/// lists meaning "not used".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub c: Vec<usize>,
    pub theta: Vec<f64>,
    pub l: Vec<Vec<usize>>,
    pub p: Vec<PRecipe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => invalid(format!("unknown format '{s}', expected csv or json")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub problem: ProblemId,
    pub grid: Grid,
    pub seed: u64,
    pub format: OutputFormat,
    /// Simulate with this many samples instead of computing exact laws.
    pub mc_samples: Option<usize>,
}

fn axis<T: Clone>(xs: &[T]) -> Vec<Option<T>> {
    if xs.is_empty() {
        vec![None]
    } else {
        xs.iter().cloned().map(Some).collect()
    }
}

impl SweepSpec {
    /// Every grid point, in a fixed order. Validates each point's bound
    /// parameters before anything expensive runs.
    pub fn expand(&self) -> Result<Vec<Params>> {
        let g = &self.grid;
        if g.n.is_empty() && g.k.is_empty() && g.c.is_empty() && g.theta.is_empty() && g.l.is_empty() && g.p.is_empty() {
            return invalid("empty parameter grid");
        }
        let size = [g.n.len(), g.k.len(), g.c.len(), g.theta.len(), g.l.len(), g.p.len()]
            .iter()
            .map(|&x| x.max(1) as f64)
            .product::<f64>();
        if size > MAX_GRID_POINTS as f64 {
            return Err(Error::OverCap {
                what: "sweep grid points".into(),
                estimate: size,
                cap: MAX_GRID_POINTS as f64,
            });
        }
        let mut out = Vec::new();
        for n in axis(&g.n) {
            let mut vectors = vec![None];
            if !g.p.is_empty() {
                vectors.clear();
                for recipe in &g.p {
                    vectors.extend(recipe.expand(n, self.seed)?.into_iter().map(Some));
                }
            }
            for p in &vectors {
                for l in axis(&g.l) {
                    for k in axis(&g.k) {
                        for c in axis(&g.c) {
                            for theta in axis(&g.theta) {
                                out.push(Params {
                                    n,
                                    k,
                                    c,
                                    theta,
                                    l: l.clone(),
                                    p: p.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        if out.len() > MAX_GRID_POINTS {
            return Err(Error::OverCap {
                what: "sweep grid points".into(),
                estimate: out.len() as f64,
                cap: MAX_GRID_POINTS as f64,
            });
        }
        for params in &out {
            bound_for(self.problem, params)?;
        }
        Ok(out)
    }
}

/// Destination for sweep records.
pub trait RecordSink {
    fn write(&mut self, record: &CertRecord) -> Result<()>;
    fn flush(&mut self) -> Result<()>;
}

pub struct CsvSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(out),
        }
    }
}

fn io_error(e: impl fmt::Display) -> Error {
    Error::Output(e.to_string())
}

impl<W: Write> RecordSink for CsvSink<W> {
    fn write(&mut self, record: &CertRecord) -> Result<()> {
        self.inner.serialize(record).map_err(io_error)
    }

    fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(io_error)
    }
}

/// One JSON object per line, with the same fields as the CSV columns.
pub struct JsonSink<W: Write> {
    inner: W,
}

impl<W: Write> JsonSink<W> {
    pub fn new(out: W) -> Self {
        Self { inner: out }
    }
}

impl<W: Write> RecordSink for JsonSink<W> {
    fn write(&mut self, record: &CertRecord) -> Result<()> {
        serde_json::to_writer(&mut self.inner, record).map_err(io_error)?;
        self.inner.write_all(b"\n").map_err(io_error)
    }

    fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(io_error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSummary {
    pub records: usize,
    pub failures: usize,
}

/// Worker count: `STEIN_POISSON_THREADS` if set to a positive integer,
/// otherwise rayon's default.
pub fn worker_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs the grid in parallel batches and emits records in grid order,
/// flushing after every batch so an interrupted run leaves a valid prefix.
pub fn run_sweep(spec: &SweepSpec, sink: &mut dyn RecordSink) -> Result<SweepSummary> {
    let points = spec.expand()?;
    let threads = worker_count();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let mut summary = SweepSummary {
        records: 0,
        failures: 0,
    };
    let batch = threads * 4;
    for (chunk_no, chunk) in points.chunks(batch).enumerate() {
        let base = chunk_no * batch;
        let results: Vec<Result<Evaluation>> = pool.install(|| {
            chunk
                .par_iter()
                .enumerate()
                .map(|(i, params)| match spec.mc_samples {
                    Some(samples) => {
                        let mut rng = substream(spec.seed, (base + i) as u64);
                        evaluate_mc(spec.problem, params, samples, &mut rng)
                    }
                    None => evaluate_exact(spec.problem, params),
                })
                .collect()
        });
        for result in results {
            let eval = result?;
            if eval.record.verdict == Verdict::Fail {
                summary.failures += 1;
            }
            summary.records += 1;
            sink.write(&eval.record)?;
        }
        sink.flush()?;
    }
    Ok(summary)
}
