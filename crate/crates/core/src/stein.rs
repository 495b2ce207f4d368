//! The univariate Stein machinery for a Poisson target.
//!
//! For `Poi(lambda)` the characterizing operator is
//! `T f(j) = lambda f(j+1) - j f(j)`; it has zero mean under the Poisson law
//! and its pseudo-inverse `U` solves `T U f = f - E f`. Bounds on `U` turn
//! operator-level discrepancies into total-variation bounds.

use serde::Serialize;

use crate::bounds::Convention;
use crate::error::{invalid, Result};
use crate::pairs::PairModel;
use crate::pmf::Pmf;

/// Poisson rate plus the tail mass tolerated when truncating the reference law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinParams {
    lambda: f64,
    truncation_eps: f64,
}

impl SteinParams {
    pub const DEFAULT_EPS: f64 = 1e-14;

    pub fn new(lambda: f64, truncation_eps: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return invalid(format!("poisson rate must be positive, got {lambda}"));
        }
        if !(truncation_eps > 0.0 && truncation_eps <= 1e-3) {
            return invalid(format!(
                "truncation eps must lie in (0, 1e-3], got {truncation_eps}"
            ));
        }
        Ok(Self {
            lambda,
            truncation_eps,
        })
    }

    pub fn with_lambda(lambda: f64) -> Result<Self> {
        Self::new(lambda, Self::DEFAULT_EPS)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn truncation_eps(&self) -> f64 {
        self.truncation_eps
    }
}

/// A real function on `0..len`, evaluated past the end as its last value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnTable {
    values: Vec<f64>,
}

impl FnTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("function table is empty");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("function table has a non-finite entry");
        }
        Ok(Self { values })
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Result<Self> {
        Self::new((0..len).map(f).collect())
    }

    /// Indicator of the set `{j : member(j)}` on `0..len`.
    pub fn indicator(len: usize, mut member: impl FnMut(usize) -> bool) -> Result<Self> {
        Self::from_fn(len, |j| if member(j) { 1.0 } else { 0.0 })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest index at which the table is a genuine argument; the slot after
    /// it exists so that `f(j+1)` is defined.
    pub fn support_max(&self) -> Option<usize> {
        self.values.len().checked_sub(2)
    }

    /// `f(j)` with constant extension beyond the table.
    pub fn at(&self, j: usize) -> f64 {
        self.values[j.min(self.values.len() - 1)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Table extended (constantly) to at least `len` entries.
    pub fn extended(&self, len: usize) -> FnTable {
        let mut values = self.values.clone();
        let last = *values.last().expect("nonempty");
        values.resize(len.max(values.len()), last);
        FnTable { values }
    }
}

/// Unnormalized Poisson terms `P(X = j)` for `j = 0..`, generated in log
/// space until they are negligible next to `eps`, and at least to `min_len`.
fn poisson_terms(lambda: f64, eps: f64, min_len: usize) -> Vec<f64> {
    let ln_lambda = lambda.ln();
    let ln_stop = eps.ln() - 60.0;
    let mut terms = Vec::new();
    let mut log_term = -lambda;
    let mut j = 0usize;
    loop {
        terms.push(log_term.exp());
        j += 1;
        if terms.len() >= min_len && (j as f64) > lambda && log_term < ln_stop {
            break;
        }
        log_term += ln_lambda - (j as f64).ln();
    }
    terms
}

/// `Poi(lambda)` truncated at the smallest `N` whose upper tail
/// `P(X > N)` is at most `truncation_eps`. The tail is summed explicitly
/// from the far end, so it is exact to double precision.
pub fn poisson_pmf(params: &SteinParams) -> Pmf {
    let terms = poisson_terms(params.lambda, params.truncation_eps, 1);
    let mut suffix = vec![0.0; terms.len() + 1];
    for j in (0..terms.len()).rev() {
        suffix[j] = suffix[j + 1] + terms[j];
    }
    let cut = (0..terms.len())
        .find(|&n| suffix[n + 1] <= params.truncation_eps)
        .unwrap_or(terms.len() - 1);
    let mass = terms[..=cut].to_vec();
    let tail = suffix[cut + 1];
    Pmf::new(mass, tail).expect("poisson law is normalized")
}

/// Reference Poisson weights on `0..=m` with the expectation of `f` against
/// them, where `m` covers both the truncation point and the table. The
/// weights are renormalized on that range, so that `sum_k w_k (f_k - E f)`
/// vanishes exactly in exact arithmetic.
struct Centered {
    centered: Vec<f64>,
    mean: f64,
}

fn center(f: &FnTable, params: &SteinParams) -> Centered {
    let truncated = poisson_pmf(params);
    let m = truncated.support_max().max(f.len() - 1);
    let weights = poisson_terms(params.lambda, params.truncation_eps, m + 1);
    let weights = &weights[..=m];
    let total: f64 = weights.iter().sum();
    // Offsetting by f(0) makes constants exact.
    let base = f.at(0);
    let shift: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * (f.at(k) - base))
        .sum::<f64>()
        / total;
    let mean = base + shift;
    let centered = (0..=m).map(|k| (f.at(k) - base) - shift).collect();
    Centered { centered, mean }
}

/// `E f` under the (renormalized, truncated) Poisson reference law used by
/// [`stein_inverse`].
pub fn poisson_expectation(f: &FnTable, params: &SteinParams) -> f64 {
    center(f, params).mean
}

/// Applies the characterizing operator: `j -> lambda f(j+1) - j f(j)` for
/// `j = 0..=support_max`.
pub fn stein_apply(f: &FnTable, params: &SteinParams) -> Result<FnTable> {
    if f.support_max().is_none() {
        return invalid("stein operator needs f defined one slot past its support");
    }
    let lambda = params.lambda;
    let v = f.values();
    FnTable::new(
        (0..v.len() - 1)
            .map(|j| lambda * v[j + 1] - j as f64 * v[j])
            .collect(),
    )
}

/// Pseudo-inverse of the characterizing operator:
/// `U f(j) = ((j-1)!/lambda^j) sum_{k<j} (lambda^k/k!) (f(k) - E f)`,
/// with `U f(0) = 0`.
///
/// Evaluated without factorials through the recurrence
/// `lambda U(j+1) = j U(j) + f(j) - E f`. The recurrence is contracting
/// forward only below the Poisson mode, so it is run forward from `U(0) = 0`
/// up to `floor(lambda)` and backward from `U(m+1) = 0` above it, `m` being
/// the end of the reference support. The returned table covers `0..=m+1`,
/// where `m >= f.len() - 1`.
pub fn stein_inverse(f: &FnTable, params: &SteinParams) -> Result<FnTable> {
    if f.is_empty() {
        return invalid("cannot invert an empty function table");
    }
    let lambda = params.lambda;
    let Centered { centered: g, .. } = center(f, params);
    let m = g.len() - 1;
    let mut u = vec![0.0; m + 2];
    let split = (lambda.floor() as usize).min(m);
    for j in 0..split {
        u[j + 1] = (j as f64 * u[j] + g[j]) / lambda;
    }
    for j in (split + 1..=m).rev() {
        u[j] = (lambda * u[j + 1] - g[j]) / j as f64;
    }
    FnTable::new(u)
}

/// The two classical bounds on the pseudo-inverse, valid for `0 <= f <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseConstants {
    /// `sup_j |U f(j)| <= min(1, 1.4 lambda^{-1/2})`.
    pub sup_bound: f64,
    /// `sup_j |U f(j+1) - U f(j)| <= (1 - e^{-lambda}) / lambda`.
    pub diff_bound: f64,
}

impl InverseConstants {
    /// The sup bound in either bookkeeping convention: the set-distance form
    /// is the bound itself, the tv form carries the extra factor 1/2
    /// (so it reads `0.7 lambda^{-1/2}` for large `lambda`).
    pub fn sup_bound_in(&self, convention: Convention) -> f64 {
        match convention {
            Convention::SetDistance => self.sup_bound,
            Convention::Tv => 0.5 * self.sup_bound,
        }
    }
}

pub fn inverse_constants(params: &SteinParams) -> InverseConstants {
    let lambda = params.lambda;
    InverseConstants {
        sup_bound: (1.4 / lambda.sqrt()).min(1.0),
        diff_bound: -(-lambda).exp_m1() / lambda,
    }
}

/// Both sides of the exchangeable-pair identity
/// `E g(W) - E_o g = E[(beta T_o - T alpha) U g]`, computed by exact
/// summation over the state space and the pair kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentityCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Evaluates the Stein identity for `g` on an enumerable pair model, with the
/// localized antisymmetric map
/// `alpha f(w, w') = c f(W') 1{W = W' - 1} - c f(W) 1{W' = W - 1}`.
///
/// The one-step probabilities `Q(W' = W +- 1 | w)` come from enumerating the
/// pair kernel, not from the model's analytic formulas, and `lambda` is the
/// exact mean of `W`.
pub fn stein_identity_oracle(
    model: &PairModel,
    c: f64,
    g: &FnTable,
    truncation_eps: f64,
) -> Result<IdentityCheck> {
    if !(c.is_finite() && c > 0.0) {
        return invalid(format!("scaling constant c must be positive, got {c}"));
    }
    let states = model.enumerate_states()?;
    let lambda: f64 = states
        .iter()
        .map(|(s, p)| p * model.statistic(s) as f64)
        .sum();
    let params = SteinParams::new(lambda, truncation_eps)?;
    let w_max = states
        .iter()
        .map(|(s, _)| model.statistic(s))
        .max()
        .unwrap_or(0);
    let g = g.extended(w_max + 2);
    let eo_g = poisson_expectation(&g, &params);
    let u = stein_inverse(&g, &params)?;

    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (state, p) in &states {
        let w = model.statistic(state);
        let (up, down) = model.exact_step_probs(state);
        let (u_w, u_next) = (u.at(w), u.at(w + 1));
        lhs += p * (g.at(w) - eo_g);
        let beta_t = lambda * u_next - w as f64 * u_w;
        let t_alpha = c * u_next * up - c * u_w * down;
        rhs += p * (beta_t - t_alpha);
    }
    Ok(IdentityCheck { lambda, lhs, rhs })
}
