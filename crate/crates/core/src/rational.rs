//! Exact integer and rational helpers for the combinatorial closed forms.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Derangement numbers `D_0..=D_n` from `D_m = (m-1)(D_{m-1} + D_{m-2})`.
pub fn derangements(n: usize) -> Vec<BigUint> {
    let mut d = Vec::with_capacity(n + 1);
    d.push(BigUint::one());
    if n >= 1 {
        d.push(BigUint::zero());
    }
    for m in 2..=n {
        let next = (m - 1) * (&d[m - 1] + &d[m - 2]);
        d.push(next);
    }
    d
}

/// Nearest `f64` to `num / den`, valid far beyond the `f64` range of either
/// operand.
pub fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    let r = BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()));
    to_f64(&r)
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
