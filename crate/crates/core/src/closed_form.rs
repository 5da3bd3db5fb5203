//! Exact closed forms for the broken stick/brick and pick-up sticks/bricks
//! problems.
//!
//! | problem        | probability of a k-gon               |
//! |----------------|--------------------------------------|
//! | broken stick   | `1 - k / 2^(k-1)`                    |
//! | broken brick   | `1 - k·C(⌊n/2⌋, k-1) / C(n-1, k-1)`  |
//! | pick-up bricks | `1 - k·C(n+1, k) / n^k`              |
//! | pick-up sticks | `1 - 1 / (k-1)!`                     |
//!
//! The discrete (brick) values tend to the continuous (stick) ones as
//! `n → ∞`; [`convergence_gap`] measures how far off a given `n` is.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Binomial coefficient `C(m, j)`, zero when `j > m`.
pub fn binomial(m: u64, j: u64) -> BigUint {
    if j > m {
        return BigUint::zero();
    }
    let j = j.min(m - j);
    // Each partial product C(m - j + i, i) is an integer, so the division is exact.
    (1..=j).fold(BigUint::one(), |acc, i| acc * (m - j + i) / i)
}

pub fn factorial(m: u64) -> BigUint {
    (1..=m).fold(BigUint::one(), |acc, i| acc * i)
}

/// A probability held as a reduced fraction of big integers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactProb(BigRational);

impl ExactProb {
    /// Panics on a zero denominator.
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        ExactProb(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_ratio(ratio: BigRational) -> Self {
        ExactProb(ratio)
    }

    pub fn from_counts(good: &BigUint, total: &BigUint) -> Self {
        ExactProb::new(BigInt::from(good.clone()), BigInt::from(total.clone()))
    }

    pub fn one() -> Self {
        ExactProb(BigRational::one())
    }

    /// `1 - bad / total`.
    fn complement_of(bad: BigUint, total: BigUint) -> Self {
        ExactProb(BigRational::one() - BigRational::new(bad.into(), total.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_probability(&self) -> bool {
        !self.0.is_negative() && self.0 <= BigRational::one()
    }
}

/// Always `numer/denom`, also for whole numbers (`1/1`).
impl fmt::Display for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Brick length (or length bound) `n` and piece count `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemParams {
    pub n: u64,
    pub k: u64,
}

impl ProblemParams {
    pub fn new(n: u64, k: u64) -> Self {
        ProblemParams { n, k }
    }

    /// Broken brick: `n >= k >= 3`.
    pub fn check_broken(self) -> Result<Self> {
        check_k(self.k)?;
        if self.n < self.k {
            return Err(Error::params(format!(
                "broken brick needs n >= k, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        Ok(self)
    }

    /// Pick-up bricks: `n >= 1`, `k >= 3`.
    pub fn check_pickup(self) -> Result<Self> {
        check_k(self.k)?;
        if self.n < 1 {
            return Err(Error::params("pick-up bricks needs n >= 1"));
        }
        Ok(self)
    }
}

fn check_k(k: u64) -> Result<()> {
    if k < 3 {
        return Err(Error::params(format!(
            "need at least 3 pieces, got k = {k}"
        )));
    }
    Ok(())
}

/// `1 - k / 2^(k-1)`.
pub fn broken_stick_prob(k: u64) -> Result<ExactProb> {
    check_k(k)?;
    let k_exp = usize::try_from(k - 1).map_err(|_| Error::params("k is too large"))?;
    let half_powers = BigUint::one() << k_exp;
    Ok(ExactProb::complement_of(BigUint::from(k), half_powers))
}

/// `1 - k·C(⌊n/2⌋, k-1) / C(n-1, k-1)`.
pub fn broken_brick_prob(params: ProblemParams) -> Result<ExactProb> {
    let ProblemParams { n, k } = params.check_broken()?;
    let bad = binomial(n / 2, k - 1) * k;
    Ok(ExactProb::complement_of(bad, binomial(n - 1, k - 1)))
}

/// `1 - k·C(n+1, k) / n^k`.
pub fn pickup_bricks_prob(params: ProblemParams) -> Result<ExactProb> {
    let ProblemParams { n, k } = params.check_pickup()?;
    let k_exp = u32::try_from(k).map_err(|_| Error::params("k is too large"))?;
    let bad = binomial(n + 1, k) * k;
    Ok(ExactProb::complement_of(bad, BigUint::from(n).pow(k_exp)))
}

/// `1 - 1 / (k-1)!`.
pub fn pickup_sticks_prob(k: u64) -> Result<ExactProb> {
    check_k(k)?;
    Ok(ExactProb::complement_of(BigUint::one(), factorial(k - 1)))
}

/// Which discrete problem to compare with its continuous limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Broken brick → broken stick.
    Broken,
    /// Pick-up bricks → pick-up sticks.
    Pickup,
}

impl Family {
    pub fn discrete(self, params: ProblemParams) -> Result<ExactProb> {
        match self {
            Family::Broken => broken_brick_prob(params),
            Family::Pickup => pickup_bricks_prob(params),
        }
    }

    pub fn continuous(self, k: u64) -> Result<ExactProb> {
        match self {
            Family::Broken => broken_stick_prob(k),
            Family::Pickup => pickup_sticks_prob(k),
        }
    }
}

/// `|discrete(n, k) - limit(k)|` as an exact rational.
pub fn convergence_gap_exact(params: ProblemParams, family: Family) -> Result<BigRational> {
    let discrete = family.discrete(params)?;
    let limit = family.continuous(params.k)?;
    Ok((discrete.into_ratio() - limit.into_ratio()).abs())
}

/// [`convergence_gap_exact`] rounded to `f64`.
pub fn convergence_gap(params: ProblemParams, family: Family) -> Result<f64> {
    Ok(convergence_gap_exact(params, family)?
        .to_f64()
        .unwrap_or(f64::NAN))
}
