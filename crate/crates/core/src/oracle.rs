//! Brute-force ground truth.
//!
//! Every discrete sample space is enumerated outcome by outcome and each
//! outcome is run through the polygon predicate. Nothing here uses the closed
//! forms, so agreement with [`crate::closed_form`] is an independent check.
//!
//! Work is split across rayon workers by the first coordinate (or by the
//! tuple of stick lengths for `Stick(λ)`); partial counts are integers or
//! exact rationals, so the combined result does not depend on scheduling.

use std::env;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::closed_form::{binomial, ExactProb, ProblemParams};
use crate::error::{Error, Result};

/// Environment variable that overrides [`Budget::DEFAULT`].
pub const BUDGET_ENV: &str = "POLYGON_ODDS_BUDGET";

/// Cap on the number of outcomes an oracle may enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Budget {
    pub const DEFAULT: Budget = Budget(100_000_000);

    /// [`Budget::DEFAULT`], unless `POLYGON_ODDS_BUDGET` holds an integer.
    pub fn from_env() -> Result<Self> {
        match env::var(BUDGET_ENV) {
            Ok(raw) => raw
                .trim()
                .parse()
                .map(Budget)
                .map_err(|_| Error::params(format!("{BUDGET_ENV} is not an integer: {raw:?}"))),
            Err(_) => Ok(Budget::DEFAULT),
        }
    }

    fn admit(self, required: BigUint) -> Result<u64> {
        match required.to_u64() {
            Some(r) if r <= self.0 => Ok(r),
            _ => Err(Error::BudgetExceeded {
                required,
                budget: self.0,
            }),
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::DEFAULT
    }
}

/// Integer partition `λ₁ ≥ λ₂ ≥ … ≥ λ_m ≥ 1`: stick `i` is broken into
/// `λᵢ` pieces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    /// Rejects empty input, zero parts and increasing steps.
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::params("partition has no parts"));
        }
        if parts.contains(&0) {
            return Err(Error::params("partition parts must be at least 1"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::params(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        Ok(Partition { parts })
    }

    /// Sorts descending first. Returns whether the input needed sorting.
    pub fn sorted(mut parts: Vec<u64>) -> Result<(Self, bool)> {
        let was_sorted = parts.windows(2).all(|w| w[0] >= w[1]);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok((Partition::new(parts)?, !was_sorted))
    }

    /// The broken stick `(k)`.
    pub fn single(k: u64) -> Result<Self> {
        Partition::new(vec![k])
    }

    /// Pick-up sticks `(1, …, 1)`.
    pub fn ones(k: u64) -> Result<Self> {
        Partition::new(vec![1; k as usize])
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of sticks `m`.
    pub fn sticks(&self) -> usize {
        self.parts.len()
    }

    /// Number of pieces `k = Σλᵢ`.
    pub fn pieces(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn largest(&self) -> u64 {
        self.parts[0]
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Interior cut positions `1 ≤ a₁ < … < a_{k-1} ≤ n-1` of a brick of length
/// `n`; the partial sums of a composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutSet {
    n: u64,
    positions: Vec<u64>,
}

impl CutSet {
    pub fn new(n: u64, positions: Vec<u64>) -> Result<Self> {
        let in_range = positions.iter().all(|&a| a >= 1 && a < n);
        let increasing = positions.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::params(format!(
                "cuts must be strictly increasing within 1..={}, got {positions:?}",
                n.saturating_sub(1)
            )));
        }
        Ok(CutSet { n, positions })
    }

    pub fn from_composition(parts: &[u64]) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::params("composition parts must be positive"));
        }
        let mut acc = 0;
        let mut positions: Vec<u64> = parts
            .iter()
            .map(|&x| {
                acc += x;
                acc
            })
            .collect();
        let n = positions.pop().unwrap_or(0);
        Ok(CutSet { n, positions })
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn to_composition(&self) -> Vec<u64> {
        let mut prev = 0;
        self.positions
            .iter()
            .chain(std::iter::once(&self.n))
            .map(|&a| {
                let x = a - prev;
                prev = a;
                x
            })
            .collect()
    }
}

/// Outcome of an exhaustive enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCount {
    /// Number of enumerated outcomes.
    pub total: BigUint,
    /// Number of those outcomes that form a polygon.
    pub good: BigUint,
    /// Probability of a polygon. Equals `good / total` for uniform sample
    /// spaces; for weighted ones it is the weighted sum.
    pub probability: ExactProb,
    /// Outcomes in which piece `i` is at least half the total, per index.
    /// Empty when the pieces are not exchangeable.
    pub bad_by_index: Vec<BigUint>,
    /// Outcomes with two or more violating pieces. Always zero.
    pub multiple_violators: BigUint,
}

impl ExactCount {
    fn uniform(tally: Tally, total: u64) -> Self {
        let total = BigUint::from(total);
        let good = BigUint::from(tally.good);
        ExactCount {
            probability: ExactProb::from_counts(&good, &total),
            total,
            good,
            bad_by_index: tally.bad_by_index.into_iter().map(BigUint::from).collect(),
            multiple_violators: BigUint::from(tally.multiple),
        }
    }

    pub fn bad(&self) -> BigUint {
        &self.total - &self.good
    }
}

/// Per-worker counters.
#[derive(Debug, Clone, Default)]
struct Tally {
    good: u64,
    bad_by_index: Vec<u64>,
    multiple: u64,
}

impl Tally {
    fn new(k: usize) -> Self {
        Tally {
            good: 0,
            bad_by_index: vec![0; k],
            multiple: 0,
        }
    }

    fn record(&mut self, pieces: &[u64]) {
        let total: u64 = pieces.iter().sum();
        let mut violators = 0;
        for (i, &x) in pieces.iter().enumerate() {
            if 2 * x >= total {
                self.bad_by_index[i] += 1;
                violators += 1;
            }
        }
        match violators {
            0 => self.good += 1,
            1 => {}
            _ => self.multiple += 1,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.good += other.good;
        self.multiple += other.multiple;
        for (a, b) in self.bad_by_index.iter_mut().zip(other.bad_by_index) {
            *a += b;
        }
        self
    }
}

/// Advance `parts` to the next composition of the same sum in lexicographic
/// order. Returns `false` after the last one.
fn next_composition(parts: &mut [u64]) -> bool {
    let k = parts.len();
    if k < 2 {
        return false;
    }
    let mut suffix = parts[k - 1];
    for i in (0..k - 1).rev() {
        let tail = (k - 1 - i) as u64;
        if suffix > tail {
            parts[i] += 1;
            for x in &mut parts[i + 1..k - 1] {
                *x = 1;
            }
            parts[k - 1] = suffix - tail;
            return true;
        }
        suffix += parts[i];
    }
    false
}

/// Call `visit` on every composition of `n` into `k` positive parts, in
/// lexicographic order, reusing one buffer.
fn for_each_composition(n: u64, k: usize, mut visit: impl FnMut(&[u64])) {
    if k == 0 || (k as u64) > n {
        return;
    }
    let mut parts = vec![1; k];
    parts[k - 1] = n - (k as u64 - 1);
    loop {
        visit(&parts);
        if !next_composition(&mut parts) {
            break;
        }
    }
}

/// Lexicographic iterator over the compositions of `n` into `k` parts.
#[derive(Debug, Clone)]
pub struct Compositions {
    next: Option<Vec<u64>>,
}

impl Iterator for Compositions {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let current = self.next.take()?;
        let mut following = current.clone();
        if next_composition(&mut following) {
            self.next = Some(following);
        }
        Some(current)
    }
}

/// All `C(n-1, k-1)` compositions of `n` into `k` positive parts.
pub fn enumerate_compositions(n: u64, k: u64) -> Result<Compositions> {
    if k == 0 || n < k {
        return Err(Error::params(format!(
            "compositions need n >= k >= 1, got n = {n}, k = {k}"
        )));
    }
    let k = usize::try_from(k).map_err(|_| Error::params("k is too large"))?;
    let mut first = vec![1; k];
    first[k - 1] = n - (k as u64 - 1);
    Ok(Compositions { next: Some(first) })
}

/// Enumerate every way to cut a brick of length `n` into `k` pieces.
pub fn broken_brick_oracle(params: ProblemParams, budget: Budget) -> Result<ExactCount> {
    let ProblemParams { n, k } = params.check_broken()?;
    let total = budget.admit(binomial(n - 1, k - 1))?;
    let k = k as usize;

    // Split on the first piece; the rest is a composition of n - first.
    let tally = (1..=n - (k as u64 - 1))
        .into_par_iter()
        .map(|first| {
            let mut tally = Tally::new(k);
            let mut pieces = vec![0; k];
            pieces[0] = first;
            for_each_composition(n - first, k - 1, |rest| {
                pieces[1..].copy_from_slice(rest);
                tally.record(&pieces);
            });
            tally
        })
        .reduce(|| Tally::new(k), Tally::merge);
    Ok(ExactCount::uniform(tally, total))
}

/// Count compositions of `n` into `k` parts whose piece `index` (zero-based)
/// satisfies `2·x >= n`, by direct scan.
pub fn count_bad_set(params: ProblemParams, index: usize, budget: Budget) -> Result<BigUint> {
    let ProblemParams { n, k } = params.check_broken()?;
    if index >= k as usize {
        return Err(Error::params(format!(
            "piece index {index} out of range for k = {k}"
        )));
    }
    budget.admit(binomial(n - 1, k - 1))?;
    let mut count = 0u64;
    for_each_composition(n, k as usize, |parts| {
        if 2 * parts[index] >= n {
            count += 1;
        }
    });
    Ok(BigUint::from(count))
}

/// Advance an odometer over `[1, n]^len`. Returns `false` after the last
/// tuple.
fn next_tuple(digits: &mut [u64], n: u64) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < n {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}

/// Enumerate every `k`-tuple of lengths in `{1, …, n}`.
pub fn pickup_bricks_oracle(params: ProblemParams, budget: Budget) -> Result<ExactCount> {
    let ProblemParams { n, k } = params.check_pickup()?;
    let k_exp = u32::try_from(k).map_err(|_| Error::params("k is too large"))?;
    let total = budget.admit(BigUint::from(n).pow(k_exp))?;
    let k = k as usize;

    let tally = (1..=n)
        .into_par_iter()
        .map(|first| {
            let mut tally = Tally::new(k);
            let mut pieces = vec![1; k];
            pieces[0] = first;
            loop {
                tally.record(&pieces);
                if !next_tuple(&mut pieces[1..], n) {
                    break;
                }
            }
            tally
        })
        .reduce(|| Tally::new(k), Tally::merge);
    Ok(ExactCount::uniform(tally, total))
}

/// Exact discrete `Stick(λ)`.
///
/// Stick `i` has length uniform on `{λᵢ, …, n}`; given its length `ℓ`, the
/// `λᵢ - 1` cuts are a uniform choice among the `C(ℓ-1, λᵢ-1)` cut sets. Each
/// outcome carries weight `Π 1 / ((n - λᵢ + 1)·C(ℓᵢ - 1, λᵢ - 1))`.
pub fn stick_lambda_brick_oracle(n: u64, lambda: &Partition, budget: Budget) -> Result<ExactCount> {
    if lambda.pieces() < 3 {
        return Err(Error::params(format!(
            "Stick{lambda} has fewer than 3 pieces"
        )));
    }
    if n < lambda.largest() {
        return Err(Error::params(format!(
            "n = {n} is shorter than the largest part of {lambda}"
        )));
    }
    let outcomes = lambda
        .parts()
        .iter()
        .fold(BigUint::from(1u32), |acc, &part| acc * binomial(n, part));
    let total = budget.admit(outcomes)?;

    // Every combination of stick lengths, enumerated as an odometer.
    let mut length_tuples = Vec::new();
    let mut lengths: Vec<u64> = lambda.parts().to_vec();
    'outer: loop {
        length_tuples.push(lengths.clone());
        for (len, &part) in lengths.iter_mut().zip(lambda.parts()).rev() {
            if *len < n {
                *len += 1;
                continue 'outer;
            }
            *len = part;
        }
        break;
    }

    let k = lambda.pieces() as usize;
    let (good, probability) = length_tuples
        .par_iter()
        .map(|lengths| {
            let per_stick: Vec<Vec<Vec<u64>>> = lengths
                .iter()
                .zip(lambda.parts())
                .map(|(&len, &part)| {
                    let mut all = Vec::new();
                    for_each_composition(len, part as usize, |c| all.push(c.to_vec()));
                    all
                })
                .collect();

            let mut good = 0u64;
            let mut choice = vec![0usize; per_stick.len()];
            let mut pieces = Vec::with_capacity(k);
            'combos: loop {
                pieces.clear();
                for (stick, &c) in per_stick.iter().zip(&choice) {
                    pieces.extend_from_slice(&stick[c]);
                }
                let sum: u64 = pieces.iter().sum();
                if pieces.iter().all(|&x| 2 * x < sum) {
                    good += 1;
                }
                for (c, stick) in choice.iter_mut().zip(&per_stick).rev() {
                    *c += 1;
                    if *c < stick.len() {
                        continue 'combos;
                    }
                    *c = 0;
                }
                break;
            }

            let weight_denom = lengths
                .iter()
                .zip(lambda.parts())
                .fold(BigUint::from(1u32), |acc, (&len, &part)| {
                    acc * (n - part + 1) * binomial(len - 1, part - 1)
                });
            let weight = BigRational::new(good.into(), weight_denom.into());
            (good, weight)
        })
        .reduce(
            || (0, BigRational::zero()),
            |(g1, p1), (g2, p2)| (g1 + g2, p1 + p2),
        );

    Ok(ExactCount {
        total: BigUint::from(total),
        good: BigUint::from(good),
        probability: ExactProb::from_ratio(probability),
        bad_by_index: Vec::new(),
        multiple_violators: BigUint::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{broken_brick_prob, pickup_bricks_prob};

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn small_compositions() {
        let all: Vec<_> = enumerate_compositions(4, 2).unwrap().collect();
        assert_eq!(all, vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        let all: Vec<_> = enumerate_compositions(5, 5).unwrap().collect();
        assert_eq!(all, vec![vec![1; 5]]);
        assert_eq!(enumerate_compositions(10, 3).unwrap().count(), 36);
        assert_eq!(
            enumerate_compositions(7, 1).unwrap().collect::<Vec<_>>(),
            vec![vec![7]]
        );
        assert!(enumerate_compositions(3, 4).is_err());
        assert!(enumerate_compositions(3, 0).is_err());
    }

    #[test]
    fn composition_order_is_lexicographic() {
        let all: Vec<_> = enumerate_compositions(9, 4).unwrap().collect();
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cut_sets_round_trip() {
        let cuts = CutSet::from_composition(&[2, 4, 4]).unwrap();
        assert_eq!(cuts.positions(), &[2, 6]);
        assert_eq!(cuts.to_composition(), vec![2, 4, 4]);
        assert!(CutSet::new(10, vec![2, 2]).is_err());
        assert!(CutSet::new(10, vec![0, 2]).is_err());
        assert!(CutSet::new(10, vec![3, 10]).is_err());
        assert_eq!(
            CutSet::new(10, vec![1, 9]).unwrap().to_composition(),
            vec![1, 8, 1]
        );
    }

    #[test]
    fn broken_brick_counts() {
        let c = broken_brick_oracle(ProblemParams::new(10, 3), Budget::default()).unwrap();
        assert_eq!((c.total.clone(), c.good.clone()), (big(36), big(6)));
        assert_eq!(c.probability, ExactProb::new(1, 6));
        assert_eq!(c.bad_by_index, vec![big(10); 3]);
        assert!(c.multiple_violators.is_zero());

        let c = broken_brick_oracle(ProblemParams::new(5, 5), Budget::default()).unwrap();
        assert_eq!((c.total, c.good), (big(1), big(1)));

        let c = broken_brick_oracle(ProblemParams::new(12, 4), Budget::default()).unwrap();
        assert_eq!(c.total, big(165));
        assert_eq!(c.probability, ExactProb::new(17, 33));
    }

    #[test]
    fn the_six_triangles_from_ten() {
        let mut triangles: Vec<_> = enumerate_compositions(10, 3)
            .unwrap()
            .filter(|c| crate::polygon::is_polygonal(c).unwrap())
            .collect();
        triangles.sort();
        let expected = vec![
            vec![2, 4, 4],
            vec![3, 3, 4],
            vec![3, 4, 3],
            vec![4, 2, 4],
            vec![4, 3, 3],
            vec![4, 4, 2],
        ];
        assert_eq!(triangles, expected);
    }

    #[test]
    fn bad_set_examples() {
        let b = Budget::default();
        assert_eq!(
            count_bad_set(ProblemParams::new(10, 3), 0, b).unwrap(),
            big(10)
        );
        assert_eq!(
            count_bad_set(ProblemParams::new(11, 3), 1, b).unwrap(),
            big(10)
        );
        for k in 3..=7 {
            for i in 0..k as usize {
                assert!(count_bad_set(ProblemParams::new(k, k), i, b)
                    .unwrap()
                    .is_zero());
            }
        }
        assert!(count_bad_set(ProblemParams::new(10, 3), 3, b).is_err());
    }

    #[test]
    fn pickup_counts() {
        let c = pickup_bricks_oracle(ProblemParams::new(2, 3), Budget::default()).unwrap();
        assert_eq!((c.total.clone(), c.good.clone()), (big(8), big(5)));
        assert_eq!(c.probability, ExactProb::new(5, 8));
        // C(3, 3) = 1 bad tuple per index: (2,1,1) and its rotations.
        assert_eq!(c.bad_by_index, vec![big(1); 3]);

        let c = pickup_bricks_oracle(ProblemParams::new(1, 5), Budget::default()).unwrap();
        assert_eq!((c.total, c.good), (big(1), big(1)));

        let c = pickup_bricks_oracle(ProblemParams::new(10, 4), Budget::default()).unwrap();
        assert_eq!(c.probability, ExactProb::new(217, 250));
        assert_eq!(c.bad_by_index, vec![binomial(11, 4); 4]);
    }

    #[test]
    fn budget_is_enforced() {
        let err = broken_brick_oracle(ProblemParams::new(12, 4), Budget(100)).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: big(165),
                budget: 100
            }
        );
        assert!(matches!(
            pickup_bricks_oracle(ProblemParams::new(10, 4), Budget(9_999)),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(pickup_bricks_oracle(ProblemParams::new(10, 4), Budget(10_000)).is_ok());
    }

    #[test]
    fn stick_lambda_examples() {
        let b = Budget::default();
        let p = |n, parts: Vec<u64>| {
            stick_lambda_brick_oracle(n, &Partition::new(parts).unwrap(), b)
                .unwrap()
                .probability
        };
        assert_eq!(p(4, vec![3]), ExactProb::new(1, 2));
        assert_eq!(p(2, vec![1, 1, 1]), ExactProb::new(5, 8));
        assert_eq!(p(2, vec![2, 1]), ExactProb::new(1, 2));
    }

    #[test]
    fn stick_lambda_reductions() {
        let b = Budget::default();
        for k in 3..=4u64 {
            for n in k..=12 {
                let got = stick_lambda_brick_oracle(n, &Partition::single(k).unwrap(), b).unwrap();
                let sum = (k..=n).fold(BigRational::zero(), |acc, len| {
                    acc + broken_brick_prob(ProblemParams::new(len, k))
                        .unwrap()
                        .into_ratio()
                });
                let avg = sum / BigRational::from_integer((n - k + 1).into());
                assert_eq!(got.probability.as_ratio(), &avg, "n={n} k={k}");
            }
        }
        for n in 1..=6 {
            let got = stick_lambda_brick_oracle(n, &Partition::ones(3).unwrap(), b).unwrap();
            let want = pickup_bricks_prob(ProblemParams::new(n, 3)).unwrap();
            assert_eq!(got.probability, want);
        }
    }

    #[test]
    fn stick_lambda_errors() {
        let b = Budget::default();
        assert!(stick_lambda_brick_oracle(2, &Partition::single(3).unwrap(), b).is_err());
        assert!(stick_lambda_brick_oracle(5, &Partition::new(vec![1, 1]).unwrap(), b).is_err());
        assert!(matches!(
            stick_lambda_brick_oracle(30, &Partition::new(vec![3, 3, 2]).unwrap(), Budget(1000)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn partitions() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        let (p, resorted) = Partition::sorted(vec![1, 3]).unwrap();
        assert_eq!(p.parts(), &[3, 1]);
        assert!(resorted);
        assert_eq!(p.pieces(), 4);
        assert_eq!(p.to_string(), "(3,1)");
    }
}
