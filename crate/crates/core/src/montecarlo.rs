//! Reproducible Monte Carlo estimates for `Stick(λ)`.
//!
//! # Stream derivation
//!
//! The trials are split into `shards` contiguous blocks; shard `s` runs
//! `trials / shards` trials, plus one more when `s < trials % shards`. Each
//! shard draws from its own ChaCha8 stream:
//!
//! 1. Run SplitMix64 from state `seed` four times, giving `w0..w3`.
//! 2. The 32-byte ChaCha8 key is `w0 ‖ w1 ‖ w2 ‖ w3`, each little-endian.
//! 3. The stream id is the shard index `s`.
//!
//! Reals are built from one `u64` draw `x`: `(x >> 11) · 2⁻⁵³` lies in
//! `[0, 1)` (cut positions) and `((x >> 11) + 1) · 2⁻⁵³` in `(0, 1]` (stick
//! lengths). Integer draws use [`rand::Rng::random_range`].
//!
//! Shards run in parallel but only ever exchange their integer success counts,
//! so a run is fully determined by `(λ, trials, seed, shards)`.

use std::io::{self, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::oracle::Partition;
use crate::polygon::violator;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub lambda: Partition,
    pub trials: u64,
    pub seed: u64,
    pub shards: u64,
    pub confidence: f64,
}

impl SimConfig {
    /// One shard, 95% confidence.
    pub fn new(lambda: Partition, trials: u64, seed: u64) -> Self {
        SimConfig {
            lambda,
            trials,
            seed,
            shards: 1,
            confidence: DEFAULT_CONFIDENCE,
        }
    }

    pub fn with_shards(mut self, shards: u64) -> Self {
        self.shards = shards;
        self
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.pieces() < 3 {
            return Err(Error::params(format!(
                "Stick{} has fewer than 3 pieces",
                self.lambda
            )));
        }
        if self.shards < 1 || self.trials < self.shards {
            return Err(Error::params(format!(
                "need trials >= shards >= 1, got trials = {}, shards = {}",
                self.trials, self.shards
            )));
        }
        check_confidence(self.confidence)
    }

    pub fn shard_trials(&self, shard: u64) -> u64 {
        self.trials / self.shards + u64::from(shard < self.trials % self.shards)
    }
}

fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::params(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub shards: u64,
}

impl SimEstimate {
    /// Combine per-shard success counts. Addition of integers, so any order
    /// gives the same estimate.
    pub fn from_shard_counts(counts: &[u64], cfg: &SimConfig) -> Result<Self> {
        let successes: u64 = counts.iter().sum();
        let (ci_low, ci_high) = confidence_interval(successes, cfg.trials, cfg.confidence)?;
        Ok(SimEstimate {
            trials: cfg.trials,
            successes,
            estimate: successes as f64 / cfg.trials as f64,
            ci_low,
            ci_high,
            seed: cfg.seed,
            shards: cfg.shards,
        })
    }
}

/// Wilson score interval for `successes` out of `trials`, clamped to `[0, 1]`.
pub fn confidence_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::params(format!(
            "need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}"
        )));
    }
    check_confidence(confidence)?;

    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let scale = 1.0 + z2 / n;

    let low = if successes == 0 {
        0.0
    } else {
        ((center - spread) / scale).max(0.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        ((center + spread) / scale).min(1.0)
    };
    Ok((low, high))
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The RNG stream owned by `shard` under master seed `seed`.
pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for word in key.chunks_exact_mut(8) {
        word.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shard);
    rng
}

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

fn unit_half_open(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * UNIT
}

fn unit_positive(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * UNIT
}

/// Which `Stick(λ)` model a trial draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Model {
    /// Lengths uniform on `(0, 1]`, cuts uniform on the stick.
    Continuous,
    /// Lengths uniform on `{λᵢ, …, n}`, cut sets uniform.
    Discrete { n: u64 },
}

/// Reusable per-shard buffers.
struct Trial {
    reals: Vec<f64>,
    ints: Vec<u64>,
    cuts: Vec<f64>,
    int_cuts: Vec<u64>,
}

impl Trial {
    fn new(k: usize) -> Self {
        Trial {
            reals: Vec::with_capacity(k),
            ints: Vec::with_capacity(k),
            cuts: Vec::with_capacity(k),
            int_cuts: Vec::with_capacity(k),
        }
    }

    fn draw_continuous(&mut self, lambda: &Partition, rng: &mut ChaCha8Rng) {
        self.reals.clear();
        for &part in lambda.parts() {
            let length = unit_positive(rng);
            self.cuts.clear();
            self.cuts.push(0.0);
            for _ in 1..part {
                self.cuts.push(unit_half_open(rng));
            }
            self.cuts.sort_unstable_by(f64::total_cmp);
            self.cuts.push(1.0);
            self.reals
                .extend(self.cuts.windows(2).map(|w| length * (w[1] - w[0])));
        }
    }

    fn draw_discrete(&mut self, lambda: &Partition, n: u64, rng: &mut ChaCha8Rng) {
        self.ints.clear();
        for &part in lambda.parts() {
            let length = rng.random_range(part..=n);
            // Floyd's algorithm: `part - 1` distinct cuts from {1, …, length - 1}.
            self.int_cuts.clear();
            let interior = length - 1;
            for j in (interior + 2 - part)..=interior {
                let t = rng.random_range(1..=j);
                let pick = if self.int_cuts.contains(&t) { j } else { t };
                self.int_cuts.push(pick);
            }
            self.int_cuts.sort_unstable();
            let mut prev = 0;
            for &c in self.int_cuts.iter().chain(std::iter::once(&length)) {
                self.ints.push(c - prev);
                prev = c;
            }
        }
    }

    /// Draw one trial and return the violating piece, if any.
    fn run(&mut self, model: Model, lambda: &Partition, rng: &mut ChaCha8Rng) -> Option<usize> {
        match model {
            Model::Continuous => {
                self.draw_continuous(lambda, rng);
                violator(&self.reals)
            }
            Model::Discrete { n } => {
                self.draw_discrete(lambda, n, rng);
                violator(&self.ints)
            }
        }
    }

    fn pieces_text(&self, model: Model) -> String {
        let items: Vec<String> = match model {
            Model::Continuous => self.reals.iter().map(|x| format!("{x:.6}")).collect(),
            Model::Discrete { .. } => self.ints.iter().map(u64::to_string).collect(),
        };
        items.join(",")
    }
}

fn check_discrete(n: u64, cfg: &SimConfig) -> Result<()> {
    if n < cfg.lambda.largest() {
        return Err(Error::params(format!(
            "n = {n} is shorter than the largest part of {}",
            cfg.lambda
        )));
    }
    Ok(())
}

fn shard_counts(model: Model, cfg: &SimConfig) -> Result<Vec<u64>> {
    cfg.validate()?;
    let k = cfg.lambda.pieces() as usize;
    Ok((0..cfg.shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(cfg.seed, shard);
            let mut trial = Trial::new(k);
            let mut successes = 0u64;
            for _ in 0..cfg.shard_trials(shard) {
                if trial.run(model, &cfg.lambda, &mut rng).is_none() {
                    successes += 1;
                }
            }
            successes
        })
        .collect())
}

/// Success count of every shard of the continuous model, in shard order.
pub fn stick_lambda_shard_counts(cfg: &SimConfig) -> Result<Vec<u64>> {
    shard_counts(Model::Continuous, cfg)
}

/// Success count of every shard of the discrete model, in shard order.
pub fn brick_lambda_shard_counts(n: u64, cfg: &SimConfig) -> Result<Vec<u64>> {
    check_discrete(n, cfg)?;
    shard_counts(Model::Discrete { n }, cfg)
}

/// Continuous `Stick(λ)`: `m` stick lengths uniform on `(0, 1]`, stick `i`
/// cut at `λᵢ - 1` independent uniform points.
pub fn simulate_stick_lambda(cfg: &SimConfig) -> Result<SimEstimate> {
    SimEstimate::from_shard_counts(&stick_lambda_shard_counts(cfg)?, cfg)
}

/// Sampling counterpart of [`crate::oracle::stick_lambda_brick_oracle`].
pub fn simulate_brick_lambda(n: u64, cfg: &SimConfig) -> Result<SimEstimate> {
    SimEstimate::from_shard_counts(&brick_lambda_shard_counts(n, cfg)?, cfg)
}

/// Result of [`simulate_with_scale_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCheck {
    pub estimate: SimEstimate,
    /// Trials where scaling every piece by the factor changed the verdict.
    pub mismatches: u64,
}

/// Continuous simulation that also re-evaluates every trial with all pieces
/// multiplied by `factor`, counting verdict changes.
pub fn simulate_with_scale_check(cfg: &SimConfig, factor: f64) -> Result<ScaleCheck> {
    cfg.validate()?;
    if !(factor.is_finite() && factor > 0.0) {
        return Err(Error::params(format!(
            "scale factor must be positive, got {factor}"
        )));
    }
    let k = cfg.lambda.pieces() as usize;
    let per_shard: Vec<(u64, u64)> = (0..cfg.shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(cfg.seed, shard);
            let mut trial = Trial::new(k);
            let mut scaled = Vec::with_capacity(k);
            let (mut successes, mut mismatches) = (0, 0);
            for _ in 0..cfg.shard_trials(shard) {
                let verdict = trial
                    .run(Model::Continuous, &cfg.lambda, &mut rng)
                    .is_none();
                scaled.clear();
                scaled.extend(trial.reals.iter().map(|x| x * factor));
                if violator(&scaled).is_none() != verdict {
                    mismatches += 1;
                }
                successes += u64::from(verdict);
            }
            (successes, mismatches)
        })
        .collect();
    let counts: Vec<u64> = per_shard.iter().map(|&(s, _)| s).collect();
    Ok(ScaleCheck {
        estimate: SimEstimate::from_shard_counts(&counts, cfg)?,
        mismatches: per_shard.iter().map(|&(_, m)| m).sum(),
    })
}

/// Replay a run on one thread and write one line per failed trial:
///
/// ```text
/// trial=<global index> shard=<s> violator=<1-based piece> lengths=<l1,l2,...>
/// ```
///
/// Draws are identical to the parallel run with the same config. `n` selects
/// the discrete model. Returns the success count.
pub fn trace_failures<W: Write + ?Sized>(
    cfg: &SimConfig,
    n: Option<u64>,
    out: &mut W,
) -> Result<u64> {
    cfg.validate()?;
    let model = match n {
        Some(n) => {
            check_discrete(n, cfg)?;
            Model::Discrete { n }
        }
        None => Model::Continuous,
    };
    let mut trial = Trial::new(cfg.lambda.pieces() as usize);
    let mut successes = 0;
    let mut index = 0u64;
    let io_err = |e: io::Error| Error::params(format!("trace output failed: {e}"));
    for shard in 0..cfg.shards {
        let mut rng = shard_rng(cfg.seed, shard);
        for _ in 0..cfg.shard_trials(shard) {
            match trial.run(model, &cfg.lambda, &mut rng) {
                None => successes += 1,
                Some(v) => writeln!(
                    out,
                    "trial={index} shard={shard} violator={} lengths={}",
                    v + 1,
                    trial.pieces_text(model)
                )
                .map_err(io_err)?,
            }
            index += 1;
        }
    }
    Ok(successes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(parts: Vec<u64>, trials: u64, seed: u64) -> SimConfig {
        SimConfig::new(Partition::new(parts).unwrap(), trials, seed)
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 from state 0 (reference implementation).
        let mut s = 0;
        assert_eq!(splitmix64(&mut s), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(&mut s), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn streams_differ_by_shard_and_seed() {
        let a = shard_rng(1, 0).next_u64();
        assert_eq!(a, shard_rng(1, 0).next_u64());
        assert_ne!(a, shard_rng(1, 1).next_u64());
        assert_ne!(a, shard_rng(2, 0).next_u64());
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = confidence_interval(500_000, 1_000_000, 0.95).unwrap();
        assert!(
            (lo - 0.49902).abs() < 5e-6 && (hi - 0.50098).abs() < 5e-6,
            "{lo} {hi}"
        );
        let (lo, hi) = confidence_interval(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0370).abs() < 5e-5, "{hi}");
        for conf in [0.5, 0.9, 0.99] {
            assert_eq!(confidence_interval(37, 37, conf).unwrap().1, 1.0);
        }
    }

    #[test]
    fn wilson_errors() {
        assert!(confidence_interval(1, 0, 0.95).is_err());
        assert!(confidence_interval(5, 4, 0.95).is_err());
        assert!(confidence_interval(1, 4, 1.0).is_err());
        assert!(confidence_interval(1, 4, 0.0).is_err());
    }

    #[test]
    fn shard_trials_cover_everything() {
        let c = cfg(vec![3], 10, 0).with_shards(4);
        let per: Vec<u64> = (0..4).map(|s| c.shard_trials(s)).collect();
        assert_eq!(per, vec![3, 3, 2, 2]);
    }

    #[test]
    fn config_validation() {
        assert!(simulate_stick_lambda(&cfg(vec![1, 1], 10, 0)).is_err());
        assert!(simulate_stick_lambda(&cfg(vec![3], 4, 0).with_shards(5)).is_err());
        assert!(simulate_stick_lambda(&cfg(vec![3], 4, 0).with_shards(0)).is_err());
        assert!(simulate_stick_lambda(&cfg(vec![3], 4, 0).with_confidence(1.5)).is_err());
        assert!(simulate_brick_lambda(2, &cfg(vec![3], 10, 0)).is_err());
    }

    #[test]
    fn discrete_draws_are_valid_compositions() {
        let lambda = Partition::new(vec![3, 2, 1]).unwrap();
        let mut rng = shard_rng(5, 0);
        let mut trial = Trial::new(6);
        for _ in 0..2000 {
            trial.draw_discrete(&lambda, 7, &mut rng);
            assert_eq!(trial.ints.len(), 6);
            assert!(trial.ints.iter().all(|&x| x >= 1));
            let sticks = [&trial.ints[0..3], &trial.ints[3..5], &trial.ints[5..6]];
            for (stick, &part) in sticks.iter().zip(lambda.parts()) {
                let len: u64 = stick.iter().sum();
                assert!(len >= part && len <= 7);
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let c = cfg(vec![2, 2], 20_000, 7).with_shards(8);
        assert_eq!(
            simulate_stick_lambda(&c).unwrap(),
            simulate_stick_lambda(&c).unwrap()
        );
        let c1 = cfg(vec![2, 2], 20_000, 7);
        assert_eq!(
            simulate_stick_lambda(&c1).unwrap(),
            simulate_stick_lambda(&c1).unwrap()
        );
    }

    #[test]
    fn trace_replays_the_same_draws() {
        let c = cfg(vec![4], 500, 3).with_shards(3);
        let mut buf = Vec::new();
        let successes = trace_failures(&c, None, &mut buf).unwrap();
        assert_eq!(successes, simulate_stick_lambda(&c).unwrap().successes);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count() as u64, 500 - successes);
        assert!(text
            .lines()
            .all(|l| l.starts_with("trial=") && l.contains(" violator=")));

        let mut buf = Vec::new();
        let successes = trace_failures(&c, Some(9), &mut buf).unwrap();
        assert_eq!(successes, simulate_brick_lambda(9, &c).unwrap().successes);
    }

    #[test]
    fn scaling_never_changes_the_verdict() {
        let c = cfg(vec![3, 1], 50_000, 11).with_shards(4);
        for factor in [0.5, 3.0, 1024.0] {
            let check = simulate_with_scale_check(&c, factor).unwrap();
            assert_eq!(check.mismatches, 0, "factor {factor}");
            assert_eq!(check.estimate, simulate_stick_lambda(&c).unwrap());
        }
    }
}
