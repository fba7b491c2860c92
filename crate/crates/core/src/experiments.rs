//! Deterministic Monte Carlo harness.
//!
//! Every trial owns a [`RandomStream`] seeded from
//! `derive_trial_seed(master, trial_index)`, so aggregate counts depend only on
//! the master seed and the number of runs, never on how trials are scheduled
//! across threads.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Confidence level used for empirical rate assertions unless stated otherwise.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;

/// SplitMix64 output finalizer.
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`: `mix(master ^ index)`.
///
/// This derivation is part of the replay contract and must not change.
pub fn derive_trial_seed(master: u64, index: u64) -> u64 {
    splitmix64_mix(master ^ index)
}

/// A SplitMix64 stream (64-bit state) that counts its draws.
///
/// Draw budget of the simulator operations:
/// - [`RandomStream::uniform`]: one draw.
/// - Lüders or von Neumann measurement: one uniform.
/// - One cycle trial: two uniforms (outcome group, then readout bitstring).
#[derive(Clone, Debug)]
pub struct RandomStream {
    inner: SplitMix64,
    seed: u64,
    draws: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: SplitMix64::from_seed(seed.to_le_bytes()),
            seed,
            draws: 0,
        }
    }

    /// Stream for trial `index` of an experiment with the given master seed.
    pub fn for_trial(master: u64, index: u64) -> Self {
        Self::new(derive_trial_seed(master, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit words drawn so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    /// Uniform double in `[0, 1)` built from the top 53 bits of one draw.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`; one draw.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

/// Weights below this are treated as exact zeros when sampling.
pub const SAMPLING_FLOOR: f64 = 1e-14;

/// Inverse-CDF sample over `weights` using the single uniform `u ∈ [0, 1)`.
///
/// Weights at or below [`SAMPLING_FLOOR`] are never selected; the remaining
/// weights are renormalized. Returns `None` when nothing is selectable.
pub fn sample_index(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().filter(|&&w| w > SAMPLING_FLOOR).sum();
    if total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= SAMPLING_FLOOR {
            continue;
        }
        acc += w;
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}

/// Cumulative table for repeated O(log n) inverse-CDF sampling.
#[derive(Clone, Debug)]
pub struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|&w| {
                if w > SAMPLING_FLOOR {
                    acc += w;
                }
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Same selection rule as [`sample_index`].
    pub fn sample(&self, u: f64) -> Option<usize> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        let target = u * total;
        let i = self.cumulative.partition_point(|&c| c <= target);
        if i < self.cumulative.len() {
            Some(i)
        } else {
            // u·total rounded up to the total: take the last selectable entry.
            Some(self.cumulative.partition_point(|&c| c < total))
        }
    }
}

/// Wilson score interval for `successes` out of `n` at the given two-sided
/// confidence level.
pub fn wilson_interval(successes: u64, n: u64, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || successes > n {
        return Err(Error::Param(format!(
            "wilson interval needs 0 <= successes <= n and n >= 1 (got {successes}/{n})"
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Param(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let z = normal_quantile(0.5 + confidence / 2.0);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    Ok((lo, hi))
}

fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Binomial proportion estimate with a Wilson interval.
///
/// `rate` is the success proportion; the failure side is available through
/// [`ErrorEstimate::failure_rate`] and [`ErrorEstimate::failure_interval`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub successes: u64,
    pub failures: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub confidence: f64,
}

impl ErrorEstimate {
    pub fn from_counts(successes: u64, failures: u64, confidence: f64) -> Result<Self> {
        let n = successes + failures;
        let (wilson_lo, wilson_hi) = wilson_interval(successes, n, confidence)?;
        Ok(Self {
            successes,
            failures,
            rate: successes as f64 / n as f64,
            wilson_lo,
            wilson_hi,
            confidence,
        })
    }

    pub fn trials(&self) -> u64 {
        self.successes + self.failures
    }

    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials() as f64
    }

    /// Wilson interval of the failure proportion.
    pub fn failure_interval(&self) -> (f64, f64) {
        // The Wilson interval is symmetric under relabelling outcomes.
        (1.0 - self.wilson_hi, 1.0 - self.wilson_lo)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.wilson_lo <= p && p <= self.wilson_hi
    }
}

/// Runs `runs` independent trials, trial `i` on `RandomStream::for_trial(master_seed, i)`.
///
/// Results come back in trial order. On failure the error of the lowest
/// failing trial index is returned, wrapped in [`Error::Trial`].
pub fn run_trials<T, F>(
    runs: usize,
    master_seed: u64,
    parallelism: usize,
    task: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut RandomStream) -> Result<T> + Sync,
{
    let one = |i: usize| {
        let mut rng = RandomStream::for_trial(master_seed, i as u64);
        task(i, &mut rng).map_err(|e| Error::Trial {
            index: i,
            source: Box::new(e),
        })
    };
    if parallelism <= 1 || runs <= 1 {
        return (0..runs).map(one).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Param(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| (0..runs).into_par_iter().map(one).collect());
    results.into_iter().collect()
}

/// Counts successes of a boolean trial over derived streams.
pub fn monte_carlo<F>(
    task: F,
    runs: usize,
    master_seed: u64,
    parallelism: usize,
    confidence: f64,
) -> Result<ErrorEstimate>
where
    F: Fn(&mut RandomStream) -> Result<bool> + Sync,
{
    if runs == 0 {
        return Err(Error::Param("runs must be at least 1".into()));
    }
    let outcomes = run_trials(runs, master_seed, parallelism, |_, rng| task(rng))?;
    let successes = outcomes.iter().filter(|&&ok| ok).count() as u64;
    ErrorEstimate::from_counts(successes, runs as u64 - successes, confidence)
}

/// Number of logical CPUs, falling back to one.
pub fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_is_deterministic() {
        assert_eq!(derive_trial_seed(42, 7), derive_trial_seed(42, 7));
    }

    #[test]
    fn derive_separates_adjacent_indices() {
        let mut rng = RandomStream::new(0xDEAD_BEEF);
        for _ in 0..10_000 {
            let s = rng.next_u64();
            assert_ne!(derive_trial_seed(s, 0), derive_trial_seed(s, 1));
        }
    }

    #[test]
    fn stream_counts_draws_and_replays() {
        let mut a = RandomStream::new(5);
        let mut b = RandomStream::new(5);
        let xs: Vec<f64> = (0..100).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..100).map(|_| b.uniform()).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.draws(), 100);
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn splitmix_reference_value() {
        // First output of SplitMix64 seeded with 0 in the reference implementation.
        let mut rng = RandomStream::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn wilson_boundaries() {
        let (lo, _) = wilson_interval(0, 50, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        let (_, hi) = wilson_interval(50, 50, 0.95).unwrap();
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn wilson_half_at_hundred() {
        // Closed form evaluated by hand with z = 1.959963984540054:
        // center = 0.5, half = z/(1+z²/100)·sqrt(0.0025 + z²/40000).
        let z: f64 = 1.959963984540054;
        let half = z / (1.0 + z * z / 100.0) * (0.0025 + z * z / 40000.0).sqrt();
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!((lo - (0.5 - half)).abs() < 1e-12);
        assert!((hi - (0.5 + half)).abs() < 1e-12);
        assert!((lo - 0.404).abs() < 5e-4 && (hi - 0.596).abs() < 5e-4);
    }

    #[test]
    fn wilson_rejects_bad_params() {
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(3, 2, 0.95).is_err());
        assert!(wilson_interval(1, 2, 1.0).is_err());
    }

    #[test]
    fn wilson_shrinks_with_more_data() {
        let (a, b) = wilson_interval(30, 100, 0.99).unwrap();
        let (c, d) = wilson_interval(120, 400, 0.99).unwrap();
        assert!(d - c < b - a);
    }

    #[test]
    fn constant_success_task() {
        let est = monte_carlo(|_| Ok(true), 200, 1, 4, 0.99).unwrap();
        assert_eq!(est.rate, 1.0);
        assert_eq!(est.wilson_hi, 1.0);
        assert_eq!(est.failures, 0);
    }

    #[test]
    fn fair_coin_contains_half() {
        let est = monte_carlo(|rng| Ok(rng.uniform() < 0.5), 100_000, 9, 4, 0.99).unwrap();
        assert!(est.contains(0.5), "{est:?}");
    }

    #[test]
    fn parallelism_does_not_change_counts() {
        let task = |rng: &mut RandomStream| Ok(rng.uniform() < 0.3);
        let a = monte_carlo(task, 5_000, 77, 1, 0.99).unwrap();
        let b = monte_carlo(task, 5_000, 77, 8, 0.99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failing_trial_reports_lowest_index() {
        let err = run_trials(100, 3, 4, |i, _| {
            if i % 17 == 5 {
                Err(Error::Param("boom".into()))
            } else {
                Ok(i)
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Trial { index: 5, .. }));
    }

    #[test]
    fn sampling_skips_negligible_weights() {
        let w = [0.5, 1e-20, 0.5];
        assert_eq!(sample_index(&w, 0.0), Some(0));
        assert_eq!(sample_index(&w, 0.49), Some(0));
        assert_eq!(sample_index(&w, 0.5), Some(2));
        assert_eq!(sample_index(&w, 0.999_999), Some(2));
        assert_eq!(sample_index(&[0.0, 0.0], 0.3), None);
        let t = CumulativeTable::new(&w);
        for u in [0.0, 0.25, 0.49, 0.5, 0.75, 0.999_999_999] {
            assert_eq!(t.sample(u), sample_index(&w, u));
        }
    }

    #[test]
    fn wilson_coverage_sanity() {
        let mut covered = 0;
        for rep in 0..1000u64 {
            let mut rng = RandomStream::for_trial(2024, rep);
            let k = (0..200).filter(|_| rng.uniform() < 0.5).count() as u64;
            let (lo, hi) = wilson_interval(k, 200, 0.99).unwrap();
            if lo <= 0.5 && 0.5 <= hi {
                covered += 1;
            }
        }
        assert!(covered >= 970, "covered {covered}/1000");
    }
}
