//! Nonparametric bootstrap with percentile intervals.
//!
//! Replicate `i` resamples the dataset's rows with replacement using
//! sub-stream `i` of the master seed (see [`crate::rng`]), so serial and
//! parallel execution give identical replicates. Each resample is handed to
//! the statistic collapsed to distinct rows over the requested columns, with
//! each distinct row weighted by how often (and with what row weight) it was
//! drawn.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, DatasetError, Patterns};
use crate::rng::Stream;

pub const DEFAULT_REPLICATES: usize = 200;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Share of failed replicates above which the interval is refused.
pub const MAX_FAILURE_SHARE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    /// Run replicates on the rayon pool (needs the `parallel` feature; serial otherwise).
    #[cfg_attr(feature = "serde", serde(default, skip_serializing))]
    pub parallel: bool,
}

impl BootstrapSpec {
    pub fn new(replicates: usize, seed: u64) -> Self {
        BootstrapSpec { replicates, seed, level: DEFAULT_LEVEL, parallel: false }
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel = on;
        self
    }

    fn tail(&self) -> f64 {
        (1.0 - self.level) / 2.0
    }

    pub fn check(&self) -> Result<(), BootstrapError> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(BootstrapError::InvalidLevel(self.level));
        }
        if self.replicates == 0 || (self.replicates as f64) * self.tail() < 1.0 - 1e-9 {
            return Err(BootstrapError::InsufficientReplicates { replicates: self.replicates, level: self.level });
        }
        Ok(())
    }
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self::new(DEFAULT_REPLICATES, 0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BootstrapError {
    #[error("{replicates} replicates cannot give a {level} percentile interval")]
    InsufficientReplicates { replicates: usize, level: f64 },
    #[error("level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("{failures} of {replicates} bootstrap replicates failed")]
    BootstrapDegenerate { failures: usize, replicates: usize },
    #[error("cannot resample an empty dataset")]
    EmptyData,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapInterval {
    pub low: f64,
    pub high: f64,
    pub replicates: usize,
    pub failures: usize,
}

/// Resamples rows of `d` and evaluates `statistic` on each replicate, in replicate order.
pub fn replicate<T, E, F>(
    d: &Dataset,
    columns: &[&str],
    bs: &BootstrapSpec,
    statistic: F,
) -> Result<Vec<Result<T, E>>, BootstrapError>
where
    F: Fn(&Dataset) -> Result<T, E> + Sync,
    T: Send,
    E: Send,
{
    if d.is_empty() {
        return Err(BootstrapError::EmptyData);
    }
    let patterns = d.patterns(columns)?;
    let run = |i: usize| statistic(&resample(d, &patterns, bs.seed, i));
    Ok(run_all(bs, run))
}

#[cfg(feature = "parallel")]
fn run_all<T: Send, F: Fn(usize) -> T + Sync>(bs: &BootstrapSpec, run: F) -> Vec<T> {
    use rayon::prelude::*;
    if bs.parallel {
        (0..bs.replicates).into_par_iter().map(&run).collect()
    } else {
        (0..bs.replicates).map(run).collect()
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all<T, F: Fn(usize) -> T>(bs: &BootstrapSpec, run: F) -> Vec<T> {
    (0..bs.replicates).map(run).collect()
}

fn resample(d: &Dataset, patterns: &Patterns, seed: u64, index: usize) -> Dataset {
    let n = d.n_rows();
    let mut rng = Stream::substream(seed, index as u64);
    let mut counts = vec![0.0f64; patterns.len()];
    let map = patterns.row_pattern();
    match d.weights() {
        None => {
            for _ in 0..n {
                counts[map[rng.below(n)]] += 1.0;
            }
        }
        Some(w) => {
            for _ in 0..n {
                let r = rng.below(n);
                counts[map[r]] += w[r];
            }
        }
    }
    patterns.to_dataset(&counts)
}

/// Nearest-rank percentile interval of `values` (sorted in place).
pub fn percentile_interval(values: &mut [f64], level: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    let tail = (1.0 - level) / 2.0;
    let rank = |q: f64| (libm::ceil(q * m as f64 - 1e-9) as usize).clamp(1, m);
    (values[rank(tail) - 1], values[rank(1.0 - tail) - 1])
}

/// Percentile bootstrap interval for `statistic`.
///
/// Failed replicates are dropped and counted; more than
/// [`MAX_FAILURE_SHARE`] of them is an error.
pub fn bootstrap_ci<E, F>(
    d: &Dataset,
    columns: &[&str],
    bs: &BootstrapSpec,
    statistic: F,
) -> Result<BootstrapInterval, BootstrapError>
where
    F: Fn(&Dataset) -> Result<f64, E> + Sync,
    E: Send,
{
    bs.check()?;
    let results = replicate(d, columns, bs, statistic)?;
    let mut values: Vec<f64> = results.into_iter().filter_map(Result::ok).collect();
    summarize(&mut values, bs)
}

pub(crate) fn summarize(values: &mut [f64], bs: &BootstrapSpec) -> Result<BootstrapInterval, BootstrapError> {
    let failures = bs.replicates - values.len();
    if failures as f64 > MAX_FAILURE_SHARE * bs.replicates as f64 || values.is_empty() {
        return Err(BootstrapError::BootstrapDegenerate { failures, replicates: bs.replicates });
    }
    let (low, high) = percentile_interval(values, bs.level);
    Ok(BootstrapInterval { low, high, replicates: bs.replicates, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::{String, ToString};

    fn coin(n: usize) -> Dataset {
        let rows: Vec<[u8; 1]> = (0..n).map(|i| [(i % 3 == 0) as u8]).collect();
        Dataset::from_rows(vec!["Y".to_string()], &rows).unwrap()
    }

    #[test]
    fn constant_statistic_gives_point_interval() {
        let ci = bootstrap_ci(&coin(50), &["Y"], &BootstrapSpec::new(40, 3), |_| Ok::<_, ()>(2.5)).unwrap();
        assert_eq!((ci.low, ci.high), (2.5, 2.5));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let d = coin(200);
        let stat = |r: &Dataset| r.mean("Y").map_err(|_| ());
        let bs = BootstrapSpec::new(100, 11);
        let a = bootstrap_ci(&d, &["Y"], &bs, stat).unwrap();
        let b = bootstrap_ci(&d, &["Y"], &bs, stat).unwrap();
        assert_eq!(a, b);
        assert!(a.low < 1.0 / 3.0 + 0.01 && a.high > 1.0 / 3.0 - 0.01);
        let other = bootstrap_ci(&d, &["Y"], &BootstrapSpec::new(100, 12), stat).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn resample_keeps_row_count() {
        let d = coin(123);
        let reps = replicate(&d, &["Y"], &BootstrapSpec::new(5, 1), |r| Ok::<_, ()>(r.total_weight())).unwrap();
        assert!(reps.into_iter().all(|w| w == Ok(123.0)));
    }

    #[test]
    fn too_few_replicates() {
        let err = bootstrap_ci(&coin(10), &["Y"], &BootstrapSpec::new(39, 0), |_| Ok::<_, ()>(1.0)).unwrap_err();
        assert!(matches!(err, BootstrapError::InsufficientReplicates { .. }));
    }

    #[test]
    fn many_failures_abort() {
        let d = coin(30);
        let counter = core::sync::atomic::AtomicUsize::new(0);
        let err = bootstrap_ci(&d, &["Y"], &BootstrapSpec::new(50, 0), |_| {
            let k = counter.fetch_add(1, core::sync::atomic::Ordering::Relaxed);
            if k % 4 == 0 {
                Err(String::from("boom"))
            } else {
                Ok(1.0)
            }
        });
        // 13 of 50 fail: more than 20%.
        assert_eq!(err.unwrap_err(), BootstrapError::BootstrapDegenerate { failures: 13, replicates: 50 });
    }

    #[test]
    fn nearest_rank_percentiles() {
        let mut v: Vec<f64> = (1..=200).map(|i| i as f64).collect();
        assert_eq!(percentile_interval(&mut v, 0.95), (5.0, 195.0));
        let mut w: Vec<f64> = (1..=40).rev().map(|i| i as f64).collect();
        assert_eq!(percentile_interval(&mut w, 0.95), (1.0, 39.0));
    }
}
