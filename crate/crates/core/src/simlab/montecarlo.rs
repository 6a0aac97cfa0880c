//! Seeded Monte Carlo harness.
//!
//! Replication `r` draws from [`replication_rng`]`(seed, r)`, so summaries
//! are bit-identical across runs and thread counts. Replications run in
//! parallel; rejection counts are merged as integers and per-replication
//! reals are summed in replication order.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate, replication_rng};
use super::scenario::{Scenario, MEAN_SLACK};
use crate::error::{Error, Result};
use crate::evalues::EValueVector;
use crate::sympoly::symmetric_averages;
use crate::testkit::{test_max_average, test_optimized_betting, test_ville, LambdaStrategy, StatisticKind};

pub const DEFAULT_VILLE_LAMBDA: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub scenario: Scenario,
    pub alpha: f64,
    pub replications: u64,
    pub seed: u64,
    /// Constant fraction for the Ville statistic.
    pub ville_lambda: f64,
}

impl McConfig {
    pub fn new(scenario: Scenario, alpha: f64, replications: u64, seed: u64) -> Self {
        Self {
            scenario,
            alpha,
            replications,
            seed,
            ville_lambda: DEFAULT_VILLE_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rejections: u64,
    pub rate: f64,
    /// `sqrt(r (1 − r) / N)`.
    pub standard_error: f64,
}

impl RateEstimate {
    fn from_counts(rejections: u64, replications: u64) -> Self {
        let rate = rejections as f64 / replications as f64;
        Self {
            rejections,
            rate,
            standard_error: (rate * (1.0 - rate) / replications as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub scenario: String,
    pub is_null: bool,
    pub replications: u64,
    pub seed: u64,
    pub alpha: f64,
    pub ville_lambda: f64,
    pub rates: BTreeMap<StatisticKind, RateEstimate>,
    /// Replications where the betting test rejected but the max-average test
    /// did not. Zero on every path.
    pub dominance_violations: u64,
    /// Wall-clock time; excluded from serialized output so reports stay
    /// reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl MonteCarloSummary {
    pub fn rate(&self, kind: StatisticKind) -> RateEstimate {
        self.rates[&kind]
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    rejections: [u64; 3],
    violations: u64,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.rejections.iter_mut().zip(other.rejections) {
            *a += b;
        }
        self.violations += other.violations;
        self
    }
}

fn check(config: &McConfig) -> Result<()> {
    if config.replications == 0 {
        return Err(Error::NoReplications);
    }
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(config.alpha));
    }
    if !(0.0..=1.0).contains(&config.ville_lambda) {
        return Err(Error::LambdaOutOfRange(config.ville_lambda));
    }
    Ok(())
}

fn replicate(config: &McConfig, e: &EValueVector) -> Result<Tally> {
    let avg = test_max_average(e, config.alpha)?.reject;
    let bet = test_optimized_betting(e, config.alpha)?.reject;
    let ville = test_ville(e, &LambdaStrategy::Constant(config.ville_lambda), config.alpha)?.reject;
    Ok(Tally {
        rejections: [avg as u64, bet as u64, ville as u64],
        violations: (bet && !avg) as u64,
    })
}

fn run(config: &McConfig) -> Result<MonteCarloSummary> {
    check(config)?;
    let start = Instant::now();
    let tally = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let e = generate(&config.scenario, &mut replication_rng(config.seed, r))?;
            replicate(config, &e)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let rates = StatisticKind::ALL
        .iter()
        .zip(tally.rejections)
        .map(|(&k, c)| (k, RateEstimate::from_counts(c, config.replications)))
        .collect();
    Ok(MonteCarloSummary {
        scenario: config.scenario.to_string(),
        is_null: config.scenario.is_null(),
        replications: config.replications,
        seed: config.seed,
        alpha: config.alpha,
        ville_lambda: config.ville_lambda,
        rates,
        dominance_violations: tally.violations,
        elapsed: start.elapsed(),
    })
}

/// Empirical type-I error of all three tests under a null scenario.
pub fn mc_type1(config: &McConfig) -> Result<MonteCarloSummary> {
    if !config.scenario.is_null() {
        return Err(Error::Scenario(format!(
            "`{}` is an alternative (mean {}); a null scenario is required",
            config.scenario,
            config.scenario.marginal_mean()
        )));
    }
    run(config)
}

/// Rejection rates under any scenario, with pathwise dominance counts.
pub fn mc_power(config: &McConfig) -> Result<MonteCarloSummary> {
    run(config)
}

/// Increasing test functions `g(A_0, .., A_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotoneFn {
    Constant,
    /// `1{max_{j≤k} A_j ≥ t}`, the complement of the first-passage indicator.
    ThresholdIndicator(f64),
    /// `min(A_k, c)`.
    ClippedIdentity(f64),
}

impl MonotoneFn {
    fn eval(&self, a: &[f64]) -> f64 {
        match *self {
            MonotoneFn::Constant => 1.0,
            MonotoneFn::ThresholdIndicator(t) => {
                let running_max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if running_max >= t {
                    1.0
                } else {
                    0.0
                }
            }
            MonotoneFn::ClippedIdentity(c) => a[a.len() - 1].min(c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemimartingaleConfig {
    pub scenario: Scenario,
    pub k: usize,
    pub g: MonotoneFn,
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemimartingaleEstimate {
    pub k: usize,
    pub g: MonotoneFn,
    /// Sample mean of `(A_{k+1} − A_k) g(A_0, .., A_k)`.
    pub estimate: f64,
    pub standard_error: f64,
    pub replications: u64,
}

/// Estimates `E[(A_{k+1} − A_k) g(A_0, .., A_k)]` for iid mean-1 entries.
pub fn mc_demimartingale(config: &DemimartingaleConfig) -> Result<DemimartingaleEstimate> {
    let s = &config.scenario;
    if !s.is_iid() || (s.marginal_mean() - 1.0).abs() > MEAN_SLACK {
        return Err(Error::Scenario(format!(
            "`{s}` must be an iid family with mean exactly 1"
        )));
    }
    if config.k >= s.n {
        return Err(Error::IndexOutOfRange { k: config.k, n: s.n });
    }
    if config.replications < 2 {
        return Err(Error::NoReplications);
    }
    let k = config.k;
    let samples: Vec<f64> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let e = generate(s, &mut replication_rng(config.seed, r))?;
            let a: Vec<f64> = symmetric_averages(&e).log_a.iter().map(|v| v.value()).collect();
            Ok((a[k + 1] - a[k]) * config.g.eval(&a[..=k]))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(DemimartingaleEstimate {
        k,
        g: config.g,
        estimate: mean,
        standard_error: (var / n).sqrt(),
        replications: config.replications,
    })
}
