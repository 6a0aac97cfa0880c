//! Level-α tests built on the combination statistics.
//!
//! Each test compares a statistic in log domain against `−ln α` and rejects
//! on `≥`. Reports carry the p-value bound `min(1, 1/statistic)`.
//!
//! Equality at the threshold rejects. Since `ln` of a product and `−ln α`
//! are rounded independently, "equal" means within [`THRESHOLD_SLACK`]
//! (relative, in log domain).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::betting::{self, BettingOptimum, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::evalues::{EValueVector, Regime};
use crate::logvalue::LogValue;
use crate::sympoly::{self, SymmetricAverages};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    MaxAverage,
    OptimizedBetting,
    VilleSequential,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 3] = [
        StatisticKind::MaxAverage,
        StatisticKind::OptimizedBetting,
        StatisticKind::VilleSequential,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::MaxAverage => "max_average",
            StatisticKind::OptimizedBetting => "optimized_betting",
            StatisticKind::VilleSequential => "ville_sequential",
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "max_average" => Ok(StatisticKind::MaxAverage),
            "optimized_betting" => Ok(StatisticKind::OptimizedBetting),
            "ville" | "ville_sequential" => Ok(StatisticKind::VilleSequential),
            other => Err(format!("unknown statistic `{other}`")),
        }
    }
}

/// Betting fractions for Ville's test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaStrategy {
    Constant(f64),
    /// `λ_i` may depend only on `E_1, .., E_{i−1}`. This cannot be checked
    /// from the numbers, so the caller attests it by constructing the variant
    /// through [`LambdaStrategy::attested_predictable`].
    AttestedPredictable(Vec<f64>),
}

impl LambdaStrategy {
    pub fn attested_predictable(lambdas: Vec<f64>) -> Self {
        LambdaStrategy::AttestedPredictable(lambdas)
    }

    fn lambda_at(&self, i: usize) -> f64 {
        match self {
            LambdaStrategy::Constant(l) => *l,
            LambdaStrategy::AttestedPredictable(ls) => ls[i],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let check = |l: f64| {
            if (0.0..=1.0).contains(&l) {
                Ok(())
            } else {
                Err(Error::LambdaOutOfRange(l))
            }
        };
        match self {
            LambdaStrategy::Constant(l) => check(*l),
            LambdaStrategy::AttestedPredictable(ls) => {
                if ls.len() != n {
                    return Err(Error::StrategyLength {
                        expected: n,
                        got: ls.len(),
                    });
                }
                ls.iter().try_for_each(|&l| check(l))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VilleTrajectory {
    /// `log M_1, .., log M_n`.
    pub log_trajectory: Vec<LogValue>,
    /// 1-based index of the first `M_m ≥ 1/α`.
    pub first_crossing: Option<usize>,
    pub strategy: LambdaStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReportDetail {
    MaxAverage(SymmetricAverages),
    OptimizedBetting(BettingOptimum),
    Ville(VilleTrajectory),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic_kind: StatisticKind,
    pub log_statistic: LogValue,
    pub alpha: f64,
    /// `−ln α`.
    pub log_threshold: f64,
    pub reject: bool,
    pub p_bound: f64,
    pub regime: Regime,
    pub warnings: Vec<String>,
    pub detail: ReportDetail,
}

/// Relative tolerance for the closed threshold comparison.
pub const THRESHOLD_SLACK: f64 = 1e-12;

/// `log_statistic ≥ log_threshold` up to rounding.
pub fn reaches_threshold(log_statistic: LogValue, log_threshold: f64) -> bool {
    log_statistic.log() >= log_threshold - THRESHOLD_SLACK * log_threshold.abs().max(1.0)
}

pub const WARN_REGIME: &str =
    "regime is not independent or simultaneous; the batch tail bound does not apply";
pub const WARN_INFINITE: &str =
    "an infinite e-value makes the supremum infinite; lambda_star is a representative witness";
pub const WARN_TRIVIAL_MAX: &str = "no average A_k with k >= 1 exceeds A_0 = 1";
pub const WARN_ATTESTED: &str = "predictability of the lambda sequence is attested by the caller";

fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(-alpha.ln())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// `min(1, 1/statistic)`.
pub fn e_to_p(log_statistic: LogValue) -> f64 {
    (-log_statistic.log()).exp().min(1.0)
}

fn report(
    statistic_kind: StatisticKind,
    log_statistic: LogValue,
    alpha: f64,
    log_threshold: f64,
    regime: Regime,
    warnings: Vec<String>,
    detail: ReportDetail,
) -> TestReport {
    TestReport {
        statistic_kind,
        log_statistic,
        alpha,
        log_threshold,
        reject: reaches_threshold(log_statistic, log_threshold),
        p_bound: e_to_p(log_statistic),
        regime,
        warnings,
        detail,
    }
}

fn regime_warnings(e: &EValueVector) -> Vec<String> {
    if e.regime().supports_batch_bounds() {
        Vec::new()
    } else {
        vec![WARN_REGIME.to_owned()]
    }
}

/// Rejects when `max_k A_k(E) ≥ 1/α`.
pub fn test_max_average(e: &EValueVector, alpha: f64) -> Result<TestReport> {
    let log_threshold = check_alpha(alpha)?;
    let avg = sympoly::symmetric_averages(e);
    let mut warnings = regime_warnings(e);
    if avg.max_is_trivial() {
        warnings.push(WARN_TRIVIAL_MAX.to_owned());
    }
    Ok(report(
        StatisticKind::MaxAverage,
        avg.log_max,
        alpha,
        log_threshold,
        e.regime(),
        warnings,
        ReportDetail::MaxAverage(avg),
    ))
}

/// Rejects when `sup_λ M_n(λ) ≥ 1/α`.
pub fn test_optimized_betting(e: &EValueVector, alpha: f64) -> Result<TestReport> {
    let log_threshold = check_alpha(alpha)?;
    let opt = betting::optimize_lambda(e, DEFAULT_TOL)?;
    let mut warnings = regime_warnings(e);
    if opt.infinite_witness {
        warnings.push(WARN_INFINITE.to_owned());
    }
    Ok(report(
        StatisticKind::OptimizedBetting,
        opt.log_value,
        alpha,
        log_threshold,
        e.regime(),
        warnings,
        ReportDetail::OptimizedBetting(opt),
    ))
}

/// Ville's test: rejects when `max_{m≤n} ∏_{i≤m} (λ_i E_i + 1 − λ_i) ≥ 1/α`.
///
/// Valid for sequential e-values, so no regime warning is attached.
pub fn test_ville(e: &EValueVector, strategy: &LambdaStrategy, alpha: f64) -> Result<TestReport> {
    let log_threshold = check_alpha(alpha)?;
    strategy.validate(e.len())?;
    let mut log_trajectory = Vec::with_capacity(e.len());
    let mut running = LogValue::ONE;
    for (i, x) in e.iter().enumerate() {
        running = running.log_mul(betting::log_factor(x, strategy.lambda_at(i)));
        log_trajectory.push(running);
    }
    let first_crossing = log_trajectory
        .iter()
        .position(|&m| reaches_threshold(m, log_threshold))
        .map(|i| i + 1);
    let log_statistic = log_trajectory.iter().copied().max().expect("n ≥ 1");
    let mut warnings = Vec::new();
    if matches!(strategy, LambdaStrategy::AttestedPredictable(_)) {
        warnings.push(WARN_ATTESTED.to_owned());
    }
    Ok(report(
        StatisticKind::VilleSequential,
        log_statistic,
        alpha,
        log_threshold,
        e.regime(),
        warnings,
        ReportDetail::Ville(VilleTrajectory {
            log_trajectory,
            first_crossing,
            strategy: strategy.clone(),
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalues::validate_evalues;
    use proptest::prelude::*;

    fn ev(xs: &[f64]) -> EValueVector {
        validate_evalues(xs, Regime::Independent).unwrap()
    }

    #[test]
    fn max_average_examples() {
        let r = test_max_average(&ev(&[1.0, 1.0, 1.0]), 0.05).unwrap();
        assert!(r.log_statistic.log().abs() < 1e-12);
        assert!(!r.reject);

        let r = test_max_average(&validate_evalues(&[0.0, 8.0], Regime::Sequential).unwrap(), 0.5).unwrap();
        assert!((r.log_statistic.value() - 4.0).abs() < 1e-14);
        assert!(r.reject);
        assert_eq!(r.warnings, vec![WARN_REGIME.to_owned()]);

        let r = test_max_average(&ev(&[2.0, 0.5]), 0.9).unwrap();
        assert!((r.log_statistic.value() - 1.25).abs() < 1e-14);
        assert!(r.reject);

        assert!(test_max_average(&ev(&[1.0]), 0.0).is_err());
        assert!(test_max_average(&ev(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn optimized_betting_examples() {
        let r = test_optimized_betting(&ev(&[2.0, 1.0]), 0.5).unwrap();
        assert_eq!(r.log_statistic.log(), 2f64.ln());
        assert!(r.reject, "equality at the threshold rejects");

        let r = test_optimized_betting(&ev(&[2.0, 0.5]), 0.8).unwrap();
        assert!((r.log_statistic.value() - 1.125).abs() < 1e-12);
        assert!(!r.reject);

        let r = test_optimized_betting(&ev(&[1.0; 6]), 0.01).unwrap();
        assert_eq!(r.log_statistic, LogValue::ONE);
        assert!(!r.reject);
        assert_eq!(r.p_bound, 1.0);

        let r = test_optimized_betting(&ev(&[0.3, f64::INFINITY]), 0.01).unwrap();
        assert!(r.reject);
        assert!(r.warnings.contains(&WARN_INFINITE.to_owned()));
        assert_eq!(r.p_bound, 0.0);
    }

    #[test]
    fn ville_examples() {
        let r = test_ville(&ev(&[2.0, 2.0, 2.0]), &LambdaStrategy::Constant(1.0), 0.125).unwrap();
        let ReportDetail::Ville(t) = &r.detail else { panic!() };
        let traj: Vec<f64> = t.log_trajectory.iter().map(|m| m.value()).collect();
        for (a, b) in traj.iter().zip([2.0, 4.0, 8.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(r.reject);
        assert_eq!(t.first_crossing, Some(3));

        for alpha in [0.999, 0.5, 1e-9] {
            let r = test_ville(&ev(&[2.0, 2.0, 2.0]), &LambdaStrategy::Constant(0.0), alpha).unwrap();
            assert!(!r.reject);
        }

        let r = test_ville(&ev(&[0.0, 8.0]), &LambdaStrategy::Constant(0.5), 0.4).unwrap();
        let ReportDetail::Ville(t) = &r.detail else { panic!() };
        assert!((t.log_trajectory[0].value() - 0.5).abs() < 1e-15);
        assert!((t.log_trajectory[1].value() - 2.25).abs() < 1e-14);
        assert!((r.log_statistic.value() - 2.25).abs() < 1e-14);
        // 2.25 < 1/0.4 = 2.5.
        assert!(!r.reject);
        assert_eq!(t.first_crossing, None);
        let r = test_ville(&ev(&[0.0, 8.0]), &LambdaStrategy::Constant(0.5), 0.45).unwrap();
        let ReportDetail::Ville(t) = &r.detail else { panic!() };
        assert!(r.reject);
        assert_eq!(t.first_crossing, Some(2));
    }

    #[test]
    fn ville_strategy_errors() {
        let e = ev(&[1.0, 2.0]);
        let s = LambdaStrategy::attested_predictable(vec![0.5]);
        assert!(matches!(test_ville(&e, &s, 0.1), Err(Error::StrategyLength { expected: 2, got: 1 })));
        let s = LambdaStrategy::attested_predictable(vec![0.5, 1.5]);
        assert!(test_ville(&e, &s, 0.1).is_err());
        assert!(test_ville(&e, &LambdaStrategy::Constant(-0.1), 0.1).is_err());
        let s = LambdaStrategy::attested_predictable(vec![0.5, 1.0]);
        let r = test_ville(&e, &s, 0.1).unwrap();
        assert!(r.warnings.contains(&WARN_ATTESTED.to_owned()));
        // M_1 = 0.5·1 + 0.5 = 1, M_2 = 1·2.
        assert!((r.log_statistic.value() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn e_to_p_examples() {
        assert_eq!(e_to_p(LogValue::ONE), 1.0);
        assert!((e_to_p(LogValue::from_value(20.0).unwrap()) - 0.05).abs() < 1e-16);
        assert_eq!(e_to_p(LogValue::from_value(0.5).unwrap()), 1.0);
        assert_eq!(e_to_p(LogValue::ZERO), 1.0);
        assert_eq!(e_to_p(LogValue::INFINITY), 0.0);
    }

    fn entry() -> impl Strategy<Value = f64> {
        prop_oneof![1 => Just(0.0), 4 => 0.0f64..3.0, 1 => 0.0f64..40.0]
    }

    proptest! {
        #[test]
        fn betting_rejection_implies_average_rejection(
            xs in prop::collection::vec(entry(), 1..=30),
            alpha in 0.001f64..0.999,
        ) {
            let e = ev(&xs);
            let b = test_optimized_betting(&e, alpha).unwrap();
            let a = test_max_average(&e, alpha).unwrap();
            prop_assert!(!b.reject || a.reject);
        }

        #[test]
        fn monotone_in_alpha(xs in prop::collection::vec(entry(), 1..=20), a1 in 0.001f64..0.999, a2 in 0.001f64..0.999) {
            let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
            let e = ev(&xs);
            let strat = LambdaStrategy::Constant(0.5);
            for (r_lo, r_hi) in [
                (test_max_average(&e, lo).unwrap(), test_max_average(&e, hi).unwrap()),
                (test_optimized_betting(&e, lo).unwrap(), test_optimized_betting(&e, hi).unwrap()),
                (test_ville(&e, &strat, lo).unwrap(), test_ville(&e, &strat, hi).unwrap()),
            ] {
                prop_assert!(!r_lo.reject || r_hi.reject);
            }
        }

        #[test]
        fn report_invariants(xs in prop::collection::vec(entry(), 1..=20), alpha in 0.001f64..0.999, lambda in 0.0f64..=1.0) {
            let e = ev(&xs);
            let strat = LambdaStrategy::Constant(lambda);
            let betting = test_optimized_betting(&e, alpha).unwrap();
            let ville = test_ville(&e, &strat, alpha).unwrap();
            for r in [test_max_average(&e, alpha).unwrap(), betting.clone(), ville.clone()] {
                prop_assert_eq!(r.reject, reaches_threshold(r.log_statistic, r.log_threshold));
                prop_assert!(r.p_bound > 0.0 || r.log_statistic.is_infinite());
                prop_assert!(r.p_bound <= 1.0);
                if r.reject {
                    prop_assert!(r.p_bound <= alpha * (1.0 + 1e-12));
                } else {
                    prop_assert!(r.p_bound > alpha * (1.0 - 1e-12));
                }
            }
            // Terminal Ville value never exceeds the optimized product.
            let ReportDetail::Ville(t) = &ville.detail else { unreachable!() };
            let terminal = t.log_trajectory.last().unwrap().log();
            prop_assert!(terminal <= betting.log_statistic.log() + 1e-12);
        }

        #[test]
        fn deterministic(xs in prop::collection::vec(entry(), 1..=20)) {
            let e = ev(&xs);
            prop_assert_eq!(test_max_average(&e, 0.05).unwrap(), test_max_average(&e, 0.05).unwrap());
            prop_assert_eq!(test_optimized_betting(&e, 0.05).unwrap(), test_optimized_betting(&e, 0.05).unwrap());
        }
    }
}
