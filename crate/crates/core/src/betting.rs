//! The constant-fraction betting product `M_n(λ) = ∏ (1 − λ + λ E_i)` and its
//! maximization over `λ ∈ [0, 1]`.
//!
//! `log M_n` is concave in `λ` (strictly, unless every entry is 1), so its
//! derivative is nonincreasing and the maximizer is located by bisection on
//! the derivative sign. Each evaluation is `O(n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::EValueVector;
use crate::logvalue::LogValue;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Reported when some entry is infinite: every `λ ∈ (0, 1)` gives `M_n = ∞`.
pub const INFINITE_WITNESS_LAMBDA: f64 = 0.5;

const MAX_ITERATIONS: u32 = 200;

/// Largest `f64` strictly below 1.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Interior,
    AtZero,
    AtOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BettingOptimum {
    pub lambda_star: f64,
    /// `log M_n(λ*)`, never below 0.
    pub log_value: LogValue,
    pub boundary: Boundary,
    pub iterations: u32,
    /// Width of the final bisection bracket.
    pub achieved_tol: f64,
    /// Set when an infinite entry makes the supremum infinite and
    /// `lambda_star` is only a representative maximizer.
    pub infinite_witness: bool,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::LambdaOutOfRange(lambda))
    }
}

/// `log (1 − λ + λ x)` for an encoded `x`.
#[inline]
pub(crate) fn log_factor(x: LogValue, lambda: f64) -> LogValue {
    if lambda == 0.0 {
        LogValue::ONE
    } else if lambda == 1.0 {
        x
    } else {
        let bet = LogValue::from_log(lambda.ln() + x.log()).unwrap_or(LogValue::ZERO);
        let keep = LogValue::from_log((-lambda).ln_1p()).expect("λ < 1");
        bet.log_add(keep)
    }
}

/// `log M_n(λ)`.
pub fn product_value(e: &EValueVector, lambda: f64) -> Result<LogValue> {
    check_lambda(lambda)?;
    Ok(product_unchecked(e.values(), lambda))
}

pub(crate) fn product_unchecked(values: &[LogValue], lambda: f64) -> LogValue {
    values
        .iter()
        .fold(LogValue::ONE, |acc, &x| acc.log_mul(log_factor(x, lambda)))
}

/// `d/dλ log M_n(λ) = Σ (E_i − 1) / (1 − λ + λ E_i)`.
pub fn score_derivative(e: &EValueVector, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if e.has_infinite() {
        return Err(Error::InfiniteEntry("derivative requires finite entries"));
    }
    if lambda == 1.0 && e.has_zero() {
        return Err(Error::ZeroFactor(lambda));
    }
    Ok(score_unchecked(e.values(), lambda))
}

#[inline]
fn score_unchecked(values: &[LogValue], lambda: f64) -> f64 {
    values
        .iter()
        .map(|x| {
            let l = x.log();
            if l > 0.0 {
                // Divide through by x so large entries cannot overflow.
                let inv = (-l).exp();
                (1.0 - inv) / (lambda + (1.0 - lambda) * inv)
            } else {
                let v = l.exp();
                (v - 1.0) / ((1.0 - lambda) + lambda * v)
            }
        })
        .sum()
}

/// Maximizes `log M_n(λ)` over `[0, 1]` to within `tol` in `λ`.
pub fn optimize_lambda(e: &EValueVector, tol: f64) -> Result<BettingOptimum> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidTolerance(tol));
    }
    let values = e.values();

    if e.has_infinite() {
        return Ok(BettingOptimum {
            lambda_star: INFINITE_WITNESS_LAMBDA,
            log_value: LogValue::INFINITY,
            boundary: Boundary::Interior,
            iterations: 0,
            achieved_tol: 0.0,
            infinite_witness: true,
        });
    }

    let boundary_optimum = |lambda_star, log_value, boundary| BettingOptimum {
        lambda_star,
        log_value,
        boundary,
        iterations: 0,
        achieved_tol: 0.0,
        infinite_witness: false,
    };

    // Derivative at 0 is Σ (E_i − 1): nonpositive means mean ≤ 1.
    if score_unchecked(values, 0.0) <= 0.0 {
        return Ok(boundary_optimum(0.0, LogValue::ONE, Boundary::AtZero));
    }

    let has_zero = e.has_zero();
    if !has_zero && score_unchecked(values, 1.0) >= 0.0 {
        let v = product_unchecked(values, 1.0);
        return Ok(boundary_optimum(1.0, v.max(LogValue::ONE), Boundary::AtOne));
    }

    // With a zero entry the objective falls to −∞ at 1 and the derivative
    // diverges, so the bracket stops just short of it.
    let (mut lo, mut hi) = (0.0f64, if has_zero { BELOW_ONE } else { 1.0 });
    let mut iterations = 0;
    while hi - lo > tol && iterations < MAX_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let d = score_unchecked(values, mid);
        if d > 0.0 {
            lo = mid;
        } else if d < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            hi = mid;
        }
    }
    let lambda_star = 0.5 * (lo + hi);
    let log_value = product_unchecked(values, lambda_star).max(LogValue::ONE);
    Ok(BettingOptimum {
        lambda_star,
        log_value,
        boundary: Boundary::Interior,
        iterations,
        achieved_tol: hi - lo,
        infinite_witness: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalues::{validate_evalues, Regime};
    use crate::sympoly::symmetric_averages;
    use proptest::prelude::*;

    fn ev(xs: &[f64]) -> EValueVector {
        validate_evalues(xs, Regime::Independent).unwrap()
    }

    /// Direct f64 product on a grid, independent of the optimizer.
    fn grid_max(xs: &[f64], steps: usize) -> (f64, f64) {
        let mut best = (0.0, f64::NEG_INFINITY);
        for i in 0..=steps {
            let lambda = i as f64 / steps as f64;
            let v: f64 = xs.iter().map(|&x| (1.0 - lambda + lambda * x).ln()).sum();
            if v > best.1 {
                best = (lambda, v);
            }
        }
        best
    }

    #[test]
    fn product_examples() {
        assert!((product_value(&ev(&[2.0, 2.0, 2.0]), 1.0).unwrap().value() - 8.0).abs() < 1e-14);
        assert_eq!(product_value(&ev(&[0.0, 3.0, f64::INFINITY]), 0.0).unwrap(), LogValue::ONE);
        let v = product_value(&ev(&[0.0, 8.0]), 3.0 / 7.0).unwrap();
        assert!((v.value() - 16.0 / 7.0).abs() < 1e-14);
        assert!(product_value(&ev(&[0.0, 8.0]), 1.0).unwrap().is_zero());
        assert!(product_value(&ev(&[0.5, f64::INFINITY]), 0.1).unwrap().is_infinite());
        // 0 · ∞ = 0 at λ = 1.
        assert!(product_value(&ev(&[0.0, f64::INFINITY]), 1.0).unwrap().is_zero());
        assert!(product_value(&ev(&[1.0]), 1.01).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(score_derivative(&ev(&[1.0, 1.0]), 0.37).unwrap(), 0.0);
        assert!(score_derivative(&ev(&[0.0, 8.0]), 3.0 / 7.0).unwrap().abs() < 1e-14);
        assert!((score_derivative(&ev(&[0.5, 0.5]), 0.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(score_derivative(&ev(&[0.0, 8.0]), 1.0), Err(Error::ZeroFactor(_))));
        assert!(score_derivative(&ev(&[f64::INFINITY]), 0.5).is_err());
    }

    #[test]
    fn optimizer_examples() {
        let o = optimize_lambda(&ev(&[0.5, 0.5]), DEFAULT_TOL).unwrap();
        assert_eq!((o.lambda_star, o.log_value, o.boundary), (0.0, LogValue::ONE, Boundary::AtZero));
        assert_eq!(grid_max(&[0.5, 0.5], 10_000).0, 0.0);

        let o = optimize_lambda(&ev(&[0.0, 8.0]), DEFAULT_TOL).unwrap();
        assert_eq!(o.boundary, Boundary::Interior);
        assert!((o.lambda_star - 3.0 / 7.0).abs() <= DEFAULT_TOL);
        assert!((o.log_value.value() - 16.0 / 7.0).abs() < 1e-12);
        assert!((grid_max(&[0.0, 8.0], 10_000).0 - 3.0 / 7.0).abs() < 1e-4);
        assert!(o.achieved_tol <= DEFAULT_TOL);

        let o = optimize_lambda(&ev(&[1.0, 1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!((o.lambda_star, o.log_value), (0.0, LogValue::ONE));

        let o = optimize_lambda(&ev(&[2.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!((o.lambda_star, o.boundary), (1.0, Boundary::AtOne));
        assert_eq!(o.log_value.log(), 2f64.ln());
        assert_eq!(grid_max(&[2.0, 1.0], 10_000).0, 1.0);
    }

    #[test]
    fn optimizer_infinite_and_errors() {
        let o = optimize_lambda(&ev(&[0.0, f64::INFINITY]), DEFAULT_TOL).unwrap();
        assert!(o.log_value.is_infinite());
        assert!(o.infinite_witness);
        assert_eq!(o.lambda_star, INFINITE_WITNESS_LAMBDA);
        assert!(optimize_lambda(&ev(&[2.0]), 0.0).is_err());
        assert!(optimize_lambda(&ev(&[2.0]), f64::NAN).is_err());
    }

    #[test]
    fn optimizer_handles_huge_entries() {
        let mut e = ev(&[0.0, 0.0, 0.0]).values().to_vec();
        e.push(LogValue::from_log(2000.0).unwrap());
        let e = EValueVector::from_log_values(e, Regime::Independent).unwrap();
        let o = optimize_lambda(&e, DEFAULT_TOL).unwrap();
        // (1 − λ)^3 (λ x) is maximized near λ = 1/4 once x dominates.
        assert!((o.lambda_star - 0.25).abs() < 1e-9);
        assert!(o.log_value.log().is_finite());
    }

    #[test]
    fn interior_bracket_contains_sign_change() {
        let e = ev(&[0.0, 3.0, 0.4, 2.2, 1.9]);
        let o = optimize_lambda(&e, 1e-12).unwrap();
        assert_eq!(o.boundary, Boundary::Interior);
        let h = 1e-9;
        assert!(score_derivative(&e, o.lambda_star - h).unwrap() > 0.0);
        assert!(score_derivative(&e, o.lambda_star + h).unwrap() < 0.0);
    }

    fn entry() -> impl Strategy<Value = f64> {
        prop_oneof![
            1 => Just(0.0),
            4 => 0.0f64..3.0,
            1 => 0.0f64..20.0,
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn agrees_with_grid(xs in prop::collection::vec(entry(), 1..=30)) {
            let o = optimize_lambda(&ev(&xs), DEFAULT_TOL).unwrap();
            let (gl, gv) = grid_max(&xs, 100_000);
            let gv = gv.max(0.0);
            prop_assert!(o.log_value.log() >= gv - 1e-12);
            prop_assert!((o.log_value.log() - gv).abs() <= 1e-8, "{} vs {}", o.log_value.log(), gv);
            prop_assert!((o.lambda_star - gl).abs() <= 2e-5 || (o.log_value.log() - gv).abs() <= 1e-12);
        }

        #[test]
        fn dominated_by_max_average(xs in prop::collection::vec(entry(), 1..=30)) {
            let e = ev(&xs);
            let o = optimize_lambda(&e, DEFAULT_TOL).unwrap();
            prop_assert!(o.log_value.log() <= symmetric_averages(&e).log_max.log() + 1e-12);
        }

        #[test]
        fn derivative_nonincreasing(xs in prop::collection::vec(0.05f64..10.0, 1..=30)) {
            let e = ev(&xs);
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let d = score_derivative(&e, i as f64 / 100.0).unwrap();
                prop_assert!(d <= prev + 1e-12 * prev.abs().max(1.0));
                prev = d;
            }
        }

        #[test]
        fn zero_exactly_when_mean_at_most_one(xs in prop::collection::vec(entry(), 1..=30)) {
            let o = optimize_lambda(&ev(&xs), DEFAULT_TOL).unwrap();
            let excess: f64 = xs.iter().map(|x| x - 1.0).sum();
            prop_assert_eq!(o.lambda_star == 0.0, excess <= 0.0);
        }

        #[test]
        fn permutation_invariant(mut xs in prop::collection::vec(entry(), 2..=30)) {
            let a = optimize_lambda(&ev(&xs), DEFAULT_TOL).unwrap();
            xs.reverse();
            let b = optimize_lambda(&ev(&xs), DEFAULT_TOL).unwrap();
            prop_assert!((a.log_value.log() - b.log_value.log()).abs() <= 1e-12 * a.log_value.log().abs().max(1.0));
        }
    }
}
