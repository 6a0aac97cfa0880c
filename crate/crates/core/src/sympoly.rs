//! Elementary symmetric polynomials and their averages.
//!
//! `S_k(E)` is the sum of all products of `k` distinct entries and
//! `A_k(E) = S_k(E) / C(n, k)` with `A_0 = 1`. The statistic
//! `max_{0≤k≤n} A_k(E)` is the more powerful of the two batch combinations.
//!
//! Everything is evaluated in log domain: for `n = 2000` and entries near 10
//! the sums leave the `f64` range by hundreds of orders of magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::EValueVector;
use crate::logvalue::LogValue;

/// Largest `n` accepted by [`naive_symmetric_sums`].
pub const NAIVE_LIMIT: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricAverages {
    /// `log S_0, .., log S_n`.
    pub log_s: Vec<LogValue>,
    /// `log A_0, .., log A_n`.
    pub log_a: Vec<LogValue>,
    /// Smallest `k` attaining the maximum.
    pub argmax_k: usize,
    pub log_max: LogValue,
}

impl SymmetricAverages {
    pub fn n(&self) -> usize {
        self.log_a.len() - 1
    }

    /// True when no `A_k` with `k ≥ 1` exceeds `A_0 = 1`.
    pub fn max_is_trivial(&self) -> bool {
        self.argmax_k == 0
    }
}

/// `log S_0, .., log S_n` by the recursion
/// `s_j^(m) = s_j^(m-1) + E_m s_{j-1}^(m-1)`, in `O(n²)` log-domain steps.
pub fn symmetric_sums(e: &EValueVector) -> Vec<LogValue> {
    symmetric_sums_of(e.values())
}

pub(crate) fn symmetric_sums_of(values: &[LogValue]) -> Vec<LogValue> {
    let n = values.len();
    let mut s = vec![LogValue::ZERO; n + 1];
    s[0] = LogValue::ONE;
    for (m, &em) in values.iter().enumerate() {
        // Descending j so s[j - 1] still holds the previous row.
        for j in (1..=m + 1).rev() {
            s[j] = s[j].log_add(em.log_mul(s[j - 1]));
        }
    }
    s
}

/// `log S_k` by summing over all `2^n` subsets. Refuses `n > 22`.
pub fn naive_symmetric_sums(e: &EValueVector) -> Result<Vec<LogValue>> {
    let n = e.len();
    if n > NAIVE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: NAIVE_LIMIT,
        });
    }
    let values = e.values();
    let mut s = vec![LogValue::ZERO; n + 1];
    for mask in 0u32..(1u32 << n) {
        let mut term = LogValue::ONE;
        for (i, &v) in values.iter().enumerate() {
            if mask & (1 << i) != 0 {
                term = term.log_mul(v);
            }
        }
        let k = mask.count_ones() as usize;
        s[k] = s[k].log_add(term);
    }
    Ok(s)
}

/// `log C(n, k)` for `k = 0..=n`, from cumulative sums of `ln i`.
pub fn log_binomials(n: usize) -> Vec<f64> {
    let lf = log_factorials(n);
    (0..=n).map(|k| lf[n] - lf[k] - lf[n - k]).collect()
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    lf.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        lf.push(acc);
    }
    lf
}

pub fn symmetric_averages(e: &EValueVector) -> SymmetricAverages {
    let log_s = symmetric_sums(e);
    averages_from_sums(log_s)
}

pub(crate) fn averages_from_sums(log_s: Vec<LogValue>) -> SymmetricAverages {
    let n = log_s.len() - 1;
    let lb = log_binomials(n);
    let mut log_a: Vec<LogValue> = log_s
        .iter()
        .zip(&lb)
        .map(|(&s, &c)| match s.log() {
            l if l.is_finite() => LogValue::from_log(l - c).expect("finite"),
            _ => s,
        })
        .collect();
    log_a[0] = LogValue::ONE;

    let mut argmax_k = 0;
    let mut log_max = log_a[0];
    for (k, &a) in log_a.iter().enumerate().skip(1) {
        if a > log_max {
            argmax_k = k;
            log_max = a;
        }
    }
    SymmetricAverages {
        log_s,
        log_a,
        argmax_k,
        log_max,
    }
}

/// `∏ (λE_i + 1 − λ)` evaluated as `Σ_k λ^k (1 − λ)^{n−k} S_k`, the binomial
/// mixture of the averages `A_k`.
pub fn mixture_value(e: &EValueVector, lambda: f64) -> Result<LogValue> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::LambdaOutOfRange(lambda));
    }
    let n = e.len();
    let log_s = symmetric_sums(e);
    let ln_l = lambda.ln();
    let ln_1ml = (-lambda).ln_1p();
    // 0^0 = 1 for the boundary terms.
    let pow = |count: usize, ln_base: f64| if count == 0 { 0.0 } else { count as f64 * ln_base };
    let terms = log_s.iter().enumerate().map(|(k, &s)| {
        let w = pow(k, ln_l) + pow(n - k, ln_1ml);
        if w == f64::NEG_INFINITY {
            LogValue::ZERO
        } else {
            s.log_mul(LogValue::from_log(w).expect("weight is not NaN"))
        }
    });
    Ok(LogValue::sum(terms))
}

/// Normalized residual of
/// `A_{k+1} − A_k = (1 / (n C(n−1, k))) Σ_i (E_i − 1) S_k(E_{−i})`.
///
/// The difference of the two sides is divided by `max(1, A_{k+1}, A_k)`.
pub fn identity_residual(e: &EValueVector, k: usize) -> Result<f64> {
    let n = e.len();
    if k >= n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    Ok(identity_residuals(e)?[k])
}

/// [`identity_residual`] for every `k = 0..n−1`, sharing the leave-one-out sums.
pub fn identity_residuals(e: &EValueVector) -> Result<Vec<f64>> {
    if e.has_infinite() {
        return Err(Error::InfiniteEntry(
            "identity residual requires finite entries",
        ));
    }
    let n = e.len();
    let values = e.values();
    let avg = symmetric_averages(e);
    let leave_one_out: Vec<Vec<LogValue>> = (0..n)
        .map(|i| {
            let rest: Vec<LogValue> = values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &v)| v)
                .collect();
            symmetric_sums_of(&rest)
        })
        .collect();
    let shifted: Vec<(f64, f64)> = values.iter().map(|&v| signed_log_minus_one(v)).collect();
    let lb_rest = log_binomials(n - 1);
    let ln_n = (n as f64).ln();

    let residuals = (0..n)
        .map(|k| {
            let la_next = avg.log_a[k + 1].log();
            let la = avg.log_a[k].log();
            let scale = la_next.max(la).max(0.0);
            let lhs = (la_next - scale).exp() - (la - scale).exp();
            let denom = ln_n + lb_rest[k];
            let rhs: f64 = shifted
                .iter()
                .zip(&leave_one_out)
                .map(|(&(sign, ln_abs), s_rest)| {
                    let l = ln_abs + s_rest[k].log() - denom - scale;
                    if l == f64::NEG_INFINITY || l.is_nan() {
                        0.0
                    } else {
                        sign * l.exp()
                    }
                })
                .sum();
            lhs - rhs
        })
        .collect();
    Ok(residuals)
}

/// `(sign, ln |x − 1|)` for an encoded `x`.
fn signed_log_minus_one(v: LogValue) -> (f64, f64) {
    let l = v.log();
    if l == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else if l > 0.0 {
        // x − 1 = x (1 − 1/x)
        (1.0, l + (-(-l).exp()).ln_1p())
    } else {
        // 1 − x
        (-1.0, (-l.exp()).ln_1p())
    }
}
