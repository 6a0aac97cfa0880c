//! Exact rejection probabilities for finite-support scenarios.
//!
//! Probabilities and statistics are rational. The betting supremum is
//! decided without rounding: the endpoints and a floating-point witness are
//! checked exactly, and otherwise a Sturm sequence counts the roots of
//! `∏ (1 + (E_i − 1) λ) − t` in `(0, 1)`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::scenario::{Scenario, ScenarioKind, TwoPoint};
use crate::betting::{optimize_lambda, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::evalues::{validate_evalues, Regime};
use crate::testkit::StatisticKind;

/// Maximum number of support combinations visited.
pub const OUTCOME_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ExactStatistic {
    MaxAverage,
    OptimizedBetting,
    /// Ville's running maximum with a constant fraction.
    Ville { lambda: BigRational },
}

impl ExactStatistic {
    pub fn kind(&self) -> StatisticKind {
        match self {
            ExactStatistic::MaxAverage => StatisticKind::MaxAverage,
            ExactStatistic::OptimizedBetting => StatisticKind::OptimizedBetting,
            ExactStatistic::Ville { .. } => StatisticKind::VilleSequential,
        }
    }

    fn permutation_invariant(&self) -> bool {
        !matches!(self, ExactStatistic::Ville { .. })
    }
}

/// Reads `x` through its shortest decimal representation, so `0.1` becomes
/// `1/10` rather than the binary fraction nearest to it.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

/// Exact value of a plain decimal such as `-12.345` or `7`.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(numer, denom);
    Some(if neg { -r } else { r })
}

fn rat(x: f64) -> Result<BigRational> {
    rational_from_f64(x).ok_or_else(|| Error::Scenario(format!("{x} is not a finite decimal")))
}

fn rat_int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// A finite law written as a mixture, over states of weight `w`, of iid
/// coordinates, or as an explicit list of outcomes.
enum FiniteLaw {
    MixtureOfIid {
        /// Distinct support values; coordinates refer to them by index.
        values: Vec<BigRational>,
        /// `(weight, [(value index, probability)])` per state.
        states: Vec<(BigRational, Vec<(usize, BigRational)>)>,
        n: usize,
    },
    Explicit(Vec<(BigRational, Vec<BigRational>)>),
}

fn two_point_support(law: &TwoPoint) -> Result<Vec<(BigRational, BigRational)>> {
    let p = rat(law.p)?;
    let q = BigRational::one() - &p;
    let mut out = Vec::new();
    if !p.is_zero() {
        out.push((rat(law.hi)?, p));
    }
    if !q.is_zero() {
        out.push((rat(law.lo)?, q));
    }
    Ok(out)
}

fn finite_law(scenario: &Scenario) -> Result<FiniteLaw> {
    let states: Vec<(BigRational, TwoPoint)> = match &scenario.kind {
        ScenarioKind::IidTwoPoint(law) => vec![(BigRational::one(), *law)],
        ScenarioKind::SimultaneousFactor { states, .. } => states
            .iter()
            .map(|s| Ok((rat(s.weight)?, s.law)))
            .collect::<Result<_>>()?,
        ScenarioKind::SequentialAdversarial => {
            let half = BigRational::new(1.into(), 2.into());
            return Ok(FiniteLaw::Explicit(vec![
                (half, vec![rat_int(2), rat_int(1)]),
                (BigRational::new(1.into(), 16.into()), vec![rat_int(0), rat_int(8)]),
                (BigRational::new(7.into(), 16.into()), vec![rat_int(0), rat_int(0)]),
            ]));
        }
        ScenarioKind::IidLognormal { .. } => {
            return Err(Error::Scenario(format!("`{scenario}` does not have finite support")))
        }
    };
    let mut values: Vec<BigRational> = Vec::new();
    let mut mixed = Vec::new();
    for (weight, law) in states {
        let coords = two_point_support(&law)?
            .into_iter()
            .map(|(v, p)| {
                let idx = match values.iter().position(|u| *u == v) {
                    Some(i) => i,
                    None => {
                        values.push(v);
                        values.len() - 1
                    }
                };
                (idx, p)
            })
            .collect();
        mixed.push((weight, coords));
    }
    Ok(FiniteLaw::MixtureOfIid {
        values,
        states: mixed,
        n: scenario.n,
    })
}

/// Number of support combinations the enumerator would visit.
pub fn outcome_count(scenario: &Scenario) -> Result<u128> {
    Ok(match finite_law(scenario)? {
        FiniteLaw::Explicit(outcomes) => outcomes.len() as u128,
        FiniteLaw::MixtureOfIid { states, n, .. } => states
            .iter()
            .map(|(_, c)| (c.len() as u128).checked_pow(n as u32).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b)),
    })
}

/// `P(statistic ≥ threshold)` under the scenario, exactly.
pub fn enumerate_exact(
    scenario: &Scenario,
    threshold: &BigRational,
    statistic: &ExactStatistic,
) -> Result<BigRational> {
    let count = outcome_count(scenario)?;
    if count > OUTCOME_LIMIT {
        return Err(Error::SupportTooLarge {
            count,
            limit: OUTCOME_LIMIT,
        });
    }
    if let ExactStatistic::Ville { lambda } = statistic {
        if lambda.is_negative() || *lambda > BigRational::one() {
            return Err(Error::Scenario(format!("λ = {lambda} outside [0, 1]")));
        }
    }
    let mut total = BigRational::zero();
    match finite_law(scenario)? {
        FiniteLaw::Explicit(outcomes) => {
            for (p, x) in outcomes {
                if rejects(&x, threshold, statistic) {
                    total += p;
                }
            }
        }
        FiniteLaw::MixtureOfIid { values, states, n } => {
            let mut cache: HashMap<Vec<usize>, bool> = HashMap::new();
            for (weight, coords) in &states {
                // Tally every combination by its key; the probability of a
                // combination depends only on its multiset of indices.
                let mut tally: HashMap<Vec<usize>, u64> = HashMap::new();
                let m = coords.len();
                let mut digits = vec![0usize; n];
                loop {
                    let mut key: Vec<usize> = digits.clone();
                    if statistic.permutation_invariant() {
                        key.sort_unstable();
                    }
                    *tally.entry(key).or_insert(0) += 1;
                    // Odometer increment.
                    let mut pos = 0;
                    while pos < n {
                        digits[pos] += 1;
                        if digits[pos] < m {
                            break;
                        }
                        digits[pos] = 0;
                        pos += 1;
                    }
                    if pos == n {
                        break;
                    }
                }
                for (key, multiplicity) in tally {
                    let x: Vec<BigRational> = key.iter().map(|&d| values[coords[d].0].clone()).collect();
                    let reject = *cache
                        .entry(key.iter().map(|&d| coords[d].0).collect())
                        .or_insert_with(|| rejects(&x, threshold, statistic));
                    if reject {
                        let p = key
                            .iter()
                            .fold(weight.clone(), |acc, &d| acc * &coords[d].1);
                        total += p * rat_int(multiplicity as i64);
                    }
                }
            }
        }
    }
    Ok(total)
}

fn rejects(x: &[BigRational], t: &BigRational, statistic: &ExactStatistic) -> bool {
    match statistic {
        ExactStatistic::MaxAverage => exact_max_average(x) >= *t,
        ExactStatistic::OptimizedBetting => exact_betting_reaches(x, t),
        ExactStatistic::Ville { lambda } => exact_ville_max(x, lambda) >= *t,
    }
}

/// `max_k S_k / C(n, k)` in rational arithmetic.
pub fn exact_max_average(x: &[BigRational]) -> BigRational {
    let n = x.len();
    let mut s = vec![BigRational::zero(); n + 1];
    s[0] = BigRational::one();
    for (m, e) in x.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            let add = e * &s[j - 1];
            s[j] += add;
        }
    }
    let mut binom = BigInt::one();
    let mut best = BigRational::one();
    for (k, sk) in s.iter().enumerate().skip(1) {
        binom = binom * BigInt::from(n - k + 1) / BigInt::from(k);
        let a = sk / BigRational::from_integer(binom.clone());
        if a > best {
            best = a;
        }
    }
    best
}

/// `max_m ∏_{i≤m} (λ x_i + 1 − λ)`.
pub fn exact_ville_max(x: &[BigRational], lambda: &BigRational) -> BigRational {
    let keep = BigRational::one() - lambda;
    let mut running = BigRational::one();
    let mut best: Option<BigRational> = None;
    for e in x {
        running *= lambda * e + &keep;
        if best.as_ref().is_none_or(|b| running > *b) {
            best = Some(running.clone());
        }
    }
    best.unwrap_or_else(BigRational::one)
}

/// Polynomials over the rationals, coefficients in ascending degree.
type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn eval(p: &[BigRational], x: &BigRational) -> BigRational {
    p.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[BigRational]) -> Poly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * rat_int(i as i64))
            .collect(),
    )
}

fn remainder(a: &[BigRational], b: &[BigRational]) -> Poly {
    let mut r: Poly = a.to_vec();
    let db = b.len() - 1;
    let lead = &b[db];
    while r.len() > db {
        let dr = r.len() - 1;
        let q = &r[dr] / lead;
        for (i, c) in b.iter().enumerate() {
            let sub = &q * c;
            r[dr - db + i] -= sub;
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

/// Divides by `|leading coefficient|`; signs, and so root counts, are kept.
fn normalize(p: Poly) -> Poly {
    match p.last() {
        Some(lead) => {
            let scale = lead.abs();
            p.iter().map(|c| c / &scale).collect()
        }
        None => p,
    }
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<bool> = chain
        .iter()
        .map(|p| eval(p, x))
        .filter(|v| !v.is_zero())
        .map(|v| v.is_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Distinct real roots of `p` in `(a, b)`, for `p(a) ≠ 0 ≠ p(b)`.
pub fn count_roots_between(p: &[BigRational], a: &BigRational, b: &BigRational) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let mut chain = vec![normalize(p.clone()), normalize(derivative(&p))];
    loop {
        let k = chain.len();
        if chain[k - 1].is_empty() {
            chain.pop();
            break;
        }
        if chain[k - 1].len() == 1 {
            break;
        }
        let r = remainder(&chain[k - 2], &chain[k - 1]);
        chain.push(normalize(r.into_iter().map(|c| -c).collect()));
    }
    sign_changes(&chain, a).saturating_sub(sign_changes(&chain, b))
}

/// Decides `sup_{λ∈[0,1]} ∏ (1 + (x_i − 1) λ) ≥ t` exactly.
pub fn exact_betting_reaches(x: &[BigRational], t: &BigRational) -> bool {
    let one = BigRational::one();
    if one >= *t {
        return true;
    }
    let mut poly: Poly = vec![one.clone()];
    for e in x {
        let slope = e - &one;
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * &slope;
        }
        poly = next;
    }
    let poly = trim(poly);
    if eval(&poly, &one) >= *t {
        return true;
    }
    // A floating-point maximizer that already clears t is an exact certificate.
    let approx: Vec<f64> = x.iter().map(|v| v.to_f64().unwrap_or(f64::INFINITY)).collect();
    if let Ok(e) = validate_evalues(&approx, Regime::Unknown) {
        if let Ok(opt) = optimize_lambda(&e, DEFAULT_TOL) {
            if let Some(l) = BigRational::from_float(opt.lambda_star) {
                if l.is_positive() && l < one && eval(&poly, &l) >= *t {
                    return true;
                }
            }
        }
    }
    // Both endpoints are below t, so reaching t means crossing it inside.
    let mut shifted = poly;
    shifted[0] -= t;
    count_roots_between(&shifted, &BigRational::zero(), &one) > 0
}

/// `"p/q = decimal"`.
pub fn format_probability(p: &BigRational) -> String {
    format!("{}/{} = {}", p.numer(), p.denom(), p.to_f64().unwrap_or(f64::NAN))
}
