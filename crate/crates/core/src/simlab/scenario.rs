//! Scenario definitions and the text grammar used on the command line:
//!
//! ```text
//! two_point:p=<real>,hi=<real>,lo=<real>,n=<int>,mean=<real>
//! lognormal:sigma=<real>,n=<int>[,mean=<real>]
//! factor:default,n=<int>
//! adversarial
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalues::Regime;

/// Slack when deciding whether a configured mean is at most 1.
pub const MEAN_SLACK: f64 = 1e-12;

/// `P(E = hi) = p`, `P(E = lo) = 1 − p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoint {
    pub p: f64,
    pub hi: f64,
    pub lo: f64,
}

impl TwoPoint {
    pub fn new(p: f64, hi: f64, lo: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Scenario(format!("probability p = {p} outside [0, 1]")));
        }
        for (name, v) in [("hi", hi), ("lo", lo)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Scenario(format!("support point {name} = {v} must be finite and nonnegative")));
            }
        }
        Ok(Self { p, hi, lo })
    }

    /// The two-point law with `P(hi) = p` whose mean is `mean`.
    pub fn with_mean(p: f64, lo: f64, mean: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Scenario(format!("p = {p} must lie in (0, 1] to solve for hi")));
        }
        let hi = (mean - (1.0 - p) * lo) / p;
        Self::new(p, hi, lo)
    }

    pub fn mean(&self) -> f64 {
        self.p * self.hi + (1.0 - self.p) * self.lo
    }

    pub fn is_valid_e_variable(&self) -> bool {
        self.mean() <= 1.0 + MEAN_SLACK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorState {
    /// `P(Z = this state)`.
    pub weight: f64,
    /// Law of each `E_i` given `Z = this state`.
    pub law: TwoPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    IidTwoPoint(TwoPoint),
    /// `E = mean · exp(σ Z − σ²/2)` with `Z` standard normal.
    IidLognormal { sigma: f64, mean: f64 },
    /// Conditionally iid two-point entries given a common discrete factor.
    SimultaneousFactor { states: Vec<FactorState>, default: bool },
    /// `E_1 ∈ {0, 2}` equiprobable; `E_2 = 1` after 2, and `E_2 ∈ {0, 8}` with
    /// `P(8) = 1/8` after 0. Sequential but not simultaneous.
    SequentialAdversarial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
}

impl Scenario {
    pub fn two_point(law: TwoPoint, n: usize) -> Result<Self> {
        Self::checked(ScenarioKind::IidTwoPoint(law), n)
    }

    pub fn lognormal(sigma: f64, mean: f64, n: usize) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::Scenario(format!("sigma = {sigma} must be finite and nonnegative")));
        }
        if !mean.is_finite() || mean < 0.0 {
            return Err(Error::Scenario(format!("mean = {mean} must be finite and nonnegative")));
        }
        Self::checked(ScenarioKind::IidLognormal { sigma, mean }, n)
    }

    /// `Z` equiprobable on {high, low}; given high each entry is `{0, 4}` with
    /// `P(4) = 1/4`, given low it is `{0.5, 1.5}` equiprobable. Both
    /// conditional means are 1.
    pub fn default_factor(n: usize) -> Result<Self> {
        let states = vec![
            FactorState {
                weight: 0.5,
                law: TwoPoint::new(0.25, 4.0, 0.0)?,
            },
            FactorState {
                weight: 0.5,
                law: TwoPoint::new(0.5, 1.5, 0.5)?,
            },
        ];
        Self::checked(ScenarioKind::SimultaneousFactor { states, default: true }, n)
    }

    pub fn factor(states: Vec<FactorState>, n: usize) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Scenario("factor needs at least one state".into()));
        }
        let total: f64 = states.iter().map(|s| s.weight).sum();
        if states.iter().any(|s| s.weight.is_nan() || s.weight <= 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Scenario("factor weights must be positive and sum to 1".into()));
        }
        Self::checked(ScenarioKind::SimultaneousFactor { states, default: false }, n)
    }

    pub fn adversarial() -> Self {
        Scenario {
            kind: ScenarioKind::SequentialAdversarial,
            n: 2,
        }
    }

    fn checked(kind: ScenarioKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Scenario("n must be at least 1".into()));
        }
        Ok(Scenario { kind, n })
    }

    /// Whether every entry is a (conditionally) valid e-variable.
    pub fn is_null(&self) -> bool {
        match &self.kind {
            ScenarioKind::IidTwoPoint(law) => law.is_valid_e_variable(),
            ScenarioKind::IidLognormal { mean, .. } => *mean <= 1.0 + MEAN_SLACK,
            ScenarioKind::SimultaneousFactor { states, .. } => {
                states.iter().all(|s| s.law.is_valid_e_variable())
            }
            ScenarioKind::SequentialAdversarial => true,
        }
    }

    /// Marginal mean of each entry.
    pub fn marginal_mean(&self) -> f64 {
        match &self.kind {
            ScenarioKind::IidTwoPoint(law) => law.mean(),
            ScenarioKind::IidLognormal { mean, .. } => *mean,
            ScenarioKind::SimultaneousFactor { states, .. } => {
                states.iter().map(|s| s.weight * s.law.mean()).sum()
            }
            ScenarioKind::SequentialAdversarial => 1.0,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.kind {
            ScenarioKind::IidTwoPoint(_) | ScenarioKind::IidLognormal { .. } => Regime::Independent,
            ScenarioKind::SimultaneousFactor { .. } => Regime::Simultaneous,
            ScenarioKind::SequentialAdversarial => Regime::Sequential,
        }
    }

    pub fn is_iid(&self) -> bool {
        self.regime() == Regime::Independent
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ScenarioKind::IidTwoPoint(l) => {
                write!(f, "two_point:p={},hi={},lo={},n={}", l.p, l.hi, l.lo, self.n)
            }
            ScenarioKind::IidLognormal { sigma, mean } => {
                write!(f, "lognormal:sigma={sigma},n={},mean={mean}", self.n)
            }
            ScenarioKind::SimultaneousFactor { default: true, .. } => {
                write!(f, "factor:default,n={}", self.n)
            }
            ScenarioKind::SimultaneousFactor { states, .. } => {
                write!(f, "factor:custom[{} states],n={}", states.len(), self.n)
            }
            ScenarioKind::SequentialAdversarial => f.write_str("adversarial"),
        }
    }
}

fn parse_params(body: &str) -> Result<(Vec<&str>, BTreeMap<&str, &str>)> {
    let mut flags = Vec::new();
    let mut params = BTreeMap::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => {
                if params.insert(k.trim(), v.trim()).is_some() {
                    return Err(Error::Scenario(format!("parameter `{}` given twice", k.trim())));
                }
            }
            None => flags.push(item),
        }
    }
    Ok((flags, params))
}

fn take_real(params: &mut BTreeMap<&str, &str>, key: &str) -> Result<Option<f64>> {
    params
        .remove(key)
        .map(|v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| Error::Scenario(format!("`{key}` is not a number: `{v}`")))
        })
        .transpose()
}

fn take_n(params: &mut BTreeMap<&str, &str>) -> Result<usize> {
    let v = params
        .remove("n")
        .ok_or_else(|| Error::Scenario("missing `n`".into()))?;
    v.parse::<usize>()
        .map_err(|_| Error::Scenario(format!("`n` is not a positive integer: `{v}`")))
}

fn reject_leftovers(flags: &[&str], params: &BTreeMap<&str, &str>) -> Result<()> {
    if let Some(flag) = flags.first() {
        return Err(Error::Scenario(format!("unexpected item `{flag}`")));
    }
    if let Some(key) = params.keys().next() {
        return Err(Error::Scenario(format!("unknown parameter `{key}`")));
    }
    Ok(())
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = s.split_once(':').unwrap_or((s, ""));
        let (mut flags, mut params) = parse_params(body)?;
        match head.trim() {
            "adversarial" => {
                reject_leftovers(&flags, &params)?;
                Ok(Scenario::adversarial())
            }
            "two_point" => {
                let p = take_real(&mut params, "p")?
                    .ok_or_else(|| Error::Scenario("missing `p`".into()))?;
                let hi = take_real(&mut params, "hi")?;
                let lo = take_real(&mut params, "lo")?.unwrap_or(0.0);
                let mean = take_real(&mut params, "mean")?;
                let n = take_n(&mut params)?;
                reject_leftovers(&flags, &params)?;
                let law = match (hi, mean) {
                    (Some(hi), None) => TwoPoint::new(p, hi, lo)?,
                    (None, mean) => TwoPoint::with_mean(p, lo, mean.unwrap_or(1.0))?,
                    (Some(hi), Some(mean)) => {
                        let law = TwoPoint::new(p, hi, lo)?;
                        if (law.mean() - mean).abs() > 1e-12 * mean.abs().max(1.0) {
                            return Err(Error::Scenario(format!(
                                "p·hi + (1−p)·lo = {} disagrees with mean = {mean}",
                                law.mean()
                            )));
                        }
                        law
                    }
                };
                Scenario::two_point(law, n)
            }
            "lognormal" => {
                let sigma = take_real(&mut params, "sigma")?
                    .ok_or_else(|| Error::Scenario("missing `sigma`".into()))?;
                let mean = take_real(&mut params, "mean")?.unwrap_or(1.0);
                let n = take_n(&mut params)?;
                reject_leftovers(&flags, &params)?;
                Scenario::lognormal(sigma, mean, n)
            }
            "factor" => {
                let n = take_n(&mut params)?;
                match flags.iter().position(|f| *f == "default") {
                    Some(i) => {
                        flags.remove(i);
                    }
                    None => return Err(Error::Scenario("only `factor:default` is supported".into())),
                }
                reject_leftovers(&flags, &params)?;
                Scenario::default_factor(n)
            }
            other => Err(Error::Scenario(format!("unknown scenario `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_laws() {
        let l = TwoPoint::new(0.5, 2.0, 0.0).unwrap();
        assert_eq!(l.mean(), 1.0);
        assert!(l.is_valid_e_variable());
        let l = TwoPoint::new(0.5, 2.4, 0.0).unwrap();
        assert!((l.mean() - 1.2).abs() < 1e-15);
        assert!(!Scenario::two_point(l, 3).unwrap().is_null());
        assert!(TwoPoint::new(1.5, 1.0, 0.0).is_err());
        assert!(TwoPoint::new(0.5, -1.0, 0.0).is_err());
        let l = TwoPoint::with_mean(0.25, 0.0, 1.0).unwrap();
        assert_eq!(l.hi, 4.0);
    }

    #[test]
    fn default_factor_is_null_with_unit_mean() {
        let s = Scenario::default_factor(5).unwrap();
        assert!(s.is_null());
        assert_eq!(s.marginal_mean(), 1.0);
        assert_eq!(s.regime(), Regime::Simultaneous);
    }

    #[test]
    fn parses_grammar() {
        let s: Scenario = "two_point:p=0.5,hi=2,lo=0,n=10,mean=1".parse().unwrap();
        assert_eq!(s.n, 10);
        assert!(s.is_null());
        let s: Scenario = "two_point:p=0.5,lo=0,n=4,mean=1.2".parse().unwrap();
        assert!(matches!(s.kind, ScenarioKind::IidTwoPoint(l) if (l.hi - 2.4).abs() < 1e-15));
        assert!(!s.is_null());
        let s: Scenario = "two_point:p=0.1,n=3".parse().unwrap();
        assert!(matches!(s.kind, ScenarioKind::IidTwoPoint(l) if (l.hi - 10.0).abs() < 1e-12));
        let s: Scenario = "factor:default,n=8".parse().unwrap();
        assert_eq!(s, Scenario::default_factor(8).unwrap());
        assert_eq!("adversarial".parse::<Scenario>().unwrap(), Scenario::adversarial());
        let s: Scenario = "lognormal:sigma=1,n=50".parse().unwrap();
        assert!(s.is_null());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "two_point:p=2,hi=1,n=3",
            "two_point:p=0.5,hi=2,n=3,mean=5",
            "two_point:hi=2,n=3",
            "two_point:p=0.5,hi=2",
            "two_point:p=0.5,hi=2,n=0",
            "two_point:p=0.5,hi=x,n=3",
            "two_point:p=0.5,hi=2,n=3,q=1",
            "factor:n=3",
            "factor:default,n=2,extra",
            "adversarial:n=3",
            "cauchy:n=3",
        ] {
            assert!(bad.parse::<Scenario>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["two_point:p=0.5,hi=2,lo=0,n=10", "factor:default,n=8", "adversarial", "lognormal:sigma=0.5,n=7,mean=1"] {
            let parsed: Scenario = s.parse().unwrap();
            assert_eq!(parsed.to_string(), s);
        }
    }
}
