//! Validated e-value vectors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;

/// Declared dependence structure of a vector of e-values.
///
/// Metadata only: it selects which guarantees a report may cite and never
/// changes a computed statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Independent,
    Simultaneous,
    Sequential,
    #[default]
    Unknown,
}

impl Regime {
    /// Whether the batch tail bounds `P(stat ≥ t) ≤ 1/t` hold under this regime.
    pub fn supports_batch_bounds(self) -> bool {
        matches!(self, Regime::Independent | Regime::Simultaneous)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Independent => "independent",
            Regime::Simultaneous => "simultaneous",
            Regime::Sequential => "sequential",
            Regime::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "independent" => Ok(Regime::Independent),
            "simultaneous" => Ok(Regime::Simultaneous),
            "sequential" => Ok(Regime::Sequential),
            "unknown" => Ok(Regime::Unknown),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

/// A nonempty vector of e-values in `[0, ∞]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EValueVector {
    values: Vec<LogValue>,
    regime: Regime,
}

impl EValueVector {
    pub fn from_log_values(values: Vec<LogValue>, regime: Regime) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { values, regime })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn values(&self) -> &[LogValue] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = LogValue> + '_ {
        self.values.iter().copied()
    }

    /// Decoded values; entries above `f64::MAX` saturate to infinity.
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.value()).collect()
    }

    pub fn has_infinite(&self) -> bool {
        self.values.iter().any(|v| v.is_infinite())
    }

    pub fn has_zero(&self) -> bool {
        self.values.iter().any(|v| v.is_zero())
    }

    /// The vector with entry `i` removed, or `None` when `n == 1`.
    pub fn without(&self, i: usize) -> Option<EValueVector> {
        if self.values.len() <= 1 {
            return None;
        }
        let mut values = self.values.clone();
        values.remove(i);
        Some(Self {
            values,
            regime: self.regime,
        })
    }
}

/// Validates raw extended reals into an [`EValueVector`].
pub fn validate_evalues(raw: &[f64], regime: Regime) -> Result<EValueVector> {
    if raw.is_empty() {
        return Err(Error::Empty);
    }
    let values = raw
        .iter()
        .enumerate()
        .map(|(index, &x)| {
            if x.is_nan() {
                Err(Error::NotANumber { index })
            } else if x < 0.0 {
                Err(Error::Negative { index, value: x })
            } else {
                LogValue::from_value(x)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EValueVector { values, regime })
}
