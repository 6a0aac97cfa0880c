//! Extended nonnegative reals stored as natural logarithms.
//!
//! `LogValue` covers `[0, ∞]`: a log magnitude of `-∞` encodes zero and `+∞`
//! encodes infinity. NaN is never stored. Multiplication follows the
//! convention `0 · ∞ = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);
    pub const INFINITY: LogValue = LogValue(f64::INFINITY);

    /// Encodes a nonnegative extended real.
    pub fn from_value(x: f64) -> Result<Self> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidValue(x));
        }
        Ok(LogValue(x.ln()))
    }

    /// Wraps a log magnitude directly. NaN is rejected.
    pub fn from_log(log_magnitude: f64) -> Result<Self> {
        if log_magnitude.is_nan() {
            return Err(Error::InvalidValue(log_magnitude));
        }
        Ok(LogValue(log_magnitude))
    }

    #[inline]
    pub fn log(self) -> f64 {
        self.0
    }

    /// Decodes to `f64`. Saturates to `f64::INFINITY` above `f64::MAX` and to
    /// zero below the subnormal range.
    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    #[inline]
    pub fn is_finite_positive(self) -> bool {
        self.0.is_finite()
    }

    /// `a + b` via the shifted-exponent formula.
    #[inline]
    pub fn log_add(self, other: LogValue) -> LogValue {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if lo == f64::NEG_INFINITY || hi == f64::INFINITY {
            return LogValue(hi);
        }
        LogValue(hi + (lo - hi).exp().ln_1p())
    }

    /// `a · b` with `0 · ∞ = 0`.
    #[inline]
    pub fn log_mul(self, other: LogValue) -> LogValue {
        if self.is_zero() || other.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 + other.0)
    }

    /// `a / b` for finite positive `b`.
    #[inline]
    pub fn log_div(self, other: LogValue) -> LogValue {
        debug_assert!(other.is_finite_positive());
        if self.is_zero() || self.is_infinite() {
            return self;
        }
        LogValue(self.0 - other.0)
    }

    /// Sum of a sequence, stable against overflow.
    pub fn sum<I: IntoIterator<Item = LogValue>>(values: I) -> LogValue {
        values.into_iter().fold(LogValue::ZERO, LogValue::log_add)
    }

    pub fn product<I: IntoIterator<Item = LogValue>>(values: I) -> LogValue {
        values.into_iter().fold(LogValue::ONE, LogValue::log_mul)
    }
}

impl Add for LogValue {
    type Output = LogValue;
    fn add(self, rhs: LogValue) -> LogValue {
        self.log_add(rhs)
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        self.log_mul(rhs)
    }
}

impl Eq for LogValue {}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LogValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Default for LogValue {
    fn default() -> Self {
        LogValue::ONE
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LogValue(ln = {})", self.0)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.value())
        }
    }
}

// JSON has no infinities, so the two sentinels travel as strings.
impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            serializer.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            serializer.serialize_str("-inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct LogVisitor;

        impl Visitor<'_> for LogVisitor {
            type Value = LogValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a log magnitude or one of \"inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<LogValue, E> {
                LogValue::from_log(v).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<LogValue, E> {
                Ok(LogValue(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<LogValue, E> {
                Ok(LogValue(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<LogValue, E> {
                match v {
                    "inf" => Ok(LogValue::INFINITY),
                    "-inf" => Ok(LogValue::ZERO),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(LogVisitor)
    }
}
