//! Semiring element arithmetic.
//!
//! Every element is a single machine word ([`Value`]), so one element fits
//! in one simulated message. The tropical semiring reserves [`TROPICAL_INF`]
//! as its additive identity.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

/// A semiring element.
pub type Value = i64;

/// Additive identity of the tropical (min, +) semiring.
pub const TROPICAL_INF: Value = i64::MAX;

/// The semirings shipped with the library.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Semiring {
    /// Integers modulo 2^64 under wrapping `+` and `*`. A commutative ring.
    Integer,
    /// `{0, 1}` under `or` and `and`.
    Boolean,
    /// `(min, +)` over `i64` with `+inf` as zero and `0` as one.
    Tropical,
}

impl Semiring {
    pub const ALL: [Semiring; 3] = [Semiring::Integer, Semiring::Boolean, Semiring::Tropical];

    pub fn name(self) -> &'static str {
        match self {
            Semiring::Integer => "integer",
            Semiring::Boolean => "boolean",
            Semiring::Tropical => "tropical",
        }
    }

    #[inline]
    pub fn zero(self) -> Value {
        match self {
            Semiring::Integer | Semiring::Boolean => 0,
            Semiring::Tropical => TROPICAL_INF,
        }
    }

    #[inline]
    pub fn one(self) -> Option<Value> {
        Some(match self {
            Semiring::Integer | Semiring::Boolean => 1,
            Semiring::Tropical => 0,
        })
    }

    /// Additive inverse, present only for rings.
    #[inline]
    pub fn neg(self, a: Value) -> Option<Value> {
        match self {
            Semiring::Integer => Some(a.wrapping_neg()),
            Semiring::Boolean | Semiring::Tropical => None,
        }
    }

    pub fn is_ring(self) -> bool {
        self.neg(0).is_some()
    }

    #[inline]
    pub fn add(self, a: Value, b: Value) -> Value {
        match self {
            Semiring::Integer => a.wrapping_add(b),
            Semiring::Boolean => a | b,
            Semiring::Tropical => a.min(b),
        }
    }

    #[inline]
    pub fn mul(self, a: Value, b: Value) -> Value {
        match self {
            Semiring::Integer => a.wrapping_mul(b),
            Semiring::Boolean => a & b,
            Semiring::Tropical => {
                if a == TROPICAL_INF || b == TROPICAL_INF {
                    TROPICAL_INF
                } else {
                    // finite sums stay strictly below the sentinel
                    a.saturating_add(b).min(TROPICAL_INF - 1)
                }
            }
        }
    }

    pub fn sum<I: IntoIterator<Item = Value>>(self, values: I) -> Value {
        values.into_iter().fold(self.zero(), |acc, v| self.add(acc, v))
    }

    /// Whether `v` is a legal element of this semiring.
    pub fn contains(self, v: Value) -> bool {
        match self {
            Semiring::Boolean => v == 0 || v == 1,
            Semiring::Integer | Semiring::Tropical => true,
        }
    }

    /// Draws a small element, with the zero element appearing occasionally.
    ///
    /// Tropical draws stay far from the sentinel so products never saturate.
    pub fn random_value<R: Rng + ?Sized>(self, rng: &mut R) -> Value {
        match self {
            Semiring::Integer => rng.gen_range(-9..=9),
            Semiring::Boolean => i64::from(rng.gen_bool(0.7)),
            Semiring::Tropical => {
                if rng.gen_bool(0.1) {
                    TROPICAL_INF
                } else {
                    rng.gen_range(-50..=50)
                }
            }
        }
    }

    pub fn format_value(self, v: Value) -> String {
        if self == Semiring::Tropical && v == TROPICAL_INF {
            "inf".to_string()
        } else {
            v.to_string()
        }
    }

    pub fn parse_value(self, s: &str) -> Result<Value, ParseSemiringError> {
        let v = if self == Semiring::Tropical && (s == "inf" || s == "+inf") {
            TROPICAL_INF
        } else {
            s.parse::<Value>()
                .map_err(|_| ParseSemiringError::BadValue(s.to_string()))?
        };
        if self.contains(v) {
            Ok(v)
        } else {
            Err(ParseSemiringError::BadValue(s.to_string()))
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseSemiringError {
    #[error("unknown semiring `{0}` (expected integer, boolean or tropical)")]
    UnknownName(String),
    #[error("`{0}` is not an element of the semiring")]
    BadValue(String),
}

impl FromStr for Semiring {
    type Err = ParseSemiringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "integer" | "int" => Ok(Semiring::Integer),
            "boolean" | "bool" => Ok(Semiring::Boolean),
            "tropical" | "minplus" | "min-plus" => Ok(Semiring::Tropical),
            _ => Err(ParseSemiringError::UnknownName(s.to_string())),
        }
    }
}
