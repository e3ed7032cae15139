use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number extended with `+inf` and `-inf`.
///
/// The variant order gives the usual order `-inf < finite < +inf`, and two
/// infinities of the same sign compare equal. A `Finite` value never holds
/// NaN or an IEEE infinity.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Converts an `f64`, mapping IEEE infinities to the matching variant.
    /// Returns `None` for NaN.
    pub fn try_from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtReal::NegInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Sum in the extended reals; `+inf + -inf` is an error.
    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => {
                Err(Error::Indeterminate("(+inf) + (-inf)"))
            }
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(ExtReal::from(a + b)),
        }
    }

    /// Sums an iterator of extended reals, failing on `+inf + -inf`.
    pub fn checked_sum<I: IntoIterator<Item = ExtReal>>(iter: I) -> Result<ExtReal> {
        iter.into_iter()
            .try_fold(ExtReal::ZERO, |acc, x| acc.checked_add(x))
    }

    /// Product with a real scalar. `0 * (+-inf)` is reported as indeterminate;
    /// use [`ExtReal::singular_product`] where the zero-mass convention applies.
    pub fn mul_real(self, c: f64) -> Result<ExtReal> {
        match self {
            ExtReal::Finite(x) => Ok(ExtReal::from(x * c)),
            _ if c == 0.0 => Err(Error::Indeterminate("0 * (+-inf)")),
            ExtReal::PosInf if c > 0.0 => Ok(ExtReal::PosInf),
            ExtReal::NegInf if c < 0.0 => Ok(ExtReal::PosInf),
            _ => Ok(ExtReal::NegInf),
        }
    }

    /// `mass * slope` under the convention that a vanishing mass annihilates
    /// any multiplier, including an infinite one.
    pub fn singular_product(mass: f64, slope: ExtReal) -> ExtReal {
        if mass == 0.0 {
            ExtReal::ZERO
        } else {
            slope
                .mul_real(mass)
                .expect("nonzero mass times an extended real is determinate")
        }
    }

    /// `self <= other + tol`, with infinities compared exactly.
    pub fn le_within(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b + tol,
            (a, b) => a <= b,
        }
    }

    /// Equal infinities, or finite values within `tol`.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            (a, b) => a == b,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Total order; valid because `Finite` never holds NaN.
    pub fn total_cmp(&self, other: &ExtReal) -> Ordering {
        self.partial_cmp(other).expect("ExtReal never holds NaN")
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN.
    fn from(x: f64) -> Self {
        ExtReal::try_from_f64(x).expect("NaN is not an extended real")
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExtReal::NegInf => "-inf".to_string(),
            ExtReal::PosInf => "+inf".to_string(),
            ExtReal::Finite(x) => match f.precision() {
                Some(p) => format!("{x:.p$}"),
                None => x.to_string(),
            },
        };
        // Right-aligned like numbers.
        match f.width() {
            Some(w) => write!(f, "{s:>w$}"),
            None => f.write_str(&s),
        }
    }
}

// Finite values serialize as JSON numbers, infinities as the strings
// "+inf" / "-inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => serializer.serialize_str("+inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(x) => ExtReal::try_from_f64(x)
                .ok_or_else(|| serde::de::Error::custom("NaN is not an extended real")),
            Repr::Str(s) => match s.as_str() {
                "+inf" | "inf" => Ok(ExtReal::PosInf),
                "-inf" => Ok(ExtReal::NegInf),
                other => Err(serde::de::Error::custom(format!(
                    "invalid extended real `{other}`"
                ))),
            },
        }
    }
}
