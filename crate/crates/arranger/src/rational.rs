//! Exact rational arithmetic for the coverage fraction `p`.
//!
//! All coverage comparisons sit on strict/weak inequality boundaries
//! (e.g. `p = 3/5` against a 3-out-of-5 interval), so `p` is never a
//! float anywhere in this crate.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational number stored in lowest terms with a positive
/// denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a.abs()
}

impl Rational {
    /// Builds `num/den`, normalizing sign and reducing to lowest terms.
    ///
    /// Panics if `den == 0`; use [`Rational::from_str`] for fallible
    /// parsing of user input.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational denominator must be nonzero");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub const fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub const fn one() -> Self {
        Rational { num: 1, den: 1 }
    }

    pub fn from_integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// Compares `self` with the ratio `a/b` (`b > 0`) without building a
    /// second `Rational`. Cross-multiplication in `i128` cannot overflow.
    pub fn cmp_ratio(&self, a: i64, b: i64) -> Ordering {
        assert!(b > 0);
        (self.num as i128 * b as i128).cmp(&(a as i128 * self.den as i128))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_ratio(other.num, other.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Error parsing a `num/den` string.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {0:?}: expected \"num/den\" or an integer with a nonzero denominator")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"num/den"` or a bare integer. Anything else (floats in
    /// particular) is rejected.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseRationalError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let num: i64 = n.trim().parse().map_err(|_| bad())?;
                let den: i64 = d.trim().parse().map_err(|_| bad())?;
                if den == 0 {
                    return Err(bad());
                }
                Ok(Rational::new(num, den))
            }
            None => {
                let num: i64 = s.parse().map_err(|_| bad())?;
                Ok(Rational::from_integer(num))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
