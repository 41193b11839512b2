//! Exact rational scalars and valuation bounds.
//!
//! All slope and valuation arithmetic in this crate is exact. `Rat` is a
//! reduced big-integer fraction with positive denominator; `ValBound` extends
//! it by `+inf`, the valuation of an exact zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::error::{Error, Result};

/// Reduced fraction with positive denominator (guaranteed by `BigRational`).
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n/d` as a reduced rational. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"-3/4"`, `"12"` style literals.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse {
        position: 0,
        message: format!("invalid rational literal `{s}`"),
    };
    match s.split_once('/') {
        None => s.parse::<BigInt>().map(Rat::from_integer).map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Canonical text form: `12`, `-3/4`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// p-adic valuation of a nonzero rational, `v(p) = 1`.
pub fn padic_valuation(x: &Rat, p: u64) -> i64 {
    assert!(!x.is_zero(), "valuation of zero is infinite");
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut n = x.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    v
}

/// Lower half line `ℚ ∪ {+inf}` ordered with `+inf` greatest.
///
/// Models valuations: `Inf` is the valuation of an exact zero, finite values
/// are exact. Addition saturates at `Inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValBound {
    Fin(Rat),
    Inf,
}

impl ValBound {
    pub fn fin(n: i64) -> Self {
        ValBound::Fin(rat_int(n))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, ValBound::Inf)
    }

    pub fn as_fin(&self) -> Option<&Rat> {
        match self {
            ValBound::Fin(r) => Some(r),
            ValBound::Inf => None,
        }
    }

    /// Finite value or an error for callers that need an exact valuation.
    pub fn expect_fin(&self) -> Result<Rat> {
        match self {
            ValBound::Fin(r) => Ok(r.clone()),
            ValBound::Inf => Err(Error::Singular),
        }
    }
}

impl PartialOrd for ValBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValBound::Inf, ValBound::Inf) => Ordering::Equal,
            (ValBound::Inf, ValBound::Fin(_)) => Ordering::Greater,
            (ValBound::Fin(_), ValBound::Inf) => Ordering::Less,
            (ValBound::Fin(a), ValBound::Fin(b)) => a.cmp(b),
        }
    }
}

impl Add for ValBound {
    type Output = ValBound;
    fn add(self, rhs: ValBound) -> ValBound {
        match (self, rhs) {
            (ValBound::Fin(a), ValBound::Fin(b)) => ValBound::Fin(a + b),
            _ => ValBound::Inf,
        }
    }
}

impl<'a> Add<&'a ValBound> for &'a ValBound {
    type Output = ValBound;
    fn add(self, rhs: &ValBound) -> ValBound {
        self.clone() + rhs.clone()
    }
}

impl Sub for ValBound {
    type Output = ValBound;
    /// `Inf - finite = Inf`; subtracting `Inf` from a finite value is not a
    /// lower bound and is rejected.
    fn sub(self, rhs: ValBound) -> ValBound {
        match (self, rhs) {
            (ValBound::Fin(a), ValBound::Fin(b)) => ValBound::Fin(a - b),
            (ValBound::Inf, _) => ValBound::Inf,
            (ValBound::Fin(_), ValBound::Inf) => {
                panic!("cannot subtract an infinite valuation bound")
            }
        }
    }
}

impl Neg for ValBound {
    type Output = ValBound;
    fn neg(self) -> ValBound {
        match self {
            ValBound::Fin(a) => ValBound::Fin(-a),
            ValBound::Inf => panic!("cannot negate an infinite valuation bound"),
        }
    }
}

impl fmt::Display for ValBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValBound::Fin(r) => write!(f, "{}", fmt_rat(r)),
            ValBound::Inf => write!(f, "inf"),
        }
    }
}

/// Sum of a slice of bounds, saturating at `Inf`.
pub fn val_sum(vals: &[ValBound]) -> ValBound {
    vals.iter()
        .fold(ValBound::Fin(Rat::zero()), |acc, v| acc + v.clone())
}

/// Convenience: `1` as `Rat`.
pub fn rat_one() -> Rat {
    Rat::one()
}

/// Convenience: `0` as `Rat`.
pub fn rat_zero() -> Rat {
    Rat::zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "12", "-7", "3/4", "-3/4", "10/4"] {
            let r = parse_rat(s).unwrap();
            let back = parse_rat(&fmt_rat(&r)).unwrap();
            assert_eq!(r, back);
        }
        assert_eq!(fmt_rat(&parse_rat("10/4").unwrap()), "5/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
    }

    #[test]
    fn padic_valuation_on_fractions() {
        assert_eq!(padic_valuation(&rat(12, 1), 2), 2);
        assert_eq!(padic_valuation(&rat(-3, 4), 2), -2);
        assert_eq!(padic_valuation(&rat(5, 7), 2), 0);
        assert_eq!(padic_valuation(&rat(9, 2), 3), 2);
    }

    #[test]
    fn bound_ordering_and_saturation() {
        assert!(ValBound::fin(3) < ValBound::Inf);
        assert_eq!(ValBound::Inf, ValBound::Inf);
        assert_eq!(ValBound::fin(1) + ValBound::Inf, ValBound::Inf);
        assert_eq!(ValBound::fin(1) + ValBound::fin(2), ValBound::fin(3));
    }
}
