//! `ℚ` with the `p`-adic valuation: an exact model of a discrete valuation
//! field. No precision bookkeeping is needed.

use std::fmt;

use num::{BigInt, Integer, Zero};

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, padic_valuation, rat_int, Rat, ValBound};
use crate::rings::ValuedRing;

#[derive(Debug, Clone, PartialEq)]
pub struct PadicRational {
    p: u64,
    value: Rat,
}

impl PadicRational {
    pub fn new(p: u64, value: Rat) -> Self {
        PadicRational { p, value }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        PadicRational::new(p, rat_int(n))
    }

    /// `p^n`, the uniformizer power.
    pub fn p_pow(p: u64, n: i64) -> Self {
        let base = BigInt::from(p);
        let e = n.unsigned_abs() as u32;
        let pw = base.pow(e);
        let value = if n >= 0 {
            Rat::from_integer(pw)
        } else {
            Rat::new(BigInt::from(1), pw)
        };
        PadicRational::new(p, value)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn value(&self) -> &Rat {
        &self.value
    }

    fn guard(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::RingMismatch(format!(
                "mixed primes {} and {}",
                self.p, other.p
            )));
        }
        Ok(())
    }
}

impl ValuedRing for PadicRational {
    fn is_exact_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn is_indeterminate(&self) -> bool {
        false
    }

    fn valuation(&self) -> Result<ValBound> {
        if self.value.is_zero() {
            Ok(ValBound::Inf)
        } else {
            Ok(ValBound::Fin(rat_int(padic_valuation(&self.value, self.p))))
        }
    }

    fn val_lb(&self) -> ValBound {
        self.valuation().expect("exact ring")
    }

    fn zero_like(&self) -> Self {
        PadicRational::new(self.p, Rat::zero())
    }

    fn one_like(&self) -> Self {
        PadicRational::from_int(self.p, 1)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.guard(other)?;
        Ok(PadicRational::new(self.p, &self.value + &other.value))
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.guard(other)?;
        Ok(PadicRational::new(self.p, &self.value - &other.value))
    }

    fn neg(&self) -> Self {
        PadicRational::new(self.p, -&self.value)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.guard(other)?;
        Ok(PadicRational::new(self.p, &self.value * &other.value))
    }

    fn invert(&self) -> Result<Self> {
        if self.value.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(PadicRational::new(self.p, self.value.recip()))
    }

    fn residue_rep(&self) -> Result<Self> {
        if self.value.is_zero() {
            return Ok(self.zero_like());
        }
        let v = padic_valuation(&self.value, self.p);
        if v < 0 {
            return Err(Error::NegativeValuation(v.to_string()));
        }
        if v > 0 {
            return Ok(self.zero_like());
        }
        // numer * denom^(-1) mod p, both prime to p; d^(p-2) = d^(-1).
        let p = BigInt::from(self.p);
        let n = self.value.numer().mod_floor(&p);
        let d = self.value.denom().mod_floor(&p);
        let mut d_inv = BigInt::from(1);
        for _ in 0..self.p.saturating_sub(2) {
            d_inv = d_inv * &d % &p;
        }
        let r = (n * d_inv).mod_floor(&p);
        Ok(PadicRational::new(self.p, Rat::from_integer(r)))
    }

    fn same_context(&self, other: &Self) -> bool {
        self.p == other.p
    }
}

impl fmt::Display for PadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rat(&self.value))
    }
}
