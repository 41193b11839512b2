//! Truncated Laurent series in `ξ` with rational coefficients, `v(ξ) = 1`:
//! the desk model of a complete discrete valuation ring whose residue field
//! is a characteristic-zero field (plain rationals stand in for it).

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, rat_int, Rat, ValBound};
use crate::rings::{ValuedRing, DEFAULT_REL_PREC};

/// Sparse Laurent polynomial in `ξ` with an optional cutoff: exponents `≥
/// prec` are unknown. `prec = None` means exact.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSeries {
    coeffs: BTreeMap<i64, Rat>,
    prec: Option<i64>,
}

impl XiSeries {
    pub fn zero() -> Self {
        XiSeries {
            coeffs: BTreeMap::new(),
            prec: None,
        }
    }

    pub fn one() -> Self {
        XiSeries::monomial(rat_int(1), 0)
    }

    pub fn monomial(coeff: Rat, exp: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(exp, coeff);
        }
        XiSeries { coeffs, prec: None }
    }

    /// `ξ^exp`.
    pub fn xi_pow(exp: i64) -> Self {
        XiSeries::monomial(rat_int(1), exp)
    }

    pub fn constant(c: Rat) -> Self {
        XiSeries::monomial(c, 0)
    }

    pub fn from_terms(terms: Vec<(i64, Rat)>) -> Self {
        let mut out = XiSeries::zero();
        for (exp, c) in terms {
            let entry = out.coeffs.entry(exp).or_insert_with(Rat::zero);
            *entry += c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    pub fn prec(&self) -> Option<i64> {
        self.prec
    }

    pub fn truncated(mut self, prec: Option<i64>) -> Self {
        if let Some(p) = prec {
            self.coeffs.retain(|e, _| *e < p);
            self.prec = Some(self.prec.map_or(p, |old| old.min(p)));
        }
        self
    }

    fn prec_bound(&self) -> ValBound {
        match self.prec {
            Some(p) => ValBound::fin(p),
            None => ValBound::Inf,
        }
    }

    fn set_prec(mut self, bound: ValBound) -> Self {
        match bound {
            ValBound::Inf => self.prec = None,
            ValBound::Fin(p) => {
                // Cutoffs stay integral under ring operations.
                let p = p.to_integer().try_into().expect("cutoff fits in i64");
                self.coeffs.retain(|e, _| *e < p);
                self.prec = Some(p);
            }
        }
        self
    }
}

impl ValuedRing for XiSeries {
    fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }

    fn is_indeterminate(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_some()
    }

    fn valuation(&self) -> Result<ValBound> {
        match self.coeffs.keys().next() {
            Some(&e) => Ok(ValBound::fin(e)),
            None => match self.prec {
                None => Ok(ValBound::Inf),
                Some(p) => Err(Error::PrecisionExhausted(format!(
                    "series is zero up to xi^({p})"
                ))),
            },
        }
    }

    fn val_lb(&self) -> ValBound {
        match self.coeffs.keys().next() {
            Some(&e) => ValBound::fin(e),
            None => self.prec_bound(),
        }
    }

    fn zero_like(&self) -> Self {
        XiSeries::zero()
    }

    fn one_like(&self) -> Self {
        XiSeries::one()
    }

    fn add(&self, other: &Self) -> Result<Self> {
        let prec = self.prec_bound().min(other.prec_bound());
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            let entry = coeffs.entry(*e).or_insert_with(Rat::zero);
            *entry += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(XiSeries { coeffs, prec: None }.set_prec(prec))
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn neg(&self) -> Self {
        XiSeries {
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
            prec: self.prec,
        }
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(XiSeries::zero());
        }
        let prec = (self.prec_bound() + other.val_lb()).min(other.prec_bound() + self.val_lb());
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for ((e1, c1), (e2, c2)) in self.coeffs.iter().cartesian_product(&other.coeffs) {
            let entry = coeffs.entry(e1 + e2).or_insert_with(Rat::zero);
            *entry += c1 * c2;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(XiSeries { coeffs, prec: None }.set_prec(prec))
    }

    fn invert(&self) -> Result<Self> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_indeterminate() {
            return Err(Error::PrecisionExhausted(
                "cannot invert a series indistinguishable from zero".into(),
            ));
        }
        let (&v, lead) = self.coeffs.iter().next().expect("nonzero");
        let lead_inv = XiSeries::monomial(lead.recip(), -v);
        let unit = self.mul(&lead_inv)?;
        let h = unit.sub(&unit.one_like())?;
        if h.coeffs.is_empty() && h.prec.is_none() {
            return Ok(lead_inv);
        }
        let out_prec = match self.prec {
            Some(p) => ValBound::fin(p - 2 * v),
            None => ValBound::fin(DEFAULT_REL_PREC - v),
        };
        // Tail truncated at the target, partial sums doubled: logarithmic
        // loop depth in the target.
        let rel_target = out_prec.clone() + ValBound::fin(v);
        let neg_h = h.neg().set_prec(rel_target.clone());
        let mut acc = XiSeries::one().add(&neg_h)?;
        let mut pow = neg_h.mul(&neg_h)?;
        while pow.val_lb() < rel_target {
            acc = acc.mul(&XiSeries::one().add(&pow)?)?;
            pow = pow.mul(&pow)?;
        }
        Ok(acc.mul(&lead_inv)?.set_prec(out_prec))
    }

    fn residue_rep(&self) -> Result<Self> {
        if let Some(&e) = self.coeffs.keys().next() {
            if e < 0 {
                return Err(Error::NegativeValuation(e.to_string()));
            }
        }
        if let Some(p) = self.prec {
            if p <= 0 {
                return Err(Error::PrecisionExhausted(
                    "constant term lies beyond the cutoff".into(),
                ));
            }
        }
        Ok(XiSeries::constant(
            self.coeffs.get(&0).cloned().unwrap_or_else(Rat::zero),
        ))
    }

    fn same_context(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for XiSeries {
    /// `xi^(-1) + 3 - 1/2*xi^(2)`; cutoffs are written `O(xi^(n))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut body = String::new();
        for (i, (exp, c)) in self.coeffs.iter().enumerate() {
            let mag = c.abs();
            let part = match (*exp, &mag) {
                (0, m) => fmt_rat(m),
                (e, m) => {
                    let xi = if e == 1 {
                        "xi".to_string()
                    } else {
                        format!("xi^({e})")
                    };
                    if m == &rat_int(1) {
                        xi
                    } else {
                        format!("{}*{xi}", fmt_rat(m))
                    }
                }
            };
            if i == 0 {
                if c.is_negative() {
                    body.push('-');
                }
                body.push_str(&part);
            } else {
                body.push_str(if c.is_negative() { " - " } else { " + " });
                body.push_str(&part);
            }
        }
        if body.is_empty() {
            body.push('0');
        }
        match self.prec {
            Some(p) => write!(f, "{body} + O(xi^({p}))"),
            None => write!(f, "{body}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn valuation_and_display() {
        let x = XiSeries::from_terms(vec![(-1, rat_int(1)), (0, rat_int(3))]);
        assert_eq!(x.valuation().unwrap(), ValBound::fin(-1));
        assert_eq!(x.to_string(), "xi^(-1) + 3");
        let y = XiSeries::from_terms(vec![(2, rat(-1, 2))]);
        assert_eq!(y.to_string(), "-1/2*xi^(2)");
        assert_eq!(XiSeries::zero().to_string(), "0");
        assert_eq!(XiSeries::xi_pow(1).to_string(), "xi");
    }

    #[test]
    fn exact_and_truncated_zero() {
        let z = XiSeries::zero();
        assert!(z.is_exact_zero());
        assert_eq!(z.valuation().unwrap(), ValBound::Inf);
        let t = XiSeries::zero().truncated(Some(4));
        assert!(t.is_indeterminate());
        assert!(matches!(t.valuation(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn inversion_of_units_and_monomials() {
        let m = XiSeries::monomial(rat(2, 3), -2);
        let inv = m.invert().unwrap();
        assert!(inv.prec().is_none());
        assert!(m.mul(&inv).unwrap().sub(&XiSeries::one()).unwrap().is_exact_zero());

        // (1 - xi)^(-1) = 1 + xi + xi^2 + …
        let u = XiSeries::from_terms(vec![(0, rat_int(1)), (1, rat_int(-1))]);
        let uinv = u.invert().unwrap();
        assert_eq!(uinv.coeffs.get(&3), Some(&rat_int(1)));
        let err = u.mul(&uinv).unwrap().sub(&XiSeries::one()).unwrap();
        assert!(err.is_indeterminate());
    }

    #[test]
    fn precision_propagation() {
        let x = XiSeries::xi_pow(-1).truncated(Some(3));
        let y = XiSeries::xi_pow(2);
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.prec(), Some(5));
        assert_eq!(xy.valuation().unwrap(), ValBound::fin(1));
        let inv = x.invert().unwrap();
        assert_eq!(inv.prec(), Some(5));
    }

    #[test]
    fn residues() {
        let x = XiSeries::from_terms(vec![(0, rat(3, 4)), (1, rat_int(7))]);
        assert_eq!(x.residue_rep().unwrap(), XiSeries::constant(rat(3, 4)));
        assert!(XiSeries::xi_pow(2).residue_rep().unwrap().is_exact_zero());
        assert!(matches!(
            XiSeries::xi_pow(-1).residue_rep(),
            Err(Error::NegativeValuation(_))
        ));
    }
}
