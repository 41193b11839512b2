//! Finite-support series `Σ a_γ t^γ` with rational exponents over a finite
//! field, the desk model of a perfectoid valuation ring with `v(t) = 1`.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, rat_int, Rat, ValBound};
use crate::rings::{FFElem, FiniteField, ValuedRing, DEFAULT_REL_PREC};

/// A Hahn series: strictly increasing exponents with nonzero coefficients,
/// plus an optional cutoff (`None` = exact; with `Some(n)`, exponents `≥ n`
/// are unknown and all stored exponents are `< n`).
#[derive(Debug, Clone, PartialEq)]
pub struct HahnSeries {
    field: FiniteField,
    terms: BTreeMap<Rat, FFElem>,
    prec: Option<Rat>,
}

impl HahnSeries {
    pub fn zero(field: &FiniteField) -> Self {
        HahnSeries {
            field: field.clone(),
            terms: BTreeMap::new(),
            prec: None,
        }
    }

    pub fn one(field: &FiniteField) -> Self {
        HahnSeries::monomial(field, field.one(), rat_int(0))
    }

    pub fn monomial(field: &FiniteField, coeff: FFElem, exp: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        HahnSeries {
            field: field.clone(),
            terms,
            prec: None,
        }
    }

    /// `t^exp`.
    pub fn t_pow(field: &FiniteField, exp: Rat) -> Self {
        HahnSeries::monomial(field, field.one(), exp)
    }

    pub fn constant(field: &FiniteField, n: i64) -> Self {
        HahnSeries::monomial(field, field.from_int(n), rat_int(0))
    }

    pub fn from_terms(field: &FiniteField, terms: Vec<(Rat, FFElem)>) -> Self {
        let mut out = HahnSeries::zero(field);
        for (exp, coeff) in terms {
            if coeff.is_zero() {
                continue;
            }
            let entry = out.terms.entry(exp).or_insert_with(|| field.zero());
            *entry = field.add(entry, &coeff);
        }
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &FFElem)> {
        self.terms.iter()
    }

    pub fn prec(&self) -> Option<&Rat> {
        self.prec.as_ref()
    }

    /// Forgets everything at or above `prec`.
    pub fn truncated(mut self, prec: Option<Rat>) -> Self {
        if let Some(p) = &prec {
            self.terms.retain(|e, _| e < p);
            self.prec = match self.prec.take() {
                Some(old) => Some(old.min(p.clone())),
                None => Some(p.clone()),
            };
        }
        self
    }

    fn prec_bound(&self) -> ValBound {
        match &self.prec {
            Some(p) => ValBound::Fin(p.clone()),
            None => ValBound::Inf,
        }
    }

    fn set_prec(mut self, bound: ValBound) -> Self {
        match bound {
            ValBound::Inf => {
                self.prec = None;
                self
            }
            ValBound::Fin(p) => {
                self.terms.retain(|e, _| *e < p);
                self.prec = Some(p);
                self
            }
        }
    }

    fn guard(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::RingMismatch(format!(
                "mixed coefficient fields F_{}^{} and F_{}^{}",
                self.field.p(),
                self.field.degree(),
                other.field.p(),
                other.field.degree()
            )));
        }
        Ok(())
    }

    /// `x ↦ x^q`: `q`-th power coefficients, exponents and cutoff scaled
    /// by `q`. Exact for `q` a power of the characteristic.
    pub fn frobenius(&self, q: u64) -> Result<Self> {
        let scale = rat_int(q as i64);
        let mut terms = BTreeMap::new();
        for (exp, coeff) in &self.terms {
            terms.insert(exp * &scale, self.field.frobenius(coeff, q)?);
        }
        Ok(HahnSeries {
            field: self.field.clone(),
            terms,
            prec: self.prec.as_ref().map(|p| p * &scale),
        })
    }

    /// Scales by `t^exp` (exact unit multiplication).
    pub fn shift(&self, exp: &Rat) -> Self {
        HahnSeries {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + exp, c.clone()))
                .collect(),
            prec: self.prec.as_ref().map(|p| p + exp),
        }
    }
}

impl ValuedRing for HahnSeries {
    fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_none()
    }

    fn is_indeterminate(&self) -> bool {
        self.terms.is_empty() && self.prec.is_some()
    }

    fn valuation(&self) -> Result<ValBound> {
        match self.terms.keys().next() {
            Some(e) => Ok(ValBound::Fin(e.clone())),
            None => match &self.prec {
                None => Ok(ValBound::Inf),
                Some(p) => Err(Error::PrecisionExhausted(format!(
                    "series is zero up to t^({})",
                    fmt_rat(p)
                ))),
            },
        }
    }

    fn val_lb(&self) -> ValBound {
        match self.terms.keys().next() {
            Some(e) => ValBound::Fin(e.clone()),
            None => self.prec_bound(),
        }
    }

    fn zero_like(&self) -> Self {
        HahnSeries::zero(&self.field)
    }

    fn one_like(&self) -> Self {
        HahnSeries::one(&self.field)
    }

    fn add(&self, other: &Self) -> Result<Self> {
        self.guard(other)?;
        let prec = self.prec_bound().min(other.prec_bound());
        let mut terms = self.terms.clone();
        for (exp, coeff) in &other.terms {
            let entry = terms.entry(exp.clone()).or_insert_with(|| self.field.zero());
            *entry = self.field.add(entry, coeff);
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(HahnSeries {
            field: self.field.clone(),
            terms,
            prec: None,
        }
        .set_prec(prec))
    }

    fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    fn neg(&self) -> Self {
        HahnSeries {
            field: self.field.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), self.field.neg(c)))
                .collect(),
            prec: self.prec.clone(),
        }
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        self.guard(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(self.zero_like());
        }
        // prec = min(prec_x + v(y), prec_y + v(x)), valuations as lower bounds.
        let prec = (self.prec_bound() + other.val_lb()).min(other.prec_bound() + self.val_lb());
        let mut terms: BTreeMap<Rat, FFElem> = BTreeMap::new();
        for ((e1, c1), (e2, c2)) in self.terms.iter().cartesian_product(&other.terms) {
            let exp = e1 + e2;
            let prod = self.field.mul(c1, c2);
            let entry = terms.entry(exp).or_insert_with(|| self.field.zero());
            *entry = self.field.add(entry, &prod);
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(HahnSeries {
            field: self.field.clone(),
            terms,
            prec: None,
        }
        .set_prec(prec))
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
        let (v, lead) = {
            let (e, c) = self.terms.iter().next().expect("nonzero");
            (e.clone(), c.clone())
        };
        let lead_inv = HahnSeries::monomial(&self.field, self.field.inv(&lead)?, -&v);
        // self = lead·t^v·(1 + h) with v(h) > 0.
        let unit = self.mul(&lead_inv)?;
        let h = unit.sub(&unit.one_like())?;
        if h.terms.is_empty() && h.prec.is_none() {
            // Exact monomial: exact inverse.
            return Ok(lead_inv);
        }
        let out_prec = match &self.prec {
            Some(p) => ValBound::Fin(p - rat_int(2) * &v),
            None => ValBound::Fin(rat_int(DEFAULT_REL_PREC) - &v),
        };
        // Geometric series Σ (-h)^k against the relative target prec + v.
        // The tail is truncated at the target up front and partial sums are
        // doubled (Σ_{k<2n} = Σ_{k<n} · (1 + u^n)), so the loop depth is
        // logarithmic in the target instead of linear.
        let rel_target = out_prec.clone() + ValBound::Fin(v.clone());
        let neg_h = h.neg().set_prec(rel_target.clone());
        let mut acc = self.one_like().add(&neg_h)?;
        let mut pow = neg_h.mul(&neg_h)?;
        while pow.val_lb() < rel_target {
            acc = acc.mul(&self.one_like().add(&pow)?)?;
            pow = pow.mul(&pow)?;
        }
        Ok(acc.mul(&lead_inv)?.set_prec(out_prec))
    }

    fn residue_rep(&self) -> Result<Self> {
        let zero = rat_int(0);
        if let Some(e) = self.terms.keys().next() {
            if e.is_negative() {
                return Err(Error::NegativeValuation(fmt_rat(e)));
            }
        }
        if let Some(p) = &self.prec {
            if p <= &zero {
                return Err(Error::PrecisionExhausted(
                    "constant term lies beyond the cutoff".into(),
                ));
            }
        }
        let c = self.terms.get(&zero).cloned().unwrap_or_else(|| self.field.zero());
        Ok(HahnSeries::monomial(&self.field, c, zero))
    }

    fn same_context(&self, other: &Self) -> bool {
        self.field == other.field
    }
}

impl fmt::Display for HahnSeries {
    /// `1 + a*t^(1/2) + t^(3)`; cutoffs are written `O(t^(n))`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (exp, coeff) in &self.terms {
            let coeff_str = coeff.to_string();
            let part = if exp.is_zero() {
                coeff_str
            } else {
                let t = if exp == &rat_int(1) {
                    "t".to_string()
                } else {
                    format!("t^({})", fmt_rat(exp))
                };
                if coeff.is_one() {
                    t
                } else {
                    format!("{coeff_str}*{t}")
                }
            };
            parts.push(part);
        }
        let body = if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        };
        match &self.prec {
            Some(p) => write!(f, "{body} + O(t^({}))", fmt_rat(p)),
            None => write!(f, "{body}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn f2() -> FiniteField {
        FiniteField::prime(2).unwrap()
    }

    fn t(exp: (i64, i64)) -> HahnSeries {
        HahnSeries::t_pow(&f2(), rat(exp.0, exp.1))
    }

    #[test]
    fn valuation_and_zero_flavours() {
        let x = t((-1, 2)).add(&t((3, 1))).unwrap();
        assert_eq!(x.valuation().unwrap(), ValBound::Fin(rat(-1, 2)));
        let zero = HahnSeries::zero(&f2());
        assert_eq!(zero.valuation().unwrap(), ValBound::Inf);
        assert!(zero.is_exact_zero());
        let fuzzy = zero.clone().truncated(Some(rat_int(5)));
        assert!(fuzzy.is_indeterminate());
        assert!(matches!(fuzzy.valuation(), Err(Error::PrecisionExhausted(_))));
        assert_eq!(fuzzy.val_lb(), ValBound::Fin(rat_int(5)));
    }

    #[test]
    fn char_two_cancellation_is_exact() {
        let x = t((1, 1)).add(&t((2, 1))).unwrap();
        let sum = x.add(&x).unwrap();
        assert!(sum.is_exact_zero());
    }

    #[test]
    fn mul_precision_is_pessimistic() {
        // x = t + O(t^3), y = t^(-1): prec(xy) = 3 + (-1) = 2.
        let x = t((1, 1)).truncated(Some(rat_int(3)));
        let y = t((-1, 1));
        let xy = x.mul(&y).unwrap();
        assert_eq!(xy.prec(), Some(&rat_int(2)));
        assert_eq!(xy.valuation().unwrap(), ValBound::Fin(rat_int(0)));
        // add keeps the worse cutoff.
        let s = x.add(&t((0, 1))).unwrap();
        assert_eq!(s.prec(), Some(&rat_int(3)));
    }

    #[test]
    fn invert_monomial_is_exact() {
        let x = HahnSeries::monomial(&f2(), f2().one(), rat(3, 2));
        let inv = x.invert().unwrap();
        assert!(inv.prec().is_none());
        assert!(x.mul(&inv).unwrap().sub(&x.one_like()).unwrap().is_exact_zero());
    }

    #[test]
    fn invert_binomial_by_geometric_series() {
        // (1 + t)^(-1) = 1 + t + t^2 + … over F_2.
        let x = HahnSeries::one(&f2()).add(&t((1, 1))).unwrap();
        let inv = x.invert().unwrap();
        let prod = x.mul(&inv).unwrap();
        let err = prod.sub(&x.one_like()).unwrap();
        assert!(err.is_indeterminate());
        assert!(err.val_lb() >= ValBound::Fin(rat_int(DEFAULT_REL_PREC) - rat_int(1)));
        // prec bookkeeping: v(x) = 0 and x exact, so prec = 48 - 2·0 = 48...
        // relative depth default minus v.
        assert_eq!(inv.valuation().unwrap(), ValBound::Fin(rat_int(0)));
    }

    #[test]
    fn invert_with_declared_precision() {
        // x = t^2 + t^3 + O(t^6): prec(1/x) = 6 - 2*2 = 2.
        let x = t((2, 1)).add(&t((3, 1))).unwrap().truncated(Some(rat_int(6)));
        let inv = x.invert().unwrap();
        assert_eq!(inv.prec(), Some(&rat_int(2)));
        assert_eq!(inv.valuation().unwrap(), ValBound::Fin(rat_int(-2)));
        let one = x.mul(&inv).unwrap();
        assert!(one.sub(&x.one_like()).unwrap().val_lb() >= ValBound::Fin(rat_int(4)));
    }

    #[test]
    fn frobenius_scales_exponents_and_precision() {
        let f4 = FiniteField::new(2, vec![1, 1, 1]).unwrap();
        let a = f4.gen();
        let x = HahnSeries::monomial(&f4, a.clone(), rat(1, 2))
            .add(&HahnSeries::one(&f4))
            .unwrap()
            .truncated(Some(rat_int(3)));
        let y = x.frobenius(2).unwrap();
        assert_eq!(y.prec(), Some(&rat_int(6)));
        assert_eq!(
            y.terms.get(&rat_int(1)).cloned().unwrap(),
            f4.mul(&a, &a)
        );
        assert!(x.frobenius(3).is_err());
    }

    #[test]
    fn residue_reads_the_constant_term() {
        let x = HahnSeries::constant(&f2(), 1).add(&t((1, 2))).unwrap();
        assert!(matches!(x.residue_rep(), Err(..)) == false);
        assert_eq!(x.residue_rep().unwrap(), HahnSeries::one(&f2()));
        let y = t((1, 1));
        assert!(y.residue_rep().unwrap().is_exact_zero());
        let neg = t((-1, 1));
        assert!(matches!(neg.residue_rep(), Err(Error::NegativeValuation(_))));
    }

    #[test]
    fn display_round_shapes() {
        let x = HahnSeries::constant(&f2(), 1)
            .add(&t((1, 2)))
            .unwrap()
            .add(&t((3, 1)))
            .unwrap();
        assert_eq!(x.to_string(), "1 + t^(1/2) + t^(3)");
        assert_eq!(HahnSeries::zero(&f2()).to_string(), "0");
        assert_eq!(t((1, 1)).to_string(), "t");
    }

    #[test]
    fn mixed_fields_are_rejected() {
        let f4 = FiniteField::new(2, vec![1, 1, 1]).unwrap();
        let x = HahnSeries::one(&f2());
        let y = HahnSeries::one(&f4);
        assert!(matches!(x.add(&y), Err(Error::RingMismatch(_))));
    }
}
