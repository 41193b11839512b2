//! Small finite fields `F_{p^m}` presented by a user-supplied modulus.
//!
//! Elements are polynomials in the generator `a` reduced modulo a monic
//! irreducible polynomial of degree `m ≤ 4`; irreducibility is certified at
//! construction by exhaustive root and quadratic-factor checks.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Field descriptor: characteristic, degree and modulus (ascending
/// coefficients, monic, length `m + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: u32,
    m: u32,
    modulus: Vec<u32>,
}

/// An element as its coefficient vector in the basis `1, a, …, a^(m-1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FFElem {
    c: Vec<u32>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Remainder of `a` modulo monic `b` over `F_p`; both ascending.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap() % p as u64;
        let k = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let sub = lead * bc as u64 % p as u64;
                let idx = k + i;
                r[idx] = (r[idx] + p as u64 - sub) % p as u64;
            }
        }
        r.pop();
    }
    while r.len() > 1 && *r.last().unwrap() % p as u64 == 0 {
        r.pop();
    }
    r.iter().map(|&x| (x % p as u64) as u32).collect()
}

impl FiniteField {
    /// Prime field `F_p` (modulus `x`).
    pub fn prime(p: u32) -> Result<Self> {
        FiniteField::new(p, vec![0, 1])
    }

    /// `F_{p^m}` with the first monic irreducible modulus in lexicographic
    /// order of ascending coefficients — a deterministic default for callers
    /// that only care about the isomorphism class.
    pub fn extension(p: u32, m: u32) -> Result<Self> {
        if m == 1 {
            return FiniteField::prime(p);
        }
        if m == 0 || m > 4 {
            return Err(Error::BadModulus(format!(
                "extension degree {m} out of range 1..=4"
            )));
        }
        if !is_prime(p) {
            return Err(Error::BadModulus(format!("{p} is not prime")));
        }
        let mut low = vec![0u32; m as usize];
        loop {
            let mut modulus = low.clone();
            modulus.push(1);
            if let Ok(field) = FiniteField::new(p, modulus) {
                return Ok(field);
            }
            let mut i = 0;
            loop {
                low[i] += 1;
                if low[i] < p {
                    break;
                }
                low[i] = 0;
                i += 1;
                if i == low.len() {
                    return Err(Error::BadModulus(format!(
                        "no irreducible of degree {m} over F_{p}"
                    )));
                }
            }
        }
    }

    /// `F_{p^m}` with `modulus` given by ascending coefficients. The modulus
    /// must be monic of degree `1 ≤ m ≤ 4` and irreducible over `F_p`.
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadModulus(format!("{p} is not prime")));
        }
        if modulus.len() < 2 {
            return Err(Error::BadModulus("modulus must have degree >= 1".into()));
        }
        let m = (modulus.len() - 1) as u32;
        if m > 4 {
            return Err(Error::BadModulus(format!(
                "degree {m} modulus: irreducibility is only certified up to degree 4"
            )));
        }
        let modulus: Vec<u32> = modulus.iter().map(|&c| c % p).collect();
        if *modulus.last().unwrap() != 1 {
            return Err(Error::BadModulus("modulus must be monic".into()));
        }
        if m >= 2 {
            for x in 0..p {
                let mut value = 0u64;
                let mut pow = 1u64;
                for &c in &modulus {
                    value = (value + c as u64 * pow) % p as u64;
                    pow = pow * x as u64 % p as u64;
                }
                if value == 0 {
                    return Err(Error::BadModulus(format!(
                        "modulus has the root {x} over F_{p}"
                    )));
                }
            }
        }
        if m == 4 {
            for b in 0..p {
                for c in 0..p {
                    let quad = vec![c, b, 1];
                    let r = poly_rem(&modulus, &quad, p);
                    if r.iter().all(|&x| x == 0) {
                        return Err(Error::BadModulus(format!(
                            "modulus divisible by x^2 + {b}*x + {c}"
                        )));
                    }
                }
            }
        }
        Ok(FiniteField { p, m, modulus })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FFElem {
        FFElem {
            c: vec![0; self.m as usize],
        }
    }

    pub fn one(&self) -> FFElem {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FFElem {
        let mut c = vec![0; self.m as usize];
        c[0] = n.rem_euclid(self.p as i64) as u32;
        FFElem { c }
    }

    /// Element from ascending coefficients in `a`; reduced modulo `p` and the
    /// modulus.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> FFElem {
        let reduced: Vec<u32> = coeffs
            .iter()
            .map(|&x| x.rem_euclid(self.p as i64) as u32)
            .collect();
        let rem = poly_rem(&reduced, &self.modulus, self.p);
        let mut c = vec![0; self.m as usize];
        for (i, &x) in rem.iter().enumerate() {
            if i < c.len() {
                c[i] = x;
            }
        }
        FFElem { c }
    }

    /// The generator `a` (for `m = 1` this is the image of `x`, i.e. the
    /// root of the degree-one modulus).
    pub fn gen(&self) -> FFElem {
        if self.m == 1 {
            // x ≡ -modulus[0]
            self.from_int(-(self.modulus[0] as i64))
        } else {
            self.from_coeffs(&[0, 1])
        }
    }

    pub fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        FFElem {
            c: a.c
                .iter()
                .zip(&b.c)
                .map(|(&x, &y)| (x + y) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, a: &FFElem) -> FFElem {
        FFElem {
            c: a.c.iter().map(|&x| (self.p - x % self.p) % self.p).collect(),
        }
    }

    pub fn sub(&self, a: &FFElem, b: &FFElem) -> FFElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        let n = self.m as usize;
        let mut prod = vec![0u32; 2 * n];
        for (i, &x) in a.c.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.c.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        let rem = poly_rem(&prod, &self.modulus, self.p);
        let mut c = vec![0; n];
        for (i, &x) in rem.iter().enumerate() {
            if i < n {
                c[i] = x;
            }
        }
        FFElem { c }
    }

    pub fn pow(&self, a: &FFElem, mut e: u64) -> FFElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FFElem) -> Result<FFElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.order() - 2))
    }

    /// `x ↦ x^q` for `q = p^e`; rejects `q` that is not a power of `p`.
    pub fn frobenius(&self, a: &FFElem, q: u64) -> Result<FFElem> {
        let mut r = q;
        while r > 1 {
            if r % self.p as u64 != 0 {
                return Err(Error::RingMismatch(format!(
                    "{q} is not a power of the characteristic {}",
                    self.p
                )));
            }
            r /= self.p as u64;
        }
        if q == 0 {
            return Err(Error::RingMismatch("q must be positive".into()));
        }
        Ok(self.pow(a, q))
    }

    /// All `p^m` elements in a fixed order.
    pub fn elements(&self) -> Vec<FFElem> {
        let n = self.m as usize;
        (0..n)
            .map(|_| 0..self.p)
            .multi_cartesian_product()
            .map(|c| FFElem { c })
            .collect()
    }

    /// The subfield fixed by `x ↦ x^q`; errors unless it has exactly `q`
    /// elements (i.e. unless `F_q ⊆ F_{p^m}`).
    pub fn fixed_subfield(&self, q: u64) -> Result<Vec<FFElem>> {
        let fixed: Vec<FFElem> = self
            .elements()
            .into_iter()
            .filter(|x| self.frobenius(x, q).map(|y| y == *x).unwrap_or(false))
            .collect();
        if fixed.len() as u64 != q {
            return Err(Error::RingMismatch(format!(
                "F_{q} is not a subfield of F_{}^{}",
                self.p, self.m
            )));
        }
        Ok(fixed)
    }
}

impl FFElem {
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c.first() == Some(&1) && self.c.iter().skip(1).all(|&x| x == 0)
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    fn monomials(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            out.push(match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "a".to_string(),
                (1, c) => format!("{c}*a"),
                (i, 1) => format!("a^{i}"),
                (i, c) => format!("{c}*a^{i}"),
            });
        }
        out
    }
}

impl fmt::Display for FFElem {
    /// Single monomials print bare (`a`, `2*a^3`, `5`); sums are
    /// parenthesized (`(a^2 + a + 1)`), matching the input grammar.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mono = self.monomials();
        match mono.len() {
            0 => write!(f, "0"),
            1 => write!(f, "{}", mono[0]),
            _ => write!(f, "({})", mono.join(" + ")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(FiniteField::new(4, vec![0, 1]), Err(Error::BadModulus(_))));
        // x^2 + 1 has the root 1 over F_2.
        assert!(matches!(FiniteField::new(2, vec![1, 0, 1]), Err(Error::BadModulus(_))));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 over F_2: no roots, a quadratic factor.
        assert!(matches!(
            FiniteField::new(2, vec![1, 0, 1, 0, 1]),
            Err(Error::BadModulus(_))
        ));
        assert!(matches!(
            FiniteField::new(2, vec![1, 1, 0, 0, 0, 1]),
            Err(Error::BadModulus(_))
        ));
        assert!(matches!(FiniteField::new(2, vec![1]), Err(Error::BadModulus(_))));
        // x^2 + x + 1 is irreducible over F_2.
        assert!(FiniteField::new(2, vec![1, 1, 1]).is_ok());
    }

    #[test]
    fn extension_fields_pick_a_deterministic_modulus() {
        assert_eq!(FiniteField::extension(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(FiniteField::extension(2, 4).unwrap().modulus(), &[1, 1, 0, 0, 1]);
        assert_eq!(FiniteField::extension(3, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(FiniteField::extension(3, 3).unwrap().order(), 27);
        assert!(matches!(
            FiniteField::extension(2, 5),
            Err(Error::BadModulus(_))
        ));
    }

    #[test]
    fn f4_arithmetic_table() {
        let f4 = FiniteField::new(2, vec![1, 1, 1]).unwrap();
        let a = f4.gen();
        // a^2 = a + 1, a^3 = 1.
        assert_eq!(f4.mul(&a, &a), f4.from_coeffs(&[1, 1]));
        assert_eq!(f4.pow(&a, 3), f4.one());
        let inv = f4.inv(&a).unwrap();
        assert_eq!(f4.mul(&a, &inv), f4.one());
        assert!(f4.inv(&f4.zero()).is_err());
    }

    #[test]
    fn f8_has_f2_as_frobenius_fixed_subfield() {
        let f8 = FiniteField::new(2, vec![1, 1, 0, 1]).unwrap();
        let fixed = f8.fixed_subfield(2).unwrap();
        assert_eq!(fixed.len(), 2);
        assert!(fixed.contains(&f8.zero()) && fixed.contains(&f8.one()));
        // F_4 does not embed into F_8.
        assert!(f8.fixed_subfield(4).is_err());
        let f9 = FiniteField::new(3, vec![1, 0, 1]).unwrap();
        assert_eq!(f9.fixed_subfield(3).unwrap().len(), 3);
    }

    #[test]
    fn frobenius_is_additive_and_multiplicative() {
        let f9 = FiniteField::new(3, vec![1, 0, 1]).unwrap();
        for x in f9.elements() {
            for y in f9.elements() {
                let fx = f9.frobenius(&x, 3).unwrap();
                let fy = f9.frobenius(&y, 3).unwrap();
                assert_eq!(f9.frobenius(&f9.add(&x, &y), 3).unwrap(), f9.add(&fx, &fy));
                assert_eq!(f9.frobenius(&f9.mul(&x, &y), 3).unwrap(), f9.mul(&fx, &fy));
            }
        }
        assert!(f9.frobenius(&f9.one(), 2).is_err());
    }

    #[test]
    fn element_display_matches_grammar_shapes() {
        let f9 = FiniteField::new(3, vec![1, 0, 1]).unwrap();
        assert_eq!(f9.zero().to_string(), "0");
        assert_eq!(f9.from_int(2).to_string(), "2");
        assert_eq!(f9.gen().to_string(), "a");
        assert_eq!(f9.from_coeffs(&[1, 2]).to_string(), "(2*a + 1)");
    }
}
