//! Plain-text formats for every object the command line consumes: series
//! literals, matrix files with a `ring=` header, decorated poset files,
//! φ-module bundles, isocrystal and lattice files, and labeled polygon
//! lists. Formatting normalizes, and parsing a formatted object returns an
//! equal object.
//!
//! Lines are independent; blank lines and `#` comments are ignored. Series
//! grammar: terms joined by `+`/`-`, each a `*`-product of an optional
//! coefficient (integer, generator power `a^k`, or a parenthesized sum) and
//! an optional symbol power `t^(r)` / `xi^(n)`; a trailing `O(t^(r))` term
//! declares a precision cutoff.

use num::{BigInt, Zero};

use crate::error::{Error, Result};
use crate::hn::RankedPoset;
use crate::linalg::Matrix;
use crate::phimod::{PhiModule, Trivialization};
use crate::polygon::{ConcavePolygon, SlopeVector};
use crate::rat::{fmt_rat, parse_rat, rat_int, Rat, ValBound};
use crate::rings::{FFElem, FiniteField, HahnSeries, PadicRational, XiSeries};
use crate::slopes::{is_prime, newton_type, CrystalLattice, HTModule, Isocrystal};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Lexer {
    fn new(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let tok = match c {
                ' ' | '\t' => {
                    i += 1;
                    continue;
                }
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '/' => Tok::Slash,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '0'..='9' => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let text: String = chars[start..i].iter().collect();
                    toks.push((start, Tok::Num(text.parse().expect("digits"))));
                    continue;
                }
                c if c.is_ascii_alphabetic() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                        i += 1;
                    }
                    toks.push((start, Tok::Ident(chars[start..i].iter().collect())));
                    continue;
                }
                other => {
                    return Err(Error::parse_at(i, format!("unexpected character {other:?}")))
                }
            };
            toks.push((i, tok));
            i += 1;
        }
        Ok(Lexer {
            toks,
            pos: 0,
            end: chars.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += t.is_some() as usize;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.bump() {
            Some((_, t)) if &t == want => Ok(()),
            Some((p, _)) => Err(Error::parse_at(p, format!("expected {what}"))),
            None => Err(Error::parse_at(self.end, format!("expected {what}"))),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    /// `num (/ num)?` with an optional leading sign.
    fn rational(&mut self) -> Result<Rat> {
        let neg = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                true
            }
            Some(Tok::Plus) => {
                self.bump();
                false
            }
            _ => false,
        };
        let numer = match self.bump() {
            Some((_, Tok::Num(n))) => n,
            Some((p, _)) => return Err(Error::parse_at(p, "expected a number")),
            None => return Err(Error::parse_at(self.end, "expected a number")),
        };
        let denom = if matches!(self.peek(), Some(Tok::Slash)) {
            self.bump();
            match self.bump() {
                Some((p, Tok::Num(d))) => {
                    if d.is_zero() {
                        return Err(Error::parse_at(p, "zero denominator"));
                    }
                    d
                }
                Some((p, _)) => return Err(Error::parse_at(p, "expected a denominator")),
                None => return Err(Error::parse_at(self.end, "expected a denominator")),
            }
        } else {
            BigInt::from(1)
        };
        let value = Rat::new(numer, denom);
        Ok(if neg { -value } else { value })
    }

    /// Exponent after `^`: parenthesized rational or a bare (signed) integer.
    fn exponent(&mut self) -> Result<Rat> {
        if matches!(self.peek(), Some(Tok::LParen)) {
            self.bump();
            let r = self.rational()?;
            self.expect(&Tok::RParen, "')' closing the exponent")?;
            Ok(r)
        } else {
            let p = self.here();
            let r = self.rational()?;
            if !r.is_integer() {
                return Err(Error::parse_at(p, "fractional exponents need parentheses"));
            }
            Ok(r)
        }
    }
}

/// Sign separating two terms; `None` at end of input.
fn term_sign(lx: &mut Lexer, first: bool) -> Result<Option<bool>> {
    if lx.done() {
        return Ok(None);
    }
    if first {
        return Ok(Some(match lx.peek() {
            Some(Tok::Minus) => {
                lx.bump();
                true
            }
            _ => false,
        }));
    }
    match lx.bump() {
        Some((_, Tok::Plus)) => Ok(Some(false)),
        Some((_, Tok::Minus)) => Ok(Some(true)),
        Some((p, _)) => Err(Error::parse_at(p, "expected '+' or '-' between terms")),
        None => Ok(None),
    }
}

/// `O ( sym )` or `O ( sym ^ ( r ) )`, after the `O` has been consumed.
fn cutoff(lx: &mut Lexer, sym: &str) -> Result<Rat> {
    lx.expect(&Tok::LParen, "'(' after O")?;
    lx.expect(&Tok::Ident(sym.into()), &format!("'{sym}' in the cutoff"))?;
    let exp = if matches!(lx.peek(), Some(Tok::Caret)) {
        lx.bump();
        lx.exponent()?
    } else {
        rat_int(1)
    };
    lx.expect(&Tok::RParen, "')' closing the cutoff")?;
    Ok(exp)
}

fn big_to_i64(pos: usize, n: &BigInt) -> Result<i64> {
    i64::try_from(n.clone()).map_err(|_| Error::parse_at(pos, "number out of range"))
}

/// One summand of a parenthesized coefficient: `5`, `a`, `2*a`, `a^3`, `2*a^3`.
fn ff_monomial(lx: &mut Lexer, field: &FiniteField) -> Result<FFElem> {
    let mut value = field.one();
    let mut saw = false;
    if let Some(Tok::Num(_)) = lx.peek() {
        let (p, t) = lx.bump().expect("peeked");
        let Tok::Num(n) = t else { unreachable!() };
        let n = big_to_i64(p, &(n % BigInt::from(field.p())))?;
        value = field.mul(&value, &field.from_int(n));
        saw = true;
        if matches!(lx.peek(), Some(Tok::Star)) {
            lx.bump();
        } else {
            return Ok(value);
        }
    }
    if lx.peek() == Some(&Tok::Ident("a".into())) {
        lx.bump();
        let k = if matches!(lx.peek(), Some(Tok::Caret)) {
            lx.bump();
            match lx.bump() {
                Some((p, Tok::Num(n))) => u64::try_from(n)
                    .map_err(|_| Error::parse_at(p, "generator exponent out of range"))?,
                Some((p, _)) => {
                    return Err(Error::parse_at(p, "expected a generator exponent"))
                }
                None => return Err(Error::parse_at(lx.end, "expected a generator exponent")),
            }
        } else {
            1
        };
        value = field.mul(&value, &field.pow(&field.gen(), k));
        saw = true;
    }
    if !saw {
        return Err(Error::parse_at(lx.here(), "expected a coefficient"));
    }
    Ok(value)
}

/// `( mono (('+'|'-') mono)* )`, after the `(` has been consumed.
fn ff_sum(lx: &mut Lexer, field: &FiniteField) -> Result<FFElem> {
    let mut acc = field.zero();
    let mut first = true;
    loop {
        let neg = if first {
            first = false;
            matches!(lx.peek(), Some(Tok::Minus)) && {
                lx.bump();
                true
            }
        } else {
            match lx.bump() {
                Some((_, Tok::RParen)) => return Ok(acc),
                Some((_, Tok::Plus)) => false,
                Some((_, Tok::Minus)) => true,
                Some((p, _)) => {
                    return Err(Error::parse_at(p, "expected '+', '-' or ')' in coefficient"))
                }
                None => return Err(Error::parse_at(lx.end, "unclosed coefficient sum")),
            }
        };
        let mono = ff_monomial(lx, field)?;
        acc = if neg {
            field.sub(&acc, &mono)
        } else {
            field.add(&acc, &mono)
        };
    }
}

/// Series in `t` over `F_{p^m}`, e.g. `1 + a*t^(1/2) + t^(3) + O(t^(4))`.
pub fn parse_hahn(field: &FiniteField, s: &str) -> Result<HahnSeries> {
    let mut lx = Lexer::new(s)?;
    if lx.done() {
        return Err(Error::parse_at(0, "empty series"));
    }
    let mut terms: Vec<(Rat, FFElem)> = Vec::new();
    let mut prec: Option<Rat> = None;
    let mut first = true;
    while let Some(neg) = term_sign(&mut lx, first)? {
        first = false;
        if lx.peek() == Some(&Tok::Ident("O".into())) {
            lx.bump();
            let cut = cutoff(&mut lx, "t")?;
            prec = Some(match prec {
                Some(old) => old.min(cut),
                None => cut,
            });
            continue;
        }
        let mut coeff = field.one();
        let mut exp = rat_int(0);
        loop {
            match lx.peek() {
                Some(Tok::Num(_)) => {
                    let (p, t) = lx.bump().expect("peeked");
                    let Tok::Num(n) = t else { unreachable!() };
                    let n = big_to_i64(p, &(n % BigInt::from(field.p())))?;
                    coeff = field.mul(&coeff, &field.from_int(n));
                }
                Some(Tok::Ident(id)) if id == "a" => {
                    coeff = field.mul(&coeff, &ff_monomial(&mut lx, field)?);
                }
                Some(Tok::Ident(id)) if id == "t" => {
                    lx.bump();
                    if matches!(lx.peek(), Some(Tok::Caret)) {
                        lx.bump();
                        exp += lx.exponent()?;
                    } else {
                        exp += rat_int(1);
                    }
                }
                Some(Tok::LParen) => {
                    lx.bump();
                    coeff = field.mul(&coeff, &ff_sum(&mut lx, field)?);
                }
                _ => return Err(Error::parse_at(lx.here(), "expected a series term")),
            }
            if matches!(lx.peek(), Some(Tok::Star)) {
                lx.bump();
            } else {
                break;
            }
        }
        if neg {
            coeff = field.neg(&coeff);
        }
        terms.push((exp, coeff));
    }
    Ok(HahnSeries::from_terms(field, terms).truncated(prec))
}

/// Series in `xi` with rational coefficients and integer exponents, e.g.
/// `xi^(-1) + 3 - 1/2*xi^(2) + O(xi^(5))`.
pub fn parse_xi(s: &str) -> Result<XiSeries> {
    let mut lx = Lexer::new(s)?;
    if lx.done() {
        return Err(Error::parse_at(0, "empty series"));
    }
    let mut terms: Vec<(i64, Rat)> = Vec::new();
    let mut prec: Option<i64> = None;
    let mut first = true;
    while let Some(neg) = term_sign(&mut lx, first)? {
        first = false;
        if lx.peek() == Some(&Tok::Ident("O".into())) {
            lx.bump();
            let p = lx.here();
            let cut = cutoff(&mut lx, "xi")?;
            if !cut.is_integer() {
                return Err(Error::parse_at(p, "xi exponents must be integers"));
            }
            let cut = big_to_i64(p, &cut.to_integer())?;
            prec = Some(prec.map_or(cut, |old| old.min(cut)));
            continue;
        }
        let mut coeff = rat_int(1);
        let mut exp = 0i64;
        loop {
            match lx.peek() {
                Some(Tok::Num(_)) => {
                    coeff *= lx.rational()?;
                }
                Some(Tok::Ident(id)) if id == "xi" => {
                    lx.bump();
                    if matches!(lx.peek(), Some(Tok::Caret)) {
                        lx.bump();
                        let p = lx.here();
                        let e = lx.exponent()?;
                        if !e.is_integer() {
                            return Err(Error::parse_at(p, "xi exponents must be integers"));
                        }
                        exp += big_to_i64(p, &e.to_integer())?;
                    } else {
                        exp += 1;
                    }
                }
                _ => return Err(Error::parse_at(lx.here(), "expected a series term")),
            }
            if matches!(lx.peek(), Some(Tok::Star)) {
                lx.bump();
            } else {
                break;
            }
        }
        if neg {
            coeff = -coeff;
        }
        terms.push((exp, coeff));
    }
    Ok(XiSeries::from_terms(terms).truncated(prec))
}

/// Exact rational entry with the `p`-adic valuation attached.
pub fn parse_padic(p: u64, s: &str) -> Result<PadicRational> {
    Ok(PadicRational::new(p, parse_rat(s.trim())?))
}

/// Content lines with 1-based numbers; blanks and `#` comments dropped.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

fn at_line(line: usize, err: Error) -> Error {
    match err {
        Error::Parse { position, message } => {
            Error::parse_at(position, format!("line {line}: {message}"))
        }
        Error::Schema(m) => Error::Schema(format!("line {line}: {m}")),
        other => other,
    }
}

/// `key=value` pairs from a whitespace-separated header line.
fn header_pairs(line: usize, text: &str) -> Result<Vec<(String, String)>> {
    text.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| {
                    Error::Schema(format!("line {line}: expected key=value, got {tok:?}"))
                })
        })
        .collect()
}

/// Typed header: known keys extracted, anything else rejected.
struct Header {
    ring: String,
    p: Option<u64>,
    m: Option<u32>,
    modulus: Option<Vec<u32>>,
    prec: Option<Rat>,
    q: Option<u64>,
    n: Option<i64>,
}

fn parse_file_header(line: usize, text: &str) -> Result<Header> {
    let mut h = Header {
        ring: String::new(),
        p: None,
        m: None,
        modulus: None,
        prec: None,
        q: None,
        n: None,
    };
    for (k, v) in header_pairs(line, text)? {
        let bad = |what: &str| Error::Schema(format!("line {line}: bad {what} value {v:?}"));
        match k.as_str() {
            "ring" => h.ring = v.clone(),
            "p" => h.p = Some(v.parse().map_err(|_| bad("p"))?),
            "m" => h.m = Some(v.parse().map_err(|_| bad("m"))?),
            "mod" => {
                h.modulus = Some(
                    v.split(',')
                        .map(|c| c.parse().map_err(|_| bad("mod")))
                        .collect::<Result<_>>()?,
                )
            }
            "prec" => h.prec = Some(parse_rat(&v).map_err(|e| at_line(line, e))?),
            "q" => h.q = Some(v.parse().map_err(|_| bad("q"))?),
            "N" => h.n = Some(v.parse().map_err(|_| bad("N"))?),
            other => {
                return Err(Error::Schema(format!(
                    "line {line}: unknown header key {other:?}"
                )))
            }
        }
    }
    if h.ring.is_empty() {
        return Err(Error::Schema(format!("line {line}: missing ring= in header")));
    }
    Ok(h)
}

impl Header {
    fn require_p(&self, line: usize) -> Result<u64> {
        self.p
            .ok_or_else(|| Error::Schema(format!("line {line}: missing p= in header")))
    }

    /// Coefficient field for a `hahn` header: explicit modulus if given,
    /// otherwise the deterministic degree-`m` extension.
    fn hahn_field(&self, line: usize) -> Result<FiniteField> {
        let p = u32::try_from(self.require_p(line)?)
            .map_err(|_| Error::Schema(format!("line {line}: p out of range")))?;
        match &self.modulus {
            Some(coeffs) => {
                if let Some(m) = self.m {
                    if coeffs.len() != m as usize + 1 {
                        return Err(Error::Schema(format!(
                            "line {line}: mod= has degree {}, header says m={m}",
                            coeffs.len().saturating_sub(1)
                        )));
                    }
                }
                FiniteField::new(p, coeffs.clone())
            }
            None => FiniteField::extension(p, self.m.unwrap_or(1)),
        }
    }

    fn forbid(&self, line: usize, keys: &[(&str, bool)]) -> Result<()> {
        for (name, present) in keys {
            if *present {
                return Err(Error::Schema(format!(
                    "line {line}: key {name}= does not apply to ring={}",
                    self.ring
                )));
            }
        }
        Ok(())
    }
}

/// A matrix over whichever ring the file header names.
#[derive(Debug, Clone)]
pub enum ParsedMatrix {
    Hahn(Matrix<HahnSeries>),
    Padic(Matrix<PadicRational>),
    Xi(Matrix<XiSeries>),
}

fn parse_rows<R, F>(rows: &[(usize, &str)], cell: F) -> Result<Matrix<R>>
where
    R: crate::rings::ValuedRing,
    F: Fn(&str) -> Result<R>,
{
    let parsed: Vec<Vec<R>> = rows
        .iter()
        .map(|(line, text)| {
            text.split(';')
                .map(|c| cell(c).map_err(|e| at_line(*line, e)))
                .collect()
        })
        .collect::<Result<_>>()?;
    Matrix::from_rows(parsed)
}

pub fn parse_matrix_file(text: &str) -> Result<ParsedMatrix> {
    let lines = content_lines(text);
    let Some(((first_no, first), rows)) = lines.split_first().map(|(f, r)| (*f, r)) else {
        return Err(Error::Schema("empty matrix file".into()));
    };
    let h = parse_file_header(first_no, first)?;
    if rows.is_empty() {
        return Err(Error::Schema("matrix file has no rows".into()));
    }
    match h.ring.as_str() {
        "hahn" => {
            h.forbid(first_no, &[("q", h.q.is_some()), ("N", h.n.is_some())])?;
            let field = h.hahn_field(first_no)?;
            let prec = h.prec.clone();
            let m = parse_rows(rows, |c| {
                Ok(parse_hahn(&field, c)?.truncated(prec.clone()))
            })?;
            Ok(ParsedMatrix::Hahn(m))
        }
        "padic" => {
            h.forbid(
                first_no,
                &[
                    ("m", h.m.is_some()),
                    ("mod", h.modulus.is_some()),
                    ("prec", h.prec.is_some()),
                    ("q", h.q.is_some()),
                    ("N", h.n.is_some()),
                ],
            )?;
            let p = h.require_p(first_no)?;
            if !is_prime(p) {
                return Err(Error::Schema(format!("line {first_no}: p={p} is not prime")));
            }
            Ok(ParsedMatrix::Padic(parse_rows(rows, |c| parse_padic(p, c))?))
        }
        "xi" => {
            h.forbid(
                first_no,
                &[
                    ("p", h.p.is_some()),
                    ("m", h.m.is_some()),
                    ("mod", h.modulus.is_some()),
                    ("q", h.q.is_some()),
                ],
            )?;
            let prec = match &h.prec {
                None => None,
                Some(r) if r.is_integer() => Some(i64::try_from(r.to_integer()).map_err(
                    |_| Error::Schema(format!("line {first_no}: prec out of range")),
                )?),
                Some(_) => {
                    return Err(Error::Schema(format!(
                        "line {first_no}: xi precision must be an integer"
                    )))
                }
            };
            let prec = prec.or(h.n);
            let m = parse_rows(rows, |c| Ok(parse_xi(c)?.truncated(prec)))?;
            Ok(ParsedMatrix::Xi(m))
        }
        other => Err(Error::Schema(format!(
            "line {first_no}: unknown ring {other:?}"
        ))),
    }
}

fn hahn_header(field: &FiniteField) -> String {
    let mut out = format!("ring=hahn p={} m={}", field.p(), field.degree());
    let default = FiniteField::extension(field.p(), field.degree())
        .map(|f| f.modulus().to_vec())
        .unwrap_or_default();
    if field.modulus() != default.as_slice() {
        let coeffs = field
            .modulus()
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",");
        out.push_str(&format!(" mod={coeffs}"));
    }
    out
}

fn format_grid<R: crate::rings::ValuedRing + std::fmt::Display>(m: &Matrix<R>) -> String {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| m.at(i, j).to_string())
                .collect::<Vec<_>>()
                .join("; ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn format_matrix_file(m: &ParsedMatrix) -> String {
    match m {
        ParsedMatrix::Hahn(x) => {
            format!("{}\n{}\n", hahn_header(x.template().field()), format_grid(x))
        }
        ParsedMatrix::Padic(x) => {
            format!("ring=padic p={}\n{}\n", x.template().p(), format_grid(x))
        }
        ParsedMatrix::Xi(x) => format!("ring=xi\n{}\n", format_grid(x)),
    }
}

pub fn parse_poset_file(text: &str) -> Result<RankedPoset> {
    let mut elements: Vec<(String, u32, Rat)> = Vec::new();
    let mut covers: Vec<(String, String)> = Vec::new();
    let mut bottom: Option<String> = None;
    let mut top: Option<String> = None;
    for (line, body) in content_lines(text) {
        if body.contains('<') {
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() != 3 || toks[1] != "<" {
                return Err(Error::Schema(format!(
                    "line {line}: cover lines read `id < id`"
                )));
            }
            covers.push((toks[0].to_string(), toks[2].to_string()));
        } else if body.contains('=') {
            for (k, v) in header_pairs(line, body)? {
                match k.as_str() {
                    "bottom" => bottom = Some(v),
                    "top" => top = Some(v),
                    other => {
                        return Err(Error::Schema(format!(
                            "line {line}: unknown poset key {other:?}"
                        )))
                    }
                }
            }
        } else {
            let toks: Vec<&str> = body.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Schema(format!(
                    "line {line}: element lines read `id rank deg`"
                )));
            }
            let rank: u32 = toks[1].parse().map_err(|_| {
                Error::Schema(format!("line {line}: bad rank {:?}", toks[1]))
            })?;
            let deg = parse_rat(toks[2]).map_err(|e| at_line(line, e))?;
            elements.push((toks[0].to_string(), rank, deg));
        }
    }
    let bounds = match (&bottom, &top) {
        (Some(b), Some(t)) => Some((b.as_str(), t.as_str())),
        (None, None) => None,
        _ => {
            return Err(Error::Schema(
                "bottom= and top= must be given together".into(),
            ))
        }
    };
    RankedPoset::new(elements, &covers, bounds)
}

pub fn format_poset_file(p: &RankedPoset) -> String {
    let mut out = format!("bottom={} top={}\n", p.id(p.bottom()), p.id(p.top()));
    for i in 0..p.len() {
        out.push_str(&format!("{} {} {}\n", p.id(i), p.rank_of(i), fmt_rat(p.deg_of(i))));
    }
    let strict = |i: usize, j: usize| i != j && p.leq(i, j);
    for i in 0..p.len() {
        for j in 0..p.len() {
            if strict(i, j) && !(0..p.len()).any(|k| strict(i, k) && strict(k, j)) {
                out.push_str(&format!("{} < {}\n", p.id(i), p.id(j)));
            }
        }
    }
    out
}

fn parse_tolerance(line: usize, v: &str) -> Result<ValBound> {
    if v == "inf" {
        Ok(ValBound::Inf)
    } else {
        Ok(ValBound::Fin(parse_rat(v).map_err(|e| at_line(line, e))?))
    }
}

/// φ-module bundle: `ring=hahn` header with `q=`, a `phi=` block, and an
/// optional `trivialization=` block with its `tolerance=`.
pub fn parse_phi_module_file(text: &str) -> Result<(PhiModule, Option<Trivialization>)> {
    let lines = content_lines(text);
    let Some(((first_no, first), rest)) = lines.split_first().map(|(f, r)| (*f, r)) else {
        return Err(Error::Schema("empty module file".into()));
    };
    let h = parse_file_header(first_no, first)?;
    if h.ring != "hahn" {
        return Err(Error::Schema(format!(
            "line {first_no}: φ-modules live over ring=hahn, got {:?}",
            h.ring
        )));
    }
    h.forbid(first_no, &[("N", h.n.is_some())])?;
    let q = h
        .q
        .ok_or_else(|| Error::Schema(format!("line {first_no}: missing q= in header")))?;
    let field = h.hahn_field(first_no)?;

    let mut phi_rows: Vec<(usize, &str)> = Vec::new();
    let mut triv_rows: Vec<(usize, &str)> = Vec::new();
    let mut tolerance: Option<ValBound> = None;
    let mut block: Option<&mut Vec<(usize, &str)>> = None;
    for (line, body) in rest {
        if *body == "phi=" {
            block = Some(&mut phi_rows);
        } else if *body == "trivialization=" {
            block = Some(&mut triv_rows);
        } else if let Some(v) = body.strip_prefix("tolerance=") {
            tolerance = Some(parse_tolerance(*line, v)?);
            block = None;
        } else if let Some(rows) = block.as_deref_mut() {
            rows.push((*line, body));
        } else {
            return Err(Error::Schema(format!(
                "line {line}: row outside a phi=/trivialization= block"
            )));
        }
    }
    if phi_rows.is_empty() {
        return Err(Error::Schema("missing phi= block".into()));
    }
    let prec = h.prec.clone();
    let cell = |c: &str| Ok(parse_hahn(&field, c)?.truncated(prec.clone()));
    let phi = parse_rows(&phi_rows, cell)?;
    let module = PhiModule::new(phi, q)?;
    let trivialization = if triv_rows.is_empty() {
        if tolerance.is_some() {
            return Err(Error::Schema(
                "tolerance= given without a trivialization= block".into(),
            ));
        }
        None
    } else {
        let vectors = parse_rows(&triv_rows, cell)?;
        Some(Trivialization::new(
            vectors,
            tolerance.unwrap_or(ValBound::Inf),
        )?)
    };
    Ok((module, trivialization))
}

pub fn format_phi_module_file(m: &PhiModule, t: Option<&Trivialization>) -> String {
    let mut out = format!("{} q={}\nphi=\n{}\n", hahn_header(m.field()), m.q(), format_grid(m.phi()));
    if let Some(t) = t {
        out.push_str(&format!("trivialization=\n{}\n", format_grid(t.vectors())));
        let tol = match t.tolerance() {
            ValBound::Inf => "inf".to_string(),
            ValBound::Fin(v) => fmt_rat(v),
        };
        out.push_str(&format!("tolerance={tol}\n"));
    }
    out
}

fn parse_slope_data(line: usize, v: &str) -> Result<Vec<(Rat, usize)>> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| {
            Error::Schema(format!("line {line}: slopes= expects a bracketed list"))
        })?;
    if inner.trim().is_empty() {
        return Err(Error::Schema(format!("line {line}: empty slope list")));
    }
    inner
        .split(',')
        .map(|part| {
            let (slope, height) = part.split_once('x').ok_or_else(|| {
                Error::Schema(format!(
                    "line {line}: slope entries read `slope x height`, got {part:?}"
                ))
            })?;
            let slope = parse_rat(slope.trim()).map_err(|e| at_line(line, e))?;
            let height = height.trim().parse().map_err(|_| {
                Error::Schema(format!("line {line}: bad height {height:?}"))
            })?;
            Ok((slope, height))
        })
        .collect()
}

/// Isocrystal file: a `ring=padic` matrix, or a `slopes=[s x h, …]` line
/// giving the slope decomposition directly.
pub fn parse_isocrystal_file(text: &str) -> Result<Isocrystal> {
    let lines = content_lines(text);
    let Some(((first_no, first), rest)) = lines.split_first().map(|(f, r)| (*f, r)) else {
        return Err(Error::Schema("empty isocrystal file".into()));
    };
    let h = parse_file_header(first_no, first)?;
    if h.ring != "padic" {
        return Err(Error::Schema(format!(
            "line {first_no}: isocrystals live over ring=padic, got {:?}",
            h.ring
        )));
    }
    let p = h.require_p(first_no)?;
    if let Some((line, body)) = rest.iter().find(|(_, b)| b.starts_with("slopes=")) {
        h.forbid(
            first_no,
            &[
                ("m", h.m.is_some()),
                ("mod", h.modulus.is_some()),
                ("prec", h.prec.is_some()),
                ("q", h.q.is_some()),
                ("N", h.n.is_some()),
            ],
        )?;
        if rest.len() > 1 {
            return Err(Error::Schema(format!(
                "line {line}: slopes= replaces the matrix rows"
            )));
        }
        let data = parse_slope_data(*line, body.strip_prefix("slopes=").expect("prefix"))?;
        return Isocrystal::from_slope_data(p, &data);
    }
    match parse_matrix_file(text)? {
        ParsedMatrix::Padic(m) => Isocrystal::new(m),
        _ => unreachable!("header pinned to padic"),
    }
}

pub fn parse_crystal_file(text: &str) -> Result<CrystalLattice> {
    let iso = parse_isocrystal_file(text)?;
    match iso.matrix() {
        Some(m) => CrystalLattice::new(m.clone()),
        None => Err(Error::Schema(
            "a crystal lattice needs a matrix, not slope data".into(),
        )),
    }
}

pub fn format_isocrystal_file(d: &Isocrystal) -> String {
    match d.matrix() {
        Some(m) => format_matrix_file(&ParsedMatrix::Padic(m.clone())),
        None => {
            let t = newton_type(d).expect("slope data is its own newton type");
            let mut runs: Vec<(Rat, usize)> = Vec::new();
            for s in t.slopes() {
                match runs.last_mut() {
                    Some((slope, h)) if slope == s => *h += 1,
                    _ => runs.push((s.clone(), 1)),
                }
            }
            let body = runs
                .iter()
                .map(|(s, h)| format!("{} x {h}", fmt_rat(s)))
                .collect::<Vec<_>>()
                .join(", ");
            format!("ring=padic p={}\nslopes=[{body}]\n", d.p())
        }
    }
}

/// Lattice file: `ring=xi` with an optional truncation `N=`, then the basis
/// matrix of the lattice in the reference basis.
pub fn parse_ht_file(text: &str) -> Result<HTModule> {
    let lines = content_lines(text);
    let Some(((first_no, first), _)) = lines.split_first().map(|(f, r)| (*f, r)) else {
        return Err(Error::Schema("empty lattice file".into()));
    };
    let h = parse_file_header(first_no, first)?;
    if h.ring != "xi" {
        return Err(Error::Schema(format!(
            "line {first_no}: lattice files live over ring=xi, got {:?}",
            h.ring
        )));
    }
    let truncation = h.n;
    match parse_matrix_file(text)? {
        ParsedMatrix::Xi(m) => HTModule::new(m, truncation),
        _ => unreachable!("header pinned to xi"),
    }
}

pub fn format_ht_file(h: &HTModule) -> String {
    let header = match h.truncation() {
        Some(n) => format!("ring=xi N={n}"),
        None => "ring=xi".to_string(),
    };
    format!("{header}\n{}\n", format_grid(h.basis()))
}

/// Labeled polygons, one per line: `label = [slopes]` or `label = {slope:width}`;
/// a bare polygon gets a positional label `P1`, `P2`, ….
pub fn parse_labeled_polygons(text: &str) -> Result<Vec<(String, ConcavePolygon)>> {
    let mut out = Vec::new();
    for (line, body) in content_lines(text) {
        let bracket = body.find(['[', '{']).ok_or_else(|| {
            Error::Schema(format!("line {line}: expected a polygon literal"))
        })?;
        let (label, literal) = match body[..bracket].rfind('=') {
            Some(eq) => (body[..eq].trim().to_string(), body[eq + 1..].trim()),
            None if bracket == 0 => (format!("P{}", out.len() + 1), body),
            None => {
                return Err(Error::Schema(format!(
                    "line {line}: labels are separated by '='"
                )))
            }
        };
        if label.is_empty() {
            return Err(Error::Schema(format!("line {line}: empty label")));
        }
        let polygon = if literal.starts_with('[') {
            literal
                .parse::<SlopeVector>()
                .map_err(|e| at_line(line, e))?
                .to_polygon()
        } else {
            literal.parse::<ConcavePolygon>().map_err(|e| at_line(line, e))?
        };
        out.push((label, polygon));
    }
    Ok(out)
}
