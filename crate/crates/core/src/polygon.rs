//! Concave types and their calculus.
//!
//! A type of rank `r` is a non-increasing tuple of rationals
//! `γ_1 ≥ … ≥ γ_r`, identified with the concave piecewise-linear polygon
//! `f : [0, r] → ℚ` that starts at `f(0) = 0` and has slope `γ_i` on
//! `[i-1, i]`. The module implements:
//!
//! * the dominance partial order (partial sums bounded, total sums equal),
//! * the involution `(γ_1, …, γ_r) ↦ (-γ_r, …, -γ_1)`,
//! * the convex sum `∗` (concatenate and sort), which on polygons is the
//!   sup-convolution `(f ∗ g)(s) = max { f(s₁) + g(s₂) : s₁ + s₂ = s }`,
//! * tensor / exterior / symmetric product types,
//! * Tate-twist shifts, `1/n`-rescaling and pointwise limit envelopes,
//! * the non-negative eventually-zero variant used for torsion invariants.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num::{BigInt, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rat::{fmt_rat, parse_rat, rat_int, rat_zero, Rat};

/// Outcome of a dominance comparison.
///
/// `Less` means every partial sum of the left argument is bounded by the
/// corresponding partial sum of the right one and the total sums agree.
/// `DegMismatch` flags pairs whose partial sums are one-sided but whose
/// total sums differ; `Incomparable` flags crossing partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Less,
    Greater,
    Equal,
    Incomparable,
    DegMismatch,
}

impl fmt::Display for Dominance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dominance::Less => "less",
            Dominance::Greater => "greater",
            Dominance::Equal => "equal",
            Dominance::Incomparable => "incomparable",
            Dominance::DegMismatch => "deg-mismatch",
        };
        write!(f, "{s}")
    }
}

fn dominance_of_slices(f: &[Rat], g: &[Rat]) -> Dominance {
    debug_assert_eq!(f.len(), g.len());
    let mut below = false;
    let mut above = false;
    let mut pf = rat_zero();
    let mut pg = rat_zero();
    for (a, b) in f.iter().zip(g) {
        pf += a;
        pg += b;
        match pf.cmp(&pg) {
            std::cmp::Ordering::Less => below = true,
            std::cmp::Ordering::Greater => above = true,
            std::cmp::Ordering::Equal => {}
        }
    }
    let totals_equal = pf == pg;
    match (below, above, totals_equal) {
        (false, false, _) => Dominance::Equal,
        (true, false, true) => Dominance::Less,
        (false, true, true) => Dominance::Greater,
        (true, true, true) => Dominance::Incomparable,
        (_, _, false) => {
            if below && above {
                Dominance::Incomparable
            } else {
                Dominance::DegMismatch
            }
        }
    }
}

/// Summary statistics of a type: total degree, largest and smallest slope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stats {
    pub deg: Rat,
    pub max: Rat,
    pub min: Rat,
}

/// A non-increasing tuple of rational slopes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlopeVector(Vec<Rat>);

impl SlopeVector {
    /// Validates non-increasing order.
    pub fn new(slopes: Vec<Rat>) -> Result<Self> {
        if slopes.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Schema("slopes must be non-increasing".into()));
        }
        Ok(SlopeVector(slopes))
    }

    /// Sorts the entries, so any multiset of slopes is accepted.
    pub fn from_unsorted(mut slopes: Vec<Rat>) -> Self {
        slopes.sort_by(|a, b| b.cmp(a));
        SlopeVector(slopes)
    }

    pub fn from_ints(slopes: &[i64]) -> Self {
        SlopeVector::from_unsorted(slopes.iter().map(|&n| rat_int(n)).collect())
    }

    /// The zero-rank type, neutral for the convex sum.
    pub fn empty() -> Self {
        SlopeVector(Vec::new())
    }

    /// `n` copies of a single slope.
    pub fn isoclinic(slope: Rat, n: usize) -> Self {
        SlopeVector(vec![slope; n])
    }

    pub fn slopes(&self) -> &[Rat] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `Σ γ_i` (0 for the empty type).
    pub fn deg(&self) -> Rat {
        self.0.iter().fold(rat_zero(), |acc, g| acc + g)
    }

    pub fn max_slope(&self) -> Result<Rat> {
        self.0.first().cloned().ok_or(Error::EmptyType)
    }

    pub fn min_slope(&self) -> Result<Rat> {
        self.0.last().cloned().ok_or(Error::EmptyType)
    }

    pub fn stats(&self) -> Result<Stats> {
        Ok(Stats {
            deg: self.deg(),
            max: self.max_slope()?,
            min: self.min_slope()?,
        })
    }

    /// `(γ_1, …, γ_r) ↦ (-γ_r, …, -γ_1)`; on polygons `f^ι(s) = f(r-s) - f(r)`.
    pub fn involution(&self) -> Self {
        SlopeVector(self.0.iter().rev().map(|g| -g).collect())
    }

    /// Running partial sums `P_1, …, P_r`.
    pub fn partial_sums(&self) -> Vec<Rat> {
        self.0
            .iter()
            .scan(rat_zero(), |acc, g| {
                *acc += g;
                Some(acc.clone())
            })
            .collect()
    }

    /// Convex sum: concatenate and re-sort. Rank and degree are additive.
    pub fn convex_sum(&self, other: &Self) -> Self {
        let mut merged = Vec::with_capacity(self.0.len() + other.0.len());
        merged.extend_from_slice(&self.0);
        merged.extend_from_slice(&other.0);
        SlopeVector::from_unsorted(merged)
    }

    /// Polygon value at `s ∈ [0, rank]`.
    pub fn eval(&self, s: &Rat) -> Result<Rat> {
        let width = rat_int(self.rank() as i64);
        if s < &rat_zero() || s > &width {
            return Err(Error::OutOfDomain {
                arg: fmt_rat(s),
                width: fmt_rat(&width),
            });
        }
        let whole = s.floor();
        let k = whole
            .to_integer()
            .to_usize()
            .expect("domain bound keeps the index small");
        let mut value: Rat = self.0.iter().take(k).fold(rat_zero(), |acc, g| acc + g);
        let frac = s - &whole;
        if !frac.is_zero() {
            value += &frac * &self.0[k];
        }
        Ok(value)
    }

    /// Dominance comparison; requires equal rank.
    pub fn dominance(&self, other: &Self) -> Result<Dominance> {
        if self.rank() != other.rank() {
            return Err(Error::LengthMismatch {
                left: self.rank(),
                right: other.rank(),
            });
        }
        Ok(dominance_of_slices(&self.0, &other.0))
    }

    /// Tensor product type: all pairwise sums.
    pub fn tensor(&self, other: &Self) -> Self {
        let sums = self
            .0
            .iter()
            .cartesian_product(&other.0)
            .map(|(a, b)| a + b)
            .collect();
        SlopeVector::from_unsorted(sums)
    }

    /// Exterior power type: sums over `k`-element subsets. `k = 0` yields the
    /// rank-one type of slope zero (the unit object).
    pub fn ext(&self, k: usize) -> Result<Self> {
        if k > self.rank() {
            return Err(Error::BadArity(format!(
                "exterior power {k} of a rank-{} type",
                self.rank()
            )));
        }
        if k == 0 {
            return Ok(SlopeVector(vec![rat_zero()]));
        }
        let sums = (0..self.rank())
            .combinations(k)
            .map(|ix| ix.iter().fold(rat_zero(), |acc, &i| acc + &self.0[i]))
            .collect();
        Ok(SlopeVector::from_unsorted(sums))
    }

    /// Symmetric power type: sums over `k`-element multisets, `k ≥ 1`.
    pub fn sym(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::BadArity("symmetric power requires k >= 1".into()));
        }
        if self.is_empty() {
            return Ok(SlopeVector::empty());
        }
        let sums = (0..self.rank())
            .combinations_with_replacement(k)
            .map(|ix| ix.iter().fold(rat_zero(), |acc, &i| acc + &self.0[i]))
            .collect();
        Ok(SlopeVector::from_unsorted(sums))
    }

    /// Adds `n` to every slope (type-level effect of a Tate twist).
    pub fn twist_shift(&self, n: i64) -> Self {
        let shift = rat_int(n);
        SlopeVector(self.0.iter().map(|g| g + &shift).collect())
    }

    /// Adds a rational constant to every slope.
    pub fn shift_by(&self, c: &Rat) -> Self {
        SlopeVector(self.0.iter().map(|g| g + c).collect())
    }

    /// The polygon with unit-width segments merged by slope.
    pub fn to_polygon(&self) -> ConcavePolygon {
        ConcavePolygon::from_segments(
            self.0.iter().map(|g| (g.clone(), rat_int(1))).collect(),
        )
        .expect("non-increasing slopes with unit widths form a valid polygon")
    }

    /// Compresses `[0, rank]` onto `[0, rank/n]`: segments of width `1/n` with
    /// the original slopes. The rank must be divisible by `n`.
    pub fn rescale(&self, n: u32) -> Result<ConcavePolygon> {
        if n == 0 {
            return Err(Error::BadArity("rescale by n = 0".into()));
        }
        if self.rank() % (n as usize) != 0 {
            return Err(Error::BadArity(format!(
                "rank {} not divisible by {n}",
                self.rank()
            )));
        }
        let w = Rat::new(BigInt::from(1), BigInt::from(n));
        ConcavePolygon::from_segments(self.0.iter().map(|g| (g.clone(), w.clone())).collect())
    }
}

impl fmt::Display for SlopeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().map(fmt_rat).join(", "))
    }
}

impl FromStr for SlopeVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::parse_at(0, "slope vector must be bracketed: [a, b, …]"))?;
        if inner.trim().is_empty() {
            return Ok(SlopeVector::empty());
        }
        let slopes = inner
            .split(',')
            .map(parse_rat)
            .collect::<Result<Vec<_>>>()?;
        SlopeVector::new(slopes)
    }
}

/// A concave polygon on `[0, width]` through the origin, stored as segments
/// `(slope, width)` with strictly decreasing slopes and positive widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcavePolygon {
    segments: Vec<(Rat, Rat)>,
}

impl ConcavePolygon {
    /// Merges adjacent equal slopes, drops zero widths, validates strict
    /// decrease and positivity.
    pub fn from_segments(segments: Vec<(Rat, Rat)>) -> Result<Self> {
        let mut merged: Vec<(Rat, Rat)> = Vec::new();
        for (slope, width) in segments {
            if width.is_negative() {
                return Err(Error::Schema("segment width must be positive".into()));
            }
            if width.is_zero() {
                continue;
            }
            match merged.last_mut() {
                Some((s, w)) if *s == slope => *w += width,
                _ => merged.push((slope, width)),
            }
        }
        if merged.windows(2).any(|w| w[0].0 <= w[1].0) {
            return Err(Error::Schema("segment slopes must be strictly decreasing".into()));
        }
        Ok(ConcavePolygon { segments: merged })
    }

    /// Polygon through given vertices `(0,0) = v_0, …, v_k`; x must be
    /// strictly increasing and the chord slopes non-increasing.
    pub fn from_vertices(vertices: &[(Rat, Rat)]) -> Result<Self> {
        if vertices.is_empty() || vertices[0] != (rat_zero(), rat_zero()) {
            return Err(Error::Schema("vertex list must start at the origin".into()));
        }
        let mut segments = Vec::new();
        for pair in vertices.windows(2) {
            let dx = &pair[1].0 - &pair[0].0;
            if !dx.is_positive() {
                return Err(Error::Schema("vertex abscissas must strictly increase".into()));
            }
            let dy = &pair[1].1 - &pair[0].1;
            segments.push((dy / &dx, dx));
        }
        ConcavePolygon::from_segments(segments)
    }

    pub fn empty() -> Self {
        ConcavePolygon { segments: Vec::new() }
    }

    pub fn segments(&self) -> &[(Rat, Rat)] {
        &self.segments
    }

    /// Domain width.
    pub fn width(&self) -> Rat {
        self.segments.iter().fold(rat_zero(), |acc, (_, w)| acc + w)
    }

    /// Value at the right end of the domain.
    pub fn endpoint(&self) -> Rat {
        self.segments
            .iter()
            .fold(rat_zero(), |acc, (s, w)| acc + s * w)
    }

    /// Vertices `(x, f(x))` including `(0, 0)` and the endpoint.
    pub fn vertices(&self) -> Vec<(Rat, Rat)> {
        let mut out = vec![(rat_zero(), rat_zero())];
        let (mut x, mut y) = (rat_zero(), rat_zero());
        for (s, w) in &self.segments {
            x += w;
            y += s * w;
            out.push((x.clone(), y.clone()));
        }
        out
    }

    pub fn eval(&self, s: &Rat) -> Result<Rat> {
        let width = self.width();
        if s < &rat_zero() || s > &width {
            return Err(Error::OutOfDomain {
                arg: fmt_rat(s),
                width: fmt_rat(&width),
            });
        }
        let mut remaining = s.clone();
        let mut value = rat_zero();
        for (slope, w) in &self.segments {
            if &remaining <= w {
                value += slope * &remaining;
                return Ok(value);
            }
            value += slope * w;
            remaining -= w;
        }
        Ok(value)
    }

    /// `f^ι(s) = f(r - s) - f(r)`: reverse the segments and negate the slopes.
    pub fn involution(&self) -> Self {
        ConcavePolygon {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|(s, w)| (-s, w.clone()))
                .collect(),
        }
    }

    /// Sup-convolution: merge the segment lists by slope.
    pub fn convex_sum(&self, other: &Self) -> Self {
        let mut all: Vec<(Rat, Rat)> = self
            .segments
            .iter()
            .chain(&other.segments)
            .cloned()
            .collect();
        all.sort_by(|a, b| b.0.cmp(&a.0));
        ConcavePolygon::from_segments(all)
            .expect("slope-sorted segments always form a valid polygon")
    }

    /// Exact conversion back to a slope tuple; every segment width must be a
    /// non-negative integer.
    pub fn to_slope_vector(&self) -> Result<SlopeVector> {
        let mut slopes = Vec::new();
        for (s, w) in &self.segments {
            if !w.is_integer() {
                return Err(Error::BadArity(format!(
                    "segment width {} is not an integer",
                    fmt_rat(w)
                )));
            }
            let n = w.to_integer().to_usize().ok_or_else(|| {
                Error::BadArity(format!("segment width {} too large", fmt_rat(w)))
            })?;
            slopes.extend(std::iter::repeat(s.clone()).take(n));
        }
        SlopeVector::new(slopes)
    }

    /// Pointwise `self(s) ≤ other(s)` on the common domain; errors when the
    /// domains differ. Both polygons are piecewise linear, so checking the
    /// union of their vertex abscissas is exact.
    pub fn pointwise_leq(&self, other: &Self) -> Result<bool> {
        let w1 = self.width();
        let w2 = other.width();
        if w1 != w2 {
            return Err(Error::DomainMismatch(fmt_rat(&w1), fmt_rat(&w2)));
        }
        let mut xs: BTreeSet<Rat> = BTreeSet::new();
        for (x, _) in self.vertices().into_iter().chain(other.vertices()) {
            xs.insert(x);
        }
        for x in xs {
            if self.eval(&x)? > other.eval(&x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for ConcavePolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{{}}}",
            self.segments
                .iter()
                .map(|(s, w)| format!("{}:{}", fmt_rat(s), fmt_rat(w)))
                .join(", ")
        )
    }
}

impl FromStr for ConcavePolygon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::parse_at(0, "polygon must be braced: {slope:width, …}"))?;
        if inner.trim().is_empty() {
            return Ok(ConcavePolygon::empty());
        }
        let mut segments = Vec::new();
        for part in inner.split(',') {
            let (s, w) = part
                .split_once(':')
                .ok_or_else(|| Error::parse_at(0, "segment must be slope:width"))?;
            segments.push((parse_rat(s)?, parse_rat(w)?));
        }
        let poly = ConcavePolygon::from_segments(segments.clone())?;
        if poly.segments.len() != segments.len() {
            return Err(Error::Schema("polygon text must not repeat slopes".into()));
        }
        Ok(poly)
    }
}

/// Report attached to a limit envelope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitReport {
    /// Pairs `(n, m)` with `n | m` whose polygons violate `p_m ≤ p_n`.
    pub violations: Vec<(u32, u32)>,
    /// True when the sampled infimum had to be repaired into a concave
    /// polygon. Cannot happen for valid concave inputs; kept as a defensive
    /// signal.
    pub concavity_forced: bool,
}

/// Pointwise infimum of a family of polygons indexed by levels `n`, taken on
/// the union of their breakpoints, together with a monotonicity report for
/// all divisibility pairs.
///
/// All polygons must share the domain width and the endpoint value.
pub fn limit_envelope(levels: &[(u32, ConcavePolygon)]) -> Result<(ConcavePolygon, LimitReport)> {
    let (_, first) = levels
        .first()
        .ok_or_else(|| Error::BadArity("empty polygon sequence".into()))?;
    let width = first.width();
    let endpoint = first.endpoint();
    for (_, p) in levels {
        if p.width() != width {
            return Err(Error::DomainMismatch(fmt_rat(&width), fmt_rat(&p.width())));
        }
        if p.endpoint() != endpoint {
            return Err(Error::EndpointMismatch(
                fmt_rat(&endpoint),
                fmt_rat(&p.endpoint()),
            ));
        }
    }

    let mut xs: BTreeSet<Rat> = BTreeSet::new();
    for (_, p) in levels {
        for (x, _) in p.vertices() {
            xs.insert(x);
        }
    }
    let mut points: Vec<(Rat, Rat)> = Vec::new();
    for x in xs {
        let y = levels
            .iter()
            .map(|(_, p)| p.eval(&x).expect("x lies in the common domain"))
            .min()
            .expect("non-empty family");
        points.push((x, y));
    }

    let mut concavity_forced = false;
    let envelope = match ConcavePolygon::from_vertices(&points) {
        Ok(p) => p,
        Err(_) => {
            concavity_forced = true;
            upper_concave_hull(&points)
        }
    };

    let mut violations = Vec::new();
    for (i, (n, pn)) in levels.iter().enumerate() {
        for (j, (m, pm)) in levels.iter().enumerate() {
            if i == j || *n == *m || *n == 0 || m % n != 0 {
                continue;
            }
            if !pm.pointwise_leq(pn)? {
                violations.push((*n, *m));
            }
        }
    }
    violations.sort_unstable();
    violations.dedup();

    Ok((envelope, LimitReport { violations, concavity_forced }))
}

/// Smallest concave polygon through `(0,0)` lying on or above the given
/// points (classical upper hull by stack scan). Points must be sorted by x.
pub(crate) fn upper_concave_hull(points: &[(Rat, Rat)]) -> ConcavePolygon {
    let mut hull: Vec<(Rat, Rat)> = Vec::new();
    for p in points {
        hull.push(p.clone());
        while hull.len() >= 3 {
            let a = &hull[hull.len() - 3];
            let b = &hull[hull.len() - 2];
            let c = &hull[hull.len() - 1];
            // b must lie strictly above the chord a–c, i.e. cross ≥ 0 keeps b.
            let cross = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
            if cross.is_negative() {
                let last = hull.pop().expect("length checked");
                hull.pop();
                hull.push(last);
            } else {
                break;
            }
        }
    }
    ConcavePolygon::from_vertices(&hull).expect("hull vertices are concave by construction")
}

/// A non-increasing, eventually-zero sequence of non-negative rationals:
/// the invariant of a torsion module. Trailing zeros are dropped, so the
/// stored entries are strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlusInfType(Vec<Rat>);

impl PlusInfType {
    pub fn new(entries: Vec<Rat>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Schema("entries must be non-increasing".into()));
        }
        if entries.iter().any(|e| e.is_negative()) {
            return Err(Error::Schema("entries must be non-negative".into()));
        }
        Ok(Self::from_unsorted(entries))
    }

    pub fn from_unsorted(mut entries: Vec<Rat>) -> Self {
        entries.retain(|e| !e.is_zero());
        entries.sort_by(|a, b| b.cmp(a));
        PlusInfType(entries)
    }

    pub fn from_ints(entries: &[i64]) -> Self {
        Self::from_unsorted(entries.iter().map(|&n| rat_int(n)).collect())
    }

    pub fn zero() -> Self {
        PlusInfType(Vec::new())
    }

    pub fn entries(&self) -> &[Rat] {
        &self.0
    }

    /// Number of nonzero entries.
    pub fn support(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Total length `Σ inv_i`.
    pub fn length(&self) -> Rat {
        self.0.iter().fold(rat_zero(), |acc, e| acc + e)
    }

    /// Entry `i` (0-based) with zero padding beyond the support.
    pub fn entry(&self, i: usize) -> Rat {
        self.0.get(i).cloned().unwrap_or_else(rat_zero)
    }

    /// Sum of the first `r` entries: the largest length of a subquotient
    /// generated by `r` elements.
    pub fn head_sum(&self, r: usize) -> Rat {
        self.0.iter().take(r).fold(rat_zero(), |acc, e| acc + e)
    }

    pub fn convex_sum(&self, other: &Self) -> Self {
        let mut merged = Vec::with_capacity(self.0.len() + other.0.len());
        merged.extend_from_slice(&self.0);
        merged.extend_from_slice(&other.0);
        PlusInfType::from_unsorted(merged)
    }

    /// Entrywise sum after zero padding.
    pub fn entrywise_sum(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        PlusInfType::from_unsorted((0..n).map(|i| self.entry(i) + other.entry(i)).collect())
    }

    /// Dominance after padding both sides with zeros to a common length.
    pub fn dominance(&self, other: &Self) -> Dominance {
        let n = self.0.len().max(other.0.len());
        let f: Vec<Rat> = (0..n).map(|i| self.entry(i)).collect();
        let g: Vec<Rat> = (0..n).map(|i| other.entry(i)).collect();
        dominance_of_slices(&f, &g)
    }

    pub fn as_slope_vector(&self) -> SlopeVector {
        SlopeVector(self.0.clone())
    }
}

impl fmt::Display for PlusInfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.iter().map(fmt_rat).join(", "))
    }
}

impl FromStr for PlusInfType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: SlopeVector = s.parse()?;
        PlusInfType::new(v.slopes().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn sv(entries: &[(i64, i64)]) -> SlopeVector {
        SlopeVector::from_unsorted(entries.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn dominance_examples() {
        let f = SlopeVector::from_ints(&[1, 0]);
        let half = sv(&[(1, 2), (1, 2)]);
        assert_eq!(f.dominance(&half).unwrap(), Dominance::Greater);
        let g = SlopeVector::from_ints(&[2, -1]);
        assert_eq!(f.dominance(&g).unwrap(), Dominance::Less);
        assert_eq!(f.dominance(&f).unwrap(), Dominance::Equal);
    }

    #[test]
    fn dominance_deg_mismatch_and_crossing() {
        let f = SlopeVector::from_ints(&[2, 0]);
        let g = SlopeVector::from_ints(&[1, 0]);
        assert_eq!(f.dominance(&g).unwrap(), Dominance::DegMismatch);
        let f = SlopeVector::from_ints(&[2, -1, -1]);
        let g = SlopeVector::from_ints(&[1, 1, -2]);
        assert_eq!(f.dominance(&g).unwrap(), Dominance::Incomparable);
    }

    #[test]
    fn dominance_length_mismatch_is_an_error() {
        let f = SlopeVector::from_ints(&[1]);
        let g = SlopeVector::from_ints(&[1, 0]);
        assert!(matches!(
            f.dominance(&g),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn involution_reverses_and_negates() {
        let f = SlopeVector::from_ints(&[3, 1, -2]);
        assert_eq!(f.involution(), SlopeVector::from_ints(&[2, -1, -3]));
        assert_eq!(f.involution().involution(), f);
        assert_eq!(SlopeVector::empty().involution(), SlopeVector::empty());
    }

    #[test]
    fn involution_is_the_polygon_flip() {
        let f = sv(&[(3, 1), (1, 2), (-1, 1)]);
        let r = rat_int(f.rank() as i64);
        let total = f.deg();
        for num in 0..=6 {
            let s = rat(num, 2);
            let lhs = f.involution().eval(&s).unwrap();
            let rhs = f.eval(&(&r - &s)).unwrap() - &total;
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn stats_and_empty_edge_cases() {
        let f = SlopeVector::from_ints(&[2, 1, 1]);
        let st = f.stats().unwrap();
        assert_eq!(st.deg, rat_int(4));
        assert_eq!(st.max, rat_int(2));
        assert_eq!(st.min, rat_int(1));
        let e = SlopeVector::empty();
        assert_eq!(e.deg(), rat_int(0));
        assert!(matches!(e.max_slope(), Err(Error::EmptyType)));
        assert!(matches!(e.min_slope(), Err(Error::EmptyType)));
    }

    #[test]
    fn convex_sum_merges_sorted() {
        let f = SlopeVector::from_ints(&[2, 0]);
        let g = SlopeVector::from_ints(&[1]);
        assert_eq!(f.convex_sum(&g), SlopeVector::from_ints(&[2, 1, 0]));
        assert_eq!(f.convex_sum(&SlopeVector::empty()), f);
        assert_eq!(SlopeVector::empty().convex_sum(&f), f);
    }

    #[test]
    fn eval_at_boundaries_and_midpoints() {
        let f = SlopeVector::from_ints(&[3, 1, -2]);
        assert_eq!(f.eval(&rat_int(0)).unwrap(), rat_int(0));
        assert_eq!(f.eval(&rat_int(3)).unwrap(), f.deg());
        assert_eq!(f.eval(&rat(3, 2)).unwrap(), rat(7, 2));
        assert!(matches!(f.eval(&rat_int(4)), Err(Error::OutOfDomain { .. })));
        assert!(matches!(f.eval(&rat(-1, 2)), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn eval_of_convex_sum_is_max_decomposition() {
        let f = SlopeVector::from_ints(&[3, 1, -2]);
        let g = sv(&[(1, 2), (0, 1)]);
        let h = f.convex_sum(&g);
        for s_num in 0..=(2 * h.rank() as i64) {
            let s = rat(s_num, 2);
            let direct = h.eval(&s).unwrap();
            let mut best: Option<Rat> = None;
            for k in 0..=f.rank() as i64 {
                let s1 = rat_int(k);
                let s2 = &s - &s1;
                if s2 < rat_zero() || s2 > rat_int(g.rank() as i64) {
                    continue;
                }
                let v = f.eval(&s1).unwrap() + g.eval(&s2).unwrap();
                best = Some(best.map_or(v.clone(), |b: Rat| b.max(v)));
            }
            for k in 0..=g.rank() as i64 {
                let s2 = rat_int(k);
                let s1 = &s - &s2;
                if s1 < rat_zero() || s1 > rat_int(f.rank() as i64) {
                    continue;
                }
                let v = f.eval(&s1).unwrap() + g.eval(&s2).unwrap();
                best = Some(best.map_or(v.clone(), |b: Rat| b.max(v)));
            }
            assert_eq!(direct, best.unwrap(), "at s = {s}");
        }
    }

    #[test]
    fn product_types_match_small_cases() {
        let f = SlopeVector::from_ints(&[1, 0]);
        assert_eq!(f.tensor(&f), SlopeVector::from_ints(&[2, 1, 1, 0]));
        let g = SlopeVector::from_ints(&[3, 1, -2]);
        assert_eq!(g.ext(2).unwrap(), SlopeVector::from_ints(&[4, 1, -1]));
        assert_eq!(f.sym(2).unwrap(), SlopeVector::from_ints(&[2, 1, 0]));
        assert!(matches!(g.ext(4), Err(Error::BadArity(_))));
        assert!(matches!(g.sym(0), Err(Error::BadArity(_))));
        assert_eq!(g.ext(0).unwrap(), SlopeVector::from_ints(&[0]));
        assert_eq!(g.ext(3).unwrap(), SlopeVector::from_ints(&[2]));
    }

    #[test]
    fn ext_top_slope_is_head_partial_sum() {
        let g = sv(&[(3, 1), (1, 2), (1, 2), (-2, 1)]);
        let sums = g.partial_sums();
        for k in 1..=g.rank() {
            assert_eq!(g.ext(k).unwrap().max_slope().unwrap(), sums[k - 1]);
        }
    }

    #[test]
    fn twist_shift_translates_eval() {
        let f = SlopeVector::from_ints(&[1, 0]);
        assert_eq!(f.twist_shift(-1), SlopeVector::from_ints(&[0, -1]));
        let t = f.twist_shift(2);
        for num in 0..=4 {
            let s = rat(num, 2);
            assert_eq!(
                t.eval(&s).unwrap(),
                f.eval(&s).unwrap() + rat_int(2) * &s
            );
        }
    }

    #[test]
    fn polygon_round_trip_and_eval() {
        let p: ConcavePolygon = "{2:1/2, 0:1/2}".parse().unwrap();
        assert_eq!(p.to_string(), "{2:1/2, 0:1/2}");
        assert_eq!(p.eval(&rat(3, 4)).unwrap(), rat_int(1));
        assert_eq!(p.width(), rat_int(1));
        assert_eq!(p.endpoint(), rat_int(1));
        let v: SlopeVector = "[3, 1/2, -2]".parse().unwrap();
        assert_eq!(v.to_string(), "[3, 1/2, -2]");
        assert_eq!("[]".parse::<SlopeVector>().unwrap(), SlopeVector::empty());
        assert!("[1, 2]".parse::<SlopeVector>().is_err());
    }

    #[test]
    fn rescale_merges_equal_slopes() {
        let f = SlopeVector::from_ints(&[1, 1, 0, 0]);
        let p = f.rescale(2).unwrap();
        assert_eq!(p.to_string(), "{1:1, 0:1}");
        let q = f.rescale(1).unwrap();
        assert_eq!(q, f.to_polygon());
        assert!(matches!(f.rescale(3), Err(Error::BadArity(_))));
    }

    #[test]
    fn polygon_convex_sum_is_sup_convolution() {
        let p = sv(&[(2, 1), (0, 1)]).rescale(1).unwrap();
        let q = sv(&[(1, 1)]).rescale(1).unwrap();
        let s = p.convex_sum(&q);
        assert_eq!(s, sv(&[(2, 1), (1, 1), (0, 1)]).to_polygon());
    }

    #[test]
    fn limit_envelope_infimum_and_report() {
        let p1 = SlopeVector::from_ints(&[2, 0]).to_polygon();
        let p2 = ConcavePolygon::from_segments(vec![(rat(3, 2), rat_int(1)), (rat(1, 2), rat_int(1))])
            .unwrap();
        let (inf, report) = limit_envelope(&[(1, p1.clone()), (2, p2.clone())]).unwrap();
        assert_eq!(inf, p2);
        assert!(report.violations.is_empty());
        assert!(!report.concavity_forced);

        // Reversed roles: level 2 lies above level 1, so (1, 2) is reported.
        let (_, report) = limit_envelope(&[(1, p2), (2, p1)]).unwrap();
        assert_eq!(report.violations, vec![(1, 2)]);
    }

    #[test]
    fn limit_envelope_rejects_mismatched_families() {
        let p = SlopeVector::from_ints(&[1, 0]).to_polygon();
        let narrow = SlopeVector::from_ints(&[1]).to_polygon();
        assert!(matches!(
            limit_envelope(&[(1, p.clone()), (2, narrow)]),
            Err(Error::DomainMismatch(_, _))
        ));
        let high = SlopeVector::from_ints(&[2, 0]).to_polygon();
        assert!(matches!(
            limit_envelope(&[(1, p), (2, high)]),
            Err(Error::EndpointMismatch(_, _))
        ));
        assert!(matches!(limit_envelope(&[]), Err(Error::BadArity(_))));
    }

    #[test]
    fn plus_inf_type_padding_and_sums() {
        let a = PlusInfType::from_ints(&[2, 1]);
        let b = PlusInfType::from_ints(&[1]);
        assert_eq!(a.convex_sum(&b), PlusInfType::from_ints(&[2, 1, 1]));
        assert_eq!(a.entrywise_sum(&b), PlusInfType::from_ints(&[3, 1]));
        assert_eq!(a.length(), rat_int(3));
        assert_eq!(b.dominance(&b), Dominance::Equal);
        let c = PlusInfType::from_ints(&[3]);
        assert_eq!(c.dominance(&a), Dominance::Greater);
        assert_eq!(
            PlusInfType::from_ints(&[2, 1]).dominance(&PlusInfType::from_ints(&[2])),
            Dominance::DegMismatch
        );
        assert_eq!(PlusInfType::from_ints(&[1, 0, 0]).support(), 1);
    }

    #[test]
    fn dominance_implies_pointwise_bound() {
        let f = sv(&[(1, 2), (1, 2)]);
        let g = SlopeVector::from_ints(&[1, 0]);
        assert_eq!(f.dominance(&g).unwrap(), Dominance::Less);
        for num in 0..=8 {
            let s = rat(num, 4);
            assert!(f.eval(&s).unwrap() <= g.eval(&s).unwrap());
        }
    }
}
