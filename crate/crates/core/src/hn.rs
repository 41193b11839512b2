//! Harder–Narasimhan filtrations on finite decorated posets.
//!
//! The input is a bounded poset with a strictly monotone rank and a rational
//! degree per element. The HN filtration is computed as the upper concave
//! envelope of the (rank, degree) point cloud; every envelope breakpoint must
//! be realized by exactly one element and the realizers must form a chain.
//! Ties are refused, not resolved: a silent arbitrary choice would mask
//! modeling errors in the caller's category.
//!
//! Modularity of the lattice is not verified; only the order and the two
//! decorations are consumed.

use std::collections::BTreeMap;
use std::fmt;

use num::Signed;

use crate::error::{Error, Result};
use crate::polygon::{Dominance, SlopeVector};
use crate::rat::{rat_int, Rat};

/// Finite bounded poset with rank and degree decorations.
#[derive(Clone, Debug)]
pub struct RankedPoset {
    ids: Vec<String>,
    leq: Vec<Vec<bool>>,
    rank: Vec<u32>,
    deg: Vec<Rat>,
    bottom: usize,
    top: usize,
}

impl RankedPoset {
    /// Builds the poset from `(id, rank, deg)` rows and cover relations,
    /// closing the relation transitively. Bottom and top are inferred from
    /// rank 0 / maximal rank unless given explicitly.
    pub fn new(
        elements: Vec<(String, u32, Rat)>,
        covers: &[(String, String)],
        bounds: Option<(&str, &str)>,
    ) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPoset("no elements".into()));
        }
        let n = elements.len();
        let mut index = BTreeMap::new();
        for (i, (id, _, _)) in elements.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::InvalidPoset(format!("duplicate id `{id}`")));
            }
        }
        let look = |id: &str| -> Result<usize> {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::InvalidPoset(format!("unknown id `{id}`")))
        };

        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in covers {
            let (ia, ib) = (look(a)?, look(b)?);
            if ia == ib {
                return Err(Error::InvalidPoset(format!("reflexive cover `{a} < {b}`")));
            }
            leq[ia][ib] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }

        let rank: Vec<u32> = elements.iter().map(|(_, r, _)| *r).collect();
        let deg: Vec<Rat> = elements.iter().map(|(_, _, d)| d.clone()).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] {
                    if leq[j][i] {
                        return Err(Error::InvalidPoset(format!(
                            "cycle through `{}` and `{}`",
                            elements[i].0, elements[j].0
                        )));
                    }
                    if rank[i] >= rank[j] {
                        return Err(Error::InvalidPoset(format!(
                            "rank does not increase along `{} < {}`",
                            elements[i].0, elements[j].0
                        )));
                    }
                }
            }
        }

        let (bottom, top) = match bounds {
            Some((b, t)) => (look(b)?, look(t)?),
            None => {
                let max_rank = *rank.iter().max().expect("nonempty");
                let unique = |want: u32, what: &str| -> Result<usize> {
                    let hits: Vec<usize> =
                        (0..n).filter(|&i| rank[i] == want).collect();
                    match hits.as_slice() {
                        [i] => Ok(*i),
                        _ => Err(Error::InvalidPoset(format!(
                            "{what} is not unique by rank"
                        ))),
                    }
                };
                (unique(0, "bottom")?, unique(max_rank, "top")?)
            }
        };
        if rank[bottom] != 0 {
            return Err(Error::InvalidPoset("bottom has nonzero rank".into()));
        }
        for i in 0..n {
            if !leq[bottom][i] || !leq[i][top] {
                return Err(Error::InvalidPoset(format!(
                    "`{}` is not between bottom and top",
                    elements[i].0
                )));
            }
        }

        let ids = elements.into_iter().map(|(id, _, _)| id).collect();
        Ok(RankedPoset {
            ids,
            leq,
            rank,
            deg,
            bottom,
            top,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn rank_of(&self, i: usize) -> u32 {
        self.rank[i]
    }

    pub fn deg_of(&self, i: usize) -> &Rat {
        &self.deg[i]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }
}

/// Decreasing Γ-filtration: a chain from bottom to top with strictly
/// decreasing jumps, one jump per chain step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaFiltration {
    chain: Vec<usize>,
    jumps: Vec<Rat>,
}

impl GammaFiltration {
    pub fn new(p: &RankedPoset, chain: Vec<usize>, jumps: Vec<Rat>) -> Result<Self> {
        let f = GammaFiltration { chain, jumps };
        f.validate(p)?;
        Ok(f)
    }

    fn validate(&self, p: &RankedPoset) -> Result<()> {
        let n = p.len();
        if self.chain.is_empty() || self.chain.iter().any(|&c| c >= n) {
            return Err(Error::InvalidChain("chain indices out of range".into()));
        }
        if self.chain[0] != p.bottom() || *self.chain.last().unwrap() != p.top() {
            return Err(Error::InvalidChain(
                "chain must run from bottom to top".into(),
            ));
        }
        for w in self.chain.windows(2) {
            if w[0] == w[1] || !p.leq(w[0], w[1]) {
                return Err(Error::InvalidChain(format!(
                    "`{}` is not strictly below `{}`",
                    p.id(w[0]),
                    p.id(w[1])
                )));
            }
        }
        if self.jumps.len() + 1 != self.chain.len() {
            return Err(Error::InvalidChain(
                "need exactly one jump per chain step".into(),
            ));
        }
        for w in self.jumps.windows(2) {
            if w[0] <= w[1] {
                return Err(Error::InvalidChain(
                    "jumps must strictly decrease".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn chain(&self) -> &[usize] {
        &self.chain
    }

    pub fn jumps(&self) -> &[Rat] {
        &self.jumps
    }

    pub fn chain_ids<'a>(&self, p: &'a RankedPoset) -> Vec<&'a str> {
        self.chain.iter().map(|&c| p.id(c)).collect()
    }
}

/// Type of a filtration: each jump repeated by its rank increment.
pub fn filtration_type(f: &GammaFiltration, p: &RankedPoset) -> Result<SlopeVector> {
    f.validate(p)?;
    let mut slopes = Vec::new();
    for (i, gamma) in f.jumps().iter().enumerate() {
        let step = p.rank_of(f.chain[i + 1]) - p.rank_of(f.chain[i]);
        slopes.extend(std::iter::repeat(gamma.clone()).take(step as usize));
    }
    SlopeVector::new(slopes)
}

/// Cross product of `(b - a)` with `(c - a)`; positive means a left turn.
fn cross(a: &(u32, Rat), b: &(u32, Rat), c: &(u32, Rat)) -> Rat {
    let ax = rat_int(a.0 as i64);
    let bx = rat_int(b.0 as i64);
    let cx = rat_int(c.0 as i64);
    (&bx - &ax) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&cx - &ax)
}

/// Upper concave hull vertices of the decorated point cloud plus the origin.
/// Collinear interior points are dropped.
fn envelope_vertices(p: &RankedPoset) -> Vec<(u32, Rat)> {
    let mut best: BTreeMap<u32, Rat> = BTreeMap::new();
    best.insert(0, rat_int(0));
    for i in 0..p.len() {
        let r = p.rank_of(i);
        let d = p.deg_of(i);
        match best.get(&r) {
            Some(cur) if cur >= d => {}
            _ => {
                best.insert(r, d.clone());
            }
        }
    }
    let mut hull: Vec<(u32, Rat)> = Vec::new();
    for point in best {
        while hull.len() >= 2
            && !cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &point)
                .is_negative()
        {
            hull.pop();
        }
        hull.push(point);
    }
    hull
}

/// Harder–Narasimhan filtration of the decorated poset: the chain realizing
/// the concave envelope of the point cloud, with the segment slopes as jumps.
///
/// `NotAdmissible` reports a breakpoint with zero or several realizers, or
/// consecutive realizers that are incomparable (counted as two).
pub fn hn_filtration(p: &RankedPoset) -> Result<GammaFiltration> {
    if p.rank_of(p.top()) == 0 {
        return Err(Error::InvalidPoset("top has rank 0".into()));
    }
    let vertices = envelope_vertices(p);
    let mut chain = Vec::with_capacity(vertices.len());
    for (r, d) in &vertices {
        let realizers: Vec<usize> = (0..p.len())
            .filter(|&i| p.rank_of(i) == *r && p.deg_of(i) == d)
            .collect();
        match realizers.as_slice() {
            [x] => chain.push(*x),
            _ => {
                return Err(Error::NotAdmissible {
                    rank: *r,
                    realizers: realizers.len(),
                })
            }
        }
    }
    for w in chain.windows(2) {
        if !p.leq(w[0], w[1]) {
            return Err(Error::NotAdmissible {
                rank: p.rank_of(w[1]),
                realizers: 2,
            });
        }
    }
    let jumps = vertices
        .windows(2)
        .map(|w| {
            let run = rat_int((w[1].0 - w[0].0) as i64);
            (&w[1].1 - &w[0].1) / run
        })
        .collect();
    GammaFiltration::new(p, chain, jumps)
}

/// `deg(x)·rank(top) ≤ deg(top)·rank(x)` for every element: no subobject has
/// a steeper average slope than the whole.
pub fn semistable(p: &RankedPoset) -> bool {
    let r_top = rat_int(p.rank_of(p.top()) as i64);
    let d_top = p.deg_of(p.top());
    (0..p.len()).all(|i| {
        let r = rat_int(p.rank_of(i) as i64);
        p.deg_of(i) * &r_top <= d_top * r
    })
}

/// Outcome of comparing a total type against the convex sum of a
/// sub/quotient pair of types.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcatCheck {
    Equal,
    DominatedBy,
    Violation,
}

impl fmt::Display for ConcatCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConcatCheck::Equal => "equal",
            ConcatCheck::DominatedBy => "dominated-by",
            ConcatCheck::Violation => "violation",
        };
        write!(f, "{s}")
    }
}

/// Checks `t_total` against `t_sub ∗ t_quot`: `Equal` when they coincide,
/// `DominatedBy` when `t_total` lies strictly below in dominance order.
pub fn concat_check(
    t_sub: &SlopeVector,
    t_quot: &SlopeVector,
    t_total: &SlopeVector,
) -> Result<ConcatCheck> {
    if t_sub.rank() + t_quot.rank() != t_total.rank() {
        return Err(Error::LengthMismatch {
            left: t_sub.rank() + t_quot.rank(),
            right: t_total.rank(),
        });
    }
    let conv = t_sub.convex_sum(t_quot);
    if conv == *t_total {
        return Ok(ConcatCheck::Equal);
    }
    match t_total.dominance(&conv)? {
        Dominance::Less => Ok(ConcatCheck::DominatedBy),
        _ => Ok(ConcatCheck::Violation),
    }
}
