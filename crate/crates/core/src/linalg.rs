//! Matrices over valued rings: Smith normal form, lattice relative position,
//! torsion invariants, residue filtrations, and exact-sequence bounds.
//!
//! Divisibility in a valuation ring is valuation comparison, so Smith normal
//! form needs no gcd steps: pivot on a minimal-valuation entry and one pass of
//! exact divisions clears its row and column. Entries cleared this way are
//! assigned the exact zero of the ring, which keeps the pivot valuations exact
//! even when the scalars carry declared precision.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::polygon::{Dominance, PlusInfType, SlopeVector};
use crate::rat::{Rat, ValBound};
use crate::rings::ValuedRing;

/// Dense rectangular matrix over a single valued ring.
///
/// Entries may lie in the fraction field (negative valuations); operations
/// that require integral entries say so.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R: ValuedRing> {
    rows: usize,
    cols: usize,
    entries: Vec<R>,
}

impl<R: ValuedRing> Matrix<R> {
    pub fn new(rows: usize, cols: usize, entries: Vec<R>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{rows}x{cols} grid with {} entries",
                entries.len()
            )));
        }
        for e in &entries {
            if !e.same_context(&entries[0]) {
                return Err(Error::RingMismatch(
                    "matrix entries from different scalar rings".into(),
                ));
            }
        }
        Ok(Matrix { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Matrix::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Identity matrix in the same scalar ring as `like`.
    pub fn identity(n: usize, like: &R) -> Result<Self> {
        let mut entries = vec![like.zero_like(); n * n];
        for i in 0..n {
            entries[i * n + i] = like.one_like();
        }
        Matrix::new(n, n, entries)
    }

    /// Diagonal matrix with the given entries.
    pub fn diagonal(diag: Vec<R>) -> Result<Self> {
        let n = diag.len();
        if n == 0 {
            return Err(Error::ShapeMismatch("empty diagonal".into()));
        }
        let mut entries = vec![diag[0].zero_like(); n * n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i * n + i] = d;
        }
        Matrix::new(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &R {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: R) {
        self.entries[i * self.cols + j] = value;
    }

    /// A scalar from the same ring, used to mint zeros and ones.
    pub fn template(&self) -> &R {
        &self.entries[0]
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.at(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.template().zero_like();
                for t in 0..self.cols {
                    acc = acc.add(&self.at(i, t).mul(other.at(t, j))?)?;
                }
                entries.push(acc);
            }
        }
        Matrix::new(self.rows, other.cols, entries)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::ShapeMismatch("sum of unequal shapes".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(self.rows, self.cols, entries)
    }

    /// Scales every entry by `c`.
    pub fn scale(&self, c: &R) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.mul(c))
            .collect::<Result<Vec<_>>>()?;
        Matrix::new(self.rows, self.cols, entries)
    }

    pub fn map<F: FnMut(&R) -> Result<R>>(&self, mut f: F) -> Result<Self> {
        let entries = self.entries.iter().map(&mut f).collect::<Result<Vec<_>>>()?;
        Matrix::new(self.rows, self.cols, entries)
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn column_block(&self, lo: usize, hi: usize) -> Result<Self> {
        if lo >= hi || hi > self.cols {
            return Err(Error::ShapeMismatch(format!("column block {lo}..{hi}")));
        }
        let mut entries = Vec::with_capacity(self.rows * (hi - lo));
        for i in 0..self.rows {
            for j in lo..hi {
                entries.push(self.at(i, j).clone());
            }
        }
        Matrix::new(self.rows, hi - lo, entries)
    }

    /// Glues `[self | other]` side by side.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch("hstack of unequal heights".into()));
        }
        let mut entries = Vec::with_capacity(self.rows * (self.cols + other.cols));
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries.push(self.at(i, j).clone());
            }
            for j in 0..other.cols {
                entries.push(other.at(i, j).clone());
            }
        }
        Matrix::new(self.rows, self.cols + other.cols, entries)
    }

    /// Block-diagonal sum `diag(self, other)`.
    pub fn block_diag(&self, other: &Self) -> Result<Self> {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        let mut entries = vec![self.template().zero_like(); r * c];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[i * c + j] = self.at(i, j).clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                entries[(self.rows + i) * c + (self.cols + j)] = other.at(i, j).clone();
            }
        }
        Matrix::new(r, c, entries)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.entries.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row_i -= f * row_s`.
    fn row_op(&mut self, i: usize, s: usize, f: &R) -> Result<()> {
        for j in 0..self.cols {
            let t = self.at(s, j).clone();
            let new = self.at(i, j).sub(&f.mul(&t)?)?;
            self.set(i, j, new);
        }
        Ok(())
    }

    /// `col_j -= f * col_s`.
    fn col_op(&mut self, j: usize, s: usize, f: &R) -> Result<()> {
        for i in 0..self.rows {
            let t = self.at(i, s).clone();
            let new = self.at(i, j).sub(&f.mul(&t)?)?;
            self.set(i, j, new);
        }
        Ok(())
    }

    /// `col_j += f * col_s`.
    fn col_op_add(&mut self, j: usize, s: usize, f: &R) -> Result<()> {
        for i in 0..self.rows {
            let t = self.at(i, s).clone();
            let new = self.at(i, j).add(&f.mul(&t)?)?;
            self.set(i, j, new);
        }
        Ok(())
    }
}

impl<R: ValuedRing> fmt::Display for Matrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row = (0..self.cols)
                .map(|j| self.at(i, j).to_string())
                .join("; ");
            if i + 1 < self.rows {
                writeln!(f, "{row}")?;
            } else {
                write!(f, "{row}")?;
            }
        }
        Ok(())
    }
}

/// Unimodular transforms accumulated during Smith reduction:
/// `left * X * right` is diagonal and `left * left_inv = 1`.
///
/// The columns of `left_inv` are a basis of the standard lattice adapted to
/// the column lattice of `X`: column `j` scaled by the `j`-th diagonal entry
/// spans the matching summand.
#[derive(Clone, Debug)]
pub struct SnfTransforms<R: ValuedRing> {
    pub left: Matrix<R>,
    pub left_inv: Matrix<R>,
    pub right: Matrix<R>,
}

/// Diagonal data of a Smith normal form.
#[derive(Clone, Debug)]
pub struct SnfResult<R: ValuedRing> {
    /// Non-decreasing, `Inf` entries trailing; length `min(rows, cols)`.
    pub valuations: Vec<ValBound>,
    /// Number of finite valuations.
    pub rank: usize,
    /// Diagonal entries; exact zeros past `rank`.
    pub diagonal: Vec<R>,
    pub transforms: Option<SnfTransforms<R>>,
}

impl<R: ValuedRing> SnfResult<R> {
    /// All valuations as rationals; errors with `Singular` when rank-deficient.
    pub fn finite_valuations(&self) -> Result<Vec<Rat>> {
        self.valuations.iter().map(ValBound::expect_fin).collect()
    }
}

pub fn snf<R: ValuedRing>(x: &Matrix<R>) -> Result<SnfResult<R>> {
    snf_impl(x, false)
}

pub fn snf_with_transforms<R: ValuedRing>(x: &Matrix<R>) -> Result<SnfResult<R>> {
    snf_impl(x, true)
}

/// Locates a sound pivot in the trailing submatrix: the minimal determinate
/// valuation, provided no indeterminate entry could hide something smaller.
fn find_pivot<R: ValuedRing>(
    m: &Matrix<R>,
    step: usize,
) -> Result<Option<(usize, usize, ValBound)>> {
    let mut best: Option<(usize, usize, ValBound)> = None;
    let mut fuzzy_lb: Option<ValBound> = None;
    for i in step..m.rows() {
        for j in step..m.cols() {
            let e = m.at(i, j);
            if e.is_exact_zero() {
                continue;
            }
            if e.is_indeterminate() {
                let lb = e.val_lb();
                if fuzzy_lb.as_ref().map_or(true, |cur| lb < *cur) {
                    fuzzy_lb = Some(lb);
                }
                continue;
            }
            let v = e.valuation()?;
            if best.as_ref().map_or(true, |(_, _, bv)| v < *bv) {
                best = Some((i, j, v));
            }
        }
    }
    match (best, fuzzy_lb) {
        (None, None) => Ok(None),
        (None, Some(lb)) => Err(Error::PrecisionExhausted(format!(
            "cannot tell residual entries from zero below valuation {lb}"
        ))),
        (Some(b), None) => Ok(Some(b)),
        (Some((i, j, v)), Some(lb)) => {
            if lb < v {
                Err(Error::PrecisionExhausted(format!(
                    "pivot valuation {v} exceeds an undetermined entry's bound {lb}"
                )))
            } else {
                Ok(Some((i, j, v)))
            }
        }
    }
}

fn snf_impl<R: ValuedRing>(x: &Matrix<R>, with_transforms: bool) -> Result<SnfResult<R>> {
    let mut m = x.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let n = rows.min(cols);
    let like = m.template().clone();
    let mut left = with_transforms
        .then(|| Matrix::identity(rows, &like))
        .transpose()?;
    let mut left_inv = left.clone();
    let mut right = with_transforms
        .then(|| Matrix::identity(cols, &like))
        .transpose()?;

    let mut valuations = Vec::with_capacity(n);
    let mut diagonal = Vec::with_capacity(n);
    let mut rank = 0;

    for step in 0..n {
        let Some((pi, pj, pval)) = find_pivot(&m, step)? else {
            break;
        };
        m.swap_rows(step, pi);
        m.swap_cols(step, pj);
        if let (Some(u), Some(uinv), Some(v)) = (&mut left, &mut left_inv, &mut right) {
            u.swap_rows(step, pi);
            uinv.swap_cols(step, pi);
            v.swap_cols(step, pj);
        }
        let pivot = m.at(step, step).clone();
        // The pivot inverse is only needed when something remains to clear;
        // the deepest pivot is the most expensive one to invert.
        let needs_elim = (step + 1..rows).any(|i| !m.at(i, step).is_exact_zero())
            || (step + 1..cols).any(|j| !m.at(step, j).is_exact_zero());
        let pivot_inv = if needs_elim {
            Some(pivot.invert()?)
        } else {
            None
        };
        let pivot_inv = pivot_inv.as_ref();
        for i in step + 1..rows {
            if m.at(i, step).is_exact_zero() {
                continue;
            }
            let f = m.at(i, step).mul(pivot_inv.expect("inverse prepared"))?;
            m.row_op(i, step, &f)?;
            m.set(i, step, like.zero_like());
            if let (Some(u), Some(uinv)) = (&mut left, &mut left_inv) {
                u.row_op(i, step, &f)?;
                uinv.col_op_add(step, i, &f)?;
            }
        }
        for j in step + 1..cols {
            if m.at(step, j).is_exact_zero() {
                continue;
            }
            let f = m.at(step, j).mul(pivot_inv.expect("inverse prepared"))?;
            m.col_op(j, step, &f)?;
            m.set(step, j, like.zero_like());
            if let Some(v) = &mut right {
                v.col_op(j, step, &f)?;
            }
        }
        valuations.push(pval);
        diagonal.push(pivot);
        rank += 1;
    }

    while valuations.len() < n {
        valuations.push(ValBound::Inf);
        diagonal.push(like.zero_like());
    }

    let transforms = match (left, left_inv, right) {
        (Some(left), Some(left_inv), Some(right)) => Some(SnfTransforms {
            left,
            left_inv,
            right,
        }),
        _ => None,
    };
    Ok(SnfResult {
        valuations,
        rank,
        diagonal,
        transforms,
    })
}

/// Relative position `d(L1, L2)` of the two full lattices related by `x`:
/// the negated elementary-divisor valuations, non-increasing.
///
/// `x` expresses a basis of `L2` in a basis of `L1`; equivalently `L2` is the
/// column span of `x` inside the standard lattice `L1`. Effective inclusions
/// `L2 ⊆ L1` yield entries `≤ 0`; `deg = -v(det x)`.
pub fn lattice_distance<R: ValuedRing>(x: &Matrix<R>) -> Result<SlopeVector> {
    if !x.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "lattice bases must be square, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let result = snf(x)?;
    if result.rank < x.rows() {
        return Err(Error::Singular);
    }
    let slopes = result
        .finite_valuations()?
        .into_iter()
        .map(|v| -v)
        .collect::<Vec<_>>();
    SlopeVector::new(slopes)
}

/// Elementary-divisor invariants of the torsion module presented by `x`
/// (cokernel of the map with matrix `x`), largest first, zeros dropped.
pub fn torsion_inv<R: ValuedRing>(x: &Matrix<R>) -> Result<PlusInfType> {
    if x.rows() > x.cols() {
        return Err(Error::NotTorsion);
    }
    let result = snf(x)?;
    if result.rank < x.rows() {
        return Err(Error::NotTorsion);
    }
    let mut vals = result.finite_valuations()?;
    for v in &vals {
        if v < &Rat::from_integer(0.into()) {
            return Err(Error::NegativeValuation(
                "presentation has fraction-field entries".into(),
            ));
        }
    }
    vals.sort();
    vals.reverse();
    PlusInfType::new(vals)
}

/// Step filtration induced on the residue space by a pair of lattices.
///
/// For `d(L1, L2) = (γ_1 ≥ … ≥ γ_r)` with adapted basis `u_1, …, u_r` of the
/// standard lattice, the subspace at level `γ` is spanned by the residues of
/// the `u_i` with `γ_i ≥ γ`.
#[derive(Clone, Debug)]
pub struct ResidueFiltration<R: ValuedRing> {
    jumps: Vec<Rat>,
    subspace_bases: Vec<Matrix<R>>,
    distance: SlopeVector,
}

impl<R: ValuedRing> ResidueFiltration<R> {
    /// Strictly decreasing levels at which the subspace grows.
    pub fn jumps(&self) -> &[Rat] {
        &self.jumps
    }

    /// Residue-vector basis for each jump, columns of the returned matrices.
    pub fn subspace_bases(&self) -> &[Matrix<R>] {
        &self.subspace_bases
    }

    /// Strictly increasing subspace dimensions, one per jump.
    pub fn dimensions(&self) -> Vec<usize> {
        self.subspace_bases.iter().map(Matrix::cols).collect()
    }

    /// The type of the filtration: each jump with its dimension increment.
    pub fn filtration_type(&self) -> &SlopeVector {
        &self.distance
    }
}

pub fn relative_filtration<R: ValuedRing>(x: &Matrix<R>) -> Result<ResidueFiltration<R>> {
    if !x.is_square() {
        return Err(Error::ShapeMismatch("lattice bases must be square".into()));
    }
    let result = snf_with_transforms(x)?;
    if result.rank < x.rows() {
        return Err(Error::Singular);
    }
    let distance = SlopeVector::new(
        result
            .finite_valuations()?
            .into_iter()
            .map(|v| -v)
            .collect(),
    )?;
    let adapted = result
        .transforms
        .as_ref()
        .expect("transforms requested")
        .left_inv
        .map(|e| e.residue_rep())?;
    let mut jumps = Vec::new();
    let mut subspace_bases = Vec::new();
    for gamma in result.finite_valuations()?.iter().map(|v| -v) {
        if jumps.last() == Some(&gamma) {
            continue;
        }
        let count = distance.slopes().iter().filter(|g| **g >= gamma).count();
        jumps.push(gamma);
        subspace_bases.push(adapted.column_block(0, count)?);
    }
    Ok(ResidueFiltration {
        jumps,
        subspace_bases,
        distance,
    })
}

/// Outcome of checking `inv(M1) ∗ inv(M3) ≤ inv(M2) ≤ inv(M1) + inv(M3)` for
/// a short exact sequence `0 → M1 → M2 → M3 → 0` of torsion modules.
///
/// `length_ok` is the additivity precondition `length(M2) = length(M1) +
/// length(M3)`; when it fails the other flags are reported `false`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSeqReport {
    pub length_ok: bool,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub split_equal: bool,
}

pub fn exact_seq_bounds(
    inv1: &PlusInfType,
    inv2: &PlusInfType,
    inv3: &PlusInfType,
) -> ExactSeqReport {
    if inv1.length() + inv3.length() != inv2.length() {
        return ExactSeqReport {
            length_ok: false,
            lower_ok: false,
            upper_ok: false,
            split_equal: false,
        };
    }
    let lower = inv1.convex_sum(inv3);
    let upper = inv1.entrywise_sum(inv3);
    let lower_ok = matches!(lower.dominance(inv2), Dominance::Less | Dominance::Equal);
    let upper_ok = matches!(inv2.dominance(&upper), Dominance::Less | Dominance::Equal);
    ExactSeqReport {
        length_ok: true,
        lower_ok,
        upper_ok,
        split_equal: lower == *inv2,
    }
}

/// Distances of the lattices a surjection induces on kernel and image.
#[derive(Clone, Debug)]
pub struct InducedLattices {
    /// `d(L1, L1')` on the kernel of the projection; empty when the
    /// projection is injective.
    pub d1: SlopeVector,
    /// `d(L2, L2')` on the ambient space.
    pub d2: SlopeVector,
    /// `d(L3, L3')` on the image.
    pub d3: SlopeVector,
    /// Whether `d2 ≥ d1 ∗ d3` in dominance order.
    pub holds: bool,
}

/// Given bases of two full lattices `L2, L2'` and a surjective projection,
/// computes the induced lattices `L1 = L2 ∩ ker`, `L3 = proj(L2)` (and
/// likewise for `L2'`) and the three relative positions.
pub fn induced_lattices<R: ValuedRing>(
    basis_l2: &Matrix<R>,
    basis_l2_prime: &Matrix<R>,
    projection: &Matrix<R>,
) -> Result<InducedLattices> {
    let r = basis_l2.rows();
    if !basis_l2.is_square() || !basis_l2_prime.is_square() || basis_l2_prime.rows() != r {
        return Err(Error::ShapeMismatch("lattice bases must be square".into()));
    }
    if projection.cols() != r || projection.rows() > r {
        return Err(Error::ShapeMismatch(format!(
            "projection {}x{} from ambient dimension {r}",
            projection.rows(),
            projection.cols()
        )));
    }
    let k = projection.rows();
    let d2 = lattice_distance(&solve(basis_l2, basis_l2_prime)?)?;

    let split = |basis: &Matrix<R>| -> Result<(Option<Matrix<R>>, Matrix<R>)> {
        let mapped = projection.mul(basis)?;
        let result = snf_with_transforms(&mapped)?;
        if result.rank < k {
            return Err(Error::Singular);
        }
        let transforms = result.transforms.as_ref().expect("transforms requested");
        let kernel = if k < r {
            Some(basis.mul(&transforms.right.column_block(k, r)?)?)
        } else {
            None
        };
        let mut image = transforms.left_inv.column_block(0, k)?;
        for (j, d) in result.diagonal.iter().take(k).enumerate() {
            for i in 0..k {
                let scaled = image.at(i, j).mul(d)?;
                image.set(i, j, scaled);
            }
        }
        Ok((kernel, image))
    };

    let (kernel, image) = split(basis_l2)?;
    let (kernel_prime, image_prime) = split(basis_l2_prime)?;

    let d1 = match (kernel, kernel_prime) {
        (Some(b), Some(bp)) => lattice_distance(&solve(&b, &bp)?)?,
        _ => SlopeVector::empty(),
    };
    let d3 = lattice_distance(&solve(&image, &image_prime)?)?;

    let lower = d1.convex_sum(&d3);
    let holds = matches!(
        lower.dominance(&d2)?,
        Dominance::Less | Dominance::Equal
    );
    Ok(InducedLattices { d1, d2, d3, holds })
}

/// Minimum valuation over all `k×k` minors, by exact cofactor expansion.
/// Independent of the Smith reduction; intended for dimensions ≤ 5.
pub fn minors_min_valuation<R: ValuedRing>(x: &Matrix<R>, k: usize) -> Result<ValBound> {
    if k > x.rows().min(x.cols()) {
        return Err(Error::BadArity(format!(
            "{k}x{k} minors of a {}x{} matrix",
            x.rows(),
            x.cols()
        )));
    }
    if x.rows().max(x.cols()) > 8 {
        return Err(Error::TooLarge(
            "minor enumeration is limited to 8 rows and columns".into(),
        ));
    }
    if k == 0 {
        return Ok(ValBound::fin(0));
    }
    let mut best = ValBound::Inf;
    for row_set in (0..x.rows()).combinations(k) {
        for col_set in (0..x.cols()).combinations(k) {
            let det = laplace_det(x, &row_set, &col_set)?;
            let v = if det.is_exact_zero() {
                ValBound::Inf
            } else if det.is_indeterminate() {
                return Err(Error::PrecisionExhausted(
                    "a minor is zero to working precision".into(),
                ));
            } else {
                det.valuation()?
            };
            if v < best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Determinant of the minor on `rows × cols` by cofactor expansion along the
/// first listed row. Division-free.
fn laplace_det<R: ValuedRing>(x: &Matrix<R>, rows: &[usize], cols: &[usize]) -> Result<R> {
    if rows.len() == 1 {
        return Ok(x.at(rows[0], cols[0]).clone());
    }
    let mut acc = x.template().zero_like();
    for (t, &c) in cols.iter().enumerate() {
        let e = x.at(rows[0], c);
        if e.is_exact_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
        let cof = laplace_det(x, &rows[1..], &rest)?;
        let term = e.mul(&cof)?;
        acc = if t % 2 == 0 {
            acc.add(&term)?
        } else {
            acc.sub(&term)?
        };
    }
    Ok(acc)
}

/// Determinant by fraction-field elimination with minimal-valuation pivots.
pub fn determinant<R: ValuedRing>(x: &Matrix<R>) -> Result<R> {
    if !x.is_square() {
        return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
    }
    let n = x.rows();
    let mut m = x.clone();
    let mut det = m.template().one_like();
    for step in 0..n {
        let mut best: Option<(usize, ValBound)> = None;
        let mut fuzzy = false;
        for i in step..n {
            let e = m.at(i, step);
            if e.is_exact_zero() {
                continue;
            }
            if e.is_indeterminate() {
                fuzzy = true;
                continue;
            }
            let v = e.valuation()?;
            if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                best = Some((i, v));
            }
        }
        let Some((pi, _)) = best else {
            if fuzzy {
                return Err(Error::PrecisionExhausted(
                    "pivot column is zero to working precision".into(),
                ));
            }
            return Ok(m.template().zero_like());
        };
        if pi != step {
            m.swap_rows(step, pi);
            det = det.neg();
        }
        let pivot = m.at(step, step).clone();
        // Inverting the deepest pivot is the dominant cost; skip it when
        // the column below is already clear.
        if (step + 1..n).any(|i| !m.at(i, step).is_exact_zero()) {
            let pivot_inv = pivot.invert()?;
            for i in step + 1..n {
                if m.at(i, step).is_exact_zero() {
                    continue;
                }
                let f = m.at(i, step).mul(&pivot_inv)?;
                m.row_op(i, step, &f)?;
                m.set(i, step, pivot.zero_like());
            }
        }
        det = det.mul(&pivot)?;
    }
    Ok(det)
}

/// Solves `a * x = b` for `a` of full column rank; errors with `Singular`
/// when the system is rank-deficient or inconsistent.
pub fn solve<R: ValuedRing>(a: &Matrix<R>, b: &Matrix<R>) -> Result<Matrix<R>> {
    if a.rows() != b.rows() || a.rows() < a.cols() {
        return Err(Error::ShapeMismatch(format!(
            "solving {}x{} against {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let mut lhs = a.clone();
    let mut rhs = b.clone();
    let n = a.cols();
    let mut pivot_row_of_col = vec![usize::MAX; n];
    let mut used = vec![false; a.rows()];
    for c in 0..n {
        let mut best: Option<(usize, ValBound)> = None;
        let mut fuzzy = false;
        for i in 0..a.rows() {
            if used[i] {
                continue;
            }
            let e = lhs.at(i, c);
            if e.is_exact_zero() {
                continue;
            }
            if e.is_indeterminate() {
                fuzzy = true;
                continue;
            }
            let v = e.valuation()?;
            if best.as_ref().map_or(true, |(_, bv)| v < *bv) {
                best = Some((i, v));
            }
        }
        let Some((pi, _)) = best else {
            return Err(if fuzzy {
                Error::PrecisionExhausted("pivot column is zero to working precision".into())
            } else {
                Error::Singular
            });
        };
        used[pi] = true;
        pivot_row_of_col[c] = pi;
        let pivot_inv = lhs.at(pi, c).clone().invert()?;
        for i in 0..a.rows() {
            if i == pi || lhs.at(i, c).is_exact_zero() {
                continue;
            }
            let f = lhs.at(i, c).mul(&pivot_inv)?;
            lhs.row_op(i, pi, &f)?;
            lhs.set(i, c, lhs.template().zero_like());
            rhs.row_op(i, pi, &f)?;
        }
    }
    for i in 0..a.rows() {
        if used[i] {
            continue;
        }
        for j in 0..b.cols() {
            let e = rhs.at(i, j);
            if e.is_exact_zero() {
                continue;
            }
            if e.is_indeterminate() {
                return Err(Error::PrecisionExhausted(
                    "residual is zero to working precision".into(),
                ));
            }
            return Err(Error::Singular);
        }
    }
    let mut entries = Vec::with_capacity(n * b.cols());
    for c in 0..n {
        let pi = pivot_row_of_col[c];
        let pivot_inv = lhs.at(pi, c).clone().invert()?;
        for j in 0..b.cols() {
            entries.push(rhs.at(pi, j).mul(&pivot_inv)?);
        }
    }
    Matrix::new(n, b.cols(), entries)
}

/// Inverse of a square matrix over the fraction field.
pub fn inverse<R: ValuedRing>(x: &Matrix<R>) -> Result<Matrix<R>> {
    if !x.is_square() {
        return Err(Error::ShapeMismatch("inverse of a non-square matrix".into()));
    }
    solve(x, &Matrix::identity(x.rows(), x.template())?)
}

/// Basis of the saturation of the column span of `b` (full column rank):
/// the smallest direct summand of the standard lattice containing it.
pub fn saturation_basis<R: ValuedRing>(b: &Matrix<R>) -> Result<Matrix<R>> {
    let result = snf_with_transforms(b)?;
    if result.rank < b.cols() {
        return Err(Error::Singular);
    }
    result
        .transforms
        .as_ref()
        .expect("transforms requested")
        .left_inv
        .column_block(0, b.cols())
}

/// Rank of `m` together with a lattice basis of its column-vector kernel
/// `{x integral : m·x = 0}`, or `None` when the kernel is zero.
pub fn column_kernel_basis<R: ValuedRing>(
    m: &Matrix<R>,
) -> Result<(usize, Option<Matrix<R>>)> {
    let result = snf_with_transforms(m)?;
    let rank = result.rank;
    if rank == m.cols() {
        return Ok((rank, None));
    }
    let v = &result.transforms.as_ref().expect("transforms requested").right;
    Ok((rank, Some(v.column_block(rank, m.cols())?)))
}

/// Kronecker product, rows and columns in lexicographic block order.
pub fn kronecker<R: ValuedRing>(a: &Matrix<R>, b: &Matrix<R>) -> Result<Matrix<R>> {
    let (r, c) = (a.rows() * b.rows(), a.cols() * b.cols());
    let mut entries = Vec::with_capacity(r * c);
    for i1 in 0..a.rows() {
        for i2 in 0..b.rows() {
            for j1 in 0..a.cols() {
                for j2 in 0..b.cols() {
                    entries.push(a.at(i1, j1).mul(b.at(i2, j2))?);
                }
            }
        }
    }
    Matrix::new(r, c, entries)
}

/// `k`-th compound matrix: entries are the `k×k` minors, index sets ordered
/// lexicographically. Computes the action on the `k`-th exterior power.
pub fn compound_matrix<R: ValuedRing>(x: &Matrix<R>, k: usize) -> Result<Matrix<R>> {
    if k == 0 || k > x.rows().min(x.cols()) {
        return Err(Error::BadArity(format!(
            "compound of order {k} for a {}x{} matrix",
            x.rows(),
            x.cols()
        )));
    }
    let row_sets: Vec<Vec<usize>> = (0..x.rows()).combinations(k).collect();
    let col_sets: Vec<Vec<usize>> = (0..x.cols()).combinations(k).collect();
    let mut entries = Vec::with_capacity(row_sets.len() * col_sets.len());
    for rs in &row_sets {
        for cs in &col_sets {
            entries.push(laplace_det(x, rs, cs)?);
        }
    }
    Matrix::new(row_sets.len(), col_sets.len(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};
    use crate::rings::{FiniteField, HahnSeries, PadicRational, XiSeries};

    fn pad(n: i64) -> PadicRational {
        PadicRational::from_int(2, n)
    }

    fn pad_mat(rows: &[&[i64]]) -> Matrix<PadicRational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&n| pad(n)).collect()).collect())
            .unwrap()
    }

    fn vals(result: &SnfResult<PadicRational>) -> Vec<ValBound> {
        result.valuations.clone()
    }

    #[test]
    fn snf_of_upper_triangular_presentation_has_valuations_zero_two() {
        let x = pad_mat(&[&[2, 1], &[0, 2]]);
        let result = snf(&x).unwrap();
        assert_eq!(vals(&result), vec![ValBound::fin(0), ValBound::fin(2)]);
        assert_eq!(result.rank, 2);
        assert_eq!(minors_min_valuation(&x, 1).unwrap(), ValBound::fin(0));
        assert_eq!(minors_min_valuation(&x, 2).unwrap(), ValBound::fin(2));
    }

    #[test]
    fn snf_of_diagonal_hahn_matrix_reads_off_exponents() {
        let field = FiniteField::prime(2).unwrap();
        let t_half = HahnSeries::t_pow(&field, rat(1, 2));
        let one = HahnSeries::one(&field);
        let zero = HahnSeries::zero(&field);
        let x = Matrix::from_rows(vec![
            vec![t_half, zero.clone()],
            vec![zero, one],
        ])
        .unwrap();
        let result = snf(&x).unwrap();
        assert_eq!(
            result.valuations,
            vec![ValBound::Fin(rat_int(0)), ValBound::Fin(rat(1, 2))]
        );
    }

    #[test]
    fn snf_detects_rank_deficiency_with_trailing_infinite_valuations() {
        let x = pad_mat(&[&[2, 2], &[2, 2]]);
        let result = snf(&x).unwrap();
        assert_eq!(result.rank, 1);
        assert_eq!(vals(&result), vec![ValBound::fin(1), ValBound::Inf]);
    }

    #[test]
    fn snf_transforms_reconstruct_the_diagonal() {
        let x = pad_mat(&[&[4, 6, 1], &[10, 2, 3], &[8, 4, 4]]);
        let result = snf_with_transforms(&x).unwrap();
        let t = result.transforms.as_ref().unwrap();
        let d = t.left.mul(&x).unwrap().mul(&t.right).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(d.at(i, j), &result.diagonal[i]);
                } else {
                    assert!(d.at(i, j).is_exact_zero(), "({i},{j}) not cleared");
                }
            }
        }
        let id = t.left.mul(&t.left_inv).unwrap();
        assert_eq!(id, Matrix::identity(3, x.template()).unwrap());
    }

    #[test]
    fn snf_sums_match_the_minor_oracle_on_a_xi_matrix() {
        let x = Matrix::from_rows(vec![
            vec![XiSeries::xi_pow(2), XiSeries::one()],
            vec![XiSeries::xi_pow(1), XiSeries::xi_pow(3)],
        ])
        .unwrap();
        let result = snf(&x).unwrap();
        let mut acc = rat_int(0);
        for k in 1..=2usize {
            acc += result.valuations[k - 1].expect_fin().unwrap();
            assert_eq!(
                minors_min_valuation(&x, k).unwrap(),
                ValBound::Fin(acc.clone())
            );
        }
    }

    #[test]
    fn snf_refuses_a_pivot_hidden_below_declared_precision() {
        let field = FiniteField::prime(2).unwrap();
        let fuzzy = HahnSeries::zero(&field).truncated(Some(rat_int(3)));
        let one = HahnSeries::one(&field);
        let zero = HahnSeries::zero(&field);
        let x = Matrix::from_rows(vec![
            vec![one, zero.clone()],
            vec![zero, fuzzy],
        ])
        .unwrap();
        assert!(matches!(snf(&x), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn lattice_distance_of_the_identity_vanishes() {
        let x = pad_mat(&[&[1, 0], &[0, 1]]);
        assert_eq!(
            lattice_distance(&x).unwrap(),
            SlopeVector::from_ints(&[0, 0])
        );
    }

    #[test]
    fn lattice_distance_negates_and_sorts_the_divisor_valuations() {
        let x = pad_mat(&[&[2, 1], &[0, 2]]);
        assert_eq!(
            lattice_distance(&x).unwrap(),
            SlopeVector::from_ints(&[0, -2])
        );
    }

    #[test]
    fn lattice_distance_of_an_inverse_uniformizer_is_positive() {
        let x = Matrix::from_rows(vec![
            vec![XiSeries::xi_pow(-1), XiSeries::zero()],
            vec![XiSeries::zero(), XiSeries::one()],
        ])
        .unwrap();
        assert_eq!(
            lattice_distance(&x).unwrap(),
            SlopeVector::from_ints(&[1, 0])
        );
    }

    #[test]
    fn lattice_distance_rejects_singular_bases() {
        let x = pad_mat(&[&[2, 2], &[2, 2]]);
        assert!(matches!(lattice_distance(&x), Err(Error::Singular)));
    }

    #[test]
    fn torsion_invariants_of_a_diagonal_presentation() {
        let x = pad_mat(&[&[4, 0], &[0, 2]]);
        let inv = torsion_inv(&x).unwrap();
        assert_eq!(inv, PlusInfType::from_ints(&[2, 1]));
        assert_eq!(inv.length(), rat_int(3));
    }

    #[test]
    fn torsion_invariants_of_the_identity_are_empty() {
        let x = pad_mat(&[&[1, 0], &[0, 1]]);
        let inv = torsion_inv(&x).unwrap();
        assert!(inv.is_zero());
        assert_eq!(inv.length(), rat_int(0));
    }

    #[test]
    fn torsion_invariants_see_the_cyclic_cokernel_of_a_unit_corner() {
        let x = pad_mat(&[&[2, 1], &[0, 2]]);
        assert_eq!(torsion_inv(&x).unwrap(), PlusInfType::from_ints(&[2]));
    }

    #[test]
    fn torsion_invariants_reject_a_rank_deficient_presentation() {
        let x = pad_mat(&[&[2, 2], &[2, 2]]);
        assert!(matches!(torsion_inv(&x), Err(Error::NotTorsion)));
    }

    #[test]
    fn torsion_invariants_are_transpose_invariant() {
        for rows in [
            vec![vec![4i64, 6, 1], vec![10, 2, 3], vec![8, 4, 4]],
            vec![vec![2, 1, 0], vec![0, 2, 1], vec![0, 0, 2]],
        ] {
            let x = pad_mat(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
            assert_eq!(
                torsion_inv(&x).unwrap(),
                torsion_inv(&x.transpose()).unwrap()
            );
        }
    }

    #[test]
    fn relative_filtration_of_the_identity_is_a_single_full_jump() {
        let x = pad_mat(&[&[1, 0], &[0, 1]]);
        let filt = relative_filtration(&x).unwrap();
        assert_eq!(filt.jumps(), &[rat_int(0)]);
        assert_eq!(filt.dimensions(), vec![2]);
    }

    #[test]
    fn relative_filtration_of_diag_t_one_puts_the_unit_direction_first() {
        let field = FiniteField::prime(2).unwrap();
        let t = HahnSeries::t_pow(&field, rat_int(1));
        let one = HahnSeries::one(&field);
        let zero = HahnSeries::zero(&field);
        let x = Matrix::from_rows(vec![
            vec![t, zero.clone()],
            vec![zero.clone(), one.clone()],
        ])
        .unwrap();
        let filt = relative_filtration(&x).unwrap();
        assert_eq!(filt.jumps(), &[rat_int(0), rat_int(-1)]);
        assert_eq!(filt.dimensions(), vec![1, 2]);
        let f0 = &filt.subspace_bases()[0];
        assert!(f0.at(0, 0).is_exact_zero());
        assert_eq!(f0.at(1, 0), &one);
        assert_eq!(
            filt.filtration_type(),
            &SlopeVector::from_ints(&[0, -1])
        );
    }

    #[test]
    fn relative_filtration_of_a_scalar_lattice_has_one_jump() {
        let x = Matrix::diagonal(vec![XiSeries::xi_pow(-1), XiSeries::xi_pow(-1)]).unwrap();
        let filt = relative_filtration(&x).unwrap();
        assert_eq!(filt.jumps(), &[rat_int(1)]);
        assert_eq!(filt.dimensions(), vec![2]);
    }

    #[test]
    fn relative_filtration_type_agrees_with_lattice_distance() {
        let x = pad_mat(&[&[4, 6, 1], &[10, 2, 3], &[8, 4, 4]]);
        let filt = relative_filtration(&x).unwrap();
        assert_eq!(filt.filtration_type(), &lattice_distance(&x).unwrap());
    }

    #[test]
    fn exact_sequence_bounds_recognize_a_split_sum() {
        let report = exact_seq_bounds(
            &PlusInfType::from_ints(&[1]),
            &PlusInfType::from_ints(&[1, 1]),
            &PlusInfType::from_ints(&[1]),
        );
        assert_eq!(
            report,
            ExactSeqReport {
                length_ok: true,
                lower_ok: true,
                upper_ok: true,
                split_equal: true,
            }
        );
    }

    #[test]
    fn exact_sequence_bounds_see_a_nonsplit_cyclic_extension() {
        let report = exact_seq_bounds(
            &PlusInfType::from_ints(&[1]),
            &PlusInfType::from_ints(&[2]),
            &PlusInfType::from_ints(&[1]),
        );
        assert!(report.length_ok && report.lower_ok && report.upper_ok);
        assert!(!report.split_equal);
    }

    #[test]
    fn exact_sequence_bounds_reject_non_additive_lengths() {
        let report = exact_seq_bounds(
            &PlusInfType::from_ints(&[1]),
            &PlusInfType::from_ints(&[3]),
            &PlusInfType::from_ints(&[1]),
        );
        assert!(!report.length_ok && !report.lower_ok && !report.upper_ok);
    }

    #[test]
    fn induced_lattices_of_equal_lattices_are_all_zero() {
        let b = pad_mat(&[&[1, 0], &[0, 1]]);
        let p = pad_mat(&[&[1, 0]]);
        let out = induced_lattices(&b, &b, &p).unwrap();
        assert_eq!(out.d1, SlopeVector::from_ints(&[0]));
        assert_eq!(out.d2, SlopeVector::from_ints(&[0, 0]));
        assert_eq!(out.d3, SlopeVector::from_ints(&[0]));
        assert!(out.holds);
    }

    #[test]
    fn induced_lattices_scale_with_equality_for_a_scalar_sublattice() {
        let b = pad_mat(&[&[1, 0], &[0, 1]]);
        let bp = pad_mat(&[&[2, 0], &[0, 2]]);
        let p = pad_mat(&[&[1, 0]]);
        let out = induced_lattices(&b, &bp, &p).unwrap();
        assert_eq!(out.d1, SlopeVector::from_ints(&[-1]));
        assert_eq!(out.d2, SlopeVector::from_ints(&[-1, -1]));
        assert_eq!(out.d3, SlopeVector::from_ints(&[-1]));
        assert!(out.holds);
    }

    #[test]
    fn induced_lattices_dominate_the_convex_sum_strictly_when_split_fails() {
        let b = pad_mat(&[&[1, 0], &[0, 1]]);
        let bp = pad_mat(&[&[2, 1], &[0, 2]]);
        let p = pad_mat(&[&[0, 1]]);
        let out = induced_lattices(&b, &bp, &p).unwrap();
        assert_eq!(out.d1, SlopeVector::from_ints(&[-1]));
        assert_eq!(out.d2, SlopeVector::from_ints(&[0, -2]));
        assert_eq!(out.d3, SlopeVector::from_ints(&[-1]));
        assert!(out.holds);
        assert_eq!(
            out.d1.convex_sum(&out.d3).dominance(&out.d2).unwrap(),
            Dominance::Less
        );
    }

    #[test]
    fn minor_valuations_of_the_zero_matrix_are_infinite() {
        let x = pad_mat(&[&[0, 0], &[0, 0]]);
        assert_eq!(minors_min_valuation(&x, 1).unwrap(), ValBound::Inf);
        assert!(matches!(
            minors_min_valuation(&x, 3),
            Err(Error::BadArity(_))
        ));
    }

    #[test]
    fn triangle_inequality_for_a_fixed_pair_of_bases() {
        let x = pad_mat(&[&[2, 1], &[0, 2]]);
        let y = pad_mat(&[&[1, 0], &[1, 2]]);
        let dx = lattice_distance(&x).unwrap();
        let dy = lattice_distance(&y).unwrap();
        let dxy = lattice_distance(&x.mul(&y).unwrap()).unwrap();
        let sum = SlopeVector::new(
            dx.slopes()
                .iter()
                .zip(dy.slopes())
                .map(|(a, b)| a + b)
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            dxy.dominance(&sum).unwrap(),
            Dominance::Less | Dominance::Equal
        ));
    }

    #[test]
    fn solve_and_inverse_round_trip() {
        let x = pad_mat(&[&[2, 1], &[0, 2]]);
        let inv = inverse(&x).unwrap();
        let id = Matrix::identity(2, x.template()).unwrap();
        assert_eq!(x.mul(&inv).unwrap(), id);
        let d = determinant(&x).unwrap();
        assert_eq!(d, PadicRational::from_int(2, 4));
    }

    #[test]
    fn saturation_of_a_scaled_column_recovers_the_direction() {
        let b = pad_mat(&[&[2], &[0]]);
        let sat = saturation_basis(&b).unwrap();
        let dist = lattice_distance(&solve(&sat, &b).unwrap()).unwrap();
        assert_eq!(dist, SlopeVector::from_ints(&[-1]));
    }

    #[test]
    fn column_kernel_of_a_projection_composite() {
        let m = pad_mat(&[&[0, 1]]);
        let (rank, kernel) = column_kernel_basis(&m).unwrap();
        assert_eq!(rank, 1);
        let k = kernel.unwrap();
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).unwrap().at(0, 0).is_exact_zero());
    }

    #[test]
    fn kronecker_and_compound_shapes_and_values() {
        let x = pad_mat(&[&[1, 1], &[0, 2]]);
        let y = pad_mat(&[&[2, 0], &[0, 1]]);
        let k = kronecker(&x, &y).unwrap();
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k.at(0, 0), &pad(2));
        assert_eq!(k.at(0, 2), &pad(2));
        let c = compound_matrix(&x, 2).unwrap();
        assert_eq!((c.rows(), c.cols()), (1, 1));
        assert_eq!(c.at(0, 0), &pad(2));
    }
}
