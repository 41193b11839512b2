//! Isocrystals and crystal lattices over the exact `p`-adic model — Newton
//! types via characteristic-polynomial valuation polygons, Hodge types via
//! elementary divisors, and the Newton-versus-Hodge dominance check — plus
//! Hodge–Tate modules over the `ξ`-adic model with candidate-based lower
//! bounds for their slope filtration.
//!
//! The Frobenius here is linear (trivial twist on coefficients); objects
//! whose Frobenius is genuinely semilinear are represented directly by their
//! slope decomposition data instead of a matrix.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::hn::{filtration_type, hn_filtration, RankedPoset};
use crate::linalg::{
    column_kernel_basis, determinant, lattice_distance, solve, Matrix,
};
use crate::polygon::{Dominance, SlopeVector};
use crate::rat::{padic_valuation, rat, rat_int, Rat};
use crate::rings::{PadicRational, ValuedRing, XiSeries};

/// Characteristic polynomials are exact over `ℚ` but `O(r⁴)`; tensor
/// products of the supported ranks stay within this bound.
const CHAR_POLY_MAX_DIM: usize = 12;

pub(crate) fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[derive(Clone, Debug)]
enum IsocrystalRepr {
    /// Frobenius matrix on a basis; the map is linear, so eigenvalue
    /// valuations are computable.
    Matrix(Matrix<PadicRational>),
    /// Slope decomposition data, for objects given without a matrix.
    Slopes(SlopeVector),
}

/// Finite-dimensional vector space with a bijective Frobenius, up to isogeny.
#[derive(Clone, Debug)]
pub struct Isocrystal {
    p: u64,
    repr: IsocrystalRepr,
}

impl Isocrystal {
    pub fn new(matrix: Matrix<PadicRational>) -> Result<Self> {
        let p = matrix.template().p();
        if !is_prime(p) {
            return Err(Error::BadModulus(format!("{p} is not prime")));
        }
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch("Frobenius matrix must be square".into()));
        }
        if determinant(&matrix)?.is_exact_zero() {
            return Err(Error::Singular);
        }
        Ok(Isocrystal {
            p,
            repr: IsocrystalRepr::Matrix(matrix),
        })
    }

    /// Slope-decomposition constructor: a list of `(slope, height)` pairs
    /// with `slope·height` integral, concatenated into the Newton type.
    pub fn from_slope_data(p: u64, data: &[(Rat, usize)]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadModulus(format!("{p} is not prime")));
        }
        let mut slopes = Vec::new();
        for (slope, height) in data {
            if *height == 0 {
                return Err(Error::Schema("slope heights must be positive".into()));
            }
            if !(slope * rat_int(*height as i64)).is_integer() {
                return Err(Error::Schema(format!(
                    "slope {slope} with height {height} has a non-integral degree"
                )));
            }
            slopes.extend(std::iter::repeat(slope.clone()).take(*height));
        }
        if slopes.is_empty() {
            return Err(Error::EmptyType);
        }
        Ok(Isocrystal {
            p,
            repr: IsocrystalRepr::Slopes(SlopeVector::from_unsorted(slopes)),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rank(&self) -> usize {
        match &self.repr {
            IsocrystalRepr::Matrix(m) => m.rows(),
            IsocrystalRepr::Slopes(t) => t.rank(),
        }
    }

    pub fn matrix(&self) -> Option<&Matrix<PadicRational>> {
        match &self.repr {
            IsocrystalRepr::Matrix(m) => Some(m),
            IsocrystalRepr::Slopes(_) => None,
        }
    }

    /// Twist by the `n`-th power of the uniformizer: slopes drop by `n`.
    pub fn twist(&self, n: i64) -> Result<Isocrystal> {
        match &self.repr {
            IsocrystalRepr::Matrix(m) => {
                Isocrystal::new(m.scale(&PadicRational::p_pow(self.p, -n))?)
            }
            IsocrystalRepr::Slopes(t) => Ok(Isocrystal {
                p: self.p,
                repr: IsocrystalRepr::Slopes(t.twist_shift(-n)),
            }),
        }
    }
}

/// An isocrystal together with a distinguished lattice: the matrix is read
/// as the Frobenius on a lattice basis, so elementary divisors make sense.
#[derive(Clone, Debug)]
pub struct CrystalLattice {
    matrix: Matrix<PadicRational>,
}

impl CrystalLattice {
    pub fn new(matrix: Matrix<PadicRational>) -> Result<Self> {
        // Runs the full isocrystal validation, then keeps the basis.
        let iso = Isocrystal::new(matrix)?;
        match iso.repr {
            IsocrystalRepr::Matrix(matrix) => Ok(CrystalLattice { matrix }),
            IsocrystalRepr::Slopes(_) => unreachable!("constructed from a matrix"),
        }
    }

    pub fn p(&self) -> u64 {
        self.matrix.template().p()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix<PadicRational> {
        &self.matrix
    }

    pub fn isocrystal(&self) -> Isocrystal {
        Isocrystal {
            p: self.p(),
            repr: IsocrystalRepr::Matrix(self.matrix.clone()),
        }
    }

    /// Twist: matrix scaled by `p^{-n}`, Hodge type shifted by `(n, …, n)`.
    pub fn twist(&self, n: i64) -> Result<CrystalLattice> {
        CrystalLattice::new(self.matrix.scale(&PadicRational::p_pow(self.p(), -n))?)
    }
}

/// Monic characteristic polynomial `det(T·I − A)` over exact rationals via
/// the trace recursion; coefficient `i` of the result multiplies `T^i`.
pub fn char_poly(m: &Matrix<PadicRational>) -> Result<Vec<Rat>> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::ShapeMismatch("characteristic polynomial of a non-square matrix".into()));
    }
    if n > CHAR_POLY_MAX_DIM {
        return Err(Error::TooLarge(format!(
            "characteristic polynomial guarded to dimension ≤ {CHAR_POLY_MAX_DIM}, got {n}"
        )));
    }
    let a: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| m.at(i, j).value().clone()).collect())
        .collect();
    let mut coeffs = vec![rat_int(0); n + 1];
    coeffs[n] = rat_int(1);
    // aux = M_k with M_0 = I, M_k = A·M_{k−1} + c_{n−k}·I.
    let mut aux: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| rat_int((i == j) as i64)).collect())
        .collect();
    for k in 1..=n {
        let mut next = vec![vec![rat_int(0); n]; n];
        for (i, row) in next.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..n).map(|l| &a[i][l] * &aux[l][j]).sum();
            }
        }
        aux = next;
        let trace: Rat = (0..n).map(|i| aux[i][i].clone()).sum();
        let ck = -trace / rat_int(k as i64);
        for (i, row) in aux.iter_mut().enumerate() {
            row[i] += &ck;
        }
        coeffs[n - k] = ck;
    }
    Ok(coeffs)
}

/// Root valuations of a monic polynomial: the valuation polygon of the
/// coefficients, one slope per root, sorted non-increasing.
fn valuation_polygon_roots(coeffs: &[Rat], p: u64) -> Result<SlopeVector> {
    if coeffs.first().map_or(true, Rat::is_zero) {
        return Err(Error::Singular);
    }
    let points: Vec<(i64, i64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i as i64, padic_valuation(c, p)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &q in &points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Pop while b sits on or above the chord a–q.
            if (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0) <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        let value = rat(y1 - y2, x2 - x1);
        slopes.extend(std::iter::repeat(value).take((x2 - x1) as usize));
    }
    SlopeVector::new(slopes)
}

/// Newton type: the multiset of Frobenius eigenvalue valuations.
pub fn newton_type(d: &Isocrystal) -> Result<SlopeVector> {
    match &d.repr {
        IsocrystalRepr::Matrix(m) => valuation_polygon_roots(&char_poly(m)?, d.p),
        IsocrystalRepr::Slopes(t) => Ok(t.clone()),
    }
}

/// Newton type of the ascending-by-opposite-slope filtration: the involution
/// of the Newton type, with total degree `−v(det)`.
pub fn newton_iota_type(d: &Isocrystal) -> Result<SlopeVector> {
    Ok(newton_type(d)?.involution())
}

/// Hodge type of the lattice: negated elementary-divisor valuations of the
/// Frobenius matrix.
pub fn hodge_type_crystal(x: &CrystalLattice) -> Result<SlopeVector> {
    lattice_distance(x.matrix())
}

/// Outcome of the Newton-versus-Hodge dominance comparison; `Violation`
/// indicates a computation bug, never a legal input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MazurOutcome {
    Holds,
    HoldsWithEquality,
    Violation,
}

impl std::fmt::Display for MazurOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MazurOutcome::Holds => write!(f, "holds"),
            MazurOutcome::HoldsWithEquality => write!(f, "holds with equality"),
            MazurOutcome::Violation => write!(f, "VIOLATION"),
        }
    }
}

/// Checks the slope inequality `t_N^ι ≤ t_H` on a crystal lattice.
pub fn mazur_check(x: &CrystalLattice) -> Result<MazurOutcome> {
    let newton = newton_iota_type(&x.isocrystal())?;
    let hodge = hodge_type_crystal(x)?;
    Ok(match newton.dominance(&hodge)? {
        Dominance::Less => MazurOutcome::Holds,
        Dominance::Equal => MazurOutcome::HoldsWithEquality,
        Dominance::Greater | Dominance::Incomparable | Dominance::DegMismatch => {
            MazurOutcome::Violation
        }
    })
}

/// Tensor product of isocrystals: Kronecker product when both sides carry a
/// matrix, slope-data tensor otherwise (eigenvalue valuations add).
pub fn tensor(d1: &Isocrystal, d2: &Isocrystal) -> Result<Isocrystal> {
    if d1.p != d2.p {
        return Err(Error::RingMismatch(format!(
            "mixed primes {} and {}",
            d1.p, d2.p
        )));
    }
    match (&d1.repr, &d2.repr) {
        (IsocrystalRepr::Matrix(a), IsocrystalRepr::Matrix(b)) => {
            Isocrystal::new(crate::linalg::kronecker(a, b)?)
        }
        _ => {
            let t = newton_type(d1)?.tensor(&newton_type(d2)?);
            Ok(Isocrystal {
                p: d1.p,
                repr: IsocrystalRepr::Slopes(t),
            })
        }
    }
}

/// A `ξ`-adic lattice in a finite-dimensional vector space, given by the
/// matrix whose columns express its basis in the reference integral basis.
#[derive(Clone, Debug)]
pub struct HTModule {
    basis: Matrix<XiSeries>,
    truncation: Option<i64>,
}

impl HTModule {
    /// `truncation = Some(N)` truncates every entry to `O(ξ^N)`; `None`
    /// keeps the entries exact. Invertibility is checked at that precision.
    pub fn new(basis: Matrix<XiSeries>, truncation: Option<i64>) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::ShapeMismatch("lattice basis matrix must be square".into()));
        }
        let basis = basis.map(|e| Ok(e.clone().truncated(truncation)))?;
        if crate::linalg::snf(&basis)?.rank < basis.rows() {
            return Err(Error::Singular);
        }
        Ok(HTModule { basis, truncation })
    }

    pub fn basis(&self) -> &Matrix<XiSeries> {
        &self.basis
    }

    pub fn truncation(&self) -> Option<i64> {
        self.truncation
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// Twist: basis scaled by `ξ^{-n}`, Hodge type shifted by `(n, …, n)`.
    pub fn twist(&self, n: i64) -> Result<HTModule> {
        let scaled = self.basis.scale(&XiSeries::xi_pow(-n))?;
        HTModule::new(scaled, self.truncation.map(|t| t - n))
    }
}

/// Hodge type of the lattice: negated elementary-divisor valuations of its
/// basis matrix.
pub fn ht_hodge_type(h: &HTModule) -> Result<SlopeVector> {
    lattice_distance(h.basis())
}

/// Degree `−v_ξ(det)` of the lattice against the reference lattice.
pub fn ht_degree(h: &HTModule) -> Result<Rat> {
    Ok(-determinant(h.basis())?.valuation()?.expect_fin()?)
}

/// Echelon basis (leading ones, cleared pivot columns) of the row span.
fn rref(mut rows: Vec<Vec<Rat>>) -> Vec<Vec<Rat>> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(found) = (pivot_row..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(pivot_row, found);
        let lead = rows[pivot_row][col].clone();
        for cell in &mut rows[pivot_row] {
            *cell /= &lead;
        }
        for i in 0..rows.len() {
            if i != pivot_row && !rows[i][col].is_zero() {
                let f = rows[i][col].clone();
                for c in 0..cols {
                    let sub = &f * &rows[pivot_row][c];
                    rows[i][c] -= sub;
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

fn pivot_of(row: &[Rat]) -> usize {
    row.iter().position(|c| !c.is_zero()).expect("nonzero echelon row")
}

/// Whether the span of `sub` lies inside the span of `sup` (echelon rows).
fn span_contained(sub: &[Vec<Rat>], sup: &[Vec<Rat>]) -> bool {
    sub.iter().all(|row| {
        let mut v = row.clone();
        for s in sup {
            let pc = pivot_of(s);
            if v[pc].is_zero() {
                continue;
            }
            let f = v[pc].clone();
            for (x, y) in v.iter_mut().zip(s) {
                *x -= &f * y;
            }
        }
        v.iter().all(Rat::is_zero)
    })
}

/// Extracts the rational constant from a `ξ`-degree-zero exact entry.
fn constant_value(e: &XiSeries) -> Result<Rat> {
    if e.prec().is_some() {
        return Err(Error::Schema(
            "candidate subspace entries must be exact rationals".into(),
        ));
    }
    let mut value = rat_int(0);
    for (&exp, c) in e.coeffs() {
        if exp != 0 {
            return Err(Error::Schema(
                "candidate subspace entries must be rational constants".into(),
            ));
        }
        value = c.clone();
    }
    Ok(value)
}

/// Canonical echelon rows of the span of a candidate's columns.
fn candidate_echelon(w: &Matrix<XiSeries>, ambient: usize) -> Result<Vec<Vec<Rat>>> {
    if w.rows() != ambient {
        return Err(Error::ShapeMismatch(format!(
            "candidate lives in dimension {}, lattice in {}",
            w.rows(),
            ambient
        )));
    }
    let cols: Vec<Vec<Rat>> = (0..w.cols())
        .map(|j| (0..w.rows()).map(|i| constant_value(w.at(i, j))).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let k = cols.len();
    let rows = rref(cols);
    if rows.len() < k {
        return Err(Error::ShapeMismatch(
            "candidate matrix does not have full column rank".into(),
        ));
    }
    Ok(rows)
}

/// Degree of the sub-lattice cut out of the module's lattice by the rational
/// subspace spanned by `rows` (echelon basis): `−v_ξ(det)` of that
/// sub-lattice expressed in the subspace basis.
fn subspace_degree(h: &HTModule, rows: &[Vec<Rat>]) -> Result<Rat> {
    let r = h.rank();
    let k = rows.len();
    let w = Matrix::new(
        r,
        k,
        (0..r)
            .flat_map(|i| rows.iter().map(move |row| XiSeries::constant(row[i].clone())))
            .collect(),
    )?;
    let inside = if k == r {
        h.basis().clone()
    } else {
        // Rows of the orthogonal complement pair to zero with the subspace,
        // so the sub-lattice is the kernel of the paired basis matrix.
        let pivots: Vec<usize> = rows.iter().map(|row| pivot_of(row)).collect();
        let free: Vec<usize> = (0..r).filter(|c| !pivots.contains(c)).collect();
        let mut p_rows = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![rat_int(0); r];
            v[f] = rat_int(1);
            for (row, &pc) in rows.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            p_rows.push(v);
        }
        let p = Matrix::new(
            free.len(),
            r,
            p_rows
                .iter()
                .flatten()
                .map(|c| XiSeries::constant(c.clone()))
                .collect(),
        )?;
        let paired = p.mul(h.basis())?;
        let (_, kernel) = column_kernel_basis(&paired)?;
        let kernel = kernel.ok_or_else(|| {
            Error::ShapeMismatch("candidate subspace meets the lattice trivially".into())
        })?;
        if kernel.cols() != k {
            return Err(Error::ShapeMismatch(
                "sub-lattice rank does not match the candidate dimension".into(),
            ));
        }
        h.basis().mul(&kernel)?
    };
    let x = solve(&w, &inside)?;
    Ok(-determinant(&x)?.valuation()?.expect_fin()?)
}

/// Degree of a single candidate subspace against the lattice.
pub fn ht_candidate_degree(h: &HTModule, candidate: &Matrix<XiSeries>) -> Result<Rat> {
    subspace_degree(h, &candidate_echelon(candidate, h.rank())?)
}

/// Lower bound for the slope-filtration type from a candidate subspace
/// list: the filtration envelope of the candidates' `(dim, degree)` points.
/// The bound is certified exactly when the caller asserts the list is
/// exhaustive and the envelope is admissible.
pub fn ht_fargues_bound(
    h: &HTModule,
    candidates: &[Matrix<XiSeries>],
    exhaustive: bool,
) -> Result<(SlopeVector, bool)> {
    let r = h.rank();
    let mut spans: Vec<Vec<Vec<Rat>>> = Vec::new();
    for c in candidates {
        let rows = candidate_echelon(c, r)?;
        if !spans.contains(&rows) {
            spans.push(rows);
        }
    }
    if !spans.iter().any(|rows| rows.len() == r) {
        let full: Vec<Vec<Rat>> = (0..r)
            .map(|i| (0..r).map(|j| rat_int((i == j) as i64)).collect())
            .collect();
        spans.push(full);
    }
    let mut elements = vec![("C0".to_string(), 0u32, rat_int(0))];
    let mut covers = Vec::new();
    for (s, rows) in spans.iter().enumerate() {
        let id = format!("C{}", s + 1);
        elements.push((id.clone(), rows.len() as u32, subspace_degree(h, rows)?));
        covers.push(("C0".to_string(), id));
    }
    for (a, rows_a) in spans.iter().enumerate() {
        for (b, rows_b) in spans.iter().enumerate() {
            if rows_a.len() < rows_b.len() && span_contained(rows_a, rows_b) {
                covers.push((format!("C{}", a + 1), format!("C{}", b + 1)));
            }
        }
    }
    let poset = RankedPoset::new(elements, &covers, None)?;
    let filtration = hn_filtration(&poset)?;
    Ok((filtration_type(&filtration, &poset)?, exhaustive))
}

/// Two-sided comparison of the slope bounds of nested lattices in the same
/// space: `0 ≤ t(sup)(s) − t(sub)(s) ≤ length(sup/sub)` pointwise.
#[derive(Clone, Debug)]
pub struct HtMonoEpiReport {
    /// `v_ξ(det)` of the change of basis: the length of the quotient.
    pub length: Rat,
    pub sub_type: SlopeVector,
    pub sup_type: SlopeVector,
    pub certified: bool,
    /// `None` unless both bounds are certified.
    pub bounds_hold: Option<bool>,
}

pub fn ht_monoepi_check(
    sub: &HTModule,
    sup: &HTModule,
    candidates: &[Matrix<XiSeries>],
    exhaustive: bool,
) -> Result<HtMonoEpiReport> {
    if sub.rank() != sup.rank() {
        return Err(Error::ShapeMismatch(format!(
            "lattice ranks {} and {} differ",
            sub.rank(),
            sup.rank()
        )));
    }
    let change = solve(sup.basis(), sub.basis())?;
    for i in 0..change.rows() {
        for j in 0..change.cols() {
            let e = change.at(i, j);
            if e.val_lb() < crate::rat::ValBound::fin(0) {
                if e.is_indeterminate() {
                    return Err(Error::PrecisionExhausted(
                        "cannot certify lattice containment at this truncation".into(),
                    ));
                }
                return Err(Error::NotContained(format!(
                    "change-of-basis entry ({i}, {j}) has negative valuation"
                )));
            }
        }
    }
    let length = determinant(&change)?.valuation()?.expect_fin()?;
    let (sub_type, cert_sub) = ht_fargues_bound(sub, candidates, exhaustive)?;
    let (sup_type, cert_sup) = ht_fargues_bound(sup, candidates, exhaustive)?;
    let certified = cert_sub && cert_sup;
    let bounds_hold = if certified {
        let ok = (0..=sub.rank() as i64).try_fold(true, |acc, s| -> Result<bool> {
            let s = rat_int(s);
            let diff = sup_type.eval(&s)? - sub_type.eval(&s)?;
            Ok(acc && !diff.is_negative() && diff <= length)
        })?;
        Some(ok)
    } else {
        None
    };
    Ok(HtMonoEpiReport {
        length,
        sub_type,
        sup_type,
        certified,
        bounds_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmat(p: u64, rows: Vec<Vec<Rat>>) -> Matrix<PadicRational> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|v| PadicRational::new(p, v)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn ximat(rows: Vec<Vec<XiSeries>>) -> Matrix<XiSeries> {
        Matrix::from_rows(rows).unwrap()
    }

    fn axis(r: usize, j: usize) -> Matrix<XiSeries> {
        Matrix::new(
            r,
            1,
            (0..r)
                .map(|i| XiSeries::constant(rat_int((i == j) as i64)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn newton_type_reads_eigenvalue_valuations_off_the_hull() {
        let d = Isocrystal::new(pmat(5, vec![
            vec![rat_int(5), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(newton_type(&d).unwrap(), SlopeVector::from_ints(&[1, 0]));

        let half = Isocrystal::new(pmat(5, vec![
            vec![rat_int(0), rat_int(5)],
            vec![rat_int(1), rat_int(0)],
        ]))
        .unwrap();
        assert_eq!(
            newton_type(&half).unwrap(),
            SlopeVector::from_unsorted(vec![rat(1, 2), rat(1, 2)])
        );

        let inv = Isocrystal::new(pmat(5, vec![
            vec![rat(1, 5), rat_int(0)],
            vec![rat_int(0), rat(1, 5)],
        ]))
        .unwrap();
        assert_eq!(newton_type(&inv).unwrap(), SlopeVector::from_ints(&[-1, -1]));
    }

    #[test]
    fn iota_type_is_the_involution_and_fixes_the_degree() {
        let d = Isocrystal::new(pmat(3, vec![
            vec![rat_int(3), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(newton_iota_type(&d).unwrap(), SlopeVector::from_ints(&[0, -1]));
        let line = Isocrystal::new(pmat(3, vec![vec![rat(1, 3)]])).unwrap();
        assert_eq!(newton_iota_type(&line).unwrap(), SlopeVector::from_ints(&[1]));
        let half = Isocrystal::new(pmat(3, vec![
            vec![rat_int(0), rat_int(3)],
            vec![rat_int(1), rat_int(0)],
        ]))
        .unwrap();
        assert_eq!(
            newton_iota_type(&half).unwrap(),
            SlopeVector::from_unsorted(vec![rat(-1, 2), rat(-1, 2)])
        );
    }

    #[test]
    fn singular_matrices_are_rejected() {
        let zero_det = pmat(2, vec![
            vec![rat_int(1), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
        ]);
        assert!(matches!(Isocrystal::new(zero_det), Err(Error::Singular)));
    }

    #[test]
    fn hodge_type_of_a_lattice_is_its_elementary_divisor_profile() {
        let x = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(hodge_type_crystal(&x).unwrap(), SlopeVector::from_ints(&[0, -1]));
        let rot = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(0), rat_int(2)],
            vec![rat_int(1), rat_int(0)],
        ]))
        .unwrap();
        assert_eq!(hodge_type_crystal(&rot).unwrap(), SlopeVector::from_ints(&[0, -1]));
        let id = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(hodge_type_crystal(&id).unwrap(), SlopeVector::from_ints(&[0, 0]));
    }

    #[test]
    fn slope_inequality_triage_on_small_lattices() {
        let diag = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(mazur_check(&diag).unwrap(), MazurOutcome::HoldsWithEquality);
        let rot = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(0), rat_int(2)],
            vec![rat_int(1), rat_int(0)],
        ]))
        .unwrap();
        assert_eq!(mazur_check(&rot).unwrap(), MazurOutcome::Holds);
        let line = CrystalLattice::new(pmat(2, vec![vec![rat(1, 2)]])).unwrap();
        assert_eq!(mazur_check(&line).unwrap(), MazurOutcome::HoldsWithEquality);
    }

    #[test]
    fn slope_data_constructor_round_trips_through_newton_type() {
        let d = Isocrystal::from_slope_data(2, &[(rat(1, 2), 2), (rat_int(-1), 1)]).unwrap();
        assert_eq!(d.rank(), 3);
        assert_eq!(
            newton_type(&d).unwrap(),
            SlopeVector::from_unsorted(vec![rat(1, 2), rat(1, 2), rat_int(-1)])
        );
        assert_eq!(
            newton_type(&d.twist(1).unwrap()).unwrap(),
            SlopeVector::from_unsorted(vec![rat(-1, 2), rat(-1, 2), rat_int(-2)])
        );
        assert!(matches!(
            Isocrystal::from_slope_data(2, &[(rat(1, 2), 3)]),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            Isocrystal::from_slope_data(6, &[(rat_int(0), 1)]),
            Err(Error::BadModulus(_))
        ));
    }

    #[test]
    fn isocrystal_twists_shift_both_newton_flavours() {
        let d = Isocrystal::new(pmat(2, vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        for n in -2..=2i64 {
            let tw = d.twist(n).unwrap();
            assert_eq!(
                newton_type(&tw).unwrap(),
                newton_type(&d).unwrap().twist_shift(-n)
            );
            assert_eq!(
                newton_iota_type(&tw).unwrap(),
                newton_iota_type(&d).unwrap().twist_shift(n)
            );
        }
        let id = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        assert_eq!(
            hodge_type_crystal(&id.twist(1).unwrap()).unwrap(),
            SlopeVector::from_ints(&[1, 1])
        );
    }

    #[test]
    fn tensor_newton_type_is_the_polygon_tensor() {
        let d1 = Isocrystal::new(pmat(2, vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]))
        .unwrap();
        let d2 = Isocrystal::new(pmat(2, vec![
            vec![rat_int(0), rat_int(2)],
            vec![rat_int(1), rat_int(0)],
        ]))
        .unwrap();
        let prod = tensor(&d1, &d2).unwrap();
        assert_eq!(
            newton_type(&prod).unwrap(),
            newton_type(&d1).unwrap().tensor(&newton_type(&d2).unwrap())
        );
        let data = Isocrystal::from_slope_data(2, &[(rat(1, 2), 2)]).unwrap();
        let mixed = tensor(&d1, &data).unwrap();
        assert!(mixed.matrix().is_none());
        assert_eq!(
            newton_type(&mixed).unwrap(),
            newton_type(&d1).unwrap().tensor(&newton_type(&data).unwrap())
        );
    }

    #[test]
    fn block_triangular_hodge_types_dominate_the_block_sum() {
        let x = CrystalLattice::new(pmat(2, vec![
            vec![rat_int(2), rat_int(1)],
            vec![rat_int(0), rat_int(2)],
        ]))
        .unwrap();
        let x1 = CrystalLattice::new(pmat(2, vec![vec![rat_int(2)]])).unwrap();
        let sum = hodge_type_crystal(&x1)
            .unwrap()
            .convex_sum(&hodge_type_crystal(&x1).unwrap());
        assert_eq!(sum, SlopeVector::from_ints(&[-1, -1]));
        let full = hodge_type_crystal(&x).unwrap();
        assert_eq!(full, SlopeVector::from_ints(&[0, -2]));
        assert!(matches!(
            sum.dominance(&full).unwrap(),
            Dominance::Less | Dominance::Equal
        ));
    }

    #[test]
    fn ht_hodge_type_and_degree_read_the_basis_divisors() {
        let tate = HTModule::new(
            ximat(vec![
                vec![XiSeries::xi_pow(-1), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap();
        assert_eq!(ht_hodge_type(&tate).unwrap(), SlopeVector::from_ints(&[1, 0]));
        assert_eq!(ht_degree(&tate).unwrap(), rat_int(1));

        let shear = HTModule::new(
            ximat(vec![
                vec![XiSeries::one(), XiSeries::xi_pow(-1)],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap();
        assert_eq!(ht_hodge_type(&shear).unwrap(), SlopeVector::from_ints(&[1, -1]));
        assert_eq!(ht_degree(&shear).unwrap(), rat_int(0));

        let reference = HTModule::new(
            ximat(vec![
                vec![XiSeries::one(), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap();
        assert_eq!(ht_hodge_type(&reference).unwrap(), SlopeVector::from_ints(&[0, 0]));
        assert_eq!(ht_degree(&reference).unwrap(), rat_int(0));
        let scaled = HTModule::new(
            ximat(vec![
                vec![XiSeries::xi_pow(1), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::xi_pow(1)],
            ]),
            None,
        )
        .unwrap();
        assert_eq!(ht_degree(&scaled).unwrap(), rat_int(-2));
    }

    fn deep_diag() -> HTModule {
        HTModule::new(
            ximat(vec![
                vec![XiSeries::xi_pow(-2), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn diagonal_line_meets_the_skew_lattice_integrally() {
        let h = deep_diag();
        let diag = Matrix::new(
            2,
            1,
            vec![XiSeries::constant(rat_int(1)), XiSeries::constant(rat_int(1))],
        )
        .unwrap();
        assert_eq!(ht_candidate_degree(&h, &diag).unwrap(), rat_int(0));
        assert_eq!(ht_candidate_degree(&h, &axis(2, 0)).unwrap(), rat_int(2));
        assert_eq!(ht_candidate_degree(&h, &axis(2, 1)).unwrap(), rat_int(0));
    }

    #[test]
    fn candidate_envelope_bounds_the_slope_filtration() {
        let h = deep_diag();
        let diag = Matrix::new(
            2,
            1,
            vec![XiSeries::constant(rat_int(1)), XiSeries::constant(rat_int(1))],
        )
        .unwrap();
        let (bound, certified) =
            ht_fargues_bound(&h, &[axis(2, 0), axis(2, 1), diag], true).unwrap();
        assert_eq!(bound, SlopeVector::from_ints(&[2, 0]));
        assert!(certified);
        assert!(matches!(
            bound.dominance(&ht_hodge_type(&h).unwrap()).unwrap(),
            Dominance::Less | Dominance::Equal
        ));

        let full = Matrix::identity(2, &XiSeries::one()).unwrap();
        let (coarse, certified) = ht_fargues_bound(&h, &[full], false).unwrap();
        assert_eq!(coarse, SlopeVector::from_unsorted(vec![rat_int(1); 2]));
        assert!(!certified);

        let line = HTModule::new(ximat(vec![vec![XiSeries::xi_pow(-3)]]), None).unwrap();
        let (t, certified) = ht_fargues_bound(&line, &[], true).unwrap();
        assert_eq!(t, SlopeVector::from_ints(&[3]));
        assert!(certified);
    }

    #[test]
    fn nested_lattices_have_bounded_type_gaps() {
        let reference = HTModule::new(
            ximat(vec![
                vec![XiSeries::one(), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap();
        let diag = Matrix::new(
            2,
            1,
            vec![XiSeries::constant(rat_int(1)), XiSeries::constant(rat_int(1))],
        )
        .unwrap();
        let shared = vec![axis(2, 0), axis(2, 1), diag];

        let same = ht_monoepi_check(&reference, &reference, &shared, true).unwrap();
        assert_eq!(same.length, rat_int(0));
        assert_eq!(same.bounds_hold, Some(true));
        assert_eq!(same.sub_type, same.sup_type);

        let shifted = reference.twist(1).unwrap();
        let tw = ht_monoepi_check(&reference, &shifted, &shared, true).unwrap();
        assert_eq!(tw.length, rat_int(2));
        assert_eq!(tw.bounds_hold, Some(true));
        assert_eq!(tw.sup_type, tw.sub_type.twist_shift(1));

        let one_coord = HTModule::new(
            ximat(vec![
                vec![XiSeries::xi_pow(-1), XiSeries::zero()],
                vec![XiSeries::zero(), XiSeries::one()],
            ]),
            None,
        )
        .unwrap();
        let co = ht_monoepi_check(&reference, &one_coord, &shared, true).unwrap();
        assert_eq!(co.length, rat_int(1));
        assert_eq!(co.bounds_hold, Some(true));

        assert!(matches!(
            ht_monoepi_check(&one_coord, &reference, &shared, true),
            Err(Error::NotContained(_))
        ));
    }

    #[test]
    fn ht_twist_shifts_hodge_type_and_degree() {
        let h = deep_diag();
        for n in -2..=2i64 {
            let tw = h.twist(n).unwrap();
            assert_eq!(
                ht_hodge_type(&tw).unwrap(),
                ht_hodge_type(&h).unwrap().twist_shift(n)
            );
            assert_eq!(
                ht_degree(&tw).unwrap(),
                ht_degree(&h).unwrap() + rat_int(n) * rat_int(2)
            );
        }
        let zero = h.twist(0).unwrap();
        assert_eq!(zero.basis(), h.basis());
    }

    #[test]
    fn truncated_modules_still_certify_when_precision_suffices() {
        let entry = XiSeries::xi_pow(-1).truncated(Some(4));
        let basis = ximat(vec![
            vec![entry, XiSeries::zero()],
            vec![XiSeries::zero(), XiSeries::one()],
        ]);
        let h = HTModule::new(basis, Some(4)).unwrap();
        assert_eq!(ht_hodge_type(&h).unwrap(), SlopeVector::from_ints(&[1, 0]));
        assert_eq!(h.truncation(), Some(4));

        let fuzz = ximat(vec![
            vec![XiSeries::zero().truncated(Some(0)), XiSeries::zero()],
            vec![XiSeries::zero(), XiSeries::one()],
        ]);
        assert!(matches!(
            HTModule::new(fuzz, Some(0)),
            Err(Error::PrecisionExhausted(_))
        ));
    }

    #[test]
    fn char_poly_guard_and_values() {
        let m = pmat(2, vec![
            vec![rat_int(2), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
        ]);
        assert_eq!(
            char_poly(&m).unwrap(),
            vec![rat_int(2), rat_int(-3), rat_int(1)]
        );
        let big = Matrix::new(
            13,
            13,
            (0..169).map(|_| PadicRational::from_int(2, 1)).collect(),
        )
        .unwrap();
        assert!(matches!(char_poly(&big), Err(Error::TooLarge(_))));
    }
}
