//! φ-modules over the Hahn-series model of a perfectoid tilt: Hodge types,
//! degrees, Tate twists, tensor operations, and the exact Fargues type
//! computed by enumerating fixed-subfield subspaces of an étale
//! trivialization.
//!
//! Sign convention, stated once: the degree normalization is `v(t) = 1` and
//! `log|x| = -v(x)`, so effective modules have non-positive Hodge types and
//! the Tate twist multiplies the Frobenius matrix by `t^{-1}`. Semilinearity
//! is `coords(φ(m)) = Φ · σ(coords(m))` with `σ` the `q`-power Frobenius on
//! coefficients and `t ↦ t^q`.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::hn::{filtration_type, hn_filtration, RankedPoset};
use crate::linalg::{determinant, saturation_basis, snf, solve, Matrix};
use crate::polygon::SlopeVector;
use crate::rat::{rat_int, Rat, ValBound};
use crate::rings::{FFElem, FiniteField, HahnSeries, ValuedRing};

/// Finite free module with a semilinear Frobenius, given by its matrix.
#[derive(Clone, Debug)]
pub struct PhiModule {
    phi: Matrix<HahnSeries>,
    q: u64,
    labels: Vec<String>,
}

/// Checks that `q = p^e` for some `e ≥ 1`.
fn is_power_of(q: u64, p: u64) -> bool {
    if q < p {
        return false;
    }
    let mut q = q;
    while q % p == 0 {
        q /= p;
    }
    q == 1
}

/// Runs a Smith-reduction-based reading of a Frobenius matrix at shallow
/// working depths first: exact multi-term series make reduction explode,
/// while a cut either returns the same (exact) answer or reports exhausted
/// precision, in which case a deeper cut is tried and finally the exact
/// entries.
fn with_cut<T>(
    m: &Matrix<HahnSeries>,
    f: impl Fn(&Matrix<HahnSeries>) -> Result<T>,
) -> Result<T> {
    for depth in [16i64, 64] {
        let cut = m.map(|e| Ok(e.clone().truncated(Some(rat_int(depth)))))?;
        match f(&cut) {
            Err(Error::PrecisionExhausted(_)) => continue,
            other => return other,
        }
    }
    f(m)
}

impl PhiModule {
    pub fn new(phi: Matrix<HahnSeries>, q: u64) -> Result<Self> {
        let labels = (1..=phi.rows()).map(|i| format!("e{i}")).collect();
        PhiModule::with_labels(phi, q, labels)
    }

    pub fn with_labels(phi: Matrix<HahnSeries>, q: u64, labels: Vec<String>) -> Result<Self> {
        if !phi.is_square() {
            return Err(Error::ShapeMismatch(
                "Frobenius matrix must be square".into(),
            ));
        }
        if labels.len() != phi.rows() {
            return Err(Error::ShapeMismatch("one label per basis vector".into()));
        }
        let p = phi.template().field().p() as u64;
        if !is_power_of(q, p) {
            return Err(Error::BadModulus(format!(
                "q = {q} is not a positive power of the coefficient characteristic {p}"
            )));
        }
        if with_cut(&phi, |c| Ok(snf(c)?.rank))? < phi.rows() {
            return Err(Error::Singular);
        }
        Ok(PhiModule { phi, q, labels })
    }

    pub fn rank(&self) -> usize {
        self.phi.rows()
    }

    pub fn phi(&self) -> &Matrix<HahnSeries> {
        &self.phi
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn field(&self) -> &FiniteField {
        self.phi.template().field()
    }

    /// Coordinates of `φ` applied to the columns of `x`: `Φ · σ(x)`.
    pub fn phi_sigma(&self, x: &Matrix<HahnSeries>) -> Result<Matrix<HahnSeries>> {
        let sigma_x = x.map(|e| e.frobenius(self.q))?;
        self.phi.mul(&sigma_x)
    }

    /// `t_H = d(M, φ(φ*M))`: the negated elementary-divisor valuations of `Φ`.
    pub fn hodge_type(&self) -> Result<SlopeVector> {
        with_cut(&self.phi, crate::linalg::lattice_distance)
    }

    /// Degree `-v(det Φ)`. With `n`, computed as `n·rank − Σ` of the
    /// elementary-divisor valuations of `t^n·Φ`, which must be integral; the
    /// two forms agree for every admissible `n`.
    pub fn degree_t(&self, n: Option<i64>) -> Result<Rat> {
        match n {
            None => {
                let vals = with_cut(&self.phi, |c| snf(c)?.finite_valuations())?;
                Ok(-vals.into_iter().sum::<Rat>())
            }
            Some(n) => {
                let t_n = HahnSeries::t_pow(self.field(), rat_int(n));
                let scaled = self.phi.scale(&t_n)?;
                for i in 0..scaled.rows() {
                    for j in 0..scaled.cols() {
                        if scaled.at(i, j).val_lb() < ValBound::fin(0) {
                            return Err(Error::NotEffectiveAtN(n));
                        }
                    }
                }
                let vals = with_cut(&scaled, |c| snf(c)?.finite_valuations())?;
                let total: Rat = vals.into_iter().sum();
                Ok(rat_int(n) * rat_int(self.rank() as i64) - total)
            }
        }
    }

    /// Tate twist: `Φ ↦ t^{-n} Φ`, shifting the Hodge type by `(n, …, n)`.
    pub fn twist(&self, n: i64) -> Result<PhiModule> {
        let t_neg_n = HahnSeries::t_pow(self.field(), rat_int(-n));
        PhiModule::with_labels(self.phi.scale(&t_neg_n)?, self.q, self.labels.clone())
    }
}

/// Tensor product: Kronecker product of the Frobenius matrices.
pub fn tensor(m1: &PhiModule, m2: &PhiModule) -> Result<PhiModule> {
    if m1.q() != m2.q() {
        return Err(Error::DomainMismatch(
            format!("q = {}", m1.q()),
            format!("q = {}", m2.q()),
        ));
    }
    let phi = crate::linalg::kronecker(m1.phi(), m2.phi())?;
    let labels = m1
        .labels()
        .iter()
        .cartesian_product(m2.labels())
        .map(|(a, b)| format!("{a}*{b}"))
        .collect();
    PhiModule::with_labels(phi, m1.q(), labels)
}

/// Dual module: inverse-transpose Frobenius matrix.
pub fn dual(m: &PhiModule) -> Result<PhiModule> {
    let phi = crate::linalg::inverse(m.phi())?.transpose();
    let labels = m.labels().iter().map(|l| format!("{l}'")).collect();
    PhiModule::with_labels(phi, m.q(), labels)
}

/// `k`-th exterior power: the `k`-th compound matrix. `k = 0` is the unit
/// object of rank one.
pub fn ext_power(m: &PhiModule, k: usize) -> Result<PhiModule> {
    if k == 0 {
        let phi = Matrix::identity(1, m.phi().template())?;
        return PhiModule::with_labels(phi, m.q(), vec!["1".into()]);
    }
    if k > m.rank() {
        return Err(Error::BadArity(format!(
            "exterior power {k} of a rank-{} module",
            m.rank()
        )));
    }
    let phi = crate::linalg::compound_matrix(m.phi(), k)?;
    let labels = m
        .labels()
        .iter()
        .combinations(k)
        .map(|ls| ls.iter().join("^"))
        .collect();
    PhiModule::with_labels(phi, m.q(), labels)
}

/// Claimed basis of the Frobenius-fixed vectors, accepted up to a residual
/// valuation tolerance (`Inf` demands exact fixed points).
#[derive(Clone, Debug)]
pub struct Trivialization {
    vectors: Matrix<HahnSeries>,
    tolerance: ValBound,
}

impl Trivialization {
    pub fn new(vectors: Matrix<HahnSeries>, tolerance: ValBound) -> Result<Self> {
        if !vectors.is_square() {
            return Err(Error::ShapeMismatch(
                "a trivialization has one column per basis vector".into(),
            ));
        }
        Ok(Trivialization { vectors, tolerance })
    }

    pub fn vectors(&self) -> &Matrix<HahnSeries> {
        &self.vectors
    }

    pub fn tolerance(&self) -> &ValBound {
        &self.tolerance
    }

    /// Fixed vectors of the `n`-fold Tate twist: each column is scaled by
    /// `t^{n/(q-1)}`, and the guaranteed residual shifts along.
    pub fn twist(&self, n: i64, q: u64) -> Result<Trivialization> {
        let shift = Rat::new(n.into(), (q as i64 - 1).into());
        let vectors = self.vectors.map(|e| Ok(e.shift(&shift)))?;
        let tolerance = match &self.tolerance {
            ValBound::Inf => ValBound::Inf,
            ValBound::Fin(v) => ValBound::Fin(v + &shift),
        };
        Trivialization::new(vectors, tolerance)
    }
}

/// Residual report of `Φ·σ(x) − x` per trivialization column.
#[derive(Clone, Debug)]
pub struct TrivializationReport {
    pub ok: bool,
    pub independent: bool,
    /// Guaranteed lower bound on the residual valuation of each column.
    pub residual_valuations: Vec<ValBound>,
}

pub fn verify_trivialization(
    m: &PhiModule,
    t: &Trivialization,
) -> Result<TrivializationReport> {
    if t.vectors().rows() != m.rank() {
        return Err(Error::ShapeMismatch(
            "trivialization does not match the module rank".into(),
        ));
    }
    let image = m.phi_sigma(t.vectors())?;
    let residual = image.add(&t.vectors().map(|e| Ok(e.neg()))?)?;
    let mut residual_valuations = Vec::with_capacity(m.rank());
    for j in 0..residual.cols() {
        let mut v = ValBound::Inf;
        for i in 0..residual.rows() {
            let lb = residual.at(i, j).val_lb();
            if lb < v {
                v = lb;
            }
        }
        residual_valuations.push(v);
    }
    let independent = snf(t.vectors())?.rank == m.rank();
    let ok = independent && residual_valuations.iter().all(|v| v >= t.tolerance());
    Ok(TrivializationReport {
        ok,
        independent,
        residual_valuations,
    })
}

/// Harder–Narasimhan data of the Frobenius degree function: the type and the
/// realizing saturated sub-lattices, one `(jump, basis)` pair per step.
#[derive(Clone, Debug)]
pub struct FarguesOutcome {
    pub fargues_type: SlopeVector,
    pub filtration: Vec<(Rat, Matrix<HahnSeries>)>,
}

/// All reduced row-echelon bases of the nonzero subspaces of `F_q^r`, the
/// `q` scalars being listed in `subfield`.
fn echelon_bases(
    field: &FiniteField,
    subfield: &[FFElem],
    r: usize,
) -> Vec<Vec<Vec<FFElem>>> {
    let mut out = Vec::new();
    for k in 1..=r {
        for pivots in (0..r).combinations(k) {
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(i, &pc)| {
                    (pc + 1..r)
                        .filter(|c| !pivots.contains(c))
                        .map(move |c| (i, c))
                })
                .collect();
            let mut counter = vec![0usize; free.len()];
            loop {
                let mut rows = vec![vec![field.zero(); r]; k];
                for (i, &pc) in pivots.iter().enumerate() {
                    rows[i][pc] = field.one();
                }
                for (slot, &(i, c)) in free.iter().enumerate() {
                    rows[i][c] = subfield[counter[slot]].clone();
                }
                out.push(rows);
                let mut slot = 0;
                loop {
                    if slot == free.len() {
                        break;
                    }
                    counter[slot] += 1;
                    if counter[slot] < subfield.len() {
                        break;
                    }
                    counter[slot] = 0;
                    slot += 1;
                }
                if slot == free.len() {
                    break;
                }
            }
        }
    }
    out
}

/// Leading-entry column of each echelon row.
fn pivot_columns(rows: &[Vec<FFElem>]) -> Vec<usize> {
    rows.iter()
        .map(|row| row.iter().position(|e| !e.is_zero()).expect("nonzero row"))
        .collect()
}

/// Whether the row space of `sub` lies inside the row space of `sup`,
/// by reduction against the echelon pivots.
fn contained(field: &FiniteField, sub: &[Vec<FFElem>], sup: &[Vec<FFElem>]) -> bool {
    let sup_pivots = pivot_columns(sup);
    sub.iter().all(|row| {
        let mut v = row.clone();
        for (s, &pc) in sup.iter().zip(&sup_pivots) {
            let coef = v[pc].clone();
            if coef.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(s) {
                *x = field.sub(x, &field.mul(&coef, y));
            }
        }
        v.iter().all(FFElem::is_zero)
    })
}

/// Exact Fargues type by exhaustive subspace enumeration.
///
/// Enumerates every subspace of the fixed-vector space over the `q`-element
/// fixed subfield, saturates its span to a sub-lattice, reads the degree off
/// the restricted Frobenius, and runs the HN envelope on the resulting
/// decorated subspace poset. Guarded to `rank ≤ 4`, `q ≤ 3`.
pub fn fargues_type(m: &PhiModule, t: &Trivialization) -> Result<FarguesOutcome> {
    let r = m.rank();
    if r > 4 {
        return Err(Error::TooLarge(format!(
            "subspace enumeration is guarded to rank ≤ 4, got {r}"
        )));
    }
    if m.q() > 3 {
        return Err(Error::TooLarge(format!(
            "subspace enumeration is guarded to q ≤ 3, got {}",
            m.q()
        )));
    }
    let report = verify_trivialization(m, t)?;
    if !report.ok {
        return Err(Error::TrivializationRejected(format!(
            "independent: {}, residual valuations: [{}] against tolerance {}",
            report.independent,
            report.residual_valuations.iter().join(", "),
            t.tolerance(),
        )));
    }

    let field = m.field();
    let subfield = field.fixed_subfield(m.q())?;
    let bases = echelon_bases(field, &subfield, r);

    let mut elements = vec![("W0".to_string(), 0u32, rat_int(0))];
    let mut covers: Vec<(String, String)> = Vec::new();
    let mut saturations: Vec<Matrix<HahnSeries>> = Vec::new();
    for (s, rows) in bases.iter().enumerate() {
        let id = format!("W{}", s + 1);
        let k = rows.len();
        let constants = Matrix::new(
            k,
            r,
            rows.iter()
                .flatten()
                .map(|c| HahnSeries::monomial(field, c.clone(), rat_int(0)))
                .collect(),
        )?;
        let span = t.vectors().mul(&constants.transpose())?;
        let sat = saturation_basis(&span)?;
        let restricted = solve(&sat, &m.phi_sigma(&sat)?)?;
        let det = determinant(&restricted)?;
        let deg = -det.valuation()?.expect_fin()?;
        elements.push((id.clone(), k as u32, deg));
        covers.push(("W0".to_string(), id.clone()));
        saturations.push(sat);
    }
    for (a, rows_a) in bases.iter().enumerate() {
        for (b, rows_b) in bases.iter().enumerate() {
            if rows_a.len() < rows_b.len() && contained(field, rows_a, rows_b) {
                covers.push((format!("W{}", a + 1), format!("W{}", b + 1)));
            }
        }
    }

    let poset = RankedPoset::new(elements, &covers, None)?;
    let filtration = hn_filtration(&poset)?;
    let fargues = filtration_type(&filtration, &poset)?;
    let steps = filtration
        .chain()
        .iter()
        .skip(1)
        .zip(filtration.jumps())
        .map(|(&c, jump)| (jump.clone(), saturations[c - 1].clone()))
        .collect();
    Ok(FarguesOutcome {
        fargues_type: fargues,
        filtration: steps,
    })
}

/// An `F_q`-basis of the `q^h`-element fixed subfield, found greedily.
fn subfield_basis(field: &FiniteField, q: u64, h: u32) -> Result<Vec<FFElem>> {
    let big = field.fixed_subfield(q.pow(h))?;
    let small = field.fixed_subfield(q)?;
    let mut span = vec![field.zero()];
    let mut basis = Vec::new();
    for a in big {
        if span.contains(&a) {
            continue;
        }
        let mut grown = span.clone();
        for c in small.iter().filter(|c| !c.is_zero()) {
            let ca = field.mul(c, &a);
            for s in &span {
                let e = field.add(s, &ca);
                if !grown.contains(&e) {
                    grown.push(e);
                }
            }
        }
        span = grown;
        basis.push(a);
        if basis.len() == h as usize {
            break;
        }
    }
    Ok(basis)
}

fn lcm(a: u32, b: u32) -> u32 {
    let gcd = |mut a: u32, mut b: u32| {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    };
    a / gcd(a, b) * b
}

/// Monomial φ-module `φ(e_j) = t^{c_j}·e_{perm(j)}` together with its exact
/// trivialization, solved cycle by cycle: the exponents satisfy
/// `γ_{perm(j)} = q·γ_j + c_j` and the coefficients run through an
/// `F_q`-basis of the fixed subfield of order `q^h` for an `h`-cycle.
pub fn monomial_module(
    q: u64,
    perm: &[usize],
    exps: &[Rat],
) -> Result<(PhiModule, Trivialization)> {
    let r = perm.len();
    if r == 0 || exps.len() != r {
        return Err(Error::ShapeMismatch(
            "one exponent per permuted basis vector".into(),
        ));
    }
    let mut seen = vec![false; r];
    for &j in perm {
        if j >= r || seen[j] {
            return Err(Error::BadArity("not a permutation".into()));
        }
        seen[j] = true;
    }
    let p = (2..=q).find(|d| q % d == 0).ok_or_else(|| {
        Error::BadModulus(format!("q = {q} has no prime divisor"))
    })?;
    if !is_power_of(q, p) {
        return Err(Error::BadModulus(format!("q = {q} is not a prime power")));
    }
    let e = {
        let mut e = 0u32;
        let mut x = q;
        while x > 1 {
            x /= p;
            e += 1;
        }
        e
    };

    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut visited = vec![false; r];
    for start in 0..r {
        if visited[start] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start] = true;
        let mut j = perm[start];
        while j != start {
            visited[j] = true;
            cycle.push(j);
            j = perm[j];
        }
        cycles.push(cycle);
    }
    let h_total = cycles.iter().fold(1u32, |acc, c| lcm(acc, c.len() as u32));
    let m_degree = e * h_total;
    if m_degree > 4 {
        return Err(Error::TooLarge(format!(
            "needs the coefficient field F_{q}^{h_total}, beyond the degree-4 guard"
        )));
    }
    let field = FiniteField::extension(p as u32, m_degree)?;

    let zero = HahnSeries::zero(&field);
    let mut phi = Matrix::new(r, r, vec![zero.clone(); r * r])?;
    for j in 0..r {
        phi.set(perm[j], j, HahnSeries::t_pow(&field, exps[j].clone()));
    }

    let mut columns: Vec<Vec<HahnSeries>> = Vec::new();
    let q_rat = rat_int(q as i64);
    for cycle in &cycles {
        let h = cycle.len();
        // γ at the cycle start: γ0 = -Σ q^{h-1-i} c_{j_i} / (q^h - 1).
        let mut weighted = rat_int(0);
        for (i, &j) in cycle.iter().enumerate() {
            let mut w = rat_int(1);
            for _ in 0..h - 1 - i {
                w *= &q_rat;
            }
            weighted += w * &exps[j];
        }
        let mut q_pow_h = rat_int(1);
        for _ in 0..h {
            q_pow_h *= &q_rat;
        }
        let gamma0 = -weighted / (q_pow_h - rat_int(1));
        let mut gammas = vec![gamma0];
        for i in 0..h - 1 {
            let next = &q_rat * &gammas[i] + &exps[cycle[i]];
            gammas.push(next);
        }
        let basis = subfield_basis(&field, q, h as u32)?;
        for b in &basis {
            let mut col = vec![zero.clone(); r];
            let mut coeff = b.clone();
            for (i, &j) in cycle.iter().enumerate() {
                col[j] = HahnSeries::monomial(&field, coeff.clone(), gammas[i].clone());
                coeff = field.pow(&coeff, q);
            }
            columns.push(col);
        }
    }
    let mut entries = Vec::with_capacity(r * r);
    for i in 0..r {
        for col in &columns {
            entries.push(col[i].clone());
        }
    }
    let vectors = Matrix::new(r, r, entries)?;
    let module = PhiModule::new(phi, q)?;
    let trivialization = Trivialization::new(vectors, ValBound::Inf)?;
    Ok((module, trivialization))
}

/// The submodule with basis vector `index` scaled by `t^c` (`c > 0`), a
/// mono-epi into `m` with cokernel length `c`, together with the transported
/// trivialization. The Frobenius matrix becomes `D^{-1}·Φ·σ(D)` for
/// `D = diag(1, …, t^c, …, 1)`.
pub fn scaled_basis_submodule(
    m: &PhiModule,
    t: &Trivialization,
    index: usize,
    c: &Rat,
) -> Result<(PhiModule, Trivialization)> {
    use num::Signed;
    if index >= m.rank() {
        return Err(Error::BadArity(format!(
            "no basis vector {index} in rank {}",
            m.rank()
        )));
    }
    if !c.is_positive() {
        return Err(Error::OutOfDomain {
            arg: c.to_string(),
            width: "positive scaling exponents".into(),
        });
    }
    let qc = c * rat_int(m.q() as i64);
    let mut phi = m.phi().clone();
    for j in 0..m.rank() {
        phi.set(index, j, phi.at(index, j).shift(&-c.clone()));
    }
    for i in 0..m.rank() {
        phi.set(i, index, phi.at(i, index).shift(&qc));
    }
    let mut vectors = t.vectors().clone();
    for j in 0..m.rank() {
        vectors.set(index, j, vectors.at(index, j).shift(&-c.clone()));
    }
    let tolerance = match t.tolerance() {
        ValBound::Inf => ValBound::Inf,
        ValBound::Fin(v) => ValBound::Fin(v - c),
    };
    let module = PhiModule::with_labels(phi, m.q(), m.labels().to_vec())?;
    Ok((module, Trivialization::new(vectors, tolerance)?))
}
