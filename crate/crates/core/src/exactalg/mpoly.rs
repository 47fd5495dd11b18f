//! Sparse multivariate polynomials in the coefficient variables `a₀..aₙ`
//! and matrices over the polynomial ring.
//!
//! The only nontrivial operation is exact division, which is what the
//! fraction-free elimination needs.

use std::collections::BTreeMap;
use std::fmt;

use super::field::{Field, FieldElement};
use super::matrix::ExactMatrix;
use super::ExactError;

/// Exponent vector; lexicographic `Ord` makes `a₀` the heaviest variable.
pub type Exponents = Vec<u16>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    field: Field,
    terms: BTreeMap<Exponents, FieldElement>,
}

impl MPoly {
    pub fn zero(field: Field, nvars: usize) -> Self {
        MPoly {
            nvars,
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: FieldElement, nvars: usize) -> Self {
        let mut p = Self::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn variable(field: Field, nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(field, nvars);
        p.terms.insert(e, field.one());
        p
    }

    /// `c + Σ coeffs[i]·a_i`.
    pub fn affine(constant: &FieldElement, coeffs: &[FieldElement]) -> Self {
        let mut p = Self::constant(constant.clone(), coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; coeffs.len()];
                e[i] = 1;
                p.terms.insert(e, c.clone());
            }
        }
        p
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &FieldElement)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().map(|&x| x as u32).sum()).max()
    }

    /// The constant value if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<FieldElement> {
        match self.terms.len() {
            0 => Some(self.field.zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn leading(&self) -> Option<(&Exponents, &FieldElement)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, e: Exponents, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        MPoly {
            nvars: self.nvars,
            field: self.field,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, s: &FieldElement) -> Self {
        if s.is_zero() {
            return Self::zero(self.field, self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            field: self.field,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.field, self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    /// Exact quotient `self / d`; fails when `d` does not divide `self`.
    pub fn exact_div(&self, d: &Self) -> Result<Self, ExactError> {
        let (de, dc) = d.leading().ok_or(ExactError::DivisionByZero)?;
        let dinv = dc.inv().unwrap();
        let mut rem = self.clone();
        let mut q = Self::zero(self.field, self.nvars);
        while let Some((re, rc)) = rem.leading() {
            if re.iter().zip(de).any(|(a, b)| a < b) {
                return Err(ExactError::InexactDivision);
            }
            let te: Exponents = re.iter().zip(de).map(|(a, b)| a - b).collect();
            let tc = rc * &dinv;
            let mut t = Self::zero(self.field, self.nvars);
            t.terms.insert(te.clone(), tc.clone());
            rem = rem.sub(&t.mul(d));
            q.add_term(te, tc);
        }
        Ok(q)
    }

    pub fn evaluate(&self, point: &[FieldElement]) -> FieldElement {
        assert_eq!(point.len(), self.nvars, "evaluation point arity");
        let mut acc = self.field.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t = &t * &x.pow(k as u64);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// `Some(c)` when `self = c·other` for a scalar `c`.
    pub fn scalar_multiple_of(&self, other: &Self) -> Option<FieldElement> {
        if self.is_zero() {
            return Some(self.field.zero());
        }
        let (oe, oc) = other.leading()?;
        let (se, sc) = self.leading().unwrap();
        if se != oe || self.terms.len() != other.terms.len() {
            return None;
        }
        let c = sc.div(oc);
        (other.scale(&c) == *self).then_some(c)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*a{i}")?,
                    _ => write!(f, "*a{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// A matrix whose entries are affine in `a₀..aₙ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    field: Field,
    /// Per entry: constant term followed by the `nvars` linear coefficients.
    data: Vec<Vec<FieldElement>>,
}

impl LinearPolyMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize, nvars: usize) -> Self {
        LinearPolyMatrix {
            rows,
            cols,
            nvars,
            field,
            data: vec![vec![field.zero(); nvars + 1]; rows * cols],
        }
    }

    /// Constant matrix viewed over the polynomial ring.
    pub fn from_constant(m: &ExactMatrix, nvars: usize) -> Self {
        let mut out = Self::zeros(m.field(), m.rows(), m.cols(), nvars);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.data[i * m.cols() + j][0] = m.get(i, j).clone();
            }
        }
        out
    }

    /// `Σ a_i · mats[i]`.
    pub fn linear_combination(mats: &[ExactMatrix]) -> Self {
        let first = mats.first().expect("at least one matrix");
        let mut out = Self::zeros(first.field(), first.rows(), first.cols(), mats.len());
        for (k, m) in mats.iter().enumerate() {
            assert_eq!((m.rows(), m.cols()), (first.rows(), first.cols()));
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    out.data[i * first.cols() + j][k + 1] = m.get(i, j).clone();
                }
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Constant term and linear coefficients of entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> &[FieldElement] {
        &self.data[i * self.cols + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, constant: FieldElement, coeffs: Vec<FieldElement>) {
        assert_eq!(coeffs.len(), self.nvars);
        let mut v = Vec::with_capacity(self.nvars + 1);
        v.push(constant);
        v.extend(coeffs);
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field, self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j].clone();
            }
        }
        t
    }

    /// Left-multiplies by a constant matrix.
    pub fn left_mul(&self, a: &ExactMatrix) -> Self {
        assert_eq!(a.cols(), self.rows);
        let mut out = Self::zeros(self.field, a.rows(), self.cols, self.nvars);
        for i in 0..a.rows() {
            for k in 0..self.rows {
                let s = a.get(i, k);
                if s.is_zero() {
                    continue;
                }
                for j in 0..self.cols {
                    let src = &self.data[k * self.cols + j];
                    let dst = &mut out.data[i * self.cols + j];
                    for (d, x) in dst.iter_mut().zip(src) {
                        if !x.is_zero() {
                            *d = &*d + &(s * x);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn entry_poly(&self, i: usize, j: usize) -> MPoly {
        let e = self.entry(i, j);
        MPoly::affine(&e[0], &e[1..])
    }

    pub fn to_poly_rows(&self) -> Vec<Vec<MPoly>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry_poly(i, j)).collect())
            .collect()
    }

    /// Substitutes scalars for the variables; values must lie in `target`,
    /// and entries are first mapped into `target`.
    pub fn specialize(&self, values: &[FieldElement]) -> Result<ExactMatrix, ExactError> {
        assert_eq!(values.len(), self.nvars, "specialization arity");
        let target = values.first().map_or(self.field, |v| v.field());
        let mut m = ExactMatrix::zeros(target, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self.entry(i, j);
                let mut acc = e[0].reduce_to(target).ok_or(ExactError::FieldMismatch)?;
                for (c, x) in e[1..].iter().zip(values) {
                    if !c.is_zero() {
                        let c = c.reduce_to(target).ok_or(ExactError::FieldMismatch)?;
                        acc = &acc + &(&c * x);
                    }
                }
                m.set(i, j, acc);
            }
        }
        Ok(m)
    }
}

/// Result of fraction-free row echelon elimination.
#[derive(Clone, Debug)]
pub struct FractionFreeEchelon {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    /// Original indices of the rows that became pivot rows, in pivot order.
    pub pivot_rows: Vec<usize>,
    /// The last pivot, equal up to sign to the maximal minor on the pivot rows and columns.
    pub last_pivot: MPoly,
    pub row_swaps: usize,
}

/// Fraction-free (Bareiss) row echelon form of a polynomial matrix.
///
/// After `k` pivots every remaining entry is a `(k+1)`-minor of the input, so
/// each division by the previous pivot is exact.
pub fn bareiss_echelon(m: &mut [Vec<MPoly>]) -> Result<FractionFreeEchelon, ExactError> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let (field, nvars) = match m.first().and_then(|r| r.first()) {
        Some(p) => (p.field(), p.nvars()),
        None => {
            return Ok(FractionFreeEchelon {
                rank: 0,
                pivot_cols: vec![],
                pivot_rows: vec![],
                last_pivot: MPoly::zero(Field::Rational, 0),
                row_swaps: 0,
            })
        }
    };
    let mut order: Vec<usize> = (0..rows).collect();
    let mut prev = MPoly::constant(field.one(), nvars);
    let mut pivot_cols = Vec::new();
    let mut swaps = 0;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Prefer the sparsest available pivot to keep intermediate sizes down.
        let Some(p) = (r..rows)
            .filter(|&i| !m[i][c].is_zero())
            .min_by_key(|&i| (m[i][c].num_terms(), i))
        else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            order.swap(p, r);
            swaps += 1;
        }
        let (head, tail) = m.split_at_mut(r + 1);
        let pivot_row = &head[r];
        let piv = pivot_row[c].clone();
        for row in tail.iter_mut() {
            let lead = row[c].clone();
            for j in c + 1..cols {
                let num = piv.mul(&row[j]).sub(&lead.mul(&pivot_row[j]));
                row[j] = num.exact_div(&prev)?;
            }
            row[c] = MPoly::zero(field, nvars);
        }
        prev = piv;
        pivot_cols.push(c);
        r += 1;
    }
    Ok(FractionFreeEchelon {
        rank: r,
        pivot_cols,
        pivot_rows: order[..r].to_vec(),
        last_pivot: prev,
        row_swaps: swaps,
    })
}

/// Determinant of a square polynomial matrix by fraction-free elimination.
pub fn det_fraction_free(m: &[Vec<MPoly>], field: Field, nvars: usize) -> Result<MPoly, ExactError> {
    let n = m.len();
    if n == 0 {
        return Ok(MPoly::constant(field.one(), nvars));
    }
    if m.iter().any(|r| r.len() != n) {
        return Err(ExactError::NotSquare(n, m[0].len()));
    }
    let mut work = m.to_vec();
    let e = bareiss_echelon(&mut work)?;
    if e.rank < n {
        return Ok(MPoly::zero(field, nvars));
    }
    Ok(if e.row_swaps % 2 == 1 {
        e.last_pivot.neg()
    } else {
        e.last_pivot
    })
}

/// Rank computation mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RankMode {
    #[default]
    Auto,
    Exact,
}

/// Kernel of a polynomial matrix over the fraction field, as polynomial
/// numerators over a common denominator.
#[derive(Clone, Debug)]
pub struct FunctionFieldKernel {
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    pub free_cols: Vec<usize>,
    pub denominator: MPoly,
    /// One vector per free column: `numerators[k][j]` is the `j`-th coordinate.
    pub numerators: Vec<Vec<MPoly>>,
}

impl FunctionFieldKernel {
    /// For each free column, the scalars `c_i` with `numerator = c_i·denominator`
    /// on every coordinate, or `None` if some coordinate is not a constant ratio.
    pub fn constant_basis(&self) -> Option<Vec<Vec<FieldElement>>> {
        self.numerators
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| x.scalar_multiple_of(&self.denominator))
                    .collect::<Option<Vec<_>>>()
            })
            .collect()
    }
}

/// Kernel over `k(a)` via Cramer's rule on the maximal nonsingular minor
/// found by fraction-free elimination.
pub fn kernel_over_function_field(m: &LinearPolyMatrix) -> Result<FunctionFieldKernel, ExactError> {
    let field = m.field();
    let nvars = m.nvars();
    let poly_rows = m.to_poly_rows();
    let mut work = poly_rows.clone();
    let ech = bareiss_echelon(&mut work)?;
    let free_cols: Vec<usize> = (0..m.cols()).filter(|c| !ech.pivot_cols.contains(c)).collect();
    let sub = |cols: &[usize]| -> Vec<Vec<MPoly>> {
        ech.pivot_rows
            .iter()
            .map(|&i| cols.iter().map(|&j| poly_rows[i][j].clone()).collect())
            .collect()
    };
    let denominator = det_fraction_free(&sub(&ech.pivot_cols), field, nvars)?;
    let mut numerators = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut v = vec![MPoly::zero(field, nvars); m.cols()];
        v[f] = denominator.clone();
        for (i, &pc) in ech.pivot_cols.iter().enumerate() {
            let mut cols = ech.pivot_cols.clone();
            cols[i] = f;
            v[pc] = det_fraction_free(&sub(&cols), field, nvars)?.neg();
        }
        numerators.push(v);
    }
    Ok(FunctionFieldKernel {
        rank: ech.rank,
        pivot_cols: ech.pivot_cols,
        free_cols,
        denominator,
        numerators,
    })
}

/// Exact rank over the fraction field by fraction-free elimination.
pub fn rank_exact(m: &LinearPolyMatrix) -> usize {
    let mut rows = m.to_poly_rows();
    bareiss_echelon(&mut rows)
        .expect("Bareiss divisions are exact")
        .rank
}

/// Rank of `m` over `k(a₀..aₙ)`.
///
/// The fast path takes the maximum rank over `confidence` random
/// specializations in a prime field of size about 2³¹; that is always a lower
/// bound. When it is within one of `min(rows, cols)` but not equal to it, or
/// when the mode is [`RankMode::Exact`], the exact fraction-free path decides.
/// A fast result equal to `min(rows, cols)` is already exact. Over fields of
/// small characteristic, where entries need not reduce to the large prime,
/// the exact path is always used.
pub fn rank_over_function_field(m: &LinearPolyMatrix, confidence: usize, mode: RankMode) -> usize {
    assert!(confidence >= 1, "confidence must be positive");
    let full = m.rows().min(m.cols());
    if full == 0 {
        return 0;
    }
    if mode == RankMode::Exact || !matches!(m.field(), Field::Rational) {
        return rank_exact(m);
    }
    let fast = fast_rank(m, confidence, 0x5eed_f00d);
    if fast == full {
        return fast;
    }
    if fast + 1 >= full {
        return rank_exact(m);
    }
    fast
}

/// Maximum specialized rank over `draws` random points of the large prime field.
pub fn fast_rank(m: &LinearPolyMatrix, draws: usize, seed: u64) -> usize {
    let target = Field::Prime(super::field::SPECIALIZATION_PRIME);
    let mut rng = crate::rng::SeededRng::new(seed);
    let full = m.rows().min(m.cols());
    let mut best = 0;
    for _ in 0..draws {
        let point: Vec<FieldElement> = (0..m.nvars()).map(|_| rng.field_element(target)).collect();
        if let Ok(s) = m.specialize(&point) {
            best = best.max(s.rank());
        }
        if best == full {
            break;
        }
    }
    best
}
