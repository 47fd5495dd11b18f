//! Plücker coordinates of codimension-`r` subspaces of `S_d`.
//!
//! Coordinates are those of the quotient `S_d → S_d/W`: with `N` the matrix
//! of the quotient map in the monomial basis and a chosen basis of the
//! quotient, `P_J = det(N_J)` for `J` an increasing `r`-tuple of monomials.
//! The quotient basis is the images of the first monomials (in canonical
//! order) that are independent modulo `W`, which makes `P_J = 1` on that
//! tuple.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{ExactError, ExactMatrix, Field, FieldElement};
use crate::polyring::{dim_s, GradedSubspace, Monomial, MonomialBasis};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrassmannError {
    #[error("monomials of different degrees in one index")]
    MixedDegrees,
    #[error("subspace has codimension {found}, expected {expected}")]
    WrongCodimension { expected: usize, found: usize },
    #[error("Plücker vector is identically zero")]
    ZeroVector,
    #[error("invalid Plücker index: {0}")]
    BadIndex(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Strictly increasing positions in the monomial basis of `S_d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PluckerIndex(pub Vec<u32>);

impl PluckerIndex {
    pub fn monomials(&self, basis: &MonomialBasis) -> Vec<Monomial> {
        self.0.iter().map(|&i| basis.get(i as usize).clone()).collect()
    }

    pub fn to_exponents(&self, basis: &MonomialBasis) -> Vec<Vec<u32>> {
        self.0.iter().map(|&i| basis.get(i as usize).0.clone()).collect()
    }

    pub fn from_exponents(basis: &MonomialBasis, exps: &[Vec<u32>]) -> Result<(Self, i8), GrassmannError> {
        let mut idx = Vec::with_capacity(exps.len());
        for e in exps {
            let m = Monomial(e.clone());
            let i = basis
                .index_of(&m)
                .ok_or_else(|| GrassmannError::BadIndex(format!("{e:?} is not a monomial of S_{}", basis.d)))?;
            idx.push(i as u32);
        }
        let sign = canonical_sort(&mut idx);
        Ok((PluckerIndex(idx), sign))
    }
}

/// Sorts an index tuple in place and returns the sign of the sorting
/// permutation, or 0 if an entry repeats.
pub fn canonical_sort(idx: &mut [u32]) -> i8 {
    let mut sign = 1i8;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

/// Sorts a tuple of monomials into canonical order with its permutation sign.
pub fn canonical_index(tuple: &[Monomial]) -> Result<(Vec<Monomial>, i8), GrassmannError> {
    if let Some(first) = tuple.first() {
        if tuple.iter().any(|m| m.degree() != first.degree() || m.nvars() != first.nvars()) {
            return Err(GrassmannError::MixedDegrees);
        }
    }
    let mut v = tuple.to_vec();
    let mut sign = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        sign = 0;
    }
    Ok((v, sign))
}

/// A point of the Plücker space, stored sparsely (absent indices are zero).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluckerVector {
    pub n: usize,
    pub d: u32,
    pub r: usize,
    pub field: Field,
    coords: BTreeMap<PluckerIndex, FieldElement>,
    source: Option<GradedSubspace>,
}

impl PluckerVector {
    /// Raw vector from nonzero coordinates.
    pub fn raw(
        n: usize,
        d: u32,
        r: usize,
        field: Field,
        coords: impl IntoIterator<Item = (PluckerIndex, FieldElement)>,
    ) -> Result<Self, GrassmannError> {
        let big_n = dim_s(n, d) as u32;
        let mut map = BTreeMap::new();
        for (k, v) in coords {
            if k.0.len() != r || k.0.windows(2).any(|w| w[0] >= w[1]) || k.0.iter().any(|&i| i >= big_n) {
                return Err(GrassmannError::BadIndex(format!("{:?}", k.0)));
            }
            if v.field() != field {
                return Err(ExactError::FieldMismatch.into());
            }
            if !v.is_zero() {
                map.insert(k, v);
            }
        }
        if map.is_empty() {
            return Err(GrassmannError::ZeroVector);
        }
        Ok(PluckerVector {
            n,
            d,
            r,
            field,
            coords: map,
            source: None,
        })
    }

    pub fn get(&self, idx: &PluckerIndex) -> FieldElement {
        self.coords.get(idx).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Coordinate of an unsorted tuple, with the permutation sign applied.
    pub fn get_tuple(&self, tuple: &[u32]) -> FieldElement {
        let mut t = tuple.to_vec();
        match canonical_sort(&mut t) {
            0 => self.field.zero(),
            1 => self.get(&PluckerIndex(t)),
            _ => -self.get(&PluckerIndex(t)),
        }
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&PluckerIndex, &FieldElement)> {
        self.coords.iter()
    }

    pub fn support_size(&self) -> usize {
        self.coords.len()
    }

    pub fn source(&self) -> Option<&GradedSubspace> {
        self.source.as_ref()
    }

    /// Whether `self = c·other` for a nonzero scalar `c`.
    pub fn proportional_to(&self, other: &Self) -> bool {
        if (self.n, self.d, self.r, self.field) != (other.n, other.d, other.r, other.field) {
            return false;
        }
        if self.coords.len() != other.coords.len() {
            return false;
        }
        let (k0, a0) = self.coords.iter().next().unwrap();
        let Some(b0) = other.coords.get(k0) else { return false };
        self.coords.iter().all(|(k, a)| match other.coords.get(k) {
            Some(b) => a * b0 == b * a0,
            None => false,
        })
    }

    pub fn scaled(&self, c: &FieldElement) -> Self {
        assert!(!c.is_zero());
        let mut out = self.clone();
        for v in out.coords.values_mut() {
            *v = &*v * c;
        }
        out
    }

    pub fn to_json(&self) -> PluckerVectorJson {
        let basis = MonomialBasis::new(self.n, self.d);
        PluckerVectorJson {
            n: self.n,
            d: self.d,
            r: self.r,
            field: self.field,
            coords: self
                .coords
                .iter()
                .map(|(k, v)| PluckerCoordJson {
                    idx: k.to_exponents(&basis),
                    val: v.to_fraction_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PluckerVectorJson) -> Result<Self, GrassmannError> {
        let basis = MonomialBasis::new(j.n, j.d);
        let mut coords: BTreeMap<PluckerIndex, FieldElement> = BTreeMap::new();
        for c in &j.coords {
            let (idx, sign) = PluckerIndex::from_exponents(&basis, &c.idx)?;
            if sign == 0 {
                return Err(GrassmannError::BadIndex(format!("repeated monomial in {:?}", c.idx)));
            }
            let v = j.field.parse_scalar(&c.val)?;
            let v = if sign < 0 { -v } else { v };
            let slot = coords.entry(idx).or_insert_with(|| j.field.zero());
            *slot = &*slot + &v;
        }
        Self::raw(j.n, j.d, j.r, j.field, coords)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PluckerCoordJson {
    pub idx: Vec<Vec<u32>>,
    pub val: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PluckerVectorJson {
    pub n: usize,
    pub d: u32,
    pub r: usize,
    pub field: Field,
    pub coords: Vec<PluckerCoordJson>,
}

/// Matrix of `S_d → S_d/W` in the monomial basis and the greedy quotient
/// basis; it is the reduced echelon form of the annihilator of `W`.
pub fn quotient_matrix(w: &GradedSubspace) -> ExactMatrix {
    let field = w.field();
    let big_n = w.ambient_dim();
    let ann = if w.dim() == 0 {
        ExactMatrix::identity(field, big_n)
    } else {
        w.echelon_rows().kernel_basis().transpose()
    };
    ann.rref().0
}

/// Positions of the quotient basis monomials (pivot columns of the quotient matrix).
pub fn quotient_basis(w: &GradedSubspace) -> Vec<usize> {
    quotient_matrix(w).rref().1
}

/// All `r × r` minors of an `r × N` matrix, indexed by increasing column tuples.
pub fn maximal_minors(m: &ExactMatrix) -> BTreeMap<PluckerIndex, FieldElement> {
    let r = m.rows();
    let combos: Vec<Vec<usize>> = (0..m.cols()).combinations(r).collect();
    combos
        .into_par_iter()
        .filter_map(|cols| {
            let det = m.select_columns(&cols).det().expect("square minor");
            (!det.is_zero()).then(|| (PluckerIndex(cols.iter().map(|&c| c as u32).collect()), det))
        })
        .collect()
}

/// Plücker vector of the quotient `S_d/W`.
pub fn plucker_from_subspace(w: &GradedSubspace, r: usize) -> Result<PluckerVector, GrassmannError> {
    if w.codim() != r {
        return Err(GrassmannError::WrongCodimension {
            expected: r,
            found: w.codim(),
        });
    }
    let q = quotient_matrix(w);
    let coords = maximal_minors(&q);
    Ok(PluckerVector {
        n: w.n(),
        d: w.degree(),
        r,
        field: w.field(),
        coords,
        source: Some(w.clone()),
    })
}

/// Outcome of the decomposability test.
#[derive(Clone, Debug)]
pub struct Decomposability {
    pub decomposable: bool,
    /// The subspace whose Plücker vector is proportional to the input.
    pub subspace: Option<GradedSubspace>,
    /// A coordinate where the input and the reconstruction disagree.
    pub witness: Option<PluckerIndex>,
}

/// Tests decomposability by rebuilding the quotient map from the coordinates
/// adjacent to a nonzero coordinate and comparing all minors.
pub fn decomposable_check(v: &PluckerVector) -> Decomposability {
    let big_n = dim_s(v.n, v.d);
    let (j, pj) = v.coords.iter().next().expect("nonzero vector");
    let inv = pj.inv().unwrap();
    let mut q = ExactMatrix::zeros(v.field, v.r, big_n);
    for i in 0..v.r {
        for k in 0..big_n {
            let mut t = j.0.clone();
            t[i] = k as u32;
            let val = &v.get_tuple(&t) * &inv;
            q.set(i, k, val);
        }
    }
    let rebuilt = maximal_minors(&q);
    let scaled: BTreeMap<PluckerIndex, FieldElement> =
        v.coords.iter().map(|(k, x)| (k.clone(), x * &inv)).collect();
    let witness = rebuilt
        .keys()
        .chain(scaled.keys())
        .find(|k| rebuilt.get(*k) != scaled.get(*k))
        .cloned();
    let decomposable = witness.is_none();
    let subspace = decomposable.then(|| {
        let k = q.kernel_basis();
        GradedSubspace::from_columns(v.n, v.d, &k)
    });
    Decomposability {
        decomposable,
        subspace,
        witness,
    }
}

/// Linear form `Σ c·P_J` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearForm {
    pub terms: Vec<(i64, PluckerIndex)>,
}

/// Quadratic form `Σ c·P_J·P_K` with `J ≤ K`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadraticForm {
    pub terms: Vec<(i64, PluckerIndex, PluckerIndex)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EquationForm {
    Linear(LinearForm),
    Quadratic(QuadraticForm),
}

impl LinearForm {
    /// Collects like terms, drops zeros and sorts by index.
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, PluckerIndex)>) -> Self {
        let mut acc: BTreeMap<PluckerIndex, i64> = BTreeMap::new();
        for (c, k) in terms {
            *acc.entry(k).or_insert(0) += c;
        }
        LinearForm {
            terms: acc.into_iter().filter(|(_, c)| *c != 0).map(|(k, c)| (c, k)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Scales by ±1 so the first term has a positive coefficient.
    pub fn sign_normalized(&self) -> Self {
        match self.terms.first() {
            Some((c, _)) if *c < 0 => LinearForm {
                terms: self.terms.iter().map(|(c, k)| (-c, k.clone())).collect(),
            },
            _ => self.clone(),
        }
    }

    pub fn evaluate(&self, v: &PluckerVector) -> FieldElement {
        self.terms.iter().fold(v.field.zero(), |acc, (c, k)| {
            let x = v.get(k);
            if x.is_zero() {
                acc
            } else {
                &acc + &(&v.field.from_i64(*c) * &x)
            }
        })
    }
}

impl QuadraticForm {
    pub fn from_terms(terms: impl IntoIterator<Item = (i64, PluckerIndex, PluckerIndex)>) -> Self {
        let mut acc: BTreeMap<(PluckerIndex, PluckerIndex), i64> = BTreeMap::new();
        for (c, a, b) in terms {
            let key = if a <= b { (a, b) } else { (b, a) };
            *acc.entry(key).or_insert(0) += c;
        }
        QuadraticForm {
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != 0)
                .map(|((a, b), c)| (c, a, b))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn sign_normalized(&self) -> Self {
        match self.terms.first() {
            Some((c, _, _)) if *c < 0 => QuadraticForm {
                terms: self.terms.iter().map(|(c, a, b)| (-c, a.clone(), b.clone())).collect(),
            },
            _ => self.clone(),
        }
    }

    pub fn evaluate(&self, v: &PluckerVector) -> FieldElement {
        self.terms.iter().fold(v.field.zero(), |acc, (c, a, b)| {
            let x = v.get(a);
            if x.is_zero() {
                return acc;
            }
            let y = v.get(b);
            if y.is_zero() {
                return acc;
            }
            &acc + &(&(&v.field.from_i64(*c) * &x) * &y)
        })
    }
}

impl EquationForm {
    pub fn evaluate(&self, v: &PluckerVector) -> FieldElement {
        match self {
            EquationForm::Linear(f) => f.evaluate(v),
            EquationForm::Quadratic(f) => f.evaluate(v),
        }
    }
}

/// The shuffle relation for `i` (length `r-1`) and `j` (length `r+1`).
pub fn shuffle_relation(i: &[u32], j: &[u32]) -> QuadraticForm {
    let mut terms = Vec::with_capacity(j.len());
    for t in 0..j.len() {
        let mut left: Vec<u32> = i.to_vec();
        left.push(j[t]);
        let s = canonical_sort(&mut left);
        if s == 0 {
            continue;
        }
        let right: Vec<u32> = j.iter().enumerate().filter(|&(u, _)| u != t).map(|(_, &x)| x).collect();
        let sign = if t % 2 == 0 { 1 } else { -1 } * s as i64;
        terms.push((sign, PluckerIndex(left), PluckerIndex(right)));
    }
    QuadraticForm::from_terms(terms)
}

/// Deterministic sample of distinct nonzero shuffle relations of `Gr` of
/// `r`-dimensional quotients of `S_d`.
pub fn plucker_relations_sample(n: usize, d: u32, r: usize, count: usize, seed: u64) -> Vec<QuadraticForm> {
    let big_n = dim_s(n, d);
    if r < 2 || r + 1 > big_n || count == 0 {
        return Vec::new();
    }
    let mut rng = SeededRng::derived(seed, "plucker-relations");
    let mut seen: BTreeSet<QuadraticForm> = BTreeSet::new();
    let mut out = Vec::new();
    let attempts = 40 * count + 1000;
    for _ in 0..attempts {
        if out.len() == count {
            break;
        }
        let i = random_subset(&mut rng, big_n, r - 1);
        let j = random_subset(&mut rng, big_n, r + 1);
        let rel = shuffle_relation(&i, &j).sign_normalized();
        if !rel.is_zero() && seen.insert(rel.clone()) {
            out.push(rel);
        }
    }
    out
}

fn random_subset(rng: &mut SeededRng, n: usize, k: usize) -> Vec<u32> {
    let mut all: Vec<u32> = (0..n as u32).collect();
    for t in 0..k {
        let pick = t + rng.below((n - t) as u64) as usize;
        all.swap(t, pick);
    }
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}
