//! Graded pieces `S_d` of `S = k[x₀..xₙ]`, subspaces of them, multiplication
//! maps and degreewise colon operations.
//!
//! Monomials are ordered lexicographically with `x₀` heaviest; position 0 of
//! every basis is `x₀^d`. All subspaces are stored as reduced row echelon
//! matrices of basis rows, so equal subspaces compare equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{
    kernel_over_function_field, parse_rational, ExactError, ExactMatrix, Field, FieldElement,
    LinearPolyMatrix, MPoly,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("generator of degree {generator} exceeds target degree {target}")]
    DegreeTooLow { generator: u32, target: u32 },
    #[error("linear form is zero")]
    ZeroForm,
    #[error("polynomial `{0}` is not homogeneous")]
    NotHomogeneous(String),
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("variable x{index} is outside x0..x{n}")]
    VariableOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Exponent vector of a monomial in `x₀..xₙ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn times_var(&self, i: usize) -> Monomial {
        let mut e = self.0.clone();
        e[i] += 1;
        Monomial(e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / x_i` if `x_i` divides `self`.
    pub fn div_var(&self, i: usize) -> Option<Monomial> {
        (self.0[i] > 0).then(|| {
            let mut e = self.0.clone();
            e[i] -= 1;
            Monomial(e)
        })
    }
}

/// Canonical order: `x₀^d` is smallest, so sorted lists start with the
/// lex-largest exponent vector.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// All monomials of degree `d` in `x₀..xₙ`, in canonical order.
pub fn monomial_basis(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(vars: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if vars == 1 {
            prefix.push(d);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(vars - 1, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n + 1, d, &mut Vec::with_capacity(n + 1), &mut out);
    out
}

/// Indexed monomial basis of `S_d`.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    pub n: usize,
    pub d: u32,
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialBasis {
    pub fn new(n: usize, d: u32) -> Self {
        let monomials = monomial_basis(n, d);
        let index = monomials.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        MonomialBasis { n, d, monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monomials[i]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }
}

/// `dim S_d = C(d + n, n)`.
pub fn dim_s(n: usize, d: u32) -> usize {
    crate::macaulay::binomial(d as u64 + n as u64, n as u64).expect("dimension fits") as usize
}

/// A subspace of `S_d`, kept as a reduced row echelon matrix of basis rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradedSubspace {
    n: usize,
    d: u32,
    echelon: ExactMatrix,
}

impl GradedSubspace {
    /// Span of the given row vectors (any spanning set).
    pub fn from_rows(n: usize, d: u32, rows: &ExactMatrix) -> Self {
        assert_eq!(rows.cols(), dim_s(n, d), "ambient dimension");
        let (r, pivots) = rows.rref();
        let keep: Vec<usize> = (0..pivots.len()).collect();
        GradedSubspace {
            n,
            d,
            echelon: r.select_rows(&keep),
        }
    }

    /// Span of the columns of `basis` (an `N × k` matrix).
    pub fn from_columns(n: usize, d: u32, basis: &ExactMatrix) -> Self {
        Self::from_rows(n, d, &basis.transpose())
    }

    pub fn from_vectors(n: usize, d: u32, field: Field, vectors: &[Vec<FieldElement>]) -> Self {
        let rows = ExactMatrix::from_rows(field, dim_s(n, d), vectors.to_vec()).expect("vector length");
        Self::from_rows(n, d, &rows)
    }

    /// Span of a set of monomials.
    pub fn from_monomials(n: usize, d: u32, field: Field, monos: &[Monomial]) -> Self {
        let basis = MonomialBasis::new(n, d);
        let mut rows = ExactMatrix::zeros(field, monos.len(), basis.len());
        for (i, m) in monos.iter().enumerate() {
            let j = basis.index_of(m).expect("monomial of the right degree");
            rows.set(i, j, field.one());
        }
        Self::from_rows(n, d, &rows)
    }

    pub fn zero(n: usize, d: u32, field: Field) -> Self {
        GradedSubspace {
            n,
            d,
            echelon: ExactMatrix::zeros(field, 0, dim_s(n, d)),
        }
    }

    pub fn full(n: usize, d: u32, field: Field) -> Self {
        GradedSubspace {
            n,
            d,
            echelon: ExactMatrix::identity(field, dim_s(n, d)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn field(&self) -> Field {
        self.echelon.field()
    }

    pub fn dim(&self) -> usize {
        self.echelon.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.echelon.cols()
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.dim()
    }

    /// Echelon basis rows (`dim × N`).
    pub fn echelon_rows(&self) -> &ExactMatrix {
        &self.echelon
    }

    /// Basis as columns (`N × dim`), in reduced column echelon form.
    pub fn basis(&self) -> ExactMatrix {
        self.echelon.transpose()
    }

    /// Functionals vanishing on the subspace, as rows (`codim × N`).
    pub fn annihilator(&self) -> ExactMatrix {
        if self.dim() == 0 {
            return ExactMatrix::identity(self.field(), self.ambient_dim());
        }
        self.echelon.kernel_basis().transpose()
    }

    pub fn contains_vector(&self, v: &[FieldElement]) -> bool {
        let ann = self.annihilator();
        ann.mul_vec(v).iter().all(|x| x.is_zero())
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        assert_eq!((self.n, self.d), (other.n, other.d));
        if self.dim() == 0 {
            return true;
        }
        other
            .annihilator()
            .mul(&self.echelon.transpose())
            .expect("shapes agree")
            .is_zero()
    }

    pub fn sum(&self, other: &Self) -> Self {
        assert_eq!((self.n, self.d), (other.n, other.d));
        Self::from_rows(self.n, self.d, &self.echelon.vstack(&other.echelon))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let ann = self.annihilator().vstack(&other.annihilator());
        Self::from_columns(self.n, self.d, &ann.kernel_basis())
    }

    /// Image under a linear map `S_d → S_{d'}` given as an `N' × N` matrix.
    pub fn image(&self, map: &ExactMatrix, n: usize, d: u32) -> Self {
        let img = map.mul(&self.basis()).expect("map shape");
        Self::from_columns(n, d, &img)
    }

    /// Basis vectors spelled out as polynomials, for display.
    pub fn describe(&self) -> Vec<String> {
        let basis = MonomialBasis::new(self.n, self.d);
        (0..self.dim())
            .map(|i| {
                let terms: Vec<String> = self
                    .echelon
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(j, c)| {
                        if c.is_one() {
                            basis.get(j).to_string()
                        } else {
                            format!("{c}*{}", basis.get(j))
                        }
                    })
                    .collect();
                terms.join(" + ")
            })
            .collect()
    }
}

/// Matrix of multiplication by `Σ form[i]·x_i` from `S_d` to `S_{d+1}`.
pub fn multiplication_map(n: usize, d: u32, form: &[FieldElement]) -> ExactMatrix {
    assert_eq!(form.len(), n + 1, "linear form arity");
    let field = form[0].field();
    let src = MonomialBasis::new(n, d);
    let dst = MonomialBasis::new(n, d + 1);
    let mut m = ExactMatrix::zeros(field, dst.len(), src.len());
    for (j, mono) in src.monomials().iter().enumerate() {
        for (i, c) in form.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = dst.index_of(&mono.times_var(i)).unwrap();
            let v = m.get(row, j) + c;
            m.set(row, j, v);
        }
    }
    m
}

/// Multiplication by the variable `x_i`.
pub fn variable_map(n: usize, d: u32, i: usize, field: Field) -> ExactMatrix {
    let mut form = vec![field.zero(); n + 1];
    form[i] = field.one();
    multiplication_map(n, d, &form)
}

/// Multiplication by the generic form `L = Σ a_i x_i`.
pub fn generic_multiplication_map(n: usize, d: u32, field: Field) -> LinearPolyMatrix {
    let maps: Vec<ExactMatrix> = (0..=n).map(|i| variable_map(n, d, i, field)).collect();
    LinearPolyMatrix::linear_combination(&maps)
}

/// Homogeneous or inhomogeneous polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl Polynomial {
    pub fn new(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, BigRational)>) -> Self {
        let mut p = Self::new(nvars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn monomial(m: Monomial) -> Self {
        let n = m.nvars();
        Self::from_terms(n, [(m, BigRational::one())])
    }

    pub fn variable(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(Monomial(e))
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        assert_eq!(m.nvars(), self.nvars);
        let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// Degree if homogeneous (`None` for zero or inhomogeneous polynomials).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(|m| m.degree());
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(m, x)| (m.clone(), x * c)))
    }

    /// Coordinate vector in the monomial basis of `S_d` over `field`.
    pub fn to_vector(&self, basis: &MonomialBasis, field: Field) -> Result<Vec<FieldElement>, PolyError> {
        let mut v = vec![field.zero(); basis.len()];
        for (m, c) in &self.terms {
            let j = basis.index_of(m).ok_or_else(|| PolyError::NotHomogeneous(self.to_string()))?;
            v[j] = FieldElement::from_rational(field, c)
                .ok_or_else(|| ExactError::DenominatorVanishes(c.to_string(), field.characteristic()))?;
        }
        Ok(v)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (m, c) in &self.terms {
            let neg = c < &BigRational::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { "-" } else { "+" });
            }
            let mono = m.to_string();
            if abs.is_one() {
                out.push_str(&mono);
            } else {
                let coeff = if abs.is_integer() {
                    abs.numer().to_string()
                } else {
                    format!("{}/{}", abs.numer(), abs.denom())
                };
                if mono == "1" {
                    out.push_str(&coeff);
                } else {
                    out.push_str(&format!("{coeff}*{mono}"));
                }
            }
        }
        f.write_str(&out)
    }
}

/// Parses comma-separated polynomials in `x0..xn`, such as `"x0*x2, x1*x2"`
/// or `"2x0^2 - 1/3 x1x2"`.
pub fn parse_generators(text: &str, n: usize) -> Result<Vec<Polynomial>, PolyError> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_polynomial(s, n))
        .collect()
}

pub fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial, PolyError> {
    let s: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || PolyError::Parse(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    let mut poly = Polynomial::new(n + 1);
    let mut pos = 0;
    while pos < s.len() {
        let mut sign = BigRational::one();
        while pos < s.len() && (s[pos] == '+' || s[pos] == '-') {
            if s[pos] == '-' {
                sign = -sign;
            }
            pos += 1;
        }
        // Coefficient: digits with an optional `/digits`.
        let start = pos;
        while pos < s.len() && (s[pos].is_ascii_digit() || s[pos] == '/') {
            pos += 1;
        }
        let coeff: BigRational = if pos > start {
            let txt: String = s[start..pos].iter().collect();
            parse_rational(&txt).map_err(|_| bad())?
        } else {
            BigRational::one()
        };
        let mut exps = vec![0u32; n + 1];
        let mut saw_factor = pos > start;
        loop {
            if pos < s.len() && s[pos] == '*' {
                pos += 1;
            }
            if pos >= s.len() || s[pos] != 'x' {
                break;
            }
            pos += 1;
            let vs = pos;
            while pos < s.len() && s[pos].is_ascii_digit() {
                pos += 1;
            }
            if vs == pos {
                return Err(bad());
            }
            let idx: usize = s[vs..pos].iter().collect::<String>().parse().map_err(|_| bad())?;
            if idx > n {
                return Err(PolyError::VariableOutOfRange { index: idx, n });
            }
            let mut e = 1u32;
            if pos < s.len() && s[pos] == '^' {
                pos += 1;
                let es = pos;
                while pos < s.len() && s[pos].is_ascii_digit() {
                    pos += 1;
                }
                e = s[es..pos].iter().collect::<String>().parse().map_err(|_| bad())?;
            }
            exps[idx] += e;
            saw_factor = true;
        }
        if !saw_factor {
            return Err(bad());
        }
        if pos < s.len() && s[pos] != '+' && s[pos] != '-' {
            return Err(bad());
        }
        poly.add_term(Monomial(exps), coeff * sign);
    }
    Ok(poly)
}

/// Degree-`d` piece of the ideal generated by `gens`.
pub fn ideal_degree_piece(n: usize, gens: &[Polynomial], d: u32, field: Field) -> Result<GradedSubspace, PolyError> {
    let basis = MonomialBasis::new(n, d);
    let mut rows = Vec::new();
    for g in gens {
        if g.is_zero() {
            continue;
        }
        let deg = g
            .homogeneous_degree()
            .ok_or_else(|| PolyError::NotHomogeneous(g.to_string()))?;
        if deg > d {
            return Err(PolyError::DegreeTooLow { generator: deg, target: d });
        }
        for m in monomial_basis(n, d - deg) {
            rows.push(g.mul(&Polynomial::monomial(m)).to_vector(&basis, field)?);
        }
    }
    let rows = ExactMatrix::from_rows(field, basis.len(), rows)?;
    Ok(GradedSubspace::from_rows(n, d, &rows))
}

/// Value of the Hilbert function of `S/(gens)` in degree `d`.
pub fn hilbert_function(n: usize, gens: &[Polynomial], d: u32, field: Field) -> Result<usize, PolyError> {
    Ok(ideal_degree_piece(n, gens, d, field)?.codim())
}

/// `{f ∈ S_d : ℓ·f ∈ I}` for `I ⊂ S_{d+1}`.
pub fn colon_by_linear(i: &GradedSubspace, form: &[FieldElement]) -> Result<GradedSubspace, PolyError> {
    if form.iter().all(|c| c.is_zero()) {
        return Err(PolyError::ZeroForm);
    }
    let d = i.degree().checked_sub(1).expect("colon needs degree ≥ 1");
    let m = multiplication_map(i.n(), d, form);
    let k = i.annihilator().mul(&m)?.kernel_basis();
    Ok(GradedSubspace::from_columns(i.n(), d, &k))
}

/// `(I : S₁) = {f ∈ S_d : x_i f ∈ I for all i}` for `I ⊂ S_{d+1}`.
pub fn colon_by_s1(i: &GradedSubspace) -> GradedSubspace {
    let n = i.n();
    let field = i.field();
    let d = i.degree().checked_sub(1).expect("colon needs degree ≥ 1");
    let ann = i.annihilator();
    let blocks: Vec<ExactMatrix> = (0..=n)
        .into_par_iter()
        .map(|v| ann.mul(&variable_map(n, d, v, field)).expect("shapes agree"))
        .collect();
    let stacked = blocks
        .into_iter()
        .reduce(|a, b| a.vstack(&b))
        .expect("at least one variable");
    GradedSubspace::from_columns(n, d, &stacked.kernel_basis())
}

/// `S₁·W ⊂ S_{d+1}`.
pub fn product_with_s1(w: &GradedSubspace) -> GradedSubspace {
    let n = w.n();
    let d = w.degree();
    let parts: Vec<ExactMatrix> = (0..=n)
        .map(|v| variable_map(n, d, v, w.field()).mul(&w.basis()).unwrap().transpose())
        .collect();
    let rows = parts.into_iter().reduce(|a, b| a.vstack(&b)).unwrap();
    GradedSubspace::from_rows(n, d + 1, &rows)
}

/// Codimension of the restriction of `W ⊂ S_d` to the hyperplane `ℓ = 0`,
/// that is the codimension of `W + ℓ·S_{d-1}` in `S_d`.
pub fn restriction_codim(w: &GradedSubspace, form: &[FieldElement]) -> Result<usize, PolyError> {
    if form.iter().all(|c| c.is_zero()) {
        return Err(PolyError::ZeroForm);
    }
    if w.degree() == 0 {
        return Ok(w.codim());
    }
    let m = multiplication_map(w.n(), w.degree() - 1, form);
    let lift = GradedSubspace::from_columns(w.n(), w.degree(), &m);
    Ok(w.sum(&lift).codim())
}

/// Kernel of `S_R → S_{R+1}/I`, `f ↦ L·f`, over `k(a₀..aₙ)`.
#[derive(Clone, Debug)]
pub struct GenericColonResult {
    pub n: usize,
    pub d: u32,
    /// Columns of polynomial numerators, one per basis vector (`N_R` entries each).
    pub numerators: Vec<Vec<MPoly>>,
    pub denominator: MPoly,
    pub codim: usize,
    pub k_rational: bool,
    /// The kernel as a `k`-subspace when it is defined over `k`.
    pub rational: Option<GradedSubspace>,
}

impl GenericColonResult {
    pub fn dim(&self) -> usize {
        self.numerators.len()
    }

    /// Basis specialized at `ℓ`; `None` if the denominator vanishes there.
    pub fn specialize(&self, point: &[FieldElement]) -> Option<Vec<Vec<FieldElement>>> {
        let den = self.denominator.evaluate(point);
        let inv = den.inv()?;
        Some(
            self.numerators
                .iter()
                .map(|v| v.iter().map(|x| &x.evaluate(point) * &inv).collect())
                .collect(),
        )
    }
}

/// Matrix of `S_R → S_{R+1}/I` under multiplication by the generic form.
pub fn generic_colon_matrix(i: &GradedSubspace) -> LinearPolyMatrix {
    let n = i.n();
    let field = i.field();
    let d = i.degree().checked_sub(1).expect("colon needs degree ≥ 1");
    let ann = i.annihilator();
    let parts: Vec<ExactMatrix> = (0..=n)
        .map(|v| ann.mul(&variable_map(n, d, v, field)).unwrap())
        .collect();
    LinearPolyMatrix::linear_combination(&parts)
}

/// Exact colon by the generic linear form.
pub fn generic_colon(i: &GradedSubspace) -> GenericColonResult {
    let n = i.n();
    let d = i.degree() - 1;
    let field = i.field();
    let nvars = n + 1;
    let a = generic_colon_matrix(i);
    let ker = kernel_over_function_field(&a).expect("fraction-free division is exact");
    match ker.constant_basis() {
        Some(vectors) => {
            let sub = GradedSubspace::from_vectors(n, d, field, &vectors);
            let numerators = (0..sub.dim())
                .map(|k| sub.echelon_rows().row(k).iter().map(|c| MPoly::constant(c.clone(), nvars)).collect())
                .collect();
            GenericColonResult {
                n,
                d,
                numerators,
                denominator: MPoly::constant(field.one(), nvars),
                codim: ker.rank,
                k_rational: true,
                rational: Some(sub),
            }
        }
        None => GenericColonResult {
            n,
            d,
            numerators: ker.numerators,
            denominator: ker.denominator,
            codim: ker.rank,
            k_rational: false,
            rational: None,
        },
    }
}

/// Matrix of the substitution `x_j ↦ Σ_k g[j][k]·x_k` on `S_d`.
pub fn substitution_matrix(n: usize, g: &ExactMatrix, d: u32) -> ExactMatrix {
    assert_eq!((g.rows(), g.cols()), (n + 1, n + 1), "substitution size");
    let field = g.field();
    let basis = MonomialBasis::new(n, d);
    let mut out = ExactMatrix::zeros(field, basis.len(), basis.len());
    let unit = Monomial(vec![0; n + 1]);
    for (col, m) in basis.monomials().iter().enumerate() {
        let mut acc: HashMap<Monomial, FieldElement> = HashMap::from([(unit.clone(), field.one())]);
        for (j, &e) in m.0.iter().enumerate() {
            for _ in 0..e {
                let mut next: HashMap<Monomial, FieldElement> = HashMap::new();
                for (mono, c) in &acc {
                    for k in 0..=n {
                        let gk = g.get(j, k);
                        if gk.is_zero() {
                            continue;
                        }
                        let slot = next.entry(mono.times_var(k)).or_insert_with(|| field.zero());
                        *slot = &*slot + &(c * gk);
                    }
                }
                acc = next;
            }
        }
        for (mono, c) in acc {
            if !c.is_zero() {
                out.set(basis.index_of(&mono).unwrap(), col, c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macaulay::{macaulay_lower, macaulay_upper};
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;
    const P: Field = Field::Prime(1_000_003);

    fn mono(e: &[u32]) -> Monomial {
        Monomial(e.to_vec())
    }

    fn gens(text: &str, n: usize) -> Vec<Polynomial> {
        parse_generators(text, n).unwrap()
    }

    #[test]
    fn monomial_bases() {
        assert_eq!(monomial_basis(1, 2), vec![mono(&[2, 0]), mono(&[1, 1]), mono(&[0, 2])]);
        assert_eq!(monomial_basis(2, 1), vec![mono(&[1, 0, 0]), mono(&[0, 1, 0]), mono(&[0, 0, 1])]);
        assert_eq!(monomial_basis(2, 3).len(), 10);
        let b = monomial_basis(3, 4);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.len(), dim_s(3, 4));
    }

    #[test]
    fn multiplication_maps() {
        let x0 = variable_map(1, 1, 0, Q);
        assert_eq!(x0, ExactMatrix::from_i64_rows(Q, &[vec![1, 0], vec![0, 1], vec![0, 0]]));
        let x1 = variable_map(1, 1, 1, Q);
        assert_eq!(x1, ExactMatrix::from_i64_rows(Q, &[vec![0, 0], vec![1, 0], vec![0, 1]]));
        let l = generic_multiplication_map(2, 1, Q);
        assert_eq!((l.rows(), l.cols()), (6, 3));
        // Row x0*x1, column x1 carries a0.
        let b2 = MonomialBasis::new(2, 2);
        let row = b2.index_of(&mono(&[1, 1, 0])).unwrap();
        assert_eq!(l.entry(row, 1)[1], Q.one());
        assert_eq!(l.entry(row, 0)[2], Q.one());
    }

    #[test]
    fn ideal_pieces() {
        let i3 = ideal_degree_piece(2, &gens("x0*x2, x1*x2", 2), 3, Q).unwrap();
        assert_eq!(i3.dim(), 5);
        let expect = GradedSubspace::from_monomials(
            2,
            3,
            Q,
            &[mono(&[2, 0, 1]), mono(&[1, 1, 1]), mono(&[1, 0, 2]), mono(&[0, 2, 1]), mono(&[0, 1, 2])],
        );
        assert_eq!(i3, expect);
        assert_eq!(ideal_degree_piece(1, &gens("x1", 1), 1, Q).unwrap().dim(), 1);
        assert_eq!(ideal_degree_piece(2, &gens("x0^2, x1^2", 2), 2, Q).unwrap().dim(), 2);
        assert_eq!(
            ideal_degree_piece(2, &gens("x0^3", 2), 2, Q),
            Err(PolyError::DegreeTooLow { generator: 3, target: 2 })
        );
    }

    #[test]
    fn colon_examples() {
        let i3 = ideal_degree_piece(2, &gens("x0*x2, x1*x2", 2), 3, Q).unwrap();
        let x2 = [Q.zero(), Q.zero(), Q.one()];
        let c = colon_by_linear(&i3, &x2).unwrap();
        let expect = GradedSubspace::from_monomials(
            2,
            2,
            Q,
            &[mono(&[2, 0, 0]), mono(&[1, 1, 0]), mono(&[1, 0, 1]), mono(&[0, 2, 0]), mono(&[0, 1, 1])],
        );
        assert_eq!(c, expect);

        let i2 = GradedSubspace::from_monomials(2, 2, Q, &[mono(&[2, 0, 0]), mono(&[0, 2, 0])]);
        let x0 = [Q.one(), Q.zero(), Q.zero()];
        let c = colon_by_linear(&i2, &x0).unwrap();
        assert_eq!(c, GradedSubspace::from_monomials(2, 1, Q, &[mono(&[1, 0, 0])]));
        assert_eq!(colon_by_linear(&i2, &[Q.zero(), Q.zero(), Q.zero()]), Err(PolyError::ZeroForm));

        let full = GradedSubspace::full(2, 3, Q);
        assert_eq!(colon_by_linear(&full, &x2).unwrap(), GradedSubspace::full(2, 2, Q));
    }

    #[test]
    fn colon_by_s1_examples() {
        let i3 = ideal_degree_piece(2, &gens("x0*x2, x1*x2", 2), 3, Q).unwrap();
        let c = colon_by_s1(&i3);
        assert_eq!(c, GradedSubspace::from_monomials(2, 2, Q, &[mono(&[1, 0, 1]), mono(&[0, 1, 1])]));
        assert_eq!(c.codim(), 4);

        let w = GradedSubspace::from_monomials(
            2,
            3,
            Q,
            &[mono(&[3, 0, 0]), mono(&[0, 3, 0]), mono(&[0, 0, 3]), mono(&[2, 1, 0]), mono(&[2, 0, 1])],
        );
        let c = colon_by_s1(&w);
        assert_eq!(c, GradedSubspace::from_monomials(2, 2, Q, &[mono(&[2, 0, 0])]));
        assert_eq!(c.codim(), 5);
        assert_eq!(colon_by_s1(&GradedSubspace::zero(2, 3, Q)).dim(), 0);
    }

    #[test]
    fn generic_colon_examples() {
        let i3 = ideal_degree_piece(2, &gens("x0*x2, x1*x2", 2), 3, Q).unwrap();
        let g = generic_colon(&i3);
        assert_eq!(g.codim, 4);
        assert!(g.k_rational);
        assert_eq!(g.rational.as_ref().unwrap(), &colon_by_s1(&i3));
        assert!(g.denominator.as_constant().unwrap().is_one());

        let i2 = GradedSubspace::from_monomials(2, 2, Q, &[mono(&[2, 0, 0]), mono(&[0, 2, 0])]);
        let g = generic_colon(&i2);
        assert_eq!(g.codim, 3);
        assert_eq!(g.dim(), 0);
        assert!(g.k_rational);

        let g = generic_colon(&GradedSubspace::full(2, 3, Q));
        assert_eq!(g.codim, 0);
        assert_eq!(g.rational.unwrap(), GradedSubspace::full(2, 2, Q));
    }

    #[test]
    fn generic_colon_non_rational() {
        // x0 times a quadric-hyperplane complement: (I:L) = x0·a^⊥ is not defined over k.
        let i3 = ideal_degree_piece(
            2,
            &gens("x0^2*x1, x0^2*x2, x0*x1*x2, x0^3 - x0*x1^2, x0^3 - x0*x2^2", 2),
            3,
            Q,
        )
        .unwrap();
        assert_eq!(i3.dim(), 5);
        let g = generic_colon(&i3);
        assert!(!g.k_rational);
        assert_eq!(g.dim(), 2);
        assert_eq!(colon_by_s1(&i3).dim(), 0);
    }

    #[test]
    fn parse_and_display() {
        let p = parse_polynomial("2x0^2 - 1/3 x1*x2 + x2x0", 2).unwrap();
        assert_eq!(p.homogeneous_degree(), Some(2));
        assert_eq!(p.to_string(), "2*x0^2+x0*x2-1/3*x1*x2");
        assert_eq!(parse_polynomial(&p.to_string(), 2).unwrap(), p);
        assert!(parse_polynomial("x3", 2).is_err());
        assert!(parse_polynomial("x0 + x1^2", 2).unwrap().homogeneous_degree().is_none());
        assert!(parse_polynomial("x0 +", 2).is_err());
        assert!(parse_polynomial("y0", 2).is_err());
    }

    #[test]
    fn substitution_by_permutation() {
        let g = ExactMatrix::from_i64_rows(Q, &[vec![0, 1], vec![1, 0]]);
        let t = substitution_matrix(1, &g, 2);
        // x0^2 ↦ x1^2.
        assert_eq!(t.column(0), vec![Q.zero(), Q.zero(), Q.one()]);
    }

    fn random_subspace(rng: &mut SeededRng, n: usize, d: u32, field: Field) -> GradedSubspace {
        let big_n = dim_s(n, d);
        let k = rng.below(big_n as u64 + 1) as usize;
        let rows: Vec<Vec<FieldElement>> = (0..k)
            .map(|_| {
                // Sparse rows keep the sample away from generic subspaces.
                (0..big_n)
                    .map(|_| if rng.below(3) == 0 { rng.field_element(field) } else { field.zero() })
                    .collect()
            })
            .collect();
        GradedSubspace::from_vectors(n, d, field, &rows)
    }

    #[test]
    fn macaulay_and_green_bounds_hold() {
        let mut rng = SeededRng::new(11);
        for trial in 0..1000 {
            let n = 1 + trial % 3;
            let d = 1 + (trial / 3 % 4) as u32;
            let w = random_subspace(&mut rng, n, d, P);
            let c = w.codim() as u64;
            assert!(product_with_s1(&w).codim() as u128 <= macaulay_upper(c, d));
            let bound = macaulay_lower(c, d);
            let best = (0..5)
                .map(|_| {
                    let l: Vec<_> = (0..=n).map(|_| rng.field_element(P)).collect();
                    restriction_codim(&w, &l).unwrap_or(usize::MAX)
                })
                .min()
                .unwrap();
            assert!(best as u128 <= bound, "Green bound failed: {best} > {bound}");
        }
    }

    proptest! {
        #[test]
        fn colon_chain_and_containment(seed in any::<u64>(), n in 1usize..3, d in 1u32..3) {
            let mut rng = SeededRng::new(seed);
            let i = random_subspace(&mut rng, n, d + 1, P);
            let s1 = colon_by_s1(&i);
            for v in 0..=n {
                let back = s1.image(&variable_map(n, d, v, P), n, d + 1);
                prop_assert!(back.is_subspace_of(&i));
            }
            let g = generic_colon(&i);
            prop_assert!(g.dim() >= s1.dim());
            prop_assert_eq!(g.codim + g.dim(), dim_s(n, d));
            let l: Vec<_> = (0..=n).map(|_| rng.field_element(P)).collect();
            if l.iter().any(|c| !c.is_zero()) {
                let cl = colon_by_linear(&i, &l).unwrap();
                prop_assert!(s1.is_subspace_of(&cl));
                if let Some(vs) = g.specialize(&l) {
                    let spec = GradedSubspace::from_vectors(n, d, P, &vs);
                    prop_assert!(spec.is_subspace_of(&cl));
                }
            }
        }

        #[test]
        fn subspace_lattice_identities(seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let a = random_subspace(&mut rng, 2, 2, P);
            let b = random_subspace(&mut rng, 2, 2, P);
            let s = a.sum(&b);
            let i = a.intersection(&b);
            prop_assert_eq!(s.dim() + i.dim(), a.dim() + b.dim());
            prop_assert!(i.is_subspace_of(&a) && a.is_subspace_of(&s));
            prop_assert_eq!(GradedSubspace::from_columns(2, 2, &a.basis()), a);
        }
    }
}
