//! The linear forms `E(m,n,x)`, the symbols `F(m,n,x)`, the cross-product
//! quadrics, and the rank-one test on the matrix of `F` values.
//!
//! For a multiset `x` of variables, `E(m,n,x)` and `F(m,n,x)` are the orbit
//! sums `Σ_y P_{y₁m₁,…,y_k m_k, n₁,…}` over the distinct arrangements `y` of
//! `x`, each coordinate taken with its canonical sign. `E` uses
//! `k = p(R)+1`, `F` uses `k = p(R)`.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{ExactMatrix, FieldElement};
use crate::grassmann::{
    canonical_sort, plucker_relations_sample, LinearForm, PluckerIndex, PluckerVector, QuadraticForm,
};
use crate::macaulay::HilbertPolynomialSpec;
use crate::polyring::{Monomial, MonomialBasis};
use crate::rng::SeededRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquationError {
    #[error("point has degree {found_d} and rank {found_r}, equations expect degree {d} and rank {r}")]
    DimensionMismatch {
        d: u32,
        r: usize,
        found_d: u32,
        found_r: usize,
    },
    #[error("degree R must be at least 1")]
    DegreeTooSmall,
    #[error("enumeration of {0} tuples exceeds the limit")]
    TooLarge(u128),
    #[error("malformed equation file: {0}")]
    Malformed(String),
}

/// Upper bound on the number of tuples a single enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 20_000_000;

/// Bases and multiplication tables shared by all expansions for `(n, R)`.
#[derive(Clone, Debug)]
pub struct EquationContext {
    pub n: usize,
    pub big_r: u32,
    pub p_r: usize,
    pub p_r1: usize,
    pub basis_r: MonomialBasis,
    pub basis_r1: MonomialBasis,
    /// `times[v][j]` is the position of `x_v · m_j` in the basis of `S_{R+1}`.
    times: Vec<Vec<u32>>,
}

impl EquationContext {
    pub fn new(spec: &HilbertPolynomialSpec, n: usize, big_r: u32) -> Result<Self, EquationError> {
        if big_r < 1 {
            return Err(EquationError::DegreeTooSmall);
        }
        let basis_r = MonomialBasis::new(n, big_r);
        let basis_r1 = MonomialBasis::new(n, big_r + 1);
        let times = (0..=n)
            .map(|v| {
                basis_r
                    .monomials()
                    .iter()
                    .map(|m| basis_r1.index_of(&m.times_var(v)).unwrap() as u32)
                    .collect()
            })
            .collect();
        Ok(EquationContext {
            n,
            big_r,
            p_r: spec.at(big_r as usize),
            p_r1: spec.at(big_r as usize + 1),
            basis_r,
            basis_r1,
            times,
        })
    }

    /// Orbit-sum expansion for arbitrary (not necessarily sorted) `m` and `n`.
    pub fn expand(&self, m: &[u32], ntuple: &[u32], alpha: &[u32]) -> LinearForm {
        assert_eq!(alpha.len(), self.n + 1, "alpha arity");
        assert_eq!(alpha.iter().sum::<u32>() as usize, m.len(), "alpha size");
        let mut arrangement: Vec<usize> = alpha
            .iter()
            .enumerate()
            .flat_map(|(v, &k)| std::iter::repeat_n(v, k as usize))
            .collect();
        let mut terms = Vec::new();
        let mut tuple = vec![0u32; m.len() + ntuple.len()];
        loop {
            for (slot, (&v, &mi)) in arrangement.iter().zip(m).enumerate() {
                tuple[slot] = self.times[v][mi as usize];
            }
            tuple[m.len()..].copy_from_slice(ntuple);
            let mut t = tuple.clone();
            let s = canonical_sort(&mut t);
            if s != 0 {
                terms.push((s as i64, PluckerIndex(t)));
            }
            if !next_permutation(&mut arrangement) {
                break;
            }
        }
        LinearForm::from_terms(terms)
    }

    pub fn monomials_r(&self, idx: &[u32]) -> Vec<Vec<u32>> {
        idx.iter().map(|&i| self.basis_r.get(i as usize).0.clone()).collect()
    }

    pub fn monomials_r1(&self, idx: &[u32]) -> Vec<Vec<u32>> {
        idx.iter().map(|&i| self.basis_r1.get(i as usize).0.clone()).collect()
    }

    /// Equation-file encoding of a linear form.
    pub fn linear_json(&self, f: &LinearForm) -> LinearJson {
        LinearJson {
            terms: f
                .terms
                .iter()
                .map(|(c, k)| LinearTermJson {
                    c: c.to_string(),
                    idx: self.monomials_r1(&k.0),
                })
                .collect(),
        }
    }

    /// Equation-file encoding of a quadratic form.
    pub fn quadratic_json(&self, f: &QuadraticForm, minor: Option<MinorJson>) -> QuadraticJson {
        QuadraticJson {
            terms: f
                .terms
                .iter()
                .map(|(c, a, b)| QuadraticTermJson {
                    c: c.to_string(),
                    idx: [self.monomials_r1(&a.0), self.monomials_r1(&b.0)],
                })
                .collect(),
            minor,
        }
    }

    /// Location of a 2×2 minor of the `F` table.
    pub fn minor_json(&self, t: &FTable, rows: (usize, usize), cols: (usize, usize)) -> MinorJson {
        MinorJson {
            rows: [self.monomials_r(&t.rows[rows.0]), self.monomials_r(&t.rows[rows.1])],
            cols: [cols.0, cols.1].map(|c| {
                let (nt, a) = &t.cols[c];
                ColumnJson {
                    n: self.monomials_r1(nt),
                    alpha: a.clone(),
                }
            }),
        }
    }

    fn index_r(&self, exps: &[Vec<u32>]) -> Result<Vec<u32>, EquationError> {
        exps.iter()
            .map(|e| {
                self.basis_r
                    .index_of(&Monomial(e.clone()))
                    .map(|i| i as u32)
                    .ok_or_else(|| EquationError::Malformed(format!("{e:?} is not in S_R")))
            })
            .collect()
    }

    fn index_r1(&self, exps: &[Vec<u32>]) -> Result<Vec<u32>, EquationError> {
        exps.iter()
            .map(|e| {
                self.basis_r1
                    .index_of(&Monomial(e.clone()))
                    .map(|i| i as u32)
                    .ok_or_else(|| EquationError::Malformed(format!("{e:?} is not in S_(R+1)")))
            })
            .collect()
    }
}

/// Advances to the next lexicographic arrangement; `false` after the last.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exponent vectors of all multisets of `k` variables out of `n + 1`.
pub fn alpha_vectors(n: usize, k: usize) -> Vec<Vec<u32>> {
    (0..=n)
        .combinations_with_replacement(k)
        .map(|c| {
            let mut a = vec![0u32; n + 1];
            for v in c {
                a[v] += 1;
            }
            a
        })
        .collect()
}

fn multiset_count(n: u128, k: u128) -> u128 {
    // C(n + k - 1, k)
    if n == 0 {
        return u128::from(k == 0);
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n + i) / (i + 1);
    }
    acc
}

fn subset_count(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Tally of the linear-form enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearReport {
    pub generated: usize,
    pub identically_zero: usize,
    pub duplicates: usize,
}

/// Distinct nonzero `E` forms (sign-normalized) and the enumeration tally.
pub fn gen_e(ctx: &EquationContext) -> Result<(Vec<LinearForm>, LinearReport), EquationError> {
    let k = ctx.p_r + 1;
    let Some(nlen) = ctx.p_r1.checked_sub(ctx.p_r + 1) else {
        return Ok((Vec::new(), LinearReport::default()));
    };
    let big_nr = ctx.basis_r.len() as u128;
    let big_nr1 = ctx.basis_r1.len() as u128;
    let total = multiset_count(big_nr, k as u128)
        .saturating_mul(subset_count(big_nr1, nlen as u128))
        .saturating_mul(multiset_count(ctx.n as u128 + 1, k as u128));
    if total > ENUMERATION_LIMIT {
        return Err(EquationError::TooLarge(total));
    }
    let ms: Vec<Vec<u32>> = (0..ctx.basis_r.len() as u32).combinations_with_replacement(k).collect();
    let ns: Vec<Vec<u32>> = (0..ctx.basis_r1.len() as u32).combinations(nlen).collect();
    let alphas = alpha_vectors(ctx.n, k);
    let forms: Vec<LinearForm> = ms
        .par_iter()
        .flat_map_iter(|m| {
            let mut v = Vec::with_capacity(ns.len() * alphas.len());
            for nt in &ns {
                for a in &alphas {
                    v.push(ctx.expand(m, nt, a));
                }
            }
            v
        })
        .collect();
    let mut report = LinearReport {
        generated: forms.len(),
        ..Default::default()
    };
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for f in forms {
        if f.is_zero() {
            report.identically_zero += 1;
            continue;
        }
        let f = f.sign_normalized();
        if seen.insert(f.clone()) {
            out.push(f);
        } else {
            report.duplicates += 1;
        }
    }
    Ok((out, report))
}

/// Full table of `F` symbols: rows are `m`-multisets, columns `(n, α)` pairs.
#[derive(Clone, Debug)]
pub struct FTable {
    pub rows: Vec<Vec<u32>>,
    pub cols: Vec<(Vec<u32>, Vec<u32>)>,
    /// Row-major expansions; zero forms are kept.
    pub symbols: Vec<LinearForm>,
}

impl FTable {
    pub fn symbol(&self, row: usize, col: usize) -> &LinearForm {
        &self.symbols[row * self.cols.len() + col]
    }

    pub fn zero_count(&self) -> usize {
        self.symbols.iter().filter(|s| s.is_zero()).count()
    }

    /// Rows with at least one nonzero symbol.
    pub fn live_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&i| (0..self.cols.len()).any(|j| !self.symbol(i, j).is_zero()))
            .collect()
    }

    pub fn live_cols(&self) -> Vec<usize> {
        (0..self.cols.len())
            .filter(|&j| (0..self.rows.len()).any(|i| !self.symbol(i, j).is_zero()))
            .collect()
    }
}

pub fn gen_f_symbols(ctx: &EquationContext) -> Result<FTable, EquationError> {
    let k = ctx.p_r;
    let Some(nlen) = ctx.p_r1.checked_sub(ctx.p_r) else {
        return Err(EquationError::Malformed("p(R+1) < p(R)".into()));
    };
    let big_nr = ctx.basis_r.len() as u128;
    let big_nr1 = ctx.basis_r1.len() as u128;
    let total = multiset_count(big_nr, k as u128)
        .saturating_mul(subset_count(big_nr1, nlen as u128))
        .saturating_mul(multiset_count(ctx.n as u128 + 1, k as u128));
    if total > ENUMERATION_LIMIT {
        return Err(EquationError::TooLarge(total));
    }
    let rows: Vec<Vec<u32>> = (0..ctx.basis_r.len() as u32).combinations_with_replacement(k).collect();
    let alphas = alpha_vectors(ctx.n, k);
    let cols: Vec<(Vec<u32>, Vec<u32>)> = (0..ctx.basis_r1.len() as u32)
        .combinations(nlen)
        .flat_map(|nt| alphas.iter().map(move |a| (nt.clone(), a.clone())))
        .collect();
    let symbols: Vec<LinearForm> = rows
        .par_iter()
        .flat_map_iter(|m| cols.iter().map(|(nt, a)| ctx.expand(m, nt, a)).collect::<Vec<_>>())
        .collect();
    Ok(FTable { rows, cols, symbols })
}

/// Values of all `F` symbols at a point.
#[derive(Clone, Debug)]
pub struct FMatrix {
    pub values: ExactMatrix,
}

pub fn f_matrix(table: &FTable, point: &PluckerVector) -> FMatrix {
    let ncols = table.cols.len();
    let entries: Vec<FieldElement> = table.symbols.par_iter().map(|s| s.evaluate(point)).collect();
    let rows = entries.chunks(ncols.max(1)).map(|c| c.to_vec()).collect::<Vec<_>>();
    let values = if ncols == 0 {
        ExactMatrix::zeros(point.field, table.rows.len(), 0)
    } else {
        ExactMatrix::from_rows(point.field, ncols, rows).expect("uniform rows")
    };
    FMatrix { values }
}

/// A nonzero 2×2 minor `F[r1][c1]·F[r2][c2] − F[r1][c2]·F[r2][c1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorWitness {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub value: FieldElement,
}

/// Rank ≤ 1 test; on failure returns a nonzero minor.
pub fn cross_quadric_residual(fm: &FMatrix) -> Result<(), MinorWitness> {
    let m = &fm.values;
    let mut anchor = None;
    'outer: for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m.get(i, j).is_zero() {
                anchor = Some((i, j));
                break 'outer;
            }
        }
    }
    let Some((i0, j0)) = anchor else { return Ok(()) };
    let a = m.get(i0, j0);
    for i in 0..m.rows() {
        if i == i0 {
            continue;
        }
        let b = m.get(i, j0);
        for j in 0..m.cols() {
            if j == j0 {
                continue;
            }
            let value = &(a * m.get(i, j)) - &(m.get(i0, j) * b);
            if !value.is_zero() {
                return Err(MinorWitness {
                    rows: (i0, i),
                    cols: (j0, j),
                    value,
                });
            }
        }
    }
    Ok(())
}

fn product(a: &LinearForm, b: &LinearForm) -> Vec<(i64, PluckerIndex, PluckerIndex)> {
    a.terms
        .iter()
        .flat_map(|(c1, k1)| b.terms.iter().map(move |(c2, k2)| (c1 * c2, k1.clone(), k2.clone())))
        .collect()
}

/// The quadric `F[r1][c1]F[r2][c2] − F[r1][c2]F[r2][c1]` as a form in Plücker coordinates.
pub fn cross_quadric(table: &FTable, rows: (usize, usize), cols: (usize, usize)) -> QuadraticForm {
    let (r1, r2) = rows;
    let (c1, c2) = cols;
    let pos = product(table.symbol(r1, c1), table.symbol(r2, c2));
    let neg: Vec<_> = product(table.symbol(r1, c2), table.symbol(r2, c1))
        .into_iter()
        .map(|(c, a, b)| (-c, a, b))
        .collect();
    QuadraticForm::from_terms(pos.into_iter().chain(neg))
}

/// A cross quadric together with the minor it comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossQuadric {
    pub form: QuadraticForm,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

/// Seeded sample of distinct nonzero cross quadrics, drawn among live rows and columns.
pub fn sample_cross_quadrics(table: &FTable, count: usize, seed: u64) -> Vec<CrossQuadric> {
    let rows = table.live_rows();
    let cols = table.live_cols();
    if rows.len() < 2 || cols.len() < 2 || count == 0 {
        return Vec::new();
    }
    let mut rng = SeededRng::derived(seed, "cross-quadrics");
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..(40 * count + 1000) {
        if out.len() == count {
            break;
        }
        let (a, b) = two_distinct(&mut rng, rows.len());
        let (c, d) = two_distinct(&mut rng, cols.len());
        let rr = (rows[a.min(b)], rows[a.max(b)]);
        let cc = (cols[c.min(d)], cols[c.max(d)]);
        let form = cross_quadric(table, rr, cc);
        if form.is_zero() {
            continue;
        }
        let key = form.sign_normalized();
        if seen.insert(key) {
            out.push(CrossQuadric { form, rows: rr, cols: cc });
        }
    }
    out
}

fn two_distinct(rng: &mut SeededRng, n: usize) -> (usize, usize) {
    let a = rng.below(n as u64) as usize;
    let mut b = rng.below(n as u64 - 1) as usize;
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Every distinct nonzero cross quadric; `None` when there are more than `limit` minors.
pub fn all_cross_quadrics(table: &FTable, limit: usize) -> Option<Vec<CrossQuadric>> {
    let rows = table.live_rows();
    let cols = table.live_cols();
    let pairs = |k: usize| k * k.saturating_sub(1) / 2;
    if pairs(rows.len()).saturating_mul(pairs(cols.len())) > limit {
        return None;
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for rr in rows.iter().copied().tuple_combinations::<(usize, usize)>() {
        for cc in cols.iter().copied().tuple_combinations::<(usize, usize)>() {
            let form = cross_quadric(table, rr, cc);
            if !form.is_zero() && seen.insert(form.sign_normalized()) {
                out.push(CrossQuadric { form, rows: rr, cols: cc });
            }
        }
    }
    Some(out)
}

/// Whether every cross quadric vanishes as a polynomial. Exact: with at most
/// one live row or column every minor is a product involving a zero symbol.
pub fn cross_quadrics_identically_zero(table: &FTable, limit: usize) -> Option<bool> {
    let rows = table.live_rows();
    let cols = table.live_cols();
    if rows.len() < 2 || cols.len() < 2 {
        return Some(true);
    }
    all_cross_quadrics(table, limit).map(|v| v.is_empty())
}

/// Which sections an export contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Include {
    pub plucker: bool,
    pub e: bool,
    pub fquad: bool,
}

impl Default for Include {
    fn default() -> Self {
        Include {
            plucker: true,
            e: true,
            fquad: true,
        }
    }
}

impl Include {
    pub fn parse(s: &str) -> Result<Self, EquationError> {
        let mut inc = Include {
            plucker: false,
            e: false,
            fquad: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "plucker" => inc.plucker = true,
                "E" | "e" => inc.e = true,
                "Fquad" | "fquad" | "F" => inc.fquad = true,
                other => return Err(EquationError::Malformed(format!("unknown section `{other}`"))),
            }
        }
        Ok(inc)
    }
}

#[derive(Clone, Debug)]
pub struct ExportOptions {
    pub include: Include,
    pub sample_quadrics: usize,
    pub sample_plucker: usize,
    pub full_quadrics: bool,
    pub seed: u64,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            include: Include::default(),
            sample_quadrics: 100,
            sample_plucker: 200,
            full_quadrics: false,
            seed: 0,
        }
    }
}

/// Limit on minors enumerated for a full quadric export.
pub const FULL_QUADRIC_LIMIT: usize = 2_000_000;

/// In-memory equation set used for membership tests.
#[derive(Clone, Debug)]
pub struct EquationSet {
    pub ctx: EquationContext,
    pub poly: String,
    pub linear: Option<Vec<LinearForm>>,
    pub linear_report: LinearReport,
    pub ftable: Option<FTable>,
}

impl EquationSet {
    pub fn generate(spec: &HilbertPolynomialSpec, n: usize, big_r: u32, include: Include) -> Result<Self, EquationError> {
        let ctx = EquationContext::new(spec, n, big_r)?;
        let (linear, linear_report) = if include.e {
            let (l, r) = gen_e(&ctx)?;
            (Some(l), r)
        } else {
            (None, LinearReport::default())
        };
        let ftable = if include.fquad { Some(gen_f_symbols(&ctx)?) } else { None };
        Ok(EquationSet {
            ctx,
            poly: spec.to_string(),
            linear,
            linear_report,
            ftable,
        })
    }

    pub fn check_point(&self, point: &PluckerVector) -> Result<(), EquationError> {
        let d = self.ctx.big_r + 1;
        if point.d != d || point.r != self.ctx.p_r1 || point.n != self.ctx.n {
            return Err(EquationError::DimensionMismatch {
                d,
                r: self.ctx.p_r1,
                found_d: point.d,
                found_r: point.r,
            });
        }
        Ok(())
    }

    /// First `E` form not vanishing at the point.
    pub fn first_failing_linear(&self, point: &PluckerVector) -> Result<Option<(usize, FieldElement)>, EquationError> {
        self.check_point(point)?;
        let Some(lin) = &self.linear else { return Ok(None) };
        Ok(lin
            .par_iter()
            .enumerate()
            .map(|(i, f)| (i, f.evaluate(point)))
            .find_first(|(_, v)| !v.is_zero()))
    }

    pub fn f_matrix(&self, point: &PluckerVector) -> Result<Option<FMatrix>, EquationError> {
        self.check_point(point)?;
        Ok(self.ftable.as_ref().map(|t| f_matrix(t, point)))
    }

    pub fn export(&self, spec: &HilbertPolynomialSpec, opts: &ExportOptions) -> EquationFile {
        let ctx = &self.ctx;
        let lin_json = |f: &LinearForm| ctx.linear_json(f);
        let quad_json = |f: &QuadraticForm, minor: Option<MinorJson>| ctx.quadratic_json(f, minor);
        let mut notes = Vec::new();
        if spec.is_constant() {
            notes.push("constant Hilbert polynomial: the set of linear forms E is empty".to_string());
        }
        let linear: Vec<LinearJson> = match (&self.linear, opts.include.e) {
            (Some(l), true) => l.iter().map(lin_json).collect(),
            _ => Vec::new(),
        };
        if opts.include.e && linear.is_empty() {
            notes.push("no nonzero linear forms".to_string());
        }
        let mut fsymbols = Vec::new();
        let mut quadrics = Vec::new();
        let mut full_quadrics_skipped = false;
        if let (Some(t), true) = (&self.ftable, opts.include.fquad) {
            for (i, m) in t.rows.iter().enumerate() {
                for (j, (nt, alpha)) in t.cols.iter().enumerate() {
                    let s = t.symbol(i, j);
                    fsymbols.push(FSymbolJson {
                        m: ctx.monomials_r(m),
                        n: ctx.monomials_r1(nt),
                        alpha: alpha.clone(),
                        zero: s.is_zero(),
                        terms: lin_json(s).terms,
                    });
                }
            }
            let chosen = if opts.full_quadrics {
                match all_cross_quadrics(t, FULL_QUADRIC_LIMIT) {
                    Some(all) => all,
                    None => {
                        full_quadrics_skipped = true;
                        sample_cross_quadrics(t, opts.sample_quadrics, opts.seed)
                    }
                }
            } else {
                sample_cross_quadrics(t, opts.sample_quadrics, opts.seed)
            };
            let minor_json = |q: &CrossQuadric| ctx.minor_json(t, q.rows, q.cols);
            quadrics = chosen
                .iter()
                .map(|q| quad_json(&q.form.sign_normalized(), Some(minor_json(q))))
                .collect();
            if quadrics.is_empty() {
                notes.push("no nonzero cross quadrics".to_string());
            }
        }
        if full_quadrics_skipped {
            notes.push(format!("full quadric enumeration exceeds {FULL_QUADRIC_LIMIT} minors; sampled instead"));
        }
        let plucker_relations: Vec<QuadraticJson> = if opts.include.plucker {
            plucker_relations_sample(ctx.n, ctx.big_r + 1, ctx.p_r1, opts.sample_plucker, opts.seed)
                .iter()
                .map(|q| quad_json(q, None))
                .collect()
        } else {
            Vec::new()
        };
        let counts = Counts {
            linear: linear.len(),
            linear_generated: self.linear_report.generated,
            linear_identically_zero: self.linear_report.identically_zero,
            linear_duplicates: self.linear_report.duplicates,
            fsymbols: fsymbols.len(),
            fsymbols_zero: fsymbols.iter().filter(|s| s.zero).count(),
            frows: self.ftable.as_ref().map_or(0, |t| t.rows.len()),
            fcols: self.ftable.as_ref().map_or(0, |t| t.cols.len()),
            quadrics: quadrics.len(),
            plucker_relations: plucker_relations.len(),
        };
        EquationFile {
            meta: Meta {
                n: ctx.n,
                poly: self.poly.clone(),
                big_r: ctx.big_r,
                p_r: ctx.p_r,
                p_r1: ctx.p_r1,
                sections: Sections {
                    plucker: opts.include.plucker,
                    e: opts.include.e,
                    fquad: opts.include.fquad,
                },
                seed: opts.seed.to_string(),
                counts,
                notes,
            },
            linear,
            fsymbols,
            quadrics,
            plucker_relations,
        }
    }

    /// Rebuilds the linear forms and the `F` table from a file.
    pub fn from_file(file: &EquationFile) -> Result<(Self, HilbertPolynomialSpec), EquationError> {
        let spec = crate::macaulay::parse_hilbert_polynomial(&file.meta.poly)
            .map_err(|e| EquationError::Malformed(e.to_string()))?;
        let ctx = EquationContext::new(&spec, file.meta.n, file.meta.big_r)?;
        if ctx.p_r != file.meta.p_r || ctx.p_r1 != file.meta.p_r1 {
            return Err(EquationError::Malformed("pR/pR1 disagree with the polynomial".into()));
        }
        let parse_c = |c: &str| c.parse::<i64>().map_err(|_| EquationError::Malformed(format!("bad coefficient {c}")));
        let parse_idx = |exps: &[Vec<u32>]| -> Result<(PluckerIndex, i8), EquationError> {
            let mut idx = ctx.index_r1(exps)?;
            let s = canonical_sort(&mut idx);
            Ok((PluckerIndex(idx), s))
        };
        let parse_linear = |terms: &[LinearTermJson]| -> Result<LinearForm, EquationError> {
            let mut out = Vec::new();
            for t in terms {
                let (k, s) = parse_idx(&t.idx)?;
                if s != 0 {
                    out.push((s as i64 * parse_c(&t.c)?, k));
                }
            }
            Ok(LinearForm::from_terms(out))
        };
        let linear = if file.meta.sections.e {
            Some(file.linear.iter().map(|l| parse_linear(&l.terms)).collect::<Result<Vec<_>, _>>()?)
        } else {
            None
        };
        let ftable = if file.meta.sections.fquad {
            let mut rows: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
            let mut cols: BTreeMap<(Vec<u32>, Vec<u32>), usize> = BTreeMap::new();
            let mut entries = Vec::new();
            for s in &file.fsymbols {
                let mut m = ctx.index_r(&s.m)?;
                m.sort_unstable();
                let mut nt = ctx.index_r1(&s.n)?;
                nt.sort_unstable();
                if s.alpha.len() != ctx.n + 1 {
                    return Err(EquationError::Malformed("alpha arity".into()));
                }
                let next = rows.len();
                let ri = *rows.entry(m).or_insert(next);
                let next = cols.len();
                let ci = *cols.entry((nt, s.alpha.clone())).or_insert(next);
                entries.push((ri, ci, parse_linear(&s.terms)?));
            }
            let mut row_list = vec![Vec::new(); rows.len()];
            for (k, v) in rows {
                row_list[v] = k;
            }
            let mut col_list = vec![(Vec::new(), Vec::new()); cols.len()];
            for (k, v) in cols {
                col_list[v] = k;
            }
            let mut symbols = vec![LinearForm { terms: vec![] }; row_list.len() * col_list.len()];
            for (ri, ci, f) in entries {
                symbols[ri * col_list.len() + ci] = f;
            }
            Some(FTable {
                rows: row_list,
                cols: col_list,
                symbols,
            })
        } else {
            None
        };
        let linear_report = LinearReport {
            generated: file.meta.counts.linear_generated,
            identically_zero: file.meta.counts.linear_identically_zero,
            duplicates: file.meta.counts.linear_duplicates,
        };
        Ok((
            EquationSet {
                ctx,
                poly: spec.to_string(),
                linear,
                linear_report,
                ftable,
            },
            spec,
        ))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LinearTermJson {
    pub c: String,
    pub idx: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct LinearJson {
    pub terms: Vec<LinearTermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuadraticTermJson {
    pub c: String,
    pub idx: [Vec<Vec<u32>>; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ColumnJson {
    pub n: Vec<Vec<u32>>,
    pub alpha: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MinorJson {
    pub rows: [Vec<Vec<u32>>; 2],
    pub cols: [ColumnJson; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuadraticJson {
    pub terms: Vec<QuadraticTermJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minor: Option<MinorJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct FSymbolJson {
    pub m: Vec<Vec<u32>>,
    pub n: Vec<Vec<u32>>,
    pub alpha: Vec<u32>,
    pub zero: bool,
    pub terms: Vec<LinearTermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Counts {
    pub linear: usize,
    pub linear_generated: usize,
    pub linear_identically_zero: usize,
    pub linear_duplicates: usize,
    pub fsymbols: usize,
    pub fsymbols_zero: usize,
    pub frows: usize,
    pub fcols: usize,
    pub quadrics: usize,
    pub plucker_relations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Sections {
    pub plucker: bool,
    #[serde(rename = "E")]
    pub e: bool,
    #[serde(rename = "Fquad")]
    pub fquad: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Meta {
    pub n: usize,
    pub poly: String,
    #[serde(rename = "R")]
    pub big_r: u32,
    #[serde(rename = "pR")]
    pub p_r: usize,
    #[serde(rename = "pR1")]
    pub p_r1: usize,
    pub sections: Sections,
    pub seed: String,
    pub counts: Counts,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct EquationFile {
    pub meta: Meta,
    pub linear: Vec<LinearJson>,
    pub fsymbols: Vec<FSymbolJson>,
    pub quadrics: Vec<QuadraticJson>,
    pub plucker_relations: Vec<QuadraticJson>,
}

/// Parses a quadric record back into a form over `S_{R+1}` indices.
pub fn quadratic_from_json(ctx: &EquationContext, q: &QuadraticJson) -> Result<QuadraticForm, EquationError> {
    let mut terms = Vec::new();
    for t in &q.terms {
        let mut a = ctx.index_r1(&t.idx[0])?;
        let mut b = ctx.index_r1(&t.idx[1])?;
        let s = canonical_sort(&mut a) as i64 * canonical_sort(&mut b) as i64;
        let c: i64 = t.c.parse().map_err(|_| EquationError::Malformed(format!("bad coefficient {}", t.c)))?;
        if s != 0 {
            terms.push((s * c, PluckerIndex(a), PluckerIndex(b)));
        }
    }
    Ok(QuadraticForm::from_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::plucker_from_subspace;
    use crate::macaulay::parse_hilbert_polynomial;
    use crate::polyring::{ideal_degree_piece, parse_generators};
    use crate::exactalg::Field;
    use proptest::prelude::*;

    const Q: Field = Field::Rational;

    fn ctx(poly: &str, n: usize, r: u32) -> EquationContext {
        EquationContext::new(&parse_hilbert_polynomial(poly).unwrap(), n, r).unwrap()
    }

    fn idx(v: &[u32]) -> PluckerIndex {
        PluckerIndex(v.to_vec())
    }

    fn conic_point(a: i64, b: i64) -> PluckerVector {
        PluckerVector::raw(
            1,
            2,
            1,
            Q,
            [(idx(&[0]), Q.from_i64(a * a)), (idx(&[1]), Q.from_i64(a * b)), (idx(&[2]), Q.from_i64(b * b))]
                .into_iter()
                .filter(|(_, v)| !v.is_zero()),
        )
        .unwrap()
    }

    #[test]
    fn hilb_one_p1_symbols() {
        let c = ctx("1", 1, 1);
        let t = gen_f_symbols(&c).unwrap();
        assert_eq!(t.rows, vec![vec![0], vec![1]]);
        assert_eq!(t.cols, vec![(vec![], vec![1, 0]), (vec![], vec![0, 1])]);
        assert_eq!(t.symbol(0, 0), &LinearForm::from_terms([(1, idx(&[0]))]));
        assert_eq!(t.symbol(0, 1), &LinearForm::from_terms([(1, idx(&[1]))]));
        assert_eq!(t.symbol(1, 1), &LinearForm::from_terms([(1, idx(&[2]))]));
        let fm = f_matrix(&t, &conic_point(1, 2));
        assert_eq!(fm.values, ExactMatrix::from_i64_rows(Q, &[vec![1, 2], vec![2, 4]]));
        assert!(cross_quadric_residual(&fm).is_ok());
        let all = all_cross_quadrics(&t, 100).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(
            all[0].form.sign_normalized(),
            QuadraticForm::from_terms([(1, idx(&[0]), idx(&[2])), (-1, idx(&[1]), idx(&[1]))])
        );
        let (e, _) = gen_e(&c).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn residual_examples() {
        let id = FMatrix {
            values: ExactMatrix::from_i64_rows(Q, &[vec![1, 0], vec![0, 1]]),
        };
        let w = cross_quadric_residual(&id).unwrap_err();
        assert_eq!(w.value, Q.one());
        let z = FMatrix {
            values: ExactMatrix::zeros(Q, 3, 3),
        };
        assert!(cross_quadric_residual(&z).is_ok());
    }

    #[test]
    fn sharpness_degree_is_whole_grassmannian() {
        let c = ctx("t+2", 2, 1);
        let (e, rep) = gen_e(&c).unwrap();
        assert!(e.is_empty());
        assert!(rep.generated > 0);
        assert_eq!(rep.identically_zero, rep.generated);
        let t = gen_f_symbols(&c).unwrap();
        assert_eq!(cross_quadrics_identically_zero(&t, 1_000_000), Some(true));
    }

    #[test]
    fn singleton_orbit_and_repeats() {
        let c = ctx("t+2", 2, 2);
        let f = c.expand(&[0, 1, 2, 3], &[7], &[4, 0, 0]);
        assert_eq!(f.terms.len(), 1);
        assert_eq!(f.terms[0].0.abs(), 1);
        assert!(c.expand(&[0, 0, 2, 3], &[7], &[4, 0, 0]).is_zero());
        assert!(c.expand(&[0, 0, 2, 3], &[7], &[2, 1, 1]).is_zero());
    }

    /// Coefficient of `a^α` in `Lm₁ ∧ … ∧ Lm_k ∧ n₁ ∧ …`, by expanding over
    /// all `(n+1)^k` variable assignments.
    fn wedge_coefficients(c: &EquationContext, m: &[u32], nt: &[u32]) -> BTreeMap<Vec<u32>, LinearForm> {
        let mut acc: BTreeMap<Vec<u32>, Vec<(i64, PluckerIndex)>> = BTreeMap::new();
        let vars = c.n + 1;
        let total = vars.pow(m.len() as u32);
        for code in 0..total {
            let mut y = Vec::with_capacity(m.len());
            let mut rest = code;
            for _ in 0..m.len() {
                y.push(rest % vars);
                rest /= vars;
            }
            let mut alpha = vec![0u32; vars];
            let mut tuple = Vec::new();
            for (&v, &mi) in y.iter().zip(m) {
                alpha[v] += 1;
                let mono = c.basis_r.get(mi as usize).times_var(v);
                tuple.push(c.basis_r1.index_of(&mono).unwrap() as u32);
            }
            tuple.extend_from_slice(nt);
            let s = canonical_sort(&mut tuple);
            if s != 0 {
                acc.entry(alpha).or_default().push((s as i64, PluckerIndex(tuple)));
            }
        }
        acc.into_iter().map(|(a, t)| (a, LinearForm::from_terms(t))).collect()
    }

    #[test]
    fn coefficient_extraction_identity() {
        let c = ctx("t+2", 2, 2);
        let mut rng = SeededRng::new(5);
        for trial in 0..24 {
            let k = if trial % 2 == 0 { c.p_r } else { c.p_r + 1 };
            let nlen = c.p_r1 - k;
            let mut m: Vec<u32> = (0..k).map(|_| rng.below(c.basis_r.len() as u64) as u32).collect();
            m.sort_unstable();
            let mut nt: Vec<u32> = (0..c.basis_r1.len() as u32).collect();
            rng.shuffle(&mut nt);
            nt.truncate(nlen);
            nt.sort_unstable();
            let coeffs = wedge_coefficients(&c, &m, &nt);
            for alpha in alpha_vectors(c.n, k) {
                let expect = coeffs.get(&alpha).cloned().unwrap_or(LinearForm { terms: vec![] });
                assert_eq!(c.expand(&m, &nt, &alpha), expect, "m={m:?} n={nt:?} alpha={alpha:?}");
            }
        }
    }

    #[test]
    fn forms_vanish_on_hilbert_points() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let set = EquationSet::generate(&spec, 2, 2, Include::default()).unwrap();
        for g in ["x0*x2, x1*x2", "x1*x2, x2^2", "x0*x1, x0*x2"] {
            let gens = parse_generators(g, 2).unwrap();
            let i3 = ideal_degree_piece(2, &gens, 3, Q).unwrap();
            let p = plucker_from_subspace(&i3, 5).unwrap();
            assert_eq!(set.first_failing_linear(&p).unwrap(), None);
            let fm = set.f_matrix(&p).unwrap().unwrap();
            assert!(cross_quadric_residual(&fm).is_ok());
        }
    }

    #[test]
    fn export_round_trip_and_minor_consistency() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let set = EquationSet::generate(&spec, 2, 2, Include::default()).unwrap();
        let opts = ExportOptions {
            sample_quadrics: 40,
            sample_plucker: 30,
            seed: 3,
            ..Default::default()
        };
        let file = set.export(&spec, &opts);
        assert_eq!(file.meta.counts.quadrics, 40);
        assert_eq!(file.meta.counts.plucker_relations, 30);
        let text = serde_json::to_string(&file).unwrap();
        assert_eq!(text, serde_json::to_string(&set.export(&spec, &opts)).unwrap());
        let (back, _) = EquationSet::from_file(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.linear, set.linear);

        // A point off the Hilbert scheme: sampled quadrics equal their minors.
        let w = GradedSubspaceFixture::non_member();
        let p = plucker_from_subspace(&w, 5).unwrap();
        let t = set.ftable.as_ref().unwrap();
        let fm = f_matrix(t, &p);
        for q in sample_cross_quadrics(t, 40, 3) {
            let (r1, r2) = q.rows;
            let (c1, c2) = q.cols;
            let v = fm.values.get(r1, c1) * fm.values.get(r2, c2) - fm.values.get(r1, c2) * fm.values.get(r2, c1);
            assert_eq!(q.form.evaluate(&p), v);
        }
        for (qj, q) in file.quadrics.iter().zip(sample_cross_quadrics(t, 40, 3)) {
            assert_eq!(quadratic_from_json(&set.ctx, qj).unwrap(), q.form.sign_normalized());
        }
    }

    struct GradedSubspaceFixture;

    impl GradedSubspaceFixture {
        fn non_member() -> crate::polyring::GradedSubspace {
            let gens = parse_generators("x0^3, x1^3, x2^3, x0*x1*x2, x0^2*x1", 2).unwrap();
            ideal_degree_piece(2, &gens, 3, Q).unwrap()
        }
    }

    proptest! {
        #[test]
        fn sign_coherence_under_permutation(seed in any::<u64>()) {
            let c = ctx("t+2", 2, 2);
            let mut rng = SeededRng::new(seed);
            let mut m: Vec<u32> = (0..4).map(|_| rng.below(6) as u32).collect();
            let nt = vec![rng.below(10) as u32];
            let alpha = alpha_vectors(2, 4)[rng.below(15) as usize].clone();
            let base = {
                let mut s = m.clone();
                s.sort_unstable();
                c.expand(&s, &nt, &alpha)
            };
            rng.shuffle(&mut m);
            let mut sorted = m.clone();
            let sign = canonical_sort(&mut sorted);
            let permuted = c.expand(&m, &nt, &alpha);
            if sign == 0 {
                prop_assert!(permuted.is_zero() && base.is_zero());
            } else {
                let scaled = LinearForm::from_terms(base.terms.iter().map(|(k, i)| (k * sign as i64, i.clone())));
                prop_assert_eq!(permuted, scaled);
            }
        }
    }
}
