//! Deterministic test points: lex segments, a small catalog of saturated
//! ideals, coordinate changes, and random nonmembers.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{ExactError, ExactMatrix, Field};
use crate::macaulay::HilbertPolynomialSpec;
use crate::membership::gotzmann_oracle;
use crate::polyring::{
    dim_s, ideal_degree_piece, monomial_basis, substitution_matrix, GradedSubspace, PolyError,
    Polynomial,
};
use crate::rng::SeededRng;

/// Draws allowed before a coordinate change is declared singular.
pub const GL_RETRIES: usize = 10;
/// Draws allowed before nonmember sampling gives up.
pub const NONMEMBER_RETRIES: usize = 100;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no catalog entry for p = {poly} on P^{n}")]
    UnknownCatalogEntry { poly: String, n: usize },
    #[error("no invertible matrix in {0} draws")]
    SingularDraw(usize),
    #[error("no point of the requested kind in {0} draws")]
    ExhaustedRetries(usize),
    #[error("R = {big_r} is below the Gotzmann number {gotzmann}")]
    BelowGotzmann { big_r: u32, gotzmann: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("malformed corpus record: {0}")]
    Malformed(String),
}

/// Lex segments `I_R, I_{R+1}`: the first `dim S_d − p(d)` monomials in each degree.
pub fn lex_segment_point(
    spec: &HilbertPolynomialSpec,
    n: usize,
    big_r: u32,
    field: Field,
) -> Result<(GradedSubspace, GradedSubspace), CorpusError> {
    check_gotzmann(spec, big_r)?;
    let seg = |d: u32| {
        let basis = monomial_basis(n, d);
        let k = basis.len() - spec.at(d as usize);
        GradedSubspace::from_monomials(n, d, field, &basis[..k])
    };
    let (i_r, i_r1) = (seg(big_r), seg(big_r + 1));
    assert!(crate::polyring::product_with_s1(&i_r).is_subspace_of(&i_r1), "lex segment not closed");
    assert_eq!(i_r.codim(), spec.at(big_r as usize));
    assert_eq!(i_r1.codim(), spec.at(big_r as usize + 1));
    Ok((i_r, i_r1))
}

fn check_gotzmann(spec: &HilbertPolynomialSpec, big_r: u32) -> Result<(), CorpusError> {
    if (big_r as usize) < spec.gotzmann() {
        return Err(CorpusError::BelowGotzmann {
            big_r,
            gotzmann: spec.gotzmann(),
        });
    }
    Ok(())
}

fn catalog_strings(spec: &HilbertPolynomialSpec, n: usize) -> Option<Vec<&'static str>> {
    let poly = spec.to_string();
    let entries: Vec<&'static str> = match (poly.as_str(), n) {
        // line ∪ point, line with an embedded point, and a general line ∪ point
        ("t+2", 2) => vec![
            "x0*x2, x1*x2",
            "x1*x2, x2^2",
            "x0*x1, x0*x2",
            "(x0+x1+x2)*(2*x0-x1), (x0+x1+x2)*(3*x0-x2)",
        ],
        ("1", 1) => vec!["x1", "x0-x1"],
        ("2", 1) => vec!["x1^2", "x0*x1", "x0^2-x1^2"],
        ("3", 1) => vec!["x1^3", "x0^2*x1-x0*x1^2"],
        ("4", 1) => vec!["x1^4", "x0^3*x1-x0*x1^3"],
        ("1", 2) => vec!["x1, x2", "x0-x1, x2"],
        ("2", 2) => vec!["x0, x1^2", "x0, x1*x2", "x2, x0*x1"],
        ("3", 2) => vec!["x0*x1, x0*x2, x1*x2", "x2, x1^3", "x0^2, x0*x1, x1^2"],
        ("4", 2) => vec!["x0^2, x1^2", "x0^2-x2^2, x1^2-x2^2"],
        // twisted cubic
        ("3t+1", 3) => vec!["x0*x2-x1^2, x0*x3-x1*x2, x1*x3-x2^2"],
        _ => return None,
    };
    Some(entries)
}

/// Generator sets of saturated ideals with Hilbert polynomial `p` in `n + 1`
/// variables. Factors written as `(a)*(b)` are multiplied out.
pub fn saturated_examples(spec: &HilbertPolynomialSpec, n: usize) -> Result<Vec<Vec<Polynomial>>, CorpusError> {
    let entries = catalog_strings(spec, n).ok_or_else(|| CorpusError::UnknownCatalogEntry {
        poly: spec.to_string(),
        n,
    })?;
    entries
        .into_iter()
        .map(|s| {
            s.split(", ")
                .map(|g| {
                    g.split(")*(")
                        .map(|f| crate::polyring::parse_polynomial(f.trim_matches(|c| c == '(' || c == ')'), n))
                        .try_fold(None::<Polynomial>, |acc, f| {
                            let f = f?;
                            Ok::<_, PolyError>(Some(match acc {
                                None => f,
                                Some(a) => a.mul(&f),
                            }))
                        })
                        .map(|p| p.expect("nonempty generator"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map_err(CorpusError::from)
        })
        .collect()
}

/// Degree pieces `I_R, I_{R+1}` of an ideal given by generators.
pub fn point_from_generators(
    n: usize,
    gens: &[Polynomial],
    big_r: u32,
    field: Field,
) -> Result<(GradedSubspace, GradedSubspace), CorpusError> {
    Ok((
        ideal_degree_piece(n, gens, big_r, field)?,
        ideal_degree_piece(n, gens, big_r + 1, field)?,
    ))
}

/// Random invertible `(n+1)×(n+1)` matrix: entries in `[-3, 3]` over ℚ, uniform over 𝔽_p.
pub fn random_gl(n: usize, field: Field, rng: &mut SeededRng) -> Result<ExactMatrix, CorpusError> {
    for _ in 0..GL_RETRIES {
        let rows: Vec<Vec<_>> = (0..=n)
            .map(|_| (0..=n).map(|_| rng.field_element(field)).collect())
            .collect();
        let g = ExactMatrix::from_rows(field, n + 1, rows)?;
        if !g.det()?.is_zero() {
            return Ok(g);
        }
    }
    Err(CorpusError::SingularDraw(GL_RETRIES))
}

/// Applies `x_j ↦ Σ_k g[j][k]·x_k` to both degree pieces.
pub fn apply_gl(pair: &(GradedSubspace, GradedSubspace), g: &ExactMatrix) -> (GradedSubspace, GradedSubspace) {
    let image = |w: &GradedSubspace| w.image(&substitution_matrix(w.n(), g, w.degree()), w.n(), w.degree());
    (image(&pair.0), image(&pair.1))
}

/// Seeded random coordinate change of a point.
pub fn gl_translate(
    pair: &(GradedSubspace, GradedSubspace),
    seed: u64,
) -> Result<(GradedSubspace, GradedSubspace), CorpusError> {
    let mut rng = SeededRng::derived(seed, "gl");
    let g = random_gl(pair.1.n(), pair.1.field(), &mut rng)?;
    Ok(apply_gl(pair, &g))
}

/// Uniformly drawn subspace of `S_d` with the given dimension, if the draw has full rank.
fn random_subspace(n: usize, d: u32, dim: usize, field: Field, rng: &mut SeededRng) -> Option<GradedSubspace> {
    let big_n = dim_s(n, d);
    let vectors: Vec<Vec<_>> = (0..dim)
        .map(|_| (0..big_n).map(|_| rng.field_element(field)).collect())
        .collect();
    let w = GradedSubspace::from_vectors(n, d, field, &vectors);
    (w.dim() == dim).then_some(w)
}

/// Random codimension-`p(R+1)` subspace of `S_{R+1}` failing the colon
/// criterion, with the failing colon codimension.
pub fn random_nonmember(
    spec: &HilbertPolynomialSpec,
    n: usize,
    big_r: u32,
    field: Field,
    seed: u64,
) -> Result<(GradedSubspace, usize), CorpusError> {
    let d = big_r + 1;
    let codim = spec.at(d as usize);
    let big_n = dim_s(n, d);
    if codim > big_n {
        return Err(CorpusError::ExhaustedRetries(0));
    }
    let mut rng = SeededRng::derived(seed, "nonmember");
    for _ in 0..NONMEMBER_RETRIES {
        let Some(w) = random_subspace(n, d, big_n - codim, field, &mut rng) else { continue };
        let o = gotzmann_oracle(&w, spec, big_r, true).expect("degree matches");
        if !o.member {
            return Ok((w, o.codim_colon));
        }
    }
    Err(CorpusError::ExhaustedRetries(NONMEMBER_RETRIES))
}

/// Proposal for points of `H` off the Hilbert scheme: `ℓ·V` with `ℓ` a random
/// linear form and `V ⊂ S_R` random of the dimension that makes `ℓ·V` have
/// codimension `p(R+1)`. Returns `None` when the shape does not fit or the
/// draw is degenerate; callers filter the result.
pub fn h_candidate(
    spec: &HilbertPolynomialSpec,
    n: usize,
    big_r: u32,
    field: Field,
    rng: &mut SeededRng,
) -> Option<GradedSubspace> {
    let d = big_r + 1;
    let dim = dim_s(n, d).checked_sub(spec.at(d as usize))?;
    if dim > dim_s(n, big_r) {
        return None;
    }
    let v = random_subspace(n, big_r, dim, field, rng)?;
    let form: Vec<_> = (0..=n).map(|_| rng.field_element(field)).collect();
    if form.iter().all(|c| c.is_zero()) {
        return None;
    }
    let w = v.image(&crate::polyring::multiplication_map(n, big_r, &form), n, d);
    (w.dim() == dim).then_some(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Member,
    Nonmember,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Lex,
    Catalog,
    /// Variable permutation of a monomial lex or catalog point.
    Perm,
    Gl,
    Random,
}

/// One generated point. Nonmembers carry no `I_R`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusPoint {
    pub kind: Kind,
    pub source: Source,
    pub i_r: Option<GradedSubspace>,
    pub i_r1: GradedSubspace,
}

impl CorpusPoint {
    /// Whether both pieces are spanned by monomials.
    pub fn is_monomial(&self) -> bool {
        let mono = |w: &GradedSubspace| {
            let e = w.echelon_rows();
            (0..e.rows()).all(|i| e.row(i).iter().filter(|x| !x.is_zero()).count() == 1)
        };
        mono(&self.i_r1) && self.i_r.as_ref().is_none_or(mono)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub members_monomial: usize,
    pub members_gl: usize,
    pub nonmembers: usize,
}

impl std::str::FromStr for Counts {
    type Err = CorpusError;

    /// Parses `members_monomial,members_gl,nonmembers`, e.g. `10,40,50`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CorpusError::Malformed(format!("counts {s:?}")))?;
        match parts[..] {
            [a, b, c] => Ok(Counts {
                members_monomial: a,
                members_gl: b,
                nonmembers: c,
            }),
            _ => Err(CorpusError::Malformed(format!("counts {s:?} needs three numbers"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub n: usize,
    pub spec: HilbertPolynomialSpec,
    pub big_r: u32,
    pub field: Field,
    pub seed: u64,
    pub counts: Counts,
}

fn permute(pair: &(GradedSubspace, GradedSubspace), perm: &[usize]) -> (GradedSubspace, GradedSubspace) {
    let field = pair.0.field();
    let k = perm.len();
    let mut g = ExactMatrix::zeros(field, k, k);
    for (j, &p) in perm.iter().enumerate() {
        g.set(j, p, field.one());
    }
    apply_gl(pair, &g)
}

/// Member points available without randomness: the lex segment, catalog
/// entries, and variable permutations of the monomial ones. Catalog entries
/// that are not members over `field` are skipped.
pub fn base_members(cs: &CorpusSpec) -> Result<Vec<CorpusPoint>, CorpusError> {
    let mut out: Vec<CorpusPoint> = Vec::new();
    let push = |out: &mut Vec<CorpusPoint>, source, pair: (GradedSubspace, GradedSubspace)| {
        if !out.iter().any(|p| p.i_r1 == pair.1) {
            out.push(CorpusPoint {
                kind: Kind::Member,
                source,
                i_r: Some(pair.0),
                i_r1: pair.1,
            });
        }
    };
    let lex = lex_segment_point(&cs.spec, cs.n, cs.big_r, cs.field)?;
    push(&mut out, Source::Lex, lex);
    let catalog = match saturated_examples(&cs.spec, cs.n) {
        Ok(c) => c,
        Err(CorpusError::UnknownCatalogEntry { .. }) => Vec::new(),
        Err(e) => return Err(e),
    };
    for gens in &catalog {
        let Ok(pair) = point_from_generators(cs.n, gens, cs.big_r, cs.field) else { continue };
        let o = gotzmann_oracle(&pair.1, &cs.spec, cs.big_r, false).expect("R checked");
        if o.member && o.colon == pair.0 {
            push(&mut out, Source::Catalog, pair);
        }
    }
    let monomial: Vec<(GradedSubspace, GradedSubspace)> = out
        .iter()
        .filter(|p| p.is_monomial())
        .map(|p| (p.i_r.clone().unwrap(), p.i_r1.clone()))
        .collect();
    for perm in (0..=cs.n).permutations(cs.n + 1) {
        for pair in &monomial {
            push(&mut out, Source::Perm, permute(pair, &perm));
        }
    }
    Ok(out)
}

/// Generates the corpus. Identical specs give identical output.
pub fn generate(cs: &CorpusSpec) -> Result<Vec<CorpusPoint>, CorpusError> {
    check_gotzmann(&cs.spec, cs.big_r)?;
    let base = base_members(cs)?;
    let mut out: Vec<CorpusPoint> = base
        .iter()
        .filter(|p| p.is_monomial())
        .take(cs.counts.members_monomial)
        .cloned()
        .collect();
    let gl: Vec<CorpusPoint> = (0..cs.counts.members_gl)
        .into_par_iter()
        .map(|i| {
            let b = &base[i % base.len()];
            let pair = (b.i_r.clone().unwrap(), b.i_r1.clone());
            let (i_r, i_r1) = gl_translate(&pair, cs.seed.wrapping_add(i as u64))?;
            let o = gotzmann_oracle(&i_r1, &cs.spec, cs.big_r, false).expect("R checked");
            assert!(o.member && o.colon == i_r, "coordinate change broke membership");
            Ok(CorpusPoint {
                kind: Kind::Member,
                source: Source::Gl,
                i_r: Some(i_r),
                i_r1,
            })
        })
        .collect::<Result<_, CorpusError>>()?;
    out.extend(gl);
    let non: Vec<CorpusPoint> = (0..cs.counts.nonmembers)
        .into_par_iter()
        .map(|i| {
            let seed = SeededRng::derived(cs.seed, &format!("nonmember-{i}")).next_u64();
            let (w, _) = random_nonmember(&cs.spec, cs.n, cs.big_r, cs.field, seed)?;
            Ok(CorpusPoint {
                kind: Kind::Nonmember,
                source: Source::Random,
                i_r: None,
                i_r1: w,
            })
        })
        .collect::<Result<_, CorpusError>>()?;
    out.extend(non);
    Ok(out)
}

/// Corpus file record; matrices are echelon basis rows as decimal strings.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CorpusRecord {
    pub kind: Kind,
    pub source: Source,
    pub field: Field,
    pub n: usize,
    #[serde(rename = "R")]
    pub big_r: u32,
    #[serde(rename = "IR")]
    pub i_r: Option<Vec<Vec<String>>>,
    #[serde(rename = "IR1")]
    pub i_r1: Vec<Vec<String>>,
}

impl CorpusPoint {
    pub fn to_record(&self) -> CorpusRecord {
        CorpusRecord {
            kind: self.kind,
            source: self.source,
            field: self.i_r1.field(),
            n: self.i_r1.n(),
            big_r: self.i_r1.degree() - 1,
            i_r: self.i_r.as_ref().map(|w| w.echelon_rows().to_string_rows()),
            i_r1: self.i_r1.echelon_rows().to_string_rows(),
        }
    }

    pub fn from_record(r: &CorpusRecord) -> Result<Self, CorpusError> {
        let space = |rows: &[Vec<String>], d: u32| -> Result<GradedSubspace, CorpusError> {
            let cols = dim_s(r.n, d);
            if rows.iter().any(|row| row.len() != cols) {
                return Err(CorpusError::Malformed(format!("row length differs from dim S_{d} = {cols}")));
            }
            let m = ExactMatrix::from_string_rows(r.field, cols, rows)?;
            Ok(GradedSubspace::from_rows(r.n, d, &m))
        };
        Ok(CorpusPoint {
            kind: r.kind,
            source: r.source,
            i_r: r.i_r.as_ref().map(|rows| space(rows, r.big_r)).transpose()?,
            i_r1: space(&r.i_r1, r.big_r + 1)?,
        })
    }
}
