//! Membership verdicts for points of the Grassmannian of `S_{R+1}`.
//!
//! Two independent routes decide whether a point lies on the Hilbert scheme:
//! the colon criterion (`codim I_{R+1} = p(R+1)` and `codim (I_{R+1}:S₁) =
//! p(R)`), computed with `polyring` only, and the Plücker-coordinate
//! equations from `equations`. [`cross_check`] runs both and reports any
//! disagreement.

use serde::Serialize;
use thiserror::Error;

use crate::equations::{
    cross_quadric, cross_quadric_residual, EquationError, EquationFile, EquationSet, Include, LinearJson,
    QuadraticJson,
};
use crate::exactalg::{rank_over_function_field, Field, FieldElement, RankMode};
use crate::grassmann::{decomposable_check, plucker_from_subspace, plucker_relations_sample, PluckerVector, QuadraticForm};
use crate::macaulay::HilbertPolynomialSpec;
use crate::polyring::{colon_by_linear, colon_by_s1, generic_colon, generic_colon_matrix, GradedSubspace, MonomialBasis};
use crate::rng::SeededRng;

/// Random draws used by the fast generic-rank path.
const RANK_CONFIDENCE: usize = 8;

#[derive(Debug, Error)]
pub enum MembershipError {
    #[error("R = {big_r} is below the Gotzmann number {gotzmann}")]
    BelowGotzmann { big_r: u32, gotzmann: usize },
    #[error("expected a subspace of degree {expected}, found degree {found}")]
    DegreeMismatch { expected: u32, found: u32 },
    #[error("expected codimension {expected}, found {found}")]
    WrongCodimension { expected: usize, found: usize },
    #[error(transparent)]
    Equations(#[from] EquationError),
    #[error("inconsistent verdict: {failures:?}\n{dump}")]
    InconsistencyDetected { failures: Vec<String>, dump: String },
}

/// Outcome of the colon criterion.
#[derive(Clone, Debug)]
pub struct OracleOutcome {
    pub member: bool,
    pub codim_i: usize,
    pub codim_colon: usize,
    pub expected_i: usize,
    pub expected_colon: usize,
    /// `(I_{R+1} : S₁)`, the candidate `I_R`.
    pub colon: GradedSubspace,
}

fn check_degree(i: &GradedSubspace, big_r: u32) -> Result<(), MembershipError> {
    if i.degree() != big_r + 1 {
        return Err(MembershipError::DegreeMismatch {
            expected: big_r + 1,
            found: i.degree(),
        });
    }
    Ok(())
}

/// Colon criterion at the pair `(R, R+1)`.
pub fn gotzmann_oracle(
    i_r1: &GradedSubspace,
    spec: &HilbertPolynomialSpec,
    big_r: u32,
    allow_below_gotzmann: bool,
) -> Result<OracleOutcome, MembershipError> {
    if (big_r as usize) < spec.gotzmann() && !allow_below_gotzmann {
        return Err(MembershipError::BelowGotzmann {
            big_r,
            gotzmann: spec.gotzmann(),
        });
    }
    check_degree(i_r1, big_r)?;
    let expected_i = spec.at(big_r as usize + 1);
    let expected_colon = spec.at(big_r as usize);
    let colon = colon_by_s1(i_r1);
    let codim_i = i_r1.codim();
    let codim_colon = colon.codim();
    Ok(OracleOutcome {
        member: codim_i == expected_i && codim_colon == expected_colon,
        codim_i,
        codim_colon,
        expected_i,
        expected_colon,
        colon,
    })
}

/// `codim (I_{R+1} : L)` over `k(a₀..aₙ)`.
pub fn generic_colon_codim(i_r1: &GradedSubspace) -> usize {
    rank_over_function_field(&generic_colon_matrix(i_r1), RANK_CONFIDENCE, RankMode::Auto)
}

/// Whether the point lies on `H`: the generic conductor has codimension at most `p(R)`.
pub fn h_membership(i_r1: &GradedSubspace, spec: &HilbertPolynomialSpec, big_r: u32) -> Result<bool, MembershipError> {
    check_degree(i_r1, big_r)?;
    let expected = spec.at(big_r as usize + 1);
    if i_r1.codim() != expected {
        return Err(MembershipError::WrongCodimension {
            expected,
            found: i_r1.codim(),
        });
    }
    if spec.is_constant() {
        return Ok(true);
    }
    Ok(generic_colon_codim(i_r1) <= spec.at(big_r as usize))
}

/// A point given either as a subspace `I_{R+1}` or as a raw Plücker vector.
#[derive(Clone, Debug)]
pub enum Point {
    Subspace(GradedSubspace),
    Raw(PluckerVector),
}

impl Point {
    pub fn field(&self) -> Field {
        match self {
            Point::Subspace(w) => w.field(),
            Point::Raw(v) => v.field,
        }
    }
}

/// A failure witness attached to a verdict.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// A coordinate where the vector disagrees with the minors rebuilt from it.
    NotDecomposable { idx: Vec<Vec<u32>> },
    PluckerRelation { index: usize, value: String, form: QuadraticJson },
    Linear { index: usize, value: String, form: LinearJson },
    CrossQuadric { value: String, form: QuadraticJson },
    Codimension { what: String, expected: usize, found: usize },
}

/// Combined verdict. [`equation_verdict`] fills the equation side only;
/// [`full_verdict`] fills everything.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub decomposable: bool,
    pub codim_ok: bool,
    #[serde(rename = "E_ok")]
    pub e_ok: bool,
    #[serde(rename = "Fquad_ok")]
    pub fquad_ok: bool,
    pub oracle_ok: bool,
    pub h_ok: bool,
    pub conductor_k_rational: bool,
    pub certificates: Vec<Certificate>,
}

impl Verdict {
    /// Membership according to the equations.
    pub fn equation_member(&self) -> bool {
        self.decomposable && self.codim_ok && self.e_ok && self.fquad_ok
    }
}

/// Equations for one `(p, n, R)` together with sampled Grassmannian relations.
#[derive(Clone, Debug)]
pub struct EquationBundle {
    pub spec: HilbertPolynomialSpec,
    pub set: EquationSet,
    pub plucker: Vec<QuadraticForm>,
}

impl EquationBundle {
    pub fn generate(
        spec: &HilbertPolynomialSpec,
        n: usize,
        big_r: u32,
        plucker_sample: usize,
        seed: u64,
    ) -> Result<Self, MembershipError> {
        let set = EquationSet::generate(spec, n, big_r, Include::default())?;
        let plucker = plucker_relations_sample(n, big_r + 1, set.ctx.p_r1, plucker_sample, seed);
        Ok(EquationBundle {
            spec: spec.clone(),
            set,
            plucker,
        })
    }

    pub fn from_file(file: &EquationFile) -> Result<Self, MembershipError> {
        let (set, spec) = EquationSet::from_file(file)?;
        let plucker = file
            .plucker_relations
            .iter()
            .map(|q| crate::equations::quadratic_from_json(&set.ctx, q))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(EquationBundle { spec, set, plucker })
    }

    pub fn n(&self) -> usize {
        self.set.ctx.n
    }

    pub fn big_r(&self) -> u32 {
        self.set.ctx.big_r
    }
}

/// Evaluates the equations at a point.
pub fn equation_verdict(point: &Point, eqs: &EquationBundle) -> Verdict {
    let ctx = &eqs.set.ctx;
    let mut certificates = Vec::new();
    let mut decomposable = true;
    let (codim_found, vector) = match point {
        Point::Subspace(w) => {
            let v = (w.degree() == ctx.big_r + 1 && w.n() == ctx.n && w.codim() == ctx.p_r1)
                .then(|| plucker_from_subspace(w, ctx.p_r1).expect("codimension checked"));
            (w.codim(), v)
        }
        Point::Raw(v) => {
            let dc = decomposable_check(v);
            if let Some(k) = dc.witness {
                decomposable = false;
                certificates.push(Certificate::NotDecomposable {
                    idx: k.to_exponents(&MonomialBasis::new(v.n, v.d)),
                });
            }
            (v.r, Some(v.clone()))
        }
    };
    let vector = vector.filter(|v| v.d == ctx.big_r + 1 && v.n == ctx.n);
    let codim_ok = codim_found == ctx.p_r1 && vector.is_some();
    if !codim_ok {
        certificates.push(Certificate::Codimension {
            what: "I_(R+1)".to_string(),
            expected: ctx.p_r1,
            found: codim_found,
        });
    }
    let Some(v) = vector.filter(|v| v.r == ctx.p_r1) else {
        return Verdict {
            decomposable,
            codim_ok,
            e_ok: false,
            fquad_ok: false,
            oracle_ok: false,
            h_ok: false,
            conductor_k_rational: false,
            certificates,
        };
    };
    if let Some((index, q)) = eqs
        .plucker
        .iter()
        .enumerate()
        .find(|(_, q)| !q.evaluate(&v).is_zero())
    {
        decomposable = false;
        certificates.push(Certificate::PluckerRelation {
            index,
            value: q.evaluate(&v).to_string(),
            form: ctx.quadratic_json(q, None),
        });
    }
    let e_ok = match eqs.set.first_failing_linear(&v).expect("dimensions checked") {
        None => true,
        Some((index, value)) => {
            let lin = &eqs.set.linear.as_ref().expect("failing form exists")[index];
            certificates.push(Certificate::Linear {
                index,
                value: value.to_string(),
                form: ctx.linear_json(lin),
            });
            false
        }
    };
    let fquad_ok = match eqs.set.f_matrix(&v).expect("dimensions checked") {
        None => true,
        Some(fm) => match cross_quadric_residual(&fm) {
            Ok(()) => true,
            Err(w) => {
                let table = eqs.set.ftable.as_ref().expect("table present");
                let form = cross_quadric(table, w.rows, w.cols);
                certificates.push(Certificate::CrossQuadric {
                    value: w.value.to_string(),
                    form: ctx.quadratic_json(&form, Some(ctx.minor_json(table, w.rows, w.cols))),
                });
                false
            }
        },
    };
    Verdict {
        decomposable,
        codim_ok,
        e_ok,
        fquad_ok,
        oracle_ok: false,
        h_ok: false,
        conductor_k_rational: false,
        certificates,
    }
}

/// Verdict with every component computed, plus the codimensions seen.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub verdict: Verdict,
    pub equation_member: bool,
    pub codim_colon: Option<usize>,
    pub codim_generic_colon: Option<usize>,
    /// Subspace the point stands for, when it lies on the Grassmannian.
    #[serde(skip)]
    pub subspace: Option<GradedSubspace>,
}

/// Runs both routes without comparing them.
pub fn full_verdict(point: &Point, eqs: &EquationBundle, allow_below_gotzmann: bool) -> Result<CrossCheckReport, MembershipError> {
    let big_r = eqs.big_r();
    let mut verdict = equation_verdict(point, eqs);
    let subspace = match point {
        Point::Subspace(w) => Some(w.clone()),
        Point::Raw(v) => decomposable_check(v).subspace,
    };
    let mut codim_colon = None;
    let mut codim_generic_colon = None;
    if let Some(w) = subspace.as_ref().filter(|w| w.degree() == big_r + 1 && w.n() == eqs.n()) {
        let oracle = gotzmann_oracle(w, &eqs.spec, big_r, allow_below_gotzmann)?;
        verdict.oracle_ok = oracle.member;
        codim_colon = Some(oracle.codim_colon);
        if oracle.codim_colon != oracle.expected_colon {
            verdict.certificates.push(Certificate::Codimension {
                what: "(I_(R+1):S_1)".to_string(),
                expected: oracle.expected_colon,
                found: oracle.codim_colon,
            });
        }
        if oracle.codim_i == oracle.expected_i {
            verdict.h_ok = h_membership(w, &eqs.spec, big_r)?;
            let gc = generic_colon(w);
            codim_generic_colon = Some(gc.codim);
            verdict.conductor_k_rational = gc.k_rational;
            if !verdict.h_ok {
                verdict.certificates.push(Certificate::Codimension {
                    what: "(I_(R+1):L)".to_string(),
                    expected: oracle.expected_colon,
                    found: gc.codim,
                });
            }
        }
    }
    Ok(CrossCheckReport {
        equation_member: verdict.equation_member(),
        verdict,
        codim_colon,
        codim_generic_colon,
        subspace,
    })
}

/// Runs both routes and the conductor test and asserts that they agree.
/// Assertions involving an equation family absent from `eqs` are skipped.
///
/// On points of the Grassmannian with the right codimension:
/// equations ⇔ oracle; all `E` vanish ⇔ on `H`; and on `H`,
/// oracle ⇔ rank-one `F` matrix ⇔ rational generic conductor.
pub fn cross_check(point: &Point, eqs: &EquationBundle) -> Result<CrossCheckReport, MembershipError> {
    let report = full_verdict(point, eqs, false)?;
    let v = &report.verdict;
    let has_e = eqs.set.linear.is_some();
    let has_f = eqs.set.ftable.is_some();
    let mut failures = Vec::new();
    if has_e && has_f && report.equation_member != v.oracle_ok {
        failures.push(format!(
            "equation verdict {} differs from oracle {}",
            report.equation_member, v.oracle_ok
        ));
    }
    if v.decomposable && v.codim_ok {
        if has_e && v.e_ok != v.h_ok {
            failures.push(format!("E_ok {} differs from h_membership {}", v.e_ok, v.h_ok));
        }
        if let Some(c) = report.codim_generic_colon {
            let h_exact = eqs.spec.is_constant() || c <= eqs.spec.at(eqs.big_r() as usize);
            if h_exact != v.h_ok {
                failures.push(format!("exact generic colon codim {c} disagrees with h_membership"));
            }
        }
        if v.h_ok && v.oracle_ok != v.conductor_k_rational {
            failures.push(format!(
                "on H: oracle {} but k-rational conductor {}",
                v.oracle_ok, v.conductor_k_rational
            ));
        }
        if has_f && v.h_ok && v.oracle_ok != v.fquad_ok {
            failures.push(format!("on H: oracle {} but Fquad {}", v.oracle_ok, v.fquad_ok));
        }
    }
    if !failures.is_empty() {
        let dump = serde_json::to_string_pretty(&report).unwrap_or_default();
        return Err(MembershipError::InconsistencyDetected { failures, dump });
    }
    Ok(report)
}

/// Checks `(I:L) = (I:S₁)` exactly and `(I:ℓ) = (I:S₁)` for random `ℓ`,
/// all of codimension `p(R)`.
pub fn conductor_chain_holds(i_r1: &GradedSubspace, expected_codim: usize, draws: usize, seed: u64) -> bool {
    let s1 = colon_by_s1(i_r1);
    if s1.codim() != expected_codim {
        return false;
    }
    let gc = generic_colon(i_r1);
    match &gc.rational {
        Some(r) if r == &s1 => {}
        _ => return false,
    }
    let field = i_r1.field();
    let mut rng = SeededRng::derived(seed, "conductor-chain");
    let mut done = 0;
    let mut attempts = 0;
    while done < draws && attempts < 50 * draws {
        attempts += 1;
        let form: Vec<FieldElement> = (0..=i_r1.n()).map(|_| rng.field_element(field)).collect();
        if form.iter().all(FieldElement::is_zero) {
            continue;
        }
        let c = colon_by_linear(i_r1, &form).expect("nonzero form");
        // a special ℓ may have a larger conductor; the generic one is contained in it
        if !s1.is_subspace_of(&c) {
            return false;
        }
        if c.codim() == expected_codim {
            if c != s1 {
                return false;
            }
            done += 1;
        }
    }
    done == draws
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Field;
    use crate::grassmann::PluckerIndex;
    use crate::macaulay::parse_hilbert_polynomial;
    use crate::polyring::{ideal_degree_piece, parse_generators, Monomial};

    fn piece(n: usize, gens: &str, d: u32, field: Field) -> GradedSubspace {
        ideal_degree_piece(n, &parse_generators(gens, n).unwrap(), d, field).unwrap()
    }

    fn mono_space(n: usize, d: u32, monos: &[&[u32]]) -> GradedSubspace {
        let ms: Vec<Monomial> = monos.iter().map(|m| Monomial(m.to_vec())).collect();
        GradedSubspace::from_monomials(n, d, Field::Rational, &ms)
    }

    fn bad_cubic() -> GradedSubspace {
        mono_space(2, 3, &[&[3, 0, 0], &[0, 3, 0], &[0, 0, 3], &[2, 1, 0], &[2, 0, 1]])
    }

    fn bundle(poly: &str, n: usize, big_r: u32) -> EquationBundle {
        EquationBundle::generate(&parse_hilbert_polynomial(poly).unwrap(), n, big_r, 50, 7).unwrap()
    }

    #[test]
    fn oracle_line_and_point() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let i3 = piece(2, "x0*x2, x1*x2", 3, Field::Rational);
        let o = gotzmann_oracle(&i3, &spec, 2, false).unwrap();
        assert!(o.member);
        assert_eq!((o.codim_i, o.codim_colon), (5, 4));
    }

    #[test]
    fn oracle_rejects_bad_cubic() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let o = gotzmann_oracle(&bad_cubic(), &spec, 2, false).unwrap();
        assert!(!o.member);
        assert_eq!(o.codim_colon, 5);
    }

    #[test]
    fn oracle_below_gotzmann_needs_override() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let i2 = mono_space(2, 2, &[&[2, 0, 0], &[0, 2, 0]]);
        assert!(matches!(
            gotzmann_oracle(&i2, &spec, 1, false),
            Err(MembershipError::BelowGotzmann { .. })
        ));
        let o = gotzmann_oracle(&i2, &spec, 1, true).unwrap();
        assert!(o.member);
        assert_eq!((o.codim_i, o.codim_colon), (4, 3));
    }

    #[test]
    fn h_membership_examples() {
        let spec = parse_hilbert_polynomial("t+2").unwrap();
        let i2 = mono_space(2, 2, &[&[2, 0, 0], &[0, 2, 0]]);
        assert!(h_membership(&i2, &spec, 1).unwrap());
        assert_eq!(generic_colon_codim(&i2), 3);
        let constant = parse_hilbert_polynomial("2").unwrap();
        let w = mono_space(2, 3, &[&[3, 0, 0]]);
        assert!(matches!(
            h_membership(&w, &constant, 2),
            Err(MembershipError::WrongCodimension { .. })
        ));
        let any = GradedSubspace::from_monomials(
            2,
            3,
            Field::Rational,
            &crate::polyring::monomial_basis(2, 3)[2..],
        );
        assert!(h_membership(&any, &constant, 2).unwrap());
    }

    #[test]
    fn verdicts_for_member_and_nonmember() {
        let eqs = bundle("t+2", 2, 2);
        let member = Point::Subspace(piece(2, "x0*x2, x1*x2", 3, Field::Rational));
        let r = cross_check(&member, &eqs).unwrap();
        let v = &r.verdict;
        assert!(v.decomposable && v.codim_ok && v.e_ok && v.fquad_ok && v.oracle_ok && v.h_ok && v.conductor_k_rational);
        assert!(v.certificates.is_empty());

        let bad = cross_check(&Point::Subspace(bad_cubic()), &eqs).unwrap();
        assert!(!bad.verdict.oracle_ok);
        assert!(!bad.verdict.e_ok || !bad.verdict.fquad_ok);
        assert!(bad
            .verdict
            .certificates
            .iter()
            .any(|c| matches!(c, Certificate::Linear { .. } | Certificate::CrossQuadric { .. })));
    }

    #[test]
    fn raw_vector_paths() {
        let eqs = bundle("t+2", 2, 2);
        let w = piece(2, "x0*x2, x1*x2", 3, Field::Rational);
        let v = plucker_from_subspace(&w, 5).unwrap().scaled(&Field::Rational.from_i64(-3));
        let raw = PluckerVector::raw(v.n, v.d, v.r, v.field, v.nonzero().map(|(k, x)| (k.clone(), x.clone()))).unwrap();
        let r = cross_check(&Point::Raw(raw), &eqs).unwrap();
        assert!(r.verdict.oracle_ok && r.equation_member);

        // P_{0,1,2,3,4} = P_{0,1,2,5,6} = 1 is not decomposable
        let q = Field::Rational;
        let nd = PluckerVector::raw(
            2,
            3,
            5,
            q,
            [
                (PluckerIndex(vec![0, 1, 2, 3, 4]), q.one()),
                (PluckerIndex(vec![0, 1, 2, 5, 6]), q.one()),
            ],
        )
        .unwrap();
        let r = cross_check(&Point::Raw(nd), &eqs).unwrap();
        assert!(!r.verdict.decomposable && !r.verdict.oracle_ok && !r.equation_member);
        assert!(matches!(r.verdict.certificates[0], Certificate::NotDecomposable { .. }));
    }

    #[test]
    fn wrong_codimension_is_reported_not_raised() {
        let eqs = bundle("t+2", 2, 2);
        let w = mono_space(2, 3, &[&[3, 0, 0]]);
        let r = cross_check(&Point::Subspace(w), &eqs).unwrap();
        assert!(!r.verdict.codim_ok && !r.verdict.oracle_ok);
    }

    #[test]
    fn conductor_chain_on_members() {
        for (gens, f) in [("x0*x2, x1*x2", Field::Rational), ("x1*x2, x2^2", Field::prime(1000003).unwrap())] {
            let i3 = piece(2, gens, 3, f);
            assert!(conductor_chain_holds(&i3, 4, 5, 11));
        }
        assert!(!conductor_chain_holds(&bad_cubic(), 4, 5, 11));
    }

    #[test]
    fn finite_field_points_agree() {
        let eqs = bundle("t+2", 2, 2);
        for p in [2u64, 3] {
            let f = Field::prime(p).unwrap();
            let member = piece(2, "x0*x1, x0*x2", 3, f);
            assert!(cross_check(&Point::Subspace(member), &eqs).unwrap().verdict.oracle_ok);
        }
    }

    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn shared_bundle() -> &'static EquationBundle {
        static B: OnceLock<EquationBundle> = OnceLock::new();
        B.get_or_init(|| bundle("t+2", 2, 2))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        // random points, points of H, and translated members all satisfy the
        // agreement rules, over ℚ and small prime fields
        #[test]
        fn routes_agree_on_random_points(seed in any::<u64>(), kind in 0u8..3, p in prop::sample::select(vec![0u64, 5, 7, 1000003])) {
            let field = if p == 0 { Field::Rational } else { Field::prime(p).unwrap() };
            let spec = parse_hilbert_polynomial("t+2").unwrap();
            let mut rng = SeededRng::new(seed);
            let w = match kind {
                0 => crate::corpus::random_nonmember(&spec, 2, 2, field, seed).ok().map(|x| x.0),
                1 => crate::corpus::h_candidate(&spec, 2, 2, field, &mut rng),
                _ => {
                    let gens = parse_generators("x1*x2, x2^2", 2).unwrap();
                    let pair = crate::corpus::point_from_generators(2, &gens, 2, field).unwrap();
                    crate::corpus::gl_translate(&pair, seed).ok().map(|x| x.1)
                }
            };
            prop_assume!(w.is_some());
            let r = cross_check(&Point::Subspace(w.unwrap()), shared_bundle());
            prop_assert!(r.is_ok(), "{:?}", r.err());
            let v = r.unwrap().verdict;
            prop_assert_eq!(v.e_ok, v.h_ok);
            if kind == 2 {
                prop_assert!(v.oracle_ok && v.fquad_ok && v.conductor_k_rational);
            }
        }
    }
}
