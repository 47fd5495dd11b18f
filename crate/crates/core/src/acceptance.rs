//! Acceptance criteria A1–A9, runnable from tests and from `hilbeq selftest`.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::corpus::{
    generate, h_candidate, random_gl, random_nonmember, CorpusPoint, CorpusSpec, Counts, Kind,
};
use crate::equations::{
    cross_quadric_residual, cross_quadrics_identically_zero, quadratic_from_json, EquationSet, ExportOptions, Include,
    FULL_QUADRIC_LIMIT,
};
use crate::exactalg::{Field, FieldElement};
use crate::grassmann::{plucker_from_subspace, PluckerIndex, PluckerVector, QuadraticForm};
use crate::macaulay::{macaulay_lower, macaulay_upper, parse_hilbert_polynomial, HilbertPolynomialSpec};
use crate::membership::{
    cross_check, equation_verdict, gotzmann_oracle, h_membership, Certificate, EquationBundle, Point,
};
use crate::polyring::{
    colon_by_s1, dim_s, generic_colon, hilbert_function, monomial_basis, parse_generators, product_with_s1,
    restriction_codim, GradedSubspace,
};
use crate::quiver::build_for_spec;
use crate::rng::SeededRng;

pub const LARGE_PRIME: u64 = 1_000_003;
const SEED: u64 = 20_240_601;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level {s:?}, expected quick or full")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<4} {:<28} {:>7.2}s  {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.detail
        )
    }
}

type Outcome = (bool, String);

fn timed(id: &'static str, title: &'static str, f: impl FnOnce() -> Outcome) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = f();
    CriterionReport {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub const IDS: [&str; 9] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"];

/// Runs one criterion by id.
pub fn run(id: &str, level: Level) -> Option<CriterionReport> {
    Some(match id {
        "A1" => timed("A1", "equivalence", || a1(level)),
        "A2" => timed("A2", "sharpness below r", a2),
        "A3" => timed("A3", "Hilb^1(P^1) conic", a3),
        "A4" => timed("A4", "constant polynomial", || a4(level)),
        "A5" => timed("A5", "Gotzmann persistence", a5),
        "A6" => timed("A6", "Macaulay and Green bounds", || a6(level)),
        "A7" => timed("A7", "quiver consistency", || a7(level)),
        "A8" => timed("A8", "conductor criterion", || a8(level)),
        "A9" => timed("A9", "field independence", a9),
        _ => return None,
    })
}

pub fn run_all(level: Level) -> Vec<CriterionReport> {
    IDS.iter().map(|id| run(id, level).expect("known id")).collect()
}

fn t_plus_2() -> HilbertPolynomialSpec {
    parse_hilbert_polynomial("t+2").expect("valid polynomial")
}

fn fp(p: u64) -> Field {
    Field::prime(p).expect("prime")
}

/// The A1 corpus: monomial and coordinate-changed members over ℚ and 𝔽_q, and random nonmembers.
pub fn a1_corpus(level: Level) -> Vec<CorpusPoint> {
    let scale = if level == Level::Full { 2 } else { 1 };
    let spec = t_plus_2();
    let mut points = Vec::new();
    for (field, gl, non) in [(Field::Rational, 20, 25), (fp(LARGE_PRIME), 25, 25)] {
        let cs = CorpusSpec {
            n: 2,
            spec: spec.clone(),
            big_r: 2,
            field,
            seed: SEED,
            counts: Counts {
                members_monomial: if field == Field::Rational { usize::MAX } else { 0 },
                members_gl: gl * scale,
                nonmembers: non * scale,
            },
        };
        points.extend(generate(&cs).expect("corpus generation"));
    }
    points
}

fn has_equation_certificate(certs: &[Certificate]) -> bool {
    certs
        .iter()
        .any(|c| matches!(c, Certificate::Linear { .. } | Certificate::CrossQuadric { .. }))
}

/// Cross-checks every point; returns (members ok, nonmembers ok, failure messages).
fn check_points(points: &[CorpusPoint], eqs: &EquationBundle, require_all_true: bool) -> (usize, usize, Vec<String>) {
    let results: Vec<Result<bool, String>> = points
        .par_iter()
        .enumerate()
        .map(|(k, p)| {
            let report = cross_check(&Point::Subspace(p.i_r1.clone()), eqs).map_err(|e| format!("point {k}: {e}"))?;
            let v = &report.verdict;
            match p.kind {
                Kind::Member => {
                    let all = v.decomposable && v.codim_ok && v.e_ok && v.fquad_ok && v.oracle_ok && v.h_ok;
                    if !all || (require_all_true && !v.conductor_k_rational) {
                        return Err(format!("member {k} ({:?}) verdict {v:?}", p.source));
                    }
                    if report.subspace.as_ref().map(colon_by_s1).as_ref() != p.i_r.as_ref() {
                        return Err(format!("member {k}: (I:S1) differs from I_R"));
                    }
                }
                Kind::Nonmember => {
                    if v.oracle_ok || report.equation_member || !has_equation_certificate(&v.certificates) {
                        return Err(format!("nonmember {k} verdict {v:?}"));
                    }
                }
            }
            Ok(p.kind == Kind::Member)
        })
        .collect();
    let mut members = 0;
    let mut non = 0;
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(true) => members += 1,
            Ok(false) => non += 1,
            Err(e) => failures.push(e),
        }
    }
    (members, non, failures)
}

fn summarize(members: usize, non: usize, min_each: usize, failures: &[String]) -> Outcome {
    let ok = failures.is_empty() && members >= min_each && non >= min_each;
    let mut detail = format!("{members} members, {non} nonmembers, {} inconsistencies", failures.len());
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first: {f}"));
    }
    (ok, detail)
}

pub fn a1(level: Level) -> Outcome {
    let spec = t_plus_2();
    let eqs = match EquationBundle::generate(&spec, 2, 2, 200, SEED) {
        Ok(e) => e,
        Err(e) => return (false, e.to_string()),
    };
    if eqs.plucker.len() < 200 {
        return (false, format!("only {} Plücker relations sampled", eqs.plucker.len()));
    }
    let points = a1_corpus(level);
    let (m, n, failures) = check_points(&points, &eqs, true);
    let (ok, detail) = summarize(m, n, 50, &failures);
    (
        ok,
        format!(
            "{detail}; {} E forms, {} Plücker relations",
            eqs.set.linear.as_ref().map_or(0, Vec::len),
            eqs.plucker.len()
        ),
    )
}

pub fn a2() -> Outcome {
    let spec = t_plus_2();
    let set = match EquationSet::generate(&spec, 2, 1, Include::default()) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let lin = set.linear.as_ref().expect("E requested");
    let e_zero = lin.is_empty() && set.linear_report.identically_zero == set.linear_report.generated;
    let table = set.ftable.as_ref().expect("F requested");
    let f_zero = cross_quadrics_identically_zero(table, FULL_QUADRIC_LIMIT) == Some(true);

    let q = Field::Rational;
    let gens = parse_generators("x0^2, x1^2", 2).expect("generators");
    let i2 = crate::polyring::ideal_degree_piece(2, &gens, 2, q).expect("piece");
    let eqs = EquationBundle {
        spec: spec.clone(),
        set,
        plucker: crate::grassmann::plucker_relations_sample(2, 2, spec.at(2), 200, SEED),
    };
    let v = equation_verdict(&Point::Subspace(i2.clone()), &eqs);
    let oracle = gotzmann_oracle(&i2, &spec, 1, true).expect("override");
    let hf: Vec<usize> = (4..=8)
        .map(|d| hilbert_function(2, &gens, d, q).expect("hilbert function"))
        .collect();
    let constant_four = hf.iter().all(|&h| h == 4);
    let differs = (4..=8).all(|d| spec.at(d) != 4);
    let ok = e_zero && f_zero && v.equation_member() && oracle.member && constant_four && differs;
    (
        ok,
        format!(
            "E identically zero: {e_zero} ({} generated), F quadrics identically zero: {f_zero}; \
             witness (x0^2,x1^2): equations {}, pair check {}, HF(4..8) = {hf:?}",
            eqs.set.linear_report.generated,
            v.equation_member(),
            oracle.member
        ),
    )
}

pub fn a3() -> Outcome {
    let spec = parse_hilbert_polynomial("1").expect("valid");
    let q = Field::Rational;
    let set = match EquationSet::generate(&spec, 1, 1, Include::parse("Fquad").expect("include")) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let file = set.export(
        &spec,
        &ExportOptions {
            include: Include::parse("Fquad").expect("include"),
            full_quadrics: true,
            ..ExportOptions::default()
        },
    );
    let mut forms: Vec<QuadraticForm> = file
        .quadrics
        .iter()
        .filter_map(|j| quadratic_from_json(&set.ctx, j).ok())
        .map(|f| f.sign_normalized())
        .filter(|f| !f.is_zero())
        .collect();
    forms.sort();
    forms.dedup();
    let p = |i: u32| PluckerIndex(vec![i]);
    let expected = QuadraticForm::from_terms([(1, p(0), p(2)), (-1, p(1), p(1))]).sign_normalized();
    let closed_form = forms.len() == 1 && forms[0] == expected;

    let eqs = EquationBundle::generate(&spec, 1, 1, 0, SEED).expect("equations");
    let mut rng = SeededRng::derived(SEED, "a3");
    let raw = |c: [FieldElement; 3]| {
        PluckerVector::raw(1, 2, 1, q, (0..3).map(|i| (p(i), c[i as usize].clone()))).expect("nonzero")
    };
    let mut conic_pass = 0;
    while conic_pass < 20 {
        let (a, b) = (rng.range_i64(-9, 9), rng.range_i64(-9, 9));
        if a == 0 && b == 0 {
            continue;
        }
        let v = raw([q.from_i64(a * a), q.from_i64(a * b), q.from_i64(b * b)]);
        match cross_check(&Point::Raw(v), &eqs) {
            Ok(r) if r.equation_member && r.verdict.oracle_ok => conic_pass += 1,
            other => return (false, format!("conic point ({a},{b}) rejected: {:?}", other.map(|r| r.verdict))),
        }
    }
    let mut off_fail = 0;
    while off_fail < 20 {
        let c = [rng.range_i64(-9, 9), rng.range_i64(-9, 9), rng.range_i64(-9, 9)];
        if c[0] * c[2] == c[1] * c[1] {
            continue;
        }
        let v = raw(c.map(|x| q.from_i64(x)));
        match cross_check(&Point::Raw(v), &eqs) {
            Ok(r) if !r.equation_member && !r.verdict.oracle_ok => off_fail += 1,
            other => return (false, format!("point {c:?} accepted: {:?}", other.map(|r| r.verdict))),
        }
    }
    (
        closed_form,
        format!(
            "{} distinct quadric(s) from {} exported, closed form matches: {closed_form}; \
             {conic_pass} conic points pass, {off_fail} others fail",
            forms.len(),
            file.quadrics.len()
        ),
    )
}

pub fn a4(level: Level) -> Outcome {
    let spec = parse_hilbert_polynomial("2").expect("valid");
    let eqs = match EquationBundle::generate(&spec, 2, 2, 200, SEED) {
        Ok(e) => e,
        Err(e) => return (false, e.to_string()),
    };
    let e_empty = eqs.set.linear.as_ref().is_some_and(Vec::is_empty);
    let scale = if level == Level::Full { 2 } else { 1 };
    let mut points = Vec::new();
    for (field, gl, non) in [(Field::Rational, 10, 15), (fp(LARGE_PRIME), 15, 15)] {
        let cs = CorpusSpec {
            n: 2,
            spec: spec.clone(),
            big_r: 2,
            field,
            seed: SEED ^ 4,
            counts: Counts {
                members_monomial: if field == Field::Rational { usize::MAX } else { 0 },
                members_gl: gl * scale,
                nonmembers: non * scale,
            },
        };
        match generate(&cs) {
            Ok(p) => points.extend(p),
            Err(e) => return (false, e.to_string()),
        }
    }
    let (m, n, failures) = check_points(&points, &eqs, true);
    let (ok, detail) = summarize(m, n, 30, &failures);
    (ok && e_empty, format!("E empty: {e_empty}; {detail}"))
}

/// Admissible decompositions `a₁ ≥ … ≥ a_r ≥ 0` with `a₁ ≤ 2`, `r ≤ 5`.
fn small_decompositions() -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(prefix: &mut Vec<u32>, max: u32, out: &mut Vec<Vec<u32>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if prefix.len() == 5 {
            return;
        }
        for a in 0..=max {
            prefix.push(a);
            rec(prefix, a, out);
            prefix.pop();
        }
    }
    rec(&mut Vec::new(), 2, &mut out);
    out
}

pub fn a5() -> Outcome {
    let decomps = small_decompositions();
    let mut checked = 0;
    let mut violations = Vec::new();
    for a in &decomps {
        let spec = HilbertPolynomialSpec::from_decomposition(a.clone()).expect("admissible");
        let r = spec.gotzmann();
        for big_r in r..=r + 5 {
            checked += 1;
            let lhs = spec.at(big_r + 1) as u128;
            let rhs = macaulay_upper(spec.at(big_r) as u64, big_r as u32);
            if lhs != rhs {
                violations.push(format!("{spec} at R={big_r}: {lhs} != {rhs}"));
            }
        }
    }
    (
        violations.is_empty() && decomps.len() >= 20,
        format!(
            "{} polynomials, {checked} (p, R) pairs, {} violations{}",
            decomps.len(),
            violations.len(),
            violations.first().map(|v| format!("; first: {v}")).unwrap_or_default()
        ),
    )
}

pub fn a6(level: Level) -> Outcome {
    let field = fp(LARGE_PRIME);
    let trials = if level == Level::Full { 3000 } else { 1000 };
    let results: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::derived(SEED, &format!("a6-{t}"));
            let n = 1 + rng.below(3) as usize;
            let d = 1 + rng.below(4) as u32;
            let big_n = dim_s(n, d);
            let dim = rng.below(big_n as u64 + 1) as usize;
            let vectors: Vec<Vec<FieldElement>> = (0..dim)
                .map(|_| (0..big_n).map(|_| rng.field_element(field)).collect())
                .collect();
            let w = GradedSubspace::from_vectors(n, d, field, &vectors);
            let c = w.codim() as u64;
            let macaulay_ok = product_with_s1(&w).codim() as u128 <= macaulay_upper(c, d);
            let general = (0..5)
                .filter_map(|_| {
                    let l: Vec<FieldElement> = (0..=n).map(|_| rng.field_element(field)).collect();
                    restriction_codim(&w, &l).ok()
                })
                .min()
                .unwrap_or(usize::MAX);
            let green_ok = general as u128 <= macaulay_lower(c, d);
            (macaulay_ok, green_ok)
        })
        .collect();
    let mac = results.iter().filter(|r| !r.0).count();
    let green = results.iter().filter(|r| !r.1).count();
    (
        mac == 0 && green == 0,
        format!("{trials} subspaces, {mac} Macaulay violations, {green} Green violations"),
    )
}

pub fn a7(level: Level) -> Outcome {
    let spec = t_plus_2();
    let members: Vec<CorpusPoint> = a1_corpus(level).into_iter().filter(|p| p.kind == Kind::Member).collect();
    let failures: Vec<String> = members
        .par_iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let i_r = p.i_r.as_ref().expect("member has I_R");
            let q = match build_for_spec(&spec, i_r, &p.i_r1) {
                Ok(q) => q,
                Err(e) => return Some(format!("member {k}: {e}")),
            };
            let report = q.validate();
            if !report.all_passed() {
                return Some(format!("member {k}: {:?}", report.failures()));
            }
            let (lo, hi) = match q.plucker_via_minors() {
                Ok(x) => x,
                Err(e) => return Some(format!("member {k}: {e}")),
            };
            let lo_ref = plucker_from_subspace(i_r, spec.at(2)).expect("codim");
            let hi_ref = plucker_from_subspace(&p.i_r1, spec.at(3)).expect("codim");
            if !lo.proportional_to(&lo_ref) || !hi.proportional_to(&hi_ref) {
                return Some(format!("member {k}: minors disagree with subspace coordinates"));
            }
            let mut rng = SeededRng::derived(SEED, &format!("a7-{k}"));
            for _ in 0..10 {
                let g = random_gl(q.p_r() - 1, q.field(), &mut rng).expect("invertible draw");
                let h = random_gl(q.p_r1() - 1, q.field(), &mut rng).expect("invertible draw");
                let moved = match q.act(&g, &h) {
                    Ok(m) => m,
                    Err(e) => return Some(format!("member {k}: {e}")),
                };
                if !moved.validate().all_passed() || moved.kernel_ideal() != q.kernel_ideal() {
                    return Some(format!("member {k}: action changed the point"));
                }
            }
            None
        })
        .collect();
    (
        failures.is_empty() && !members.is_empty(),
        format!(
            "{} members, {} failures{}",
            members.len(),
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

pub fn a8(level: Level) -> Outcome {
    let spec = t_plus_2();
    let members: Vec<CorpusPoint> = a1_corpus(level).into_iter().filter(|p| p.kind == Kind::Member).collect();
    let member_failures: Vec<String> = members
        .par_iter()
        .enumerate()
        .filter_map(|(k, p)| {
            let g = generic_colon(&p.i_r1);
            let expected = p.i_r.as_ref().expect("member has I_R");
            let ok = g.codim == spec.at(2)
                && g.k_rational
                && g.rational.as_ref() == Some(&colon_by_s1(&p.i_r1))
                && g.rational.as_ref() == Some(expected);
            (!ok).then(|| format!("member {k}: codim {}, k-rational {}", g.codim, g.k_rational))
        })
        .collect();

    let eqs = EquationBundle::generate(&spec, 2, 2, 0, SEED).expect("equations");
    let mut rng = SeededRng::derived(SEED, "a8-h");
    let mut found = Vec::new();
    let draws = 500;
    for _ in 0..draws {
        if found.len() == 10 {
            break;
        }
        let Some(w) = h_candidate(&spec, 2, 2, Field::Rational, &mut rng) else { continue };
        let v = plucker_from_subspace(&w, spec.at(3)).expect("codim");
        if eqs.set.first_failing_linear(&v).expect("dims").is_some() {
            continue;
        }
        if gotzmann_oracle(&w, &spec, 2, false).expect("R ≥ r").member {
            continue;
        }
        found.push((w, v));
    }
    let h_failures: Vec<String> = found
        .par_iter()
        .enumerate()
        .filter_map(|(k, (w, v))| {
            let g = generic_colon(w);
            let fm = eqs.set.f_matrix(v).expect("dims").expect("F table");
            let rank_two = cross_quadric_residual(&fm).is_err();
            let in_h = h_membership(w, &spec, 2).expect("codim");
            (g.k_rational || !rank_two || !in_h || g.codim != spec.at(2))
                .then(|| format!("H point {k}: k-rational {}, F rank ≥ 2 {rank_two}, in H {in_h}", g.k_rational))
        })
        .collect();
    let ok = member_failures.is_empty() && h_failures.is_empty() && !found.is_empty();
    (
        ok,
        format!(
            "{} members ({} failures); {} points of H off the Hilbert scheme in ≤ {draws} draws ({} failures){}",
            members.len(),
            member_failures.len(),
            found.len(),
            h_failures.len(),
            member_failures
                .first()
                .or(h_failures.first())
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

/// All monomial subspaces of codimension `p(R+1)` in `S_{R+1}`, plus random nonmembers.
fn monomial_subcorpus(spec: &HilbertPolynomialSpec, n: usize, big_r: u32, field: Field) -> Vec<CorpusPoint> {
    use itertools::Itertools;
    let basis = monomial_basis(n, big_r + 1);
    let keep = basis.len() - spec.at(big_r as usize + 1);
    let mut points: Vec<CorpusPoint> = basis
        .iter()
        .cloned()
        .combinations(keep)
        .map(|ms| {
            let w = GradedSubspace::from_monomials(n, big_r + 1, field, &ms);
            let o = gotzmann_oracle(&w, spec, big_r, false).expect("R ≥ r");
            CorpusPoint {
                kind: if o.member { Kind::Member } else { Kind::Nonmember },
                source: crate::corpus::Source::Catalog,
                i_r: o.member.then_some(o.colon),
                i_r1: w,
            }
        })
        .collect();
    for i in 0..10u64 {
        if let Ok((w, _)) = random_nonmember(spec, n, big_r, field, SEED + i) {
            points.push(CorpusPoint {
                kind: Kind::Nonmember,
                source: crate::corpus::Source::Random,
                i_r: None,
                i_r1: w,
            });
        }
    }
    points
}

pub fn a9() -> Outcome {
    let spec = t_plus_2();
    let eqs = EquationBundle::generate(&spec, 2, 2, 200, SEED).expect("equations");
    let mut details = Vec::new();
    let mut ok = true;
    for p in [2, 3, LARGE_PRIME] {
        let points = monomial_subcorpus(&spec, 2, 2, fp(p));
        let (m, n, failures) = check_points(&points, &eqs, true);
        ok &= failures.is_empty() && m > 0 && n > 0;
        details.push(format!(
            "F_{p}: {m} members, {n} nonmembers, {} inconsistencies{}",
            failures.len(),
            failures.first().map(|f| format!(" ({f})")).unwrap_or_default()
        ));
    }
    (ok, details.join("; "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_family_is_large_enough() {
        let d = small_decompositions();
        assert!(d.len() >= 20);
        assert!(d.iter().all(|a| HilbertPolynomialSpec::from_decomposition(a.clone()).is_ok()));
    }

    #[test]
    fn level_parsing() {
        assert_eq!("quick".parse::<Level>().unwrap(), Level::Quick);
        assert!("medium".parse::<Level>().is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        for id in ["A2", "A3", "A5"] {
            let r = run(id, Level::Quick).unwrap();
            assert!(r.passed, "{r}");
        }
    }
}
