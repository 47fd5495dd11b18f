//! `hilbeq`: equations, membership checks, quiver data and corpora for Hilbert
//! schemes of projective space.
//!
//! Exit codes: 0 success, 1 point is not a member, 2 input error, 3 the
//! equation and oracle verdicts disagree.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hilbeq_core::acceptance::{self, Level};
use hilbeq_core::corpus::{self, CorpusPoint, CorpusSpec, Counts};
use hilbeq_core::equations::{EquationFile, EquationSet, ExportOptions, Include};
use hilbeq_core::exactalg::Field;
use hilbeq_core::grassmann::{plucker_from_subspace, PluckerVector, PluckerVectorJson};
use hilbeq_core::macaulay::{macaulay_upper, parse_hilbert_polynomial, HilbertPolynomialSpec};
use hilbeq_core::membership::{
    cross_check, full_verdict, gotzmann_oracle, CrossCheckReport, EquationBundle, MembershipError, Point,
};
use hilbeq_core::polyring::{ideal_degree_piece, parse_generators, GradedSubspace};
use hilbeq_core::quiver::build_for_spec;

#[derive(Parser)]
#[command(name = "hilbeq", version, about = "Plücker-coordinate equations for Hilbert schemes of projective space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gotzmann decomposition of a Hilbert polynomial.
    Gotzmann {
        #[arg(long)]
        poly: String,
    },
    /// Writes the linear and quadratic equations to a file.
    GenEquations(GenArgs),
    /// Verdict for the ideal generated by the given forms.
    CheckIdeal(CheckIdealArgs),
    /// Verdict for a raw Plücker vector.
    CheckPoint(CheckPointArgs),
    /// Colon criterion only.
    Oracle(IdealArgs),
    /// Quiver representation of a point, with its validation report.
    Quiver(IdealArgs),
    /// Generates a corpus of member and nonmember points.
    Corpus(CorpusArgs),
    /// Runs acceptance criteria A1–A9.
    Selftest {
        #[arg(long, default_value = "quick")]
        level: String,
        /// Comma-separated criterion ids, e.g. `A2,A5`.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Args)]
struct Target {
    /// Number of variables minus one.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    poly: String,
    /// Degree `R`; defaults to the Gotzmann number.
    #[arg(long = "R")]
    big_r: Option<u32>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = "plucker,E,Fquad")]
    include: String,
    #[arg(long, default_value_t = 100)]
    sample_quadrics: usize,
    #[arg(long, default_value_t = 200)]
    sample_plucker: usize,
    /// Export every cross quadric instead of a sample.
    #[arg(long)]
    full_quadrics: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IdealArgs {
    #[command(flatten)]
    target: Target,
    /// Comma-separated homogeneous generators, e.g. `x0*x2, x1*x2`.
    #[arg(long)]
    gens: String,
    /// `Q` or `Fp:<prime>`.
    #[arg(long, default_value = "Q")]
    field: String,
    #[arg(long)]
    allow_below_gotzmann: bool,
}

#[derive(Args)]
struct CheckIdealArgs {
    #[command(flatten)]
    ideal: IdealArgs,
    /// Equation file from `gen-equations`; generated on the fly when absent.
    #[arg(long)]
    eqs: Option<PathBuf>,
}

#[derive(Args)]
struct CheckPointArgs {
    #[arg(long)]
    point: PathBuf,
    #[arg(long)]
    eqs: Option<PathBuf>,
    /// Hilbert polynomial, required without `--eqs`.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct CorpusArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = "Q")]
    field: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `members_monomial,members_gl,nonmembers`.
    #[arg(long, default_value = "10,10,10")]
    counts: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(anyhow::Error),
    Inconsistent(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

type Outcome = Result<bool, Failure>;

const PLUCKER_SAMPLE: usize = 200;

fn main() -> ExitCode {
    hilbeq_core::parallel::init_from_env();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Inconsistent(msg)) => {
            eprintln!("inconsistency: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Gotzmann { poly } => gotzmann(&poly),
        Command::GenEquations(a) => gen_equations(a),
        Command::CheckIdeal(a) => check_ideal(a),
        Command::CheckPoint(a) => check_point(a),
        Command::Oracle(a) => oracle(a),
        Command::Quiver(a) => quiver(a),
        Command::Corpus(a) => corpus_cmd(a),
        Command::Selftest { level, only } => selftest(&level, only.as_deref()),
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_poly(s: &str) -> anyhow::Result<HilbertPolynomialSpec> {
    parse_hilbert_polynomial(s).with_context(|| format!("Hilbert polynomial {s:?}"))
}

fn parse_field(s: &str) -> anyhow::Result<Field> {
    s.parse::<Field>().map_err(|e| anyhow::anyhow!("field {s:?}: {e}"))
}

/// Resolves `R`, defaulting to the Gotzmann number.
fn resolve_r(spec: &HilbertPolynomialSpec, big_r: Option<u32>, allow_below: bool) -> anyhow::Result<u32> {
    let r = spec.gotzmann() as u32;
    let big_r = big_r.unwrap_or(r);
    if big_r < 1 {
        bail!("R must be at least 1");
    }
    if big_r < r && !allow_below {
        bail!("R = {big_r} is below the Gotzmann number {r}; pass --allow-below-gotzmann to override");
    }
    Ok(big_r)
}

fn gotzmann(poly: &str) -> Outcome {
    let spec = parse_poly(poly)?;
    let r = spec.gotzmann();
    let (pr, pr1) = (spec.at(r), spec.at(r + 1));
    let upper = macaulay_upper(pr as u64, r as u32);
    print_json(&json!({
        "poly": spec.to_string(),
        "decomposition": spec.decomposition(),
        "r": r,
        "p_r": pr.to_string(),
        "p_r1": pr1.to_string(),
        "p_r_upper": upper.to_string(),
        "persistence_holds": upper == pr1 as u128,
    }))?;
    Ok(true)
}

fn gen_equations(a: GenArgs) -> Outcome {
    let spec = parse_poly(&a.target.poly)?;
    let big_r = resolve_r(&spec, a.target.big_r, true)?;
    let include = Include::parse(&a.include).map_err(anyhow::Error::from)?;
    let set = EquationSet::generate(&spec, a.target.n, big_r, include).map_err(anyhow::Error::from)?;
    let file = set.export(
        &spec,
        &ExportOptions {
            include,
            sample_quadrics: a.sample_quadrics,
            sample_plucker: a.sample_plucker,
            full_quadrics: a.full_quadrics,
            seed: a.seed,
        },
    );
    write_json(&a.out, &file)?;
    let c = &file.meta.counts;
    eprintln!(
        "wrote {}: {} linear forms, {} F symbols, {} quadrics, {} Plücker relations",
        a.out.display(),
        c.linear,
        c.fsymbols,
        c.quadrics,
        c.plucker_relations
    );
    Ok(true)
}

fn ideal_point(a: &IdealArgs) -> anyhow::Result<(HilbertPolynomialSpec, u32, GradedSubspace)> {
    let spec = parse_poly(&a.target.poly)?;
    let big_r = resolve_r(&spec, a.target.big_r, a.allow_below_gotzmann)?;
    let field = parse_field(&a.field)?;
    let gens = parse_generators(&a.gens, a.target.n)?;
    let i_r1 = ideal_degree_piece(a.target.n, &gens, big_r + 1, field)?;
    Ok((spec, big_r, i_r1))
}

fn load_bundle(path: &Path) -> anyhow::Result<EquationBundle> {
    let file: EquationFile = read_json(path)?;
    Ok(EquationBundle::from_file(&file)?)
}

fn verdict_outcome(result: Result<CrossCheckReport, MembershipError>) -> Outcome {
    match result {
        Ok(report) => {
            print_json(&report).map_err(Failure::Input)?;
            Ok(report.verdict.oracle_ok && report.equation_member)
        }
        Err(MembershipError::InconsistencyDetected { failures, dump }) => {
            let _ = writeln!(std::io::stdout(), "{dump}");
            Err(Failure::Inconsistent(failures.join("; ")))
        }
        Err(e) => Err(Failure::Input(e.into())),
    }
}

fn check_ideal(a: CheckIdealArgs) -> Outcome {
    let (spec, big_r, i_r1) = ideal_point(&a.ideal)?;
    let n = a.ideal.target.n;
    let eqs = match &a.eqs {
        Some(p) => {
            let b = load_bundle(p)?;
            if b.n() != n || b.big_r() != big_r || b.spec != spec {
                return Err(Failure::Input(anyhow::anyhow!(
                    "equation file is for n={}, p={}, R={}",
                    b.n(),
                    b.spec,
                    b.big_r()
                )));
            }
            b
        }
        None => EquationBundle::generate(&spec, n, big_r, PLUCKER_SAMPLE, 0).map_err(anyhow::Error::from)?,
    };
    let point = Point::Subspace(i_r1);
    if (big_r as usize) < spec.gotzmann() {
        // below the Gotzmann number the two routes are not expected to agree
        return verdict_outcome(full_verdict(&point, &eqs, true));
    }
    verdict_outcome(cross_check(&point, &eqs))
}

fn check_point(a: CheckPointArgs) -> Outcome {
    let pj: PluckerVectorJson = read_json(&a.point)?;
    let v = PluckerVector::from_json(&pj).map_err(anyhow::Error::from)?;
    if v.d < 2 {
        return Err(Failure::Input(anyhow::anyhow!("point degree must be at least 2")));
    }
    let eqs = match (&a.eqs, &a.poly) {
        (Some(p), _) => load_bundle(p)?,
        (None, Some(poly)) => {
            let spec = parse_poly(poly)?;
            EquationBundle::generate(&spec, v.n, v.d - 1, PLUCKER_SAMPLE, 0).map_err(anyhow::Error::from)?
        }
        (None, None) => return Err(Failure::Input(anyhow::anyhow!("pass --eqs or --poly"))),
    };
    if eqs.n() != v.n || eqs.big_r() + 1 != v.d {
        return Err(Failure::Input(anyhow::anyhow!(
            "point lives in degree {} with n={}, equations expect degree {} with n={}",
            v.d,
            v.n,
            eqs.big_r() + 1,
            eqs.n()
        )));
    }
    let point = Point::Raw(v);
    if (eqs.big_r() as usize) < eqs.spec.gotzmann() {
        return verdict_outcome(full_verdict(&point, &eqs, true));
    }
    verdict_outcome(cross_check(&point, &eqs))
}

fn oracle(a: IdealArgs) -> Outcome {
    let (spec, big_r, i_r1) = ideal_point(&a)?;
    let o = gotzmann_oracle(&i_r1, &spec, big_r, a.allow_below_gotzmann).map_err(anyhow::Error::from)?;
    print_json(&json!({
        "member": o.member,
        "R": big_r,
        "codim_IR1": o.codim_i,
        "expected_IR1": o.expected_i,
        "codim_colon": o.codim_colon,
        "expected_colon": o.expected_colon,
    }))?;
    Ok(true)
}

fn quiver(a: IdealArgs) -> Outcome {
    let (spec, _, i_r1) = ideal_point(&a)?;
    let i_r = hilbeq_core::polyring::colon_by_s1(&i_r1);
    let q = match build_for_spec(&spec, &i_r, &i_r1) {
        Ok(q) => q,
        Err(e) => {
            print_json(&json!({ "error": e.to_string() }))?;
            return Ok(false);
        }
    };
    let report = q.validate();
    let (lo, hi) = q.plucker_via_minors().map_err(anyhow::Error::from)?;
    let lo_ok = plucker_from_subspace(&i_r, q.p_r()).is_ok_and(|v| v.proportional_to(&lo));
    let hi_ok = plucker_from_subspace(&i_r1, q.p_r1()).is_ok_and(|v| v.proportional_to(&hi));
    print_json(&json!({
        "quiver": q.to_json(),
        "validation": report,
        "plucker_agreement": { "R": lo_ok, "R+1": hi_ok },
    }))?;
    Ok(report.all_passed() && lo_ok && hi_ok)
}

fn corpus_cmd(a: CorpusArgs) -> Outcome {
    let spec = parse_poly(&a.target.poly)?;
    let big_r = resolve_r(&spec, a.target.big_r, false)?;
    let counts: Counts = a.counts.parse().map_err(anyhow::Error::from)?;
    let cs = CorpusSpec {
        n: a.target.n,
        spec,
        big_r,
        field: parse_field(&a.field)?,
        seed: a.seed,
        counts,
    };
    let points = corpus::generate(&cs).map_err(anyhow::Error::from)?;
    let records: Vec<_> = points.iter().map(CorpusPoint::to_record).collect();
    match &a.out {
        Some(p) => {
            write_json(p, &records)?;
            eprintln!("wrote {} points to {}", records.len(), p.display());
        }
        None => print_json(&records)?,
    }
    Ok(true)
}

fn selftest(level: &str, only: Option<&str>) -> Outcome {
    let level: Level = level.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let ids: Vec<String> = match only {
        Some(s) => s.split(',').map(|x| x.trim().to_uppercase()).collect(),
        None => acceptance::IDS.iter().map(|s| s.to_string()).collect(),
    };
    let mut all = true;
    for id in &ids {
        let Some(r) = acceptance::run(id, level) else {
            return Err(Failure::Input(anyhow::anyhow!("unknown criterion {id}")));
        };
        println!("{r}");
        all &= r.passed;
    }
    Ok(all)
}
