use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn hilbeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbeq"))
        .args(args)
        .output()
        .expect("run hilbeq")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const MEMBER: &str = "x0*x2, x1*x2";
const NONMEMBER: &str = "x0^3, x1^3, x2^3, x0^2*x1, x0^2*x2";

#[test]
fn gotzmann_line_and_point() {
    let out = hilbeq(&["gotzmann", "--poly", "t+2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["r"], 2);
    assert_eq!(v["decomposition"], json!([1, 0]));
    assert_eq!(v["p_r"], "4");
    assert_eq!(v["p_r1"], "5");
    assert_eq!(v["persistence_holds"], true);
}

#[test]
fn oracle_reports_codims() {
    let out = hilbeq(&["oracle", "--n", "2", "--poly", "t+2", "--gens", MEMBER]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["member"], true);
    assert_eq!((v["codim_IR1"].as_u64(), v["codim_colon"].as_u64()), (Some(5), Some(4)));

    let out = hilbeq(&["oracle", "--n", "2", "--poly", "t+2", "--gens", NONMEMBER]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["member"], false);
    assert_eq!(v["codim_colon"], 5);
}

#[test]
fn check_ideal_exit_codes() {
    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--gens", MEMBER]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"]["oracle_ok"], true);

    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--gens", NONMEMBER]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["oracle_ok"], false);
    assert!(!v["verdict"]["certificates"].as_array().unwrap().is_empty());

    for bad in [
        vec!["check-ideal", "--n", "2", "--poly", "t+", "--gens", MEMBER],
        vec!["check-ideal", "--n", "2", "--poly", "t+2", "--gens", "x0*x3"],
        vec!["check-ideal", "--n", "2", "--poly", "t+2", "--R", "1", "--gens", MEMBER],
        vec!["check-ideal", "--n", "2", "--poly", "t+2", "--gens", MEMBER, "--field", "Fp:4"],
    ] {
        assert_eq!(code(&hilbeq(&bad)), 2, "{bad:?}");
    }
}

#[test]
fn below_gotzmann_witness_passes_with_override() {
    let out = hilbeq(&[
        "check-ideal",
        "--n",
        "2",
        "--poly",
        "t+2",
        "--R",
        "1",
        "--allow-below-gotzmann",
        "--gens",
        "x0^2, x1^2",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["equation_member"], true);
    assert_eq!(v["verdict"]["oracle_ok"], true);
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec!["gen-equations", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = hilbeq(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn equation_files_are_deterministic_and_usable() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--n", "2", "--poly", "t+2", "--seed", "17", "--sample-quadrics", "30"];
    let a = gen(dir.path(), "a.json", &args);
    let b = gen(dir.path(), "b.json", &args);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let file: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(file["meta"]["R"], 2);
    assert_eq!(file["quadrics"].as_array().unwrap().len(), 30);

    let eqs = a.to_str().unwrap();
    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--gens", MEMBER, "--eqs", eqs]);
    assert_eq!(code(&out), 0);
    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--gens", NONMEMBER, "--eqs", eqs]);
    assert_eq!(code(&out), 1);
    // a file for another degree is an input error
    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--R", "3", "--gens", MEMBER, "--eqs", eqs]);
    assert_eq!(code(&out), 2);
}

#[test]
fn tampered_equations_trigger_inconsistency() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "e.json", &["--n", "2", "--poly", "t+2"]);
    let mut file: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    // the coordinate on the standard monomials of (x0*x2, x1*x2) is nonzero there
    file["linear"] = json!([{ "terms": [{ "c": "1", "idx": [[3,0,0],[2,1,0],[1,2,0],[0,3,0],[0,0,3]] }] }]);
    std::fs::write(&path, serde_json::to_vec(&file).unwrap()).unwrap();
    let out = hilbeq(&["check-ideal", "--n", "2", "--poly", "t+2", "--gens", MEMBER, "--eqs", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

fn point_file(dir: &Path, name: &str, vals: [i64; 3]) -> String {
    let coords: Vec<Value> = [[2, 0], [1, 1], [0, 2]]
        .iter()
        .zip(vals)
        .filter(|(_, v)| *v != 0)
        .map(|(e, v)| json!({ "idx": [e], "val": v.to_string() }))
        .collect();
    let p = dir.join(name);
    let body = json!({ "n": 1, "d": 2, "r": 1, "field": "Q", "coords": coords });
    std::fs::write(&p, body.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_point_on_the_conic() {
    let dir = tempfile::tempdir().unwrap();
    let on = point_file(dir.path(), "on.json", [4, -6, 9]);
    let out = hilbeq(&["check-point", "--point", &on, "--poly", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"]["decomposable"], true);

    let off = point_file(dir.path(), "off.json", [1, 1, 2]);
    let out = hilbeq(&["check-point", "--point", &off, "--poly", "1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout_json(&out)["verdict"]["Fquad_ok"], false);

    let out = hilbeq(&["check-point", "--point", &on]);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_point_flags_non_decomposable_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nd.json");
    // P_{12} = P_{34} = 1 in Gr(2, 4) on the quadrics of P^1 in degree 3
    let body = json!({
        "n": 1, "d": 3, "r": 2, "field": "Q",
        "coords": [
            { "idx": [[3,0],[2,1]], "val": "1" },
            { "idx": [[1,2],[0,3]], "val": "1" }
        ]
    });
    std::fs::write(&p, body.to_string()).unwrap();
    let out = hilbeq(&["check-point", "--point", p.to_str().unwrap(), "--poly", "2"]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["decomposable"], false);
    assert_eq!(v["verdict"]["certificates"][0]["kind"], "not_decomposable");
}

#[test]
fn quiver_output_validates() {
    let out = hilbeq(&["quiver", "--n", "2", "--poly", "t+2", "--gens", MEMBER]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["plucker_agreement"]["R+1"], true);
    assert_eq!(v["quiver"]["M"].as_array().unwrap().len(), 3);
    assert!(v["validation"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let out = hilbeq(&["quiver", "--n", "2", "--poly", "t+2", "--gens", NONMEMBER]);
    assert_eq!(code(&out), 1);
}

#[test]
fn corpus_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = hilbeq(&[
            "corpus", "--n", "2", "--poly", "t+2", "--field", "Fp:1000003", "--seed", "5", "--counts", "3,4,2", "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read(p).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let v: Value = serde_json::from_slice(&a).unwrap();
    let recs = v.as_array().unwrap();
    assert_eq!(recs.len(), 9);
    assert_eq!(recs[0]["source"], "lex");
    assert_eq!(recs[8]["kind"], "nonmember");
    assert!(recs[8]["IR"].is_null());
}

#[test]
fn selftest_subset() {
    let out = hilbeq(&["selftest", "--only", "A2,A3,A5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains(" PASS ")).count(), 3);
    assert_eq!(code(&hilbeq(&["selftest", "--only", "A10"])), 2);
    assert_eq!(code(&hilbeq(&["selftest", "--level", "medium"])), 2);
}
