use std::path::PathBuf;
use std::process::{Command, Output};

use multifix::certifier::MappingClassReport;
use multifix::cli::{DatadepOutput, SolveSummary, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};
use multifix::mappings::builtins::negation;
use multifix::Point;

const HALVING: &str =
    r#"{"kind":"singleton","branches":[{"A":[[0.5]],"c":[0.0]}],"domain":{"lo":[-1],"hi":[1],"grid":[21]}}"#;

struct Scratch {
    dir: tempfile::TempDir,
}

impl Scratch {
    fn new() -> Self {
        Scratch { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn multifix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multifix")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn negation_files(s: &Scratch, shift: f64) -> (String, String) {
    let t = negation();
    let moved = t.translated(Point::new(vec![shift]).unwrap()).unwrap();
    (s.write("t.json", &t.to_json().unwrap()), s.write("s.json", &moved.to_json().unwrap()))
}

#[test]
fn certify_reports_contraction_constant() {
    let s = Scratch::new();
    let m = s.write("half.json", HALVING);
    let out = multifix(&["certify", "--mapping", &m, "--out", &s.arg("r.json")]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let report: MappingClassReport = serde_json::from_str(&s.read("r.json")).unwrap();
    assert_eq!(report.contraction.constant, 0.5);
    assert!(report.contraction.satisfied);
}

#[test]
fn certify_prints_to_stdout_without_out() {
    let s = Scratch::new();
    let m = s.write("half.json", HALVING);
    let out = multifix(&["certify", "--mapping", &m, "--pairs-cap", "50"]);
    assert_eq!(code(&out), EXIT_OK);
    let report: MappingClassReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.sample.pairs, 50);
}

#[test]
fn malformed_mapping_is_a_validation_error() {
    let s = Scratch::new();
    let m = s.write("bad.json", "{\"kind\": ");
    let out = multifix(&["certify", "--mapping", &m]);
    assert_eq!(code(&out), EXIT_VALIDATION);
    assert!(stderr(&out).contains("bad.json"));

    let out = multifix(&["certify", "--mapping", &s.arg("missing.json")]);
    assert_eq!(code(&out), EXIT_VALIDATION);
}

#[test]
fn negative_b_grid_is_rejected() {
    let s = Scratch::new();
    let m = s.write("half.json", HALVING);
    let out = multifix(&["certify", "--mapping", &m, "--b-grid", "0,-0.5,1"]);
    assert_eq!(code(&out), EXIT_VALIDATION);
}

#[test]
fn solve_negation_with_enrichment_writes_trace() {
    let s = Scratch::new();
    let (t, _) = negation_files(&s, 0.0);
    let out = multifix(&["solve", "--mapping", &t, "--b", "1", "--x0", "8", "--out", &s.arg("trace.csv")]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let csv = s.read("trace.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,x0,residual,envelope"));
    assert_eq!(lines.next(), Some("0,8.0,16.0,"));
    let summary: SolveSummary = serde_json::from_str(&s.read("trace.json")).unwrap();
    assert!(summary.converged);
    assert_eq!(summary.lambda, Some(0.5));
    assert_eq!(summary.final_point.coords(), &[0.0]);
}

#[test]
fn lambda_and_b_must_agree() {
    let s = Scratch::new();
    let (t, _) = negation_files(&s, 0.0);
    let ok = multifix(&["solve", "--mapping", &t, "--lambda", "0.5", "--b", "1", "--x0", "8"]);
    assert_eq!(code(&ok), EXIT_OK);
    let bad = multifix(&["solve", "--mapping", &t, "--lambda", "0.3", "--b", "1", "--x0", "8"]);
    assert_eq!(code(&bad), EXIT_VALIDATION);
    assert!(stderr(&bad).contains("inconsistent"));
}

#[test]
fn strict_turns_non_convergence_into_failure() {
    let s = Scratch::new();
    let (t, _) = negation_files(&s, 0.0);
    let args = ["solve", "--mapping", &t, "--x0", "-3", "--max-iter", "5"];
    assert_eq!(code(&multifix(&args)), EXIT_OK);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&multifix(&strict)), EXIT_RUNTIME);
}

#[test]
fn gornicki_and_endpoint_methods() {
    let s = Scratch::new();
    let m = s.write("half.json", HALVING);
    let out = multifix(&[
        "solve",
        "--mapping",
        &m,
        "--method",
        "gornicki",
        "--descent-a",
        "0.5",
        "--descent-b",
        "1",
        "--x0",
        "1",
        "--eps",
        "5e-9",
        "--summary",
        &s.arg("g.json"),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SolveSummary = serde_json::from_str(&s.read("g.json")).unwrap();
    assert!(summary.converged);
    assert!(summary.trace.envelope.is_some());

    let split = s.write(
        "split.json",
        r#"{"kind":"affine","branches":[{"A":[[0.5]],"c":[0]},{"A":[[-0.5]],"c":[0]}],"domain":{"lo":[-4],"hi":[4],"grid":[41]}}"#,
    );
    let out = multifix(&[
        "endpoint",
        "--mapping",
        &split,
        "--descent-a",
        "0.5",
        "--descent-b",
        "1",
        "--x0",
        "3",
        "--eps",
        "1e-7",
        "--out",
        &s.arg("e.csv"),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let summary: SolveSummary = serde_json::from_str(&s.read("e.json")).unwrap();
    assert!(summary.converged && summary.final_point.norm() < 1e-7);

    let missing = multifix(&["solve", "--mapping", &m, "--method", "gornicki", "--x0", "1"]);
    assert_eq!(code(&missing), EXIT_VALIDATION);
}

#[test]
fn out_of_domain_start_is_a_validation_error() {
    let s = Scratch::new();
    let table = s.write(
        "tab.json",
        r#"{"kind":"tabulated","table":[[[0.0]],[[0.0]]],"domain":{"lo":[0],"hi":[1],"grid":[2]}}"#,
    );
    let out = multifix(&["solve", "--mapping", &table, "--x0", "5"]);
    assert_eq!(code(&out), EXIT_VALIDATION, "{}", stderr(&out));
}

#[test]
fn datadep_identical_maps_hold_with_zero_bound() {
    let s = Scratch::new();
    let (t, _) = negation_files(&s, 0.0);
    let out = multifix(&[
        "datadep",
        "--mapping",
        &t,
        "--perturbed",
        &t,
        "--class",
        "enriched-kannan",
        "--constants",
        r#"{"class":"enriched-kannan","b":1,"theta":0.2}"#,
        "--out",
        &s.arg("d.json"),
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let d: DatadepOutput = serde_json::from_str(&s.read("d.json")).unwrap();
    assert!(d.holds);
    assert_eq!(d.report.bound, 0.0);
    assert!(d.certification.is_none());
}

#[test]
fn datadep_translate_holds_with_slack() {
    let s = Scratch::new();
    let (t, moved) = negation_files(&s, 0.05);
    let consts = s.write("c.json", r#"{"class":"enriched-kannan","b":1,"theta":0}"#);
    let out = multifix(&[
        "datadep",
        "--mapping",
        &t,
        "--perturbed",
        &moved,
        "--class",
        "enriched-kannan",
        "--constants",
        &consts,
        "--perturbed-in-class",
    ]);
    assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
    let d: DatadepOutput = serde_json::from_slice(&out.stdout).unwrap();
    assert!(d.holds && d.report.slack >= 0.0);
    assert!((d.report.bound - 0.025).abs() < 1e-12);
    assert_eq!(d.report.symmetric_holds, Some(true));
}

#[test]
fn datadep_rejects_inapplicable_constants() {
    let s = Scratch::new();
    let (t, moved) = negation_files(&s, 0.05);
    let out = multifix(&[
        "datadep",
        "--mapping",
        &t,
        "--perturbed",
        &moved,
        "--class",
        "enriched-kannan",
        "--constants",
        r#"{"class":"enriched-kannan","b":1,"theta":0.5}"#,
    ]);
    assert_eq!(code(&out), EXIT_RUNTIME);
    assert!(stderr(&out).contains("bound inapplicable"));

    let mismatch = multifix(&[
        "datadep",
        "--mapping",
        &t,
        "--perturbed",
        &moved,
        "--class",
        "gornicki",
        "--constants",
        r#"{"class":"enriched-kannan","b":1,"theta":0.1}"#,
    ]);
    assert_eq!(code(&mismatch), EXIT_VALIDATION);

    let unknown =
        multifix(&["datadep", "--mapping", &t, "--perturbed", &moved, "--class", "banach", "--auto-certify"]);
    assert_eq!(code(&unknown), EXIT_VALIDATION);
}

#[test]
fn datadep_auto_certify_is_deterministic() {
    let s = Scratch::new();
    let (t, moved) = negation_files(&s, 0.05);
    let run = |name: &str| {
        let out = multifix(&[
            "datadep",
            "--mapping",
            &t,
            "--perturbed",
            &moved,
            "--class",
            "enriched-kannan",
            "--auto-certify",
            "--seed",
            "3",
            "--pairs-cap",
            "200",
            "--out",
            &s.arg(name),
        ]);
        assert_eq!(code(&out), EXIT_OK, "{}", stderr(&out));
        s.read(name)
    };
    let first = run("a.json");
    assert_eq!(first, run("b.json"));
    let d: DatadepOutput = serde_json::from_str(&first).unwrap();
    assert!(d.holds);
    assert_eq!(d.certification.unwrap().sample.seed, 3);
}

#[test]
fn hausdorff_prints_two_numbers() {
    let s = Scratch::new();
    let a = s.write("a.json", "[[0,0],[1,0]]");
    let b = s.write("b.json", "[[0,1]]");
    let out = multifix(&["hausdorff", &a, &b]);
    assert_eq!(code(&out), EXIT_OK);
    let text = String::from_utf8(out.stdout).unwrap();
    let nums: Vec<f64> = text.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(nums, vec![2f64.sqrt(), 2f64.sqrt()]);

    let c = s.write("c.json", "[[0]]");
    assert_eq!(code(&multifix(&["hausdorff", &a, &c])), EXIT_VALIDATION);
}

#[test]
fn unknown_subcommand_is_a_validation_error() {
    assert_eq!(code(&multifix(&["frobnicate"])), EXIT_VALIDATION);
    assert_eq!(code(&multifix(&["--help"])), EXIT_OK);
}
