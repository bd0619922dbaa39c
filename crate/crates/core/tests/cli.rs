use serde_json::Value;
use sqrtwalk::cli::run_to_string;
use sqrtwalk::report::SCHEMA;

fn run(args: &[&str]) -> String {
    let mut v = vec!["sqrtwalk"];
    v.extend_from_slice(args);
    let (text, _) = run_to_string(v).expect("usage").expect("run");
    text
}

fn run_err(args: &[&str]) -> sqrtwalk::Error {
    let mut v = vec!["sqrtwalk"];
    v.extend_from_slice(args);
    run_to_string(v).expect("usage").expect_err("should fail").1
}

fn validate(text: &str) -> Value {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    let v: Value = serde_json::from_str(text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errs: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errs.is_empty(), "{errs:?}\n{text}");
    v
}

#[test]
fn enumerate_csv_rows() {
    let out = run(&["enumerate", "--c", "0", "--a", "1", "--b", "0", "--dist", "rademacher", "--horizon", "4", "--format", "csv"]);
    let body: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, ["n,p", "1,0.5", "2,0.5", "3,0.375", "4,0.375"]);
}

#[test]
fn exponent_at_zero_slope() {
    let v = validate(&run(&["exponent", "--c", "0"]));
    let r = &v["result"];
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(r["residual"].as_f64().unwrap().abs() <= 1e-10);
    assert!(v["seed"].is_null());
}

#[test]
fn thread_count_does_not_change_output() {
    let cases: [&[&str]; 4] = [
        &["simulate", "--c", "1", "--a", "3", "--b", "1", "--trials", "30000", "--n-hi", "256"],
        &["localprob", "--c", "0", "--a", "1", "--b", "0", "--n", "16", "--bins", "0:1,1:2,3:inf", "--trials", "20000"],
        &["w-direct", "--c", "1", "--a", "2,3", "--b", "1", "--dist", "rademacher", "--trials", "5000", "--n-cap", "256"],
        &["w-decomp", "--c", "0", "--a", "1.5", "--b", "0", "--trials", "3000", "--n-max", "200", "--format", "csv"],
    ];
    for case in cases {
        let outs: Vec<String> = ["1", "2", "4"]
            .iter()
            .map(|t| {
                let mut a = case.to_vec();
                a.extend_from_slice(&["--seed", "11", "--threads", t]);
                run(&a)
            })
            .collect();
        assert_eq!(outs[0], outs[1], "{case:?}");
        assert_eq!(outs[0], outs[2], "{case:?}");
    }
}

#[test]
fn seed_changes_output() {
    let a = run(&["simulate", "--c", "1", "--a", "3", "--b", "1", "--trials", "5000", "--seed", "1"]);
    let b = run(&["simulate", "--c", "1", "--a", "3", "--b", "1", "--trials", "5000", "--seed", "2"]);
    assert_ne!(a, b);
}

#[test]
fn json_reports_match_schema() {
    let v = validate(&run(&["simulate", "--c", "0", "--a", "1", "--b", "0", "--trials", "2000", "--n-hi", "64"]));
    assert_eq!(v["seed"], 0);
    assert_eq!(v["config"]["trials"], 2000);
    validate(&run(&["enumerate", "--c", "1", "--a", "3", "--b", "1", "--dist", "rademacher", "--horizon", "10"]));
    validate(&run(&["w-direct", "--c", "0", "--a", "1", "--b", "0", "--trials", "2000", "--n-cap", "64"]));
    validate(&run(&["psi", "--p", "2", "--x", "-1,0,1"]));
    validate(&run(&["v", "--p", "2", "--x", "3", "--t", "4", "--clipped"]));
    validate(&run(&["tail-fit", "--c", "0", "--a", "1", "--b", "0", "--trials", "20000", "--n-hi", "256", "--n-min", "16"]));
    validate(&run(&["harmonic-check", "--c", "0", "--a", "2", "--b", "0", "--dist", "rademacher", "--trials", "5000", "--horizon", "32"]));
    let v = validate(&run(&["audit", "--c", "1", "--p1", "1", "--C", "1", "--R", "4", "--dist", "rademacher"]));
    assert_eq!(v["result"]["passed"], true);
    validate(&run(&["search-constants", "--c", "1", "--p1", "1.5", "--dist", "rademacher"]));
    let v = validate(&run(&[
        "kappa", "--c", "0", "--a", "1", "--b", "0", "--trials", "40000", "--n-hi", "1024", "--w-trials", "2000", "--w-n-max", "1024",
    ]));
    assert!(v["result"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"c": 1, "a": 3, "b": 1, "trials": 1000, "horizons": [1, 2, 4], "seed": 9}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let v: Value = serde_json::from_str(&run(&["simulate", "--config", cfg, "--trials", "3000"])).unwrap();
    assert_eq!(v["config"]["trials"], 3000);
    assert_eq!(v["config"]["c"], 1.0);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["result"].as_array().unwrap().len(), 3);
    // an explicit default on the command line still wins
    let v: Value = serde_json::from_str(&run(&["simulate", "--config", cfg, "--trials", "100000", "--seed", "0"])).unwrap();
    assert_eq!(v["config"]["trials"], 100000);
    assert_eq!(v["seed"], 0);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"c": 1, "nonsense": 2}"#).unwrap();
    let e = run_err(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(e.kind(), "invalid");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let args = ["sqrtwalk", "enumerate", "--c", "0", "--a", "1", "--b", "0", "--dist", "rademacher", "--horizon", "2", "--format", "csv", "--out", path.to_str().unwrap()];
    assert_eq!(sqrtwalk::cli::main_with_args(args), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with("n,p\n1,0.5\n2,0.5\n"));
}

#[test]
fn errors_are_structured() {
    assert_eq!(run_err(&["simulate", "--c", "1", "--a", "0.5", "--b", "1"]).kind(), "boundary");
    assert_eq!(run_err(&["simulate", "--c", "1", "--a", "3"]).kind(), "invalid");
    assert_eq!(run_err(&["enumerate", "--c", "0", "--a", "1", "--b", "0", "--horizon", "3"]).kind(), "distribution");
    assert_eq!(run_err(&["simulate", "--c", "0", "--a", "1", "--b", "0", "--dist", "sym_pareto", "--beta", "1.5"]).kind(), "distribution");
    assert_eq!(run_err(&["exponent", "--c", "1", "--p", "2"]).kind(), "invalid");
    let code = sqrtwalk::cli::main_with_args(["sqrtwalk", "simulate", "--c", "1", "--a", "0.5", "--b", "1"]);
    assert_eq!(code, 1);
    assert_eq!(sqrtwalk::cli::main_with_args(["sqrtwalk", "simulate", "--bogus"]), 2);
}

#[test]
fn timing_is_opt_in() {
    let plain = run(&["exponent", "--p", "2"]);
    assert!(!plain.contains("wall_time_s"));
    let timed = validate(&run(&["exponent", "--p", "2", "--timing"]));
    assert!(timed["wall_time_s"].as_f64().unwrap() >= 0.0);
}
