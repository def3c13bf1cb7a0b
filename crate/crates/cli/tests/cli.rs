use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfsusc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("dfsusc-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

/// Records of a CSV document (stops at the first blank-free non-CSV line).
fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap()).collect()
}

fn chi_of(args: &[&str]) -> f64 {
    let o = run(args);
    assert!(o.status.success(), "{}", stderr(&o));
    csv_rows(&stdout(&o))[0][2].parse().unwrap()
}

#[test]
fn chi_reproduces_closed_forms() {
    let chi = chi_of(&["chi", "--example", "dephasing-pair", "--n", "4"]);
    assert!((chi - 16.0).abs() < 1e-10 * 16.0);
    let chi = chi_of(&["chi", "--example", "singlet-triplet", "--n", "8"]);
    assert!((chi - 32.0 / 3.0).abs() < 1e-10 * 32.0 / 3.0);
    let o = run(&["chi", "--example", "dephasing-pair", "--n", "2"]);
    assert!(stderr(&o).contains("n^2"), "bound context line missing: {}", stderr(&o));
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(header, "model,n,chi,terms,locality,n_pow_2k,expected");
}

#[test]
fn chi_of_unperturbed_model_is_zero() {
    let model = r#"{"qubits": 2, "modes": [{"name": "m", "cutoff": 2}],
                    "h_sb": [{"system": [{"coef": 1.0, "word": "ZI"}],
                              "bath": [{"coef": 1.0, "ops": [{"mode": "m", "op": "a"}]},
                                       {"coef": 1.0, "ops": [{"mode": "m", "op": "adag"}]}]}],
                    "state": {"code": "pair"}}"#;
    let path = temp_file("zero-v.json", model);
    let chi = chi_of(&["chi", "--model", path.to_str().unwrap()]);
    assert_eq!(chi, 0.0);
}

#[test]
fn model_files_match_builtin_examples() {
    let dir = models_dir();
    let file = chi_of(&["chi", "--model", dir.join("dephasing-pair-n4.json").to_str().unwrap()]);
    assert_eq!(file, chi_of(&["chi", "--example", "dephasing-pair", "--n", "4"]));
    let file = chi_of(&["chi", "--model", dir.join("singlet-triplet-n8.json").to_str().unwrap()]);
    assert_eq!(file, chi_of(&["chi", "--example", "singlet-triplet", "--n", "8"]));
}

fn trailing_fit(text: &str) -> Value {
    let start = text.find('{').expect("trailing JSON block");
    serde_json::from_str(&text[start..]).unwrap()
}

#[test]
fn sweep_fits_exponents_and_flags_single_block() {
    let o = run(&["sweep", "--example", "dephasing-pair", "--n-list", "2,4,6,8"]);
    assert!(o.status.success());
    let fit = trailing_fit(&stdout(&o));
    assert!((fit["fit"]["exponent"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((fit["fit"]["prefactor"].as_f64().unwrap() - 1.0).abs() < 1e-6);

    let o = run(&["sweep", "--example", "singlet-triplet", "--n-list", "4,8,12,16"]);
    let text = stdout(&o);
    let table: String = text.lines().take_while(|l| !l.starts_with('{')).collect::<Vec<_>>().join("\n");
    let rows = csv_rows(&table);
    assert_eq!(&rows[0][0], "4");
    assert_eq!(&rows[0][3], "prefactor differs");
    assert!(rows[1..].iter().all(|r| r[3].is_empty()));
    let fit = trailing_fit(&text);
    assert_eq!(fit["fit"]["points"], 3);
    assert!((fit["fit"]["exponent"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn sweep_rejects_invalid_sizes_with_config_exit() {
    let o = run(&["sweep", "--example", "dephasing-pair", "--n-list", "2,3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("multiple of 2"));
    let o = run(&["sweep", "--example", "singlet-triplet", "--n-list", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("multiple of 4"));
}

#[test]
fn malformed_invocations_fail_before_work() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["chi", "--example", "ising", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["chi", "--example", "dephasing-pair"]).status.code(), Some(2));
    assert_eq!(run(&["chi", "--model", "/nonexistent/model.json"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--only", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["chi", "--example", "dephasing-pair", "--n", "2", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_three() {
    let o = run(&["fit-chi", "--example", "dephasing-pair", "--n", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("capacity"));
}

#[test]
fn verify_filters_suites() {
    let o = run(&["verify", "--only", "f1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["suites"], serde_json::json!(["f1"]));
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["suite"] == "f1"));
    assert_eq!(checks.len(), 80);

    let o = run(&["verify", "--only", "kraus-norm"]);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["suite"] == "kraus-norm"));
    assert!(checks.iter().all(|c| c["value"].as_f64().unwrap() <= 1e-8));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--only", "kraus-norm,rho1", "--seed", "11", "--format", "csv"][..],
        &["sweep", "--example", "dephasing-pair", "--format", "json"][..],
        &["lindblad-f1", "--seed", "3", "--jobs", "2"][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success(), "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = run(&["verify", "--only", "rho1", "--seed", "11"]);
    let b = run(&["verify", "--only", "rho1", "--seed", "12"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn json_numbers_round_trip() {
    let o = run(&["chi", "--example", "singlet-triplet", "--n", "4", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let printed = stdout(&o);
    let chi = v["chi"].as_f64().unwrap();
    assert!(printed.contains(&format!("{chi:?}")));
    assert!((chi - (16.0 / 3.0 - 8.0 / 3f64.sqrt())).abs() < 1e-12);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("dfsusc-cli-{}-out.csv", std::process::id()));
    let o = run(&["cross-terms", "--example", "singlet-triplet", "--n", "8", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = csv_rows(&text);
    let inter = rows.iter().find(|r| &r[0] == "inter").unwrap();
    assert!(inter[3].parse::<f64>().unwrap().abs() < 1e-10);
}

#[test]
fn lindblad_model_file() {
    let path = models_dir().join("lindblad-qubit.json");
    let o = run(&["lindblad-f1", "--model", path.to_str().unwrap(), "--t-grid", "0.4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][3], "2");
    assert!(rows[0][5].parse::<f64>().unwrap().abs() <= 1e-6);
}

#[test]
fn fit_chi_matches_analytic() {
    let o = run(&["fit-chi", "--example", "dephasing-pair", "--n", "2", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["rel_diff"].as_f64().unwrap() < 1e-2);
    assert_eq!(v["cutoff_converged"], true);
    assert_eq!(v["fit"]["samples"].as_array().unwrap().len(), 18);
}
