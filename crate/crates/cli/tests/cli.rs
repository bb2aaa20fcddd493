//! Drives the `qsr` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn qsr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Writes a pure state on qubit registers `labels` with the given nonzero amplitudes.
fn pure_file(dir: &TempDir, name: &str, labels: &[&str], amps: &[(usize, f64)]) -> PathBuf {
    let mut v = vec![[0.0, 0.0]; 1 << labels.len()];
    for &(i, a) in amps {
        v[i] = [a, 0.0];
    }
    let regs: Vec<_> = labels
        .iter()
        .map(|l| serde_json::json!({"label": l, "dim": 2}))
        .collect();
    let path = dir.path().join(name);
    std::fs::write(
        &path,
        serde_json::json!({"registers": regs, "amplitudes": v}).to_string(),
    )
    .unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Parses CSV output into a header and rows.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (headers, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (headers, rows) = csv_rows(text);
    let j = headers
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

#[test]
fn coherence_of_plus_is_one() {
    let dir = TempDir::new().unwrap();
    let plus = pure_file(&dir, "plus.json", &["C"], &[(0, H), (1, H)]);
    let o = qsr(&["quantity", "rc", p(&plus), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!((column(&stdout(&o), "value")[0] - 1.0).abs() < 1e-12);
}

#[test]
fn ghz_conditional_mutual_information_is_one() {
    let dir = TempDir::new().unwrap();
    let ghz = pure_file(&dir, "ghz.json", &["R", "B", "C"], &[(0, H), (7, H)]);
    let o = qsr(&["quantity", "cmi", "--parts", "R,C,B", p(&ghz)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v[0]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_json_is_an_input_error_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"registers\": [").unwrap();
    let o = qsr(&["quantity", "entropy", p(&bad)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json") && err.contains("line"), "{err}");
}

#[test]
fn missing_parts_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let ghz = pure_file(&dir, "ghz.json", &["R", "B", "C"], &[(0, H), (7, H)]);
    assert_eq!(code(&qsr(&["quantity", "cmi", p(&ghz)])), 2);
    assert_eq!(
        code(&qsr(&["quantity", "cmi", "--parts", "R,Z,B", p(&ghz)])),
        2
    );
}

#[test]
fn infinite_divergence_needs_allow_inf() {
    let dir = TempDir::new().unwrap();
    let zero = pure_file(&dir, "zero.json", &["C"], &[(0, 1.0)]);
    let one = pure_file(&dir, "one.json", &["C"], &[(1, 1.0)]);
    assert_eq!(code(&qsr(&["quantity", "d", p(&zero), p(&one)])), 2);
    let o = qsr(&[
        "quantity",
        "d",
        p(&zero),
        p(&one),
        "--allow-inf",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "quantity,value\nd,inf\n");
}

#[test]
fn seeded_rate_report_is_byte_identical() {
    let a = qsr(&["rates", "--seed", "7", "--format", "csv"]);
    let b = qsr(&["rates", "--seed", "7", "--format", "csv"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let (headers, rows) = csv_rows(&stdout(&a));
    assert_eq!(headers.len(), 8);
    assert_eq!(rows.len(), 1);
    assert_ne!(
        a.stdout,
        qsr(&["rates", "--seed", "8", "--format", "csv"]).stdout
    );
}

#[test]
fn ghz_with_trivial_a_has_half_a_qubit_standard_rate() {
    let dir = TempDir::new().unwrap();
    let ghz = pure_file(&dir, "ghz.json", &["R", "B", "C"], &[(0, H), (7, H)]);
    let o = qsr(&["rates", p(&ghz), "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert!((column(&stdout(&o), "q_min_std")[0] - 0.5).abs() < 1e-9);
}

#[test]
fn cobit_units_double_qubit_rate_columns_only() {
    let q = stdout(&qsr(&["rates", "--seed", "3", "--format", "csv"]));
    let c = stdout(&qsr(&[
        "rates", "--seed", "3", "--format", "csv", "--units", "cobits",
    ]));
    for field in [
        "q_min_std",
        "q_min_incoherent",
        "q_min_schumacher_incoherent",
        "q_min_splitting_incoherent",
    ] {
        assert!(
            (column(&c, field)[0] - 2.0 * column(&q, field)[0]).abs() < 1e-12,
            "{field}"
        );
    }
    for field in [
        "q_plus_e_min_std",
        "sum_bound_slepian_wolf",
        "classical_rate_incoherent",
    ] {
        assert_eq!(column(&c, field), column(&q, field), "{field}");
    }
}

#[test]
fn coherence_creation_transcript_counts_three() {
    let o = qsr(&["simulate", "coherence-creation", "--q", "2", "--e", "1"]);
    assert_eq!(code(&o), 0);
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["counters"]["coherent_qubits_out"], 3);
    assert!(t["achieved_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert!(t["steps"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["actor"] == "bob")
        .all(|s| s["free_operation"] == true));
}

#[test]
fn convex_split_meets_its_bound() {
    let o = qsr(&[
        "simulate",
        "convex-split",
        "--delta",
        "0.25",
        "--seed",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(column(&text, "fidelity_sq")[0] >= column(&text, "bound")[0]);
}

#[test]
fn redistribution_budget_and_override() {
    let o = qsr(&["simulate", "qsr", "--seed", "1"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = qsr(&["simulate", "qsr", "--seed", "1", "--n-override", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(t["metrics"]["n"], 4.0);
    assert!(t["notes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("overridden")));
}

#[test]
fn product_copies_keep_per_copy_rates() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (0.3f64.sqrt(), 0.7f64.sqrt());
    let rc = pure_file(&dir, "rc.json", &["R", "C"], &[(0, a), (3, b)]);
    let o = qsr(&[
        "sweep",
        "copies",
        p(&rc),
        "--values",
        "1..4",
        "--budget",
        "65536",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(column(&text, "n"), vec![1.0, 2.0, 3.0, 4.0]);
    for field in [
        "q_min_std",
        "q_min_incoherent",
        "q_min_schumacher_incoherent",
        "classical_rate_incoherent",
    ] {
        let col = column(&text, field);
        assert!(
            col.iter().all(|v| (v - col[0]).abs() < 1e-9),
            "{field}: {col:?}"
        );
    }
}

#[test]
fn copies_beyond_budget_exit_three() {
    assert_eq!(code(&qsr(&["sweep", "copies", "--values", "3"])), 3);
}

#[test]
fn convex_split_fidelity_grows_as_delta_shrinks() {
    let o = qsr(&[
        "sweep",
        "delta",
        "--values",
        "0.5,0.25,0.125,0.0625",
        "--seed",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let f = column(&stdout(&o), "fidelity_sq");
    assert!(f.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{f:?}");
}

#[test]
fn hypothesis_sweep_rows_follow_parameter_order() {
    let o = qsr(&[
        "sweep",
        "hypothesis",
        "--values",
        "12,1,6",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(column(&text, "n"), vec![12.0, 1.0, 6.0]);
    assert!((column(&text, "rate")[1] - 1.0).abs() < 1e-12);
}

#[test]
fn empty_sweep_is_an_input_error() {
    assert_eq!(code(&qsr(&["sweep", "copies", "--values", "3..2"])), 2);
    assert_eq!(code(&qsr(&["sweep", "delta", "--values", ""])), 2);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.csv");
    let o = qsr(&[
        "rates",
        "--seed",
        "4",
        "--format",
        "csv",
        "--out",
        p(&target),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(
        std::fs::read(&target).unwrap(),
        qsr(&["rates", "--seed", "4", "--format", "csv"]).stdout
    );
}

#[test]
fn selftest_passes() {
    let o = qsr(&["selftest", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let (_, rows) = csv_rows(&stdout(&o));
    assert!(rows.iter().all(|r| r[1] == "PASS"));
}
