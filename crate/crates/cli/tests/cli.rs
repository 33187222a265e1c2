use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gfcalc::oracle::mittag_leffler;
use gfcalc::{Exponent, GenSeries, SeriesRecord, Truncation};
use num_complex::Complex64;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gfcalc"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn solve(problem: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("solve").arg(problem).arg("--out-dir").arg(out).args(extra).output().unwrap()
}

fn read_csv(path: &Path) -> Vec<(f64, Complex64)> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re_y,im_y"));
    lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], Complex64::new(v[1], v[2]))
        })
        .collect()
}

fn write_problem(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn riemann_liouville_example_matches_mittag_leffler() {
    let out = tempfile::tempdir().unwrap();
    let o = solve(&shipped("rl_half.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.path().join("rl_half.solution.csv"));
    assert_eq!(rows.len(), 20);
    for (t, y) in rows {
        let expected = t.powf(-0.5) * mittag_leffler(0.5, 0.5, Complex64::new(t.sqrt(), 0.0)).unwrap();
        assert!((y - expected).norm() <= 1e-9 * expected.norm().max(1.0), "t {t}: {y} vs {expected}");
    }
}

#[test]
fn zero_problem_gives_zero_column() {
    let out = tempfile::tempdir().unwrap();
    let o = solve(&shipped("zero.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(&out.path().join("zero.solution.csv"));
    assert!(rows.iter().all(|(_, y)| *y == Complex64::new(0.0, 0.0)));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.path().join("zero.report.json")).unwrap()).unwrap();
    assert_eq!(report["equation_residual"], 0.0);
    assert_eq!(report["solution"].as_array().unwrap().len(), 0);
}

#[test]
fn malformed_exponent_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("rl_half.json")).unwrap().replace("\"1/2\"", "\"1/0\"");
    let p = write_problem(dir.path(), "bad.json", &text);
    let o = solve(&p, dir.path(), &["--json-errors"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "schema");
    assert!(err["error"]["message"].as_str().unwrap().contains("malformed exponent"));
    assert!(!dir.path().join("bad.solution.csv").exists());
}

#[test]
fn report_series_reproduces_the_table() {
    let out = tempfile::tempdir().unwrap();
    for name in ["order_two", "perturbed_double_pole", "two_poles"] {
        let o = solve(&shipped(&format!("{name}.json")), out.path(), &[]);
        assert_eq!(o.status.code(), Some(0));
        let report: Value =
            serde_json::from_str(&fs::read_to_string(out.path().join(format!("{name}.report.json"))).unwrap()).unwrap();
        let records: Vec<SeriesRecord> = serde_json::from_value(report["solution"].clone()).unwrap();
        let cap: Exponent = report["truncation"]["solution_mu_max"].as_str().unwrap().parse().unwrap();
        let y = GenSeries::from_records(&records, Truncation::new(cap, 2.0).unwrap()).unwrap();
        for (t, v) in read_csv(&out.path().join(format!("{name}.solution.csv"))) {
            let e = y.eval(t).unwrap();
            assert!((e - v).norm() <= 1e-12 * v.norm().max(1.0), "{name} t {t}: {e} vs {v}");
        }
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let p = shipped("perturbed_double_pole.json");
    let one = bin()
        .env("RAYON_NUM_THREADS", "1")
        .args(["solve", "--crosscheck", "--out-dir"])
        .arg(a.path())
        .arg(&p)
        .output()
        .unwrap();
    let four = bin()
        .env("RAYON_NUM_THREADS", "4")
        .args(["solve", "--crosscheck", "--out-dir"])
        .arg(b.path())
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(four.status.code(), Some(0));
    for file in ["perturbed_double_pole.solution.csv", "perturbed_double_pole.report.json"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn report_fields_in_fixed_order() {
    let out = tempfile::tempdir().unwrap();
    solve(&shipped("two_poles.json"), out.path(), &["--crosscheck"]);
    let text = fs::read_to_string(out.path().join("two_poles.report.json")).unwrap();
    let keys = [
        "\"problem\"",
        "\"status\"",
        "\"kernel\"",
        "\"sonine_residual\"",
        "\"poles\"",
        "\"truncation\"",
        "\"equation_residual\"",
        "\"ic_residual\"",
        "\"solution\"",
        "\"crosscheck\"",
    ];
    let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap_or_else(|| panic!("{k} missing"))).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{pos:?}");
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["poles"].as_array().unwrap().len(), 2);
    assert_eq!(report["crosscheck"]["passed"], true);
}

#[test]
fn overrides_change_the_cap() {
    let out = tempfile::tempdir().unwrap();
    let o = solve(&shipped("rl_half.json"), out.path(), &["--mu-max", "20", "--tol", "1e-12"]);
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.path().join("rl_half.report.json")).unwrap()).unwrap();
    assert_eq!(report["truncation"]["mu_max"], "20");
    assert_eq!(report["truncation"]["tol"], 1e-12);
}

#[test]
fn power_law_associate_is_printed() {
    let o = bin().arg("validate-kernel").arg(shipped("kernels/power_three_quarters.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("  h_1/4  1\n"), "{text}");
    assert!(text.contains("sonine residual: 0e0"), "{text}");
}

#[test]
fn explicit_kernel_has_alternating_associate() {
    let o = bin().arg("validate-kernel").arg(shipped("kernels/alternating.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let coeffs: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("associate"))
        .skip(1)
        .take_while(|l| l.starts_with("  h_"))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(coeffs, [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
}

#[test]
fn order_out_of_range_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(dir.path(), "k.json", r#"{"kernel": {"type": "power_law", "alpha": "3/2", "n": 1}}"#);
    let o = bin().arg("validate-kernel").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("order out of range"));
}

#[test]
fn invalid_supplied_associate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_problem(
        dir.path(),
        "k.json",
        r#"{"kernel": {"type": "explicit", "n": 2, "terms": ["h_1/2"], "associate": ["h_1/2"]}}"#,
    );
    let o = bin().args(["--json-errors", "validate-kernel"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("not an L_n pair"));
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(&dir.path().join("absent.json"), dir.path(), &["--json-errors"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");
}
