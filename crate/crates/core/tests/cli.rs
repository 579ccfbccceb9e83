use std::process::{Command, Output};

use serde_json::Value;

fn wracah(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wracah")).args(args).env_remove("WRACAH_TOL").output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn su2_check_passes_with_small_residuals() {
    let out = wracah(&["su2-check", "--k", "5", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite"], "su2");
    assert_eq!(v["k"], 5);
    for c in v["checks"].as_array().unwrap() {
        if c["name"].as_str().unwrap().starts_with("ur_us_noncommuting") {
            continue;
        }
        assert!(c["residual"].as_f64().unwrap() <= 1e-10, "{c}");
    }
}

#[test]
fn trivial_fbar_record() {
    let out = wracah(&["fbar", "--j1", "0", "--j2", "0", "--j3", "0", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["re"].as_f64(), Some(1.0));
    assert_eq!(rows[0]["im"].as_f64(), Some(0.0));
}

#[test]
fn non_triangle_gives_empty_table() {
    let out = wracah(&["cg-ur", "--j1", "1/2", "--j2", "1/2", "--j", "2", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out), Value::Array(vec![]));
}

#[test]
fn identical_argv_is_byte_identical() {
    for args in [
        &["cg-ur", "--j1", "1", "--j2", "3/2", "--j", "5/2", "--r", "0.37"][..],
        &["report", "--max-j", "1", "--r", "0.5"][..],
        &["fbar", "--j1", "1", "--j2", "1", "--j3", "1", "--format", "csv"][..],
    ] {
        let a = wracah(args);
        let b = wracah(args);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn half_integer_spellings_agree() {
    let a = wracah(&["fbar", "--j1", "3/2", "--j2", "1/2", "--j3", "1"]);
    let b = wracah(&["fbar", "--j1", "1.5", "--j2", "0.5", "--j3", "1"]);
    assert_eq!(a.stdout, b.stdout);
    let c = wracah(&["ortho", "--j1", "1", "--j2", "2"]);
    let d = wracah(&["ortho", "--j1", "1.0", "--j2", "4/2"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(wracah(&["basis", "--j", "0"]).status.code(), Some(2));
    assert_eq!(wracah(&["basis", "--j", "x"]).status.code(), Some(2));
    assert_eq!(wracah(&["basis", "--j", "-1/2"]).status.code(), Some(2));
    assert_eq!(wracah(&["quon-check", "--k", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(wracah(&[]).status.code(), Some(2));
}

#[test]
fn tolerance_override_can_fail_a_suite() {
    assert_eq!(wracah(&["su2-check", "--k", "3", "--tol", "1e-30"]).status.code(), Some(1));
    let env = Command::new(env!("CARGO_BIN_EXE_wracah"))
        .args(["su2-check", "--k", "3"])
        .env("WRACAH_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["checks"][0]["tol"].as_f64(), Some(1e-30));
}

#[test]
fn csv_and_text_formats() {
    let csv = wracah(&["fbar", "--j1", "0", "--j2", "0", "--j3", "0", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j1,j2,j3,alpha1,alpha2,alpha3,r,value"));
    assert!(lines.next().unwrap().ends_with("1.0000000000000000e0+0.0000000000000000e0i"));
    let txt = wracah(&["quon-check", "--k", "3", "--format", "text"]);
    assert_eq!(txt.status.code(), Some(0));
    assert!(!txt.stdout.is_empty());
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("wracah-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("basis.json");
    let direct = wracah(&["basis", "--j", "1", "--r", "0.5"]);
    let to_file = wracah(&["basis", "--j", "1", "--r", "0.5", "--output", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fault_hook_flips_report() {
    assert_eq!(wracah(&["report", "--max-j", "1/2"]).status.code(), Some(0));
    assert_eq!(wracah(&["report", "--max-j", "1/2", "--inject-fault", "3"]).status.code(), Some(1));
}
