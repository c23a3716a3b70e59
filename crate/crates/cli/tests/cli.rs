use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cgo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgo")).args(args).output().expect("run cgo")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_fields_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sol");
    let o = cgo(&["solve", "--k", "10", "--nr", "32", "--nphi", "64", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("phi_interior.csv")).unwrap();
    assert!(text.starts_with("# schema: cgo-csv/1\n# config: {"));
    let (h, r) = rows(&out.join("phi_interior.csv"));
    assert_eq!(h, ["r", "phi", "phi1_re", "phi1_im", "phi2_re", "phi2_im"]);
    assert_eq!(r.len(), 32 * 64);
    // Radial-major order.
    assert_eq!(r[0][0], r[63][0]);
    assert_ne!(r[0][0], r[64][0]);
    let (h, _) = rows(&out.join("phi_exterior.csv"));
    assert_eq!(h[0], "s");
    let rep = json(&out.join("report.json"));
    assert_eq!(rep["report"]["converged"], Value::Bool(true));
    let m = json(&out.join("manifest.json"));
    assert!(m["timestamp_unix"].as_u64().unwrap() > 0);
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config"]["k"], 10.0);
}

#[test]
fn zero_potential_gives_constant_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["solve", "--q", "zero", "--k", "5", "--nr", "16", "--nphi", "32", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    for file in ["phi_interior.csv", "phi_exterior.csv"] {
        let (_, r) = rows(&dir.path().join(file));
        for row in r {
            let v: Vec<f64> = row[2..].iter().map(|s| s.parse().unwrap()).collect();
            assert_eq!(v, [1.0, 0.0, 0.0, 0.0]);
        }
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&cgo(&["solve", "--k", "0", "--out", d])), 1);
    assert_eq!(code(&cgo(&["asym", "--k", "100", "--C", "-1", "--out", d])), 1);
    assert_eq!(code(&cgo(&["solve", "--k", "5", "--nr", "16", "--out", d])), 1);
    assert_eq!(code(&cgo(&["solve", "--k", "5", "--sigma", "2", "--out", d])), 1);
    assert_eq!(code(&cgo(&["frobnicate"])), 1);
    assert_eq!(code(&cgo(&["--help"])), 0);
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&cgo(&["probe-k2", "--q", "zero", "--k", "10,20,40", "--nr", "16", "--nphi", "64", "--out", d])), 2);
    let o = cgo(&["solve", "--k", "10", "--nr", "32", "--nphi", "64", "--max-iter", "1", "--fallback", "none", "--out", d]);
    assert_eq!(code(&o), 2);
}

#[test]
fn output_is_deterministic_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = ["solve", "--k", "7", "--k-im", "-2", "--nr", "16", "--nphi", "64", "--tol", "1e-11"];
    assert_eq!(code(&cgo(&[&args[..], &["--out", a.to_str().unwrap()]].concat())), 0);
    let cfg = a.join("run.cfg");
    assert_eq!(code(&cgo(&["solve", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])), 0);
    for f in ["phi_interior.csv", "phi_exterior.csv", "laurent.csv"] {
        assert_eq!(fs::read_to_string(a.join(f)).unwrap(), fs::read_to_string(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read_to_string(a.join("run.cfg")).unwrap(), fs::read_to_string(b.join("run.cfg")).unwrap());
    // Flags given on the command line override the config file.
    let c = dir.path().join("c");
    assert_eq!(code(&cgo(&["solve", "--config", cfg.to_str().unwrap(), "--k", "8", "--out", c.to_str().unwrap()])), 0);
    assert_eq!(json(&c.join("manifest.json"))["config"]["k"], 8.0);
    assert_ne!(body(&a.join("laurent.csv")), body(&c.join("laurent.csv")));
}

#[test]
fn asym_shares_solver_grid() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let a = dir.path().join("a");
    assert_eq!(code(&cgo(&["solve", "--k", "20", "--out", s.to_str().unwrap()])), 0);
    assert_eq!(code(&cgo(&["asym", "--k", "20", "--C", "4", "--out", a.to_str().unwrap()])), 0);
    for (sf, af) in [("phi_interior.csv", "asym_interior.csv"), ("phi_exterior.csv", "asym_exterior.csv")] {
        let (_, rs) = rows(&s.join(sf));
        let (ha, ra) = rows(&a.join(af));
        assert_eq!(ha[2], "zone");
        assert_eq!(rs.len(), ra.len());
        for (x, y) in rs.iter().zip(&ra) {
            assert_eq!(x[..2], y[..2]);
        }
    }
    let b = json(&a.join("boundaries.json"));
    assert!(b.as_array().unwrap().len() >= 5);
}

#[test]
fn gfun_reports_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["gfun", "--nx", "20", "--ny", "20", "--refine", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("max |G_r - G_l"));
    let m = json(&dir.path().join("manifest.json"));
    assert!(m["summary"]["identity_max"].as_f64().unwrap() < 1e-9);
    let (h, r) = rows(&dir.path().join("gfun.csv"));
    assert_eq!(r.len(), 400);
    assert!(h.contains(&"refine_gr".to_string()));
}

#[test]
fn reflect_asymptotic_only_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["reflect", "--kmin", "10", "--kmax", "100", "--count", "46", "--kc", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (h, r) = rows(&dir.path().join("reflect.csv"));
    for col in ["k", "r_asym", "r_k32", "r_asym_k32", "diff_k72"] {
        assert!(h.contains(&col.to_string()), "{col}");
    }
    assert_eq!(r.len(), 46);
    let num = h.iter().position(|c| c == "r_numeric_re").unwrap();
    assert!(r.iter().all(|row| row[num].is_empty()));
}

#[test]
fn reflect_with_numerics() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["reflect", "--kmin", "10", "--kmax", "14", "--count", "3", "--kc", "12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (h, r) = rows(&dir.path().join("reflect.csv"));
    let num = h.iter().position(|c| c == "r_numeric_re").unwrap();
    assert!(!r[0][num].is_empty() && !r[1][num].is_empty() && r[2][num].is_empty());
    let m = json(&dir.path().join("manifest.json"));
    assert!(m["summary"]["route_gap"].as_f64().unwrap() < 1e-9);
}

#[test]
fn compare_single_k_has_no_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["compare", "--k", "20", "--C", "1,4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("scaling.json"));
    let runs = s["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert!(runs[0]["fits"]["phi2_sup"].is_null());
    assert!(dir.path().join("diff_C4_k20_interior.csv").exists());
    assert!(dir.path().join("diff_C1_k20_exterior.csv").exists());
}

#[test]
fn compare_three_k_fits() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["compare", "--k", "10,20,40", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("scaling.json"));
    // φ₁ − φ̃₁ decays faster than φ₁ − 1.
    let e = s["runs"][0]["fits"]["phi1_sup"]["exponent"].as_f64().unwrap();
    assert!((-2.5..-1.5).contains(&e), "{e}");
    assert!(s["runs"][0]["fits"]["phi2_sup"]["exponent"].as_f64().unwrap() < 0.0);
}

#[test]
fn probe_reports_slope() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgo(&["probe-k2", "--k", "10,20,40", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("K2 slope"));
    let s = json(&dir.path().join("slope.json"));
    assert!(s["fit"]["exponent"].as_f64().unwrap() < 0.0);
    assert!(s["pass"].is_boolean());
}
