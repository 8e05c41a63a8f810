use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lasernoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lasernoise")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const V_SMALL: &str = r#""params": {"scheme": "V3", "atoms": 20, "pump": 30.0, "ell": 1, "p_u": 40.0, "gamma": 0.5, "alpha": 2.0}"#;

#[test]
fn steady_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.json", &format!("{{{V_SMALL}, \"sweep\": {{\"param\": \"pump\", \"values\": [10, 20, 40]}}}}"));
    let out = lasernoise(&["steady", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "P,m,n0,n1,n2,n3,J,R,S,U,D,Q");
    assert_eq!(lines.len(), 4);
    let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 10.0);
    let total: f64 = first[2..6].iter().sum();
    assert!((total - 20.0).abs() < 1e-9);
}

#[test]
fn mc_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "m.json", &format!("{{{V_SMALL}, \"sim\": {{\"duration\": 20.0, \"seed\": 3}}}}"));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = lasernoise(&["mc", "--config", &cfg, "--runs", "3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["mc.csv", "mc_summary.csv"] {
        let x = fs::read(a.join(name)).unwrap();
        assert_eq!(x, fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = dir.path().join("c");
    lasernoise(&["mc", "--config", &cfg, "--runs", "3", "--seed", "4", "--out", c.to_str().unwrap()]);
    assert_ne!(fs::read(a.join("mc.csv")).unwrap(), fs::read(c.join("mc.csv")).unwrap());
    let summary = fs::read_to_string(a.join("mc_summary.csv")).unwrap();
    assert!(summary.starts_with("quantity,mean,ci_low,ci_high,analytic\nm,"));
}

#[test]
fn spectrum_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sp.json", &format!("{{{V_SMALL}, \"sim\": {{\"duration\": 30.0, \"seed\": 1}}}}"));
    let out = dir.path().join("o");
    let o = lasernoise(&["spectrum", "--config", &cfg, "--runs", "4", "--omega-max", "50", "--omega-points", "25", "--smooth", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let analytic = fs::read_to_string(out.join("spectrum_analytic.csv")).unwrap();
    let mut lines = analytic.lines();
    assert_eq!(lines.next(), Some("omega,s,ci_low,ci_high"));
    assert_eq!(lines.count(), 25);
    let mc = fs::read_to_string(out.join("spectrum_mc.csv")).unwrap();
    let row: Vec<f64> = mc.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row.len(), 4);
    assert!(row[2] <= row[1] && row[1] <= row[3]);
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "e.json", &format!("{{{V_SMALL}, \"sweep\": {{\"param\": \"pump\", \"values\": []}}}}"));
    let o = lasernoise(&["sweep", "--config", &empty]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty grid"));
    let unknown = write_config(dir.path(), "u.json", &format!("{{{V_SMALL}, \"runz\": 3}}"));
    let o = lasernoise(&["steady", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    let o = lasernoise(&["steady"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lasernoise(&["spectrum", "--config", &unknown.replace("u.json", "missing.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_and_fano_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", &format!("{{{V_SMALL}, \"sweep\": {{\"param\": \"gamma\", \"values\": [0, 1]}}}}"));
    let o = lasernoise(&["sweep", "--config", &cfg]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("gamma,m,n0,n1,n2,n3,s0,fano\n0,"));
    let o = lasernoise(&["fano", "--config", &cfg]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("gamma,m,fano_analytic,fano_mc,ci_low,ci_high\n"));
    assert!(text.lines().nth(1).unwrap().ends_with(",,,"));
}

#[test]
fn table_and_check() {
    let o = lasernoise(&["table2"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.lines().skip(1).all(|l| l.ends_with("false")));
    let o = lasernoise(&["check"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn two_axis_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        "{{{V_SMALL}, \"sweep\": {{\"param\": \"pump\", \"values\": [10, 40]}}, \"sweep2\": {{\"param\": \"gamma\", \"values\": [0, 1, 2]}}}}"
    );
    let cfg = write_config(dir.path(), "c.json", &body);
    let o = lasernoise(&["sweep", "--config", &cfg]);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "gamma,pump,m,n0,n1,n2,n3,s0,fano");
    assert_eq!(lines.len(), 7);
    assert!(lines[4].starts_with("1,40,"));
}
