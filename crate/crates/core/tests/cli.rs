use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcgl"))
        .args(args)
        .env("TCGL_SEED", "17")
        .output()
        .expect("run tcgl")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

const DECOUPLED: &[&str] = &["--case", "2vev", "--beta1", "1", "--beta2", "1", "--betap", "0", "--alpha", "1", "--n", "1", "--m", "1"];

#[test]
fn solve_then_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let mut args = vec!["solve"];
    args.extend_from_slice(DECOUPLED);
    args.extend_from_slice(&["--out", out_s]);
    let o = tcgl(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["profile.dat", "report.json", "plots/f.dat", "plots/potential_density.dat"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let report = json(&out.join("report.json"));
    assert_eq!(report["passed"], true);
    let d0 = report["solution"]["d0"].as_f64().unwrap();
    assert!((d0 - 0.583189495859883).abs() < 1e-6, "{d0}");

    let profile = out.join("profile.dat");
    let v = tcgl(&["verify", profile.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stderr));
    let printed: Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(printed["passed"], true);
}

#[test]
fn corrupted_profile_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = vec!["solve", "--case", "2vev", "--beta1", "2", "--beta2", "2", "--betap", "1", "--alpha", "1.5", "--n", "1", "--m", "1"];
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    assert_eq!(tcgl(&args).status.code(), Some(0));

    // bump g by a bump around r = 3
    let text = std::fs::read_to_string(out.join("profile.dat")).unwrap();
    let bad: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                return l.to_string();
            }
            let mut c: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            c[3] += 0.05 * (-(c[0] - 3.0).powi(2)).exp();
            c.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ")
        })
        .collect();
    let path = dir.path().join("bad.dat");
    std::fs::write(&path, bad.join("\n")).unwrap();

    let v = tcgl(&["verify", path.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(5));
    let err: Value = serde_json::from_slice(&v.stderr).unwrap();
    let failing: Vec<&str> = err["error"]["failing_checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert!(failing.contains(&"eom_residual"), "{failing:?}");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<Value> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let mut args = vec!["solve", "--case", "1vev", "--n", "1", "--beta1", "2", "--beta2", "2", "--betap", "1.5"];
            args.extend_from_slice(&["--alpha", "1", "--rmax", "40", "--out", out.to_str().unwrap()]);
            assert_eq!(tcgl(&args).status.code(), Some(0));
            without_timestamp(json(&out.join("report.json")))
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    let a = std::fs::read(dir.path().join("a/profile.dat")).unwrap();
    let b = std::fs::read(dir.path().join("b/profile.dat")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# decoupled pair\ncase = 2vev\nbeta1 = 1\nbeta2 = 1\nbetap = 0\nalpha = 1\nn = 1\nm = 1\nrmax = 30\n").unwrap();
    let out = dir.path().join("run");
    let o = tcgl(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["solution"]["r_max"].as_f64(), Some(30.0));

    std::fs::write(&cfg, "case = 2vev\nbeta_one = 1\n").unwrap();
    let o = tcgl(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("line 2"));
}

#[test]
fn oracle_export_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fd");
    let mut args = vec!["oracle"];
    args.extend_from_slice(DECOUPLED);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let o = tcgl(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["minimality"]["seed"], 17);
    assert_eq!(report["minimality"]["passed"], true);
    let v = tcgl(&["verify", out.join("profile.dat").to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(0), "{}", String::from_utf8_lossy(&v.stderr));
}

#[test]
fn exit_codes_name_the_failure() {
    let o = tcgl(&["solve", "--case", "2vev", "--n", "1", "--m", "1", "--beta1", "1", "--beta2", "1", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("--betap"));

    // alpha below beta' has no two-condensate vacuum
    let o = tcgl(&["solve", "--case", "2vev", "--beta1", "1", "--beta2", "1", "--betap", "0.5", "--alpha", "0.2", "--n", "1", "--m", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["exit_code"], 3);

    let o = tcgl(&["solve", "--case", "1vev", "--n", "1", "--m", "1", "--beta1", "2", "--beta2", "2", "--betap", "1.5", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let o = tcgl(&["verify", "/nonexistent/profile.dat"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn sweep_writes_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let mut args = vec!["sweep"];
    args.extend_from_slice(DECOUPLED);
    args.extend_from_slice(&["--sweep-param", "betap", "--sweep-values", "0,-0.3,0.9", "--rmax", "25"]);
    args.extend_from_slice(&["--out", out.to_str().unwrap(), "--jobs", "2"]);
    let o = tcgl(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let index = json(&out.join("index.json"));
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["index"], i);
        assert!(out.join(p["dir"].as_str().unwrap()).join("profile.dat").exists());
    }
    let d: Vec<f64> = points.iter().map(|p| p["d0"].as_f64().unwrap()).collect();
    assert!((d[0] - 0.583189495859883).abs() < 1e-6);
    assert!(d[0] != d[1] && d[1] != d[2]);
}
