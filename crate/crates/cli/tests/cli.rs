use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kinfront(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinfront")).args(args).output().expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn speed_examples() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("one");
    let o = kinfront(&["speed", "--n", "1", "--tau", "4", "--out", &out_arg(&d)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&d);
    assert_eq!(m["status"], "ok");
    assert!((m["results"]["c"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(m["results"]["is_hyperbolic"], true);
    assert_eq!(m["outputs"][0], "speed.csv");

    let d = tmp.path().join("two");
    let o = kinfront(&["speed", "--n", "2", "--tau", "2", "--out", &out_arg(&d)]);
    assert_eq!(code(&o), 0);
    let c = manifest(&d)["results"]["c"].as_f64().unwrap();
    assert!((c - 8f64.sqrt() / 3.0).abs() < 1e-8, "{c}");
}

#[test]
fn csv_floats_carry_seventeen_digits() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kinfront(&["hamiltonian", "--n", "3", "--tau", "0.7", "--steps", "20", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(tmp.path().join("hamiltonian.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema: kinfront/hamiltonian/v1"));
    assert_eq!(lines.next().unwrap(), "p_norm,H,branch,residual");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21);
    for r in rows {
        let h = r.split(',').nth(1).unwrap();
        let mantissa = h.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{h}");
    }
}

#[test]
fn malformed_config_leaves_no_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let cfg = tmp.path().join("bad.toml");
    for text in ["[speed]\nn = 2\ntua = 1.0\n", "[sped]\nn = 2\n", "[speed\n", "[speed]\nn = \"two\"\ntau = 1.0\n"] {
        std::fs::write(&cfg, text).unwrap();
        let o = kinfront(&["--config", cfg.to_str().unwrap(), "speed", "--out", &out_arg(&out)]);
        assert_eq!(code(&o), 2, "{text}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
    let o = kinfront(&["speed", "--n", "1", "--tau", "-1", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 2);
    let o = kinfront(&["simulate-2d-discrete", "--tau", "3", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 2);
    let o = kinfront(&["speed", "--n", "1", "--out", &out_arg(&out)]);
    assert_eq!(code(&o), 2);
    assert!(!out.exists());
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "format = \"json\"\n[speed]\nn = 2\ntau = 0.5\n").unwrap();
    let d = tmp.path().join("o");
    let o = kinfront(&["--config", cfg.to_str().unwrap(), "speed", "--tau", "2", "--out", &out_arg(&d)]);
    assert_eq!(code(&o), 0);
    let m = manifest(&d);
    assert_eq!(m["results"]["tau"], 2.0);
    assert_eq!(m["results"]["n"], 2);
    assert_eq!(m["outputs"][0], "speed.json");
    let t: Value = serde_json::from_str(&std::fs::read_to_string(d.join("speed.json")).unwrap()).unwrap();
    assert_eq!(t["schema"], "kinfront/speed/v1");
}

#[test]
fn identical_runs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let d = tmp.path().join(name);
        let o = kinfront(&[
            "simulate-1d", "--tau", "0.5", "--nx", "600", "--t-end", "8", "--x-max", "30",
            "--profile-times", "2,8", "--out", &out_arg(&d),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        d
    };
    let (a, b) = (run("a"), run("b"));
    let files = manifest(&a)["outputs"].as_array().unwrap().clone();
    assert_eq!(files.len(), 3);
    for f in files {
        let f = f.as_str().unwrap();
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn runtime_failure_still_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kinfront(&["simulate-1d", "--tau", "1", "--x-max", "10", "--t-end", "20", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 1);
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "runtime_error");
    assert!(m["error"].as_str().unwrap().contains("domain too small"));
}

#[test]
fn failed_check_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    // Far from the limit the residual does not shrink like τ.
    let o = kinfront(&["hydro-limit", "--n", "2", "--p", "1", "--taus", "10,100", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 3);
    let m = manifest(tmp.path());
    assert_eq!(m["status"], "checks_failed");
    assert_eq!(m["checks_passed"], false);

    let o = kinfront(&["hydro-limit", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 0);
}

#[test]
fn integrals_flag_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kinfront(&["integrals", "--n", "4", "--s", "1", "--mu", "1.5", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(tmp.path().join("integrals.csv")).unwrap();
    assert!(text.lines().nth(2).unwrap().ends_with(",inf,divergent"), "{text}");
}

#[test]
fn discrete_and_telegraph_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d2");
    let o = kinfront(&["simulate-2d-discrete", "--nx", "20", "--snapshot", "--out", &out_arg(&d)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&d);
    assert!(m["results"]["probe_min"].as_f64().unwrap() < 0.0);
    let snap = std::fs::read_to_string(d.join("snapshot.csv")).unwrap();
    assert!(snap.lines().nth(1).unwrap().starts_with("# nx: "));

    let t = tmp.path().join("tg");
    let o = kinfront(&["simulate-telegraph", "--dim", "2", "--delta", "0.2", "--epsilon", "0.3", "--t-end", "1", "--out", &out_arg(&t)]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let m = manifest(&t);
    assert_eq!(m["warnings"].as_array().unwrap().len(), 1);
    assert_eq!(m["results"]["is_negative"], true);
    assert!(t.join("extrema.csv").exists());
}

#[test]
fn quick_reproduction_lists_its_files() {
    let tmp = tempfile::tempdir().unwrap();
    let o = kinfront(&["reproduce-all", "--quick", "--out", &out_arg(tmp.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(tmp.path());
    let outputs = m["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|f| f == "criteria.csv"));
    for f in outputs {
        assert!(tmp.path().join(f.as_str().unwrap()).exists());
    }
    let crit = m["results"]["criteria"].as_array().unwrap();
    assert_eq!(crit.len(), 10);
    let skipped = crit.iter().filter(|c| c["status"] == "skipped").count();
    assert_eq!(skipped, 4);
}
