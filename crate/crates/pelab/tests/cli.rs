use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn pelab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pelab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .env_remove("PELAB_OUT")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let p = dir.join("cfg.json");
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn rotating_projection_certifies_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = examples().join("eg31.json");
    let o = pelab(&["certify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&tmp.path().join("00_udpe.json"));
    assert_eq!(r["outcome"], "certified");
    let mu = r["mu"].as_f64().unwrap();
    assert!((mu - 4.0).abs() <= 0.2, "mu {mu}");
    assert!(tmp.path().join("config.json").exists());
    let m = read_json(&tmp.path().join("01_certificate_map.json"));
    assert_eq!(m["outcome"], "map");
}

#[test]
fn second_coordinate_gives_counterexample_and_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = examples().join("x2_wrt_x1.json");
    let o = pelab(&["certify", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(code(&o), 2);
    let r = read_json(&tmp.path().join("00_udpe.json"));
    assert_eq!(r["outcome"], "counterexample");
    assert_eq!(r["x"], json!([0.5, 0.0]));
    assert!(r["value"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn missing_config_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pelab(&["certify", "--config", "/nonexistent/cfg.json"], tmp.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/cfg.json"));
}

#[test]
fn misspelt_system_is_rejected_with_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({"name": "bad", "system": {"name": "linear_decy"},
                "analysis": [{"op": "simulate", "t0s": [0], "x0s": [[1]], "horizon": 1}]}),
    );
    let o = pelab(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("linear_decy"), "{err}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn unknown_analysis_field_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({"name": "bad", "system": {"name": "linear_decay"},
                "analysis": [{"op": "simulate", "t0s": [0], "x0s": [[1]], "horizon": 1, "stpe": 0.1}]}),
    );
    let o = pelab(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("out"));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("stpe"));
}

fn uniformity(system: Value, horizon: f64, tmp: &Path) -> (i32, Value) {
    let cfg = write_config(
        tmp,
        &json!({"name": "u", "system": system,
                "analysis": [{"op": "uniformity", "sigma": 0.1, "t0s": [0, 10, 50],
                              "directions": {"list": [[1.0], [-1.0]]}, "horizon": horizon}]}),
    );
    let out = tmp.join("out");
    let o = pelab(&["uniformity", "--config", cfg.to_str().unwrap()], &out);
    (code(&o), read_json(&out.join("00_uniformity.json")))
}

#[test]
fn inverse_time_decay_is_not_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let (c, r) = uniformity(json!({"name": "inverse_time_decay"}), 500.0, tmp.path());
    assert_eq!(c, 0);
    assert_eq!(r["verdict"], "non_uniform");
    for (s, t0) in r["settling"].as_array().unwrap().iter().zip([0.0, 10.0, 50.0]) {
        let want = 9.0 * (1.0 + t0);
        assert!((s.as_f64().unwrap() - want).abs() <= 0.02 * want, "{s} vs {want}");
    }
    let csv = fs::read_to_string(tmp.path().join("out/00_settling.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t0,direction_index,T"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn exponential_decay_is_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let (c, r) = uniformity(json!({"name": "linear_decay", "params": {"a": 1.0}}), 50.0, tmp.path());
    assert_eq!(c, 0);
    assert_eq!(r["verdict"], "uniform");
    for s in r["settling"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - 10f64.ln()).abs() < 0.05, "{s}");
    }
}

#[test]
fn short_horizon_is_inconclusive_and_still_succeeds() {
    let tmp = tempfile::tempdir().unwrap();
    let (c, r) = uniformity(json!({"name": "linear_decay"}), 1.0, tmp.path());
    assert_eq!(c, 0);
    assert_eq!(r["verdict"], "inconclusive");
}

#[test]
fn rotation_keeps_its_norm_and_zero_stays_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({"name": "rot", "system": {"name": "rotation"},
                "analysis": [{"op": "simulate", "t0s": [0], "x0s": [[1, 0], [0, 0]], "horizon": 20}]}),
    );
    let out = tmp.path().join("out");
    let o = pelab(&["simulate", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out.join("00_simulate.json"));
    let runs = r["runs"].as_array().unwrap();
    assert!((runs[0]["final_norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((runs[0]["max_norm"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(runs[1]["max_norm"].as_f64().unwrap(), 0.0);

    let csv = fs::read_to_string(out.join("00_traj_000.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x1,x2"));
    let zero = fs::read_to_string(out.join("00_traj_001.csv")).unwrap();
    for line in zero.lines().skip(1) {
        assert!(line.split(',').skip(1).all(|f| f.parse::<f64>().unwrap() == 0.0));
    }
    let svg = fs::read_to_string(out.join("00_norms.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("width=\"800\"") && svg.contains("<polyline"));
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &json!({"name": "det", "system": {"name": "gradient_adaptive", "params": {"phi": "s"}},
                "signals": [{"id": "s", "signal": {"kind": "sin"}}],
                "seed": 7,
                "analysis": [{"op": "uniformity", "sigma": 0.2, "t0s": [0, 5],
                              "directions": {"random": 3}, "horizon": 60}]}),
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&pelab(&["uniformity", "--config", cfg.to_str().unwrap()], &a)), 0);
    assert_eq!(
        code(&pelab(&["uniformity", "--config", cfg.to_str().unwrap(), "--threads", "1"], &b)),
        0
    );
    assert_eq!(tree(&a), tree(&b));

    let c = tmp.path().join("c");
    assert_eq!(
        code(&pelab(&["uniformity", "--config", cfg.to_str().unwrap(), "--seed", "8"], &c)),
        0
    );
    assert_ne!(
        fs::read(a.join("00_settling.csv")).unwrap(),
        fs::read(c.join("00_settling.csv")).unwrap()
    );
}

#[test]
fn csv_signal_matches_builtin() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv = String::from("t,phi\n");
    for i in 0..=4000 {
        let t = i as f64 * 0.01;
        csv += &format!("{t},{}\n", t.sin());
    }
    fs::write(tmp.path().join("phi.csv"), csv).unwrap();
    let entry = |id: &str| {
        json!({"op": "classical_pe", "signal": id, "window": 6.283185307179586,
               "t_lo": 0, "t_hi": 30, "count": 5})
    };
    let cfg = write_config(
        tmp.path(),
        &json!({"name": "csv",
                "signals": [{"id": "tab", "signal": {"kind": "csv", "path": "phi.csv", "rows": 1, "cols": 1}},
                            {"id": "ref", "signal": {"kind": "sin"}}],
                "analysis": [entry("tab"), entry("ref")]}),
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&pelab(&["certify", "--config", cfg.to_str().unwrap()], &out)), 0);
    let tab = read_json(&out.join("00_classical_pe.json"))["mu"].as_f64().unwrap();
    let reference = read_json(&out.join("01_classical_pe.json"))["mu"].as_f64().unwrap();
    assert!((tab - std::f64::consts::PI).abs() < 1e-2, "{tab}");
    assert!((tab - reference).abs() < 1e-2, "{tab} vs {reference}");
}

#[test]
fn unknown_experiment_lists_the_names() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pelab(&["reproduce", "nosuch"], tmp.path());
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("eg31") && err.contains("necessity"), "{err}");
}

#[test]
fn reproduce_writes_a_passing_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = pelab(&["reproduce", "eg31"], tmp.path());
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(tmp.path().join("eg31/summary.csv")).unwrap();
    assert_eq!(summary.lines().next(), Some("check,value,status"));
    assert_eq!(summary.lines().skip(1).filter(|l| l.ends_with(",PASS")).count(), 3, "{summary}");
}
