use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(dir: &Path, verb: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{verb}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .arg(verb)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .env_remove("BERGMAN_LAB_CACHE")
        .output()
        .unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap()
}

#[test]
fn verify_on_flat_jets_passes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"input": {:?}}}"#, fixture("flat_jets.json"));
    let o = run(d.path(), "verify", &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("out/verify.json"));
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 11);
}

#[test]
fn verify_on_general_jets_passes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"input": {:?}, "q_max": 1, "r_max": 3}}"#, fixture("general_rank2.json"));
    let o = run(d.path(), "verify", &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn expand_reports_closed_form_agreement() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"input": {:?}, "q_max": 1, "r_max": 4}}"#, fixture("kahler_random.json"));
    let o = run(d.path(), "expand", &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("out/expand.json"));
    let checks = v["checks"].as_array().unwrap();
    let b01 = checks.iter().find(|c| c["name"] == "b01 = closed form").unwrap();
    assert_eq!(b01["ok"], true);
    assert_eq!(b01["defect"], 0.0);
    assert!(v["kernels"].as_array().unwrap().iter().any(|k| k["q"] == 0 && k["r"] == 2));
    let csv = fs::read_to_string(d.path().join("out/expand.csv")).unwrap();
    assert!(csv.starts_with("q,r,entry,value,re,im\n"));
}

#[test]
fn float_mode_expand() {
    let d = tempfile::tempdir().unwrap();
    let cfg = format!(r#"{{"input": {:?}, "mode": "float", "q_max": 1, "r_max": 2}}"#, fixture("kahler_random.json"));
    let o = run(d.path(), "expand", &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(d.path().join("out/expand.json"))["mode"], "float");
}

#[test]
fn spectrum_reports_the_riemann_roch_dimension() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "spectrum", r#"{"p": [8]}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("out/spectrum.json"));
    assert_eq!(v["reports"][0]["gap"]["d_p"], 8);
    let csv = fs::read_to_string(d.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.starts_with("p,index,eigenvalue\n8,0,"));
}

#[test]
fn outputs_are_deterministic_and_hashed() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"p": [8, 12]}"#;
    assert!(run(d.path(), "dos", cfg, &["--seed", "3"]).status.success());
    let first = fs::read(d.path().join("out/dos.csv")).unwrap();
    assert!(run(d.path(), "dos", cfg, &["--seed", "3", "--threads", "1"]).status.success());
    assert_eq!(first, fs::read(d.path().join("out/dos.csv")).unwrap());

    let m = read_json(d.path().join("out/manifest.json"));
    assert_eq!(m["seed"], 3);
    assert_eq!(m["threads"], 1);
    for f in m["outputs"].as_array().unwrap() {
        let bytes = fs::read(d.path().join("out").join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert_eq!(m["inputs"].as_array().unwrap().len(), 1);
}

#[test]
fn cache_round_trip_gives_identical_output() {
    let d = tempfile::tempdir().unwrap();
    let cache = d.path().join("cache");
    let cfg = d.path().join("c.json");
    fs::write(&cfg, r#"{"p": [12]}"#).unwrap();
    let go = |out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
            .args(["bergman", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(d.path().join(out))
            .env("BERGMAN_LAB_CACHE", &cache)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(d.path().join(out).join("bergman.csv")).unwrap()
    };
    let a = go("a");
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(a, go("b"));
}

#[test]
fn invalid_input_exits_with_2() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.json");
    fs::write(&bad, r#"{"n": 1, "a": [1]}"#).unwrap();
    let o = run(d.path(), "verify", &format!(r#"{{"input": {bad:?}}}"#), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "validation");

    let o = run(d.path(), "spectrum", r#"{"p": [8], "grid": 10}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(d.path(), "spectrum", r#"{"p": [8], "unknown": 1}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unresolved_gap_exits_with_3() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "spectrum", r#"{"p": [9], "grid": 24, "sides": [0.2, 5]}"#, &[]);
    assert_eq!(o.status.code(), Some(3));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "numerical");
    assert_eq!(e["exit"], 3);
}

#[test]
fn projective_line_embedding() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), "embed", r#"{"p": [4, 8, 16], "geometry": "cp1"}"#, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(d.path().join("out/embed.json"));
    for e in v["sup_error"].as_array().unwrap() {
        assert!(e.as_f64().unwrap() < 1e-12);
    }
}
