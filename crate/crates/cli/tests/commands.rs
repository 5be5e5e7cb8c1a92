use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn dslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dslab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const HARMONIC: &str = "[psi]\nkind = \"power_law\"\nc = 1\ntau = 1\n";

#[test]
fn measure_example() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "m.toml",
        "n = 2\nm = 1\nq = [2, 4]\nepsilon = \"1/8\"\n",
    );
    let rep = report(&dslab(&["measure", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rep["result"]["measure"], json!({ "num": "1", "den": "8" }));
    assert_eq!(rep["format_version"], "dslab-report/1");
    assert_eq!(rep["config"]["epsilon"], "1/8");
}

#[test]
fn series_example_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "s.toml",
        &format!("n = 1\nm = 1\nQ = 100\n{HARMONIC}"),
    );
    let rep = report(&dslab(&[
        "series",
        "ds",
        "--config",
        cfg.to_str().unwrap(),
        "--Q",
        "4",
    ]));
    // φ(q)/q² summed over q ≤ 4: 1 + 1/4 + 2/9 + 2/16
    assert_eq!(
        rep["result"]["partial_sum"],
        json!({ "num": "115", "den": "72" })
    );
    assert_eq!(rep["config"]["Q"], 4);
    let rep = report(&dslab(&[
        "series",
        "khintchine",
        "--config",
        cfg.to_str().unwrap(),
        "--Q",
        "4",
    ]));
    assert_eq!(
        rep["result"]["partial_sum"],
        json!({ "num": "25", "den": "12" })
    );
}

#[test]
fn intersect_of_independent_directions() {
    let dir = tempfile::tempdir().unwrap();
    let text = "n = 2\nm = 1\n[[sets]]\nq = [2, 0]\nepsilon = \"1/4\"\n[[sets]]\nq = [0, 3]\nepsilon = \"1/4\"\n";
    let cfg = config(dir.path(), "i.toml", text);
    let rep = report(&dslab(&["intersect", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rep["result"]["measure"], json!({ "num": "1", "den": "12" }));
    assert_eq!(
        rep["result"]["measure"],
        rep["result"]["product_of_measures"]
    );
}

#[test]
fn overlap_scan_emits_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "o.toml",
        "Q = 6\n[psi]\nkind = \"power_law\"\nc = \"1/4\"\ntau = 1\n",
    );
    let out = dslab(&["overlap-scan", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let lines: Vec<Value> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["pairs"], 15);
    assert_eq!(lines.len(), 16);
    assert!(lines[1..]
        .iter()
        .all(|l| l.get("k").is_some() && l.get("M").is_some()));
}

#[test]
fn window_and_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "w.toml",
        "m = 1\nX = 1\nQ = 500\n[psi]\nkind = \"power_law\"\nc = \"1/20\"\ntau = 0\n",
    );
    let rep = report(&dslab(&["window", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rep["result"]["window"]["outcome"], "found");
    let cfg = config(
        dir.path(),
        "c.toml",
        "N = 6\neta = \"1/10\"\nsamples = 20000\n",
    );
    let rep = report(&dslab(&[
        "counterexample",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
    ]));
    assert_eq!(rep["result"]["sum"], json!({ "num": "2", "den": "5" }));
    assert_eq!(
        rep["result"]["union_exact"],
        json!({ "num": "1", "den": "5" })
    );
}

#[test]
fn randomized_commands_need_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "h.toml",
        &format!("n = 1\nm = 1\nQ = 10\nK = 1\nsamples = 10\n{HARMONIC}"),
    );
    let out = dslab(&["mc", "hit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_configs_are_reported_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "bad.toml", "n = 1\nbogus = 3\n");
    let out = dslab(&["measure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("bogus"));
    // a precondition error from the library keeps its kind
    let cfg = config(
        dir.path(),
        "z.toml",
        "n = 1\nm = 1\nq = [0]\nepsilon = \"1/8\"\n",
    );
    let out = dslab(&["measure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "domain");
}

#[test]
fn lemmas_pass_and_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "l.toml", "samples = 20000\n");
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    let cfg = cfg.to_str().unwrap();
    let a = dslab(&[
        "lemmas",
        "--config",
        cfg,
        "--seed",
        "1",
        "--out",
        out_a.to_str().unwrap(),
    ]);
    let b = dslab(&[
        "lemmas",
        "--config",
        cfg,
        "--seed",
        "1",
        "--out",
        out_b.to_str().unwrap(),
        "--threads",
        "3",
    ]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(b.status.code(), Some(0));
    let (ta, tb) = (
        std::fs::read(&out_a).unwrap(),
        std::fs::read(&out_b).unwrap(),
    );
    assert_eq!(ta, tb);
    let rep: Value = serde_json::from_slice(&ta).unwrap();
    assert_eq!(rep["result"]["passed"], true);
    assert!(rep["config"].get("threads").is_none());
}
