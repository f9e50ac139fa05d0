//! End-to-end runs of the `fio` binary against golden JSON fixtures.
//!
//! Regenerate fixtures with `UPDATE_GOLDEN=1 cargo test -p fio-cli`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fio_core::io::{decode_grid, decode_symbol};
use serde_json::Value;
use tempfile::TempDir;

fn fio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fio")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = fio(args);
    assert!(
        out.status.success(),
        "fio {args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn close(a: &Value, b: &Value, at: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-9 * (1.0 + y.abs()) {
                Ok(())
            } else {
                Err(format!("{at}: {x} vs golden {y}"))
            }
        }
        (Value::Array(xs), Value::Array(ys)) => {
            if xs.len() != ys.len() {
                return Err(format!("{at}: length {} vs golden {}", xs.len(), ys.len()));
            }
            xs.iter().zip(ys).enumerate().try_for_each(|(i, (x, y))| close(x, y, &format!("{at}[{i}]")))
        }
        (Value::Object(xs), Value::Object(ys)) => {
            let mut kx: Vec<_> = xs.keys().collect();
            let mut ky: Vec<_> = ys.keys().collect();
            kx.sort();
            ky.sort();
            if kx != ky {
                return Err(format!("{at}: keys {kx:?} vs golden {ky:?}"));
            }
            xs.iter().try_for_each(|(k, x)| close(x, &ys[k], &format!("{at}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{at}: {a} vs golden {b}")),
    }
}

/// Compares every JSON document in `text` (one per line, or one pretty
/// document) with the fixture, numbers at 1e−9.
fn check_golden(name: &str, text: &str) {
    let docs: Vec<Value> = if text.trim_start().starts_with('{') && text.lines().count() > 1 && text.contains("\n  ") {
        vec![serde_json::from_str(text).expect("valid JSON")]
    } else {
        text.lines().map(|l| serde_json::from_str(l).expect("valid JSON line")).collect()
    };
    let actual = Value::Array(docs);
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&actual).unwrap() + "\n").unwrap();
        return;
    }
    let golden: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap_or_else(|_| {
        panic!("missing fixture {}; run with UPDATE_GOLDEN=1", path.display())
    }))
    .unwrap();
    if let Err(e) = close(&actual, &golden, name) {
        panic!("golden mismatch: {e}");
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_embeds_schema() {
    let out = ok(&["--version"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("config schema 1"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [&["frobnicate"][..], &["exponents", "--n", "2"], &["norm", "--in"], &["exponents", "--n", "x", "--p", "2", "--r", "1"]] {
        let out = fio(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    // Domain validation is also exit 1.
    let out = fio(&["exponents", "--n", "2", "--p", "1.5", "--r", "1", "--delta", "0.7", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
}

#[test]
fn exponents_sheet() {
    let out = ok(&["exponents", "--n", "3", "--p", "4", "--r", "1", "--eps", "0.1", "--delta", "0.5", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["s_p"], 0.25);
    assert!((v["sigma"].as_f64().unwrap() - 0.1).abs() < 1e-15);
    check_golden("exponents_n3_p4.json", &text);
    let plain = ok(&["exponents", "--n", "2", "--p", "2", "--r", "2", "--eps", "0.1"]);
    assert!(String::from_utf8_lossy(&plain.stdout).contains("sigma"));
}

#[test]
fn gen_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.fiog");
    let b = dir.path().join("b.fiog");
    for p in [&a, &b] {
        ok(&["gen", "--kind", "lacunary", "--seed", "42", "-N", "16", "--r", "1", "--levels", "3", "--out", s(p)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.fiog.json")).unwrap()).unwrap();
    assert_eq!(side["format"], "FIOG");
    assert_eq!(side["N"], 16);
    assert_eq!(side["domain"], "space");
    let data = decode_grid(&std::fs::read(&a).unwrap()).unwrap();
    assert_eq!(data.grid().size(), 16);

    let c = dir.path().join("c.fiog");
    ok(&["gen", "--kind", "plane-wave", "--k", "-2,3", "-N", "8", "--frequency", "--out", s(&c)]);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("c.fiog.json")).unwrap()).unwrap();
    assert_eq!(side["domain"], "frequency");
    let bad = fio(&["gen", "--kind", "plane-wave", "--k", "1", "-N", "8", "--out", s(&c)]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn identity_symbol_applies_as_identity() {
    let dir = TempDir::new().unwrap();
    let (id, f, g) = (dir.path().join("id.fios"), dir.path().join("f.fiog"), dir.path().join("g.fiog"));
    ok(&["gen", "--kind", "identity", "-N", "16", "--out", s(&id)]);
    ok(&["gen", "--kind", "lacunary", "-N", "32", "--seed", "3", "--levels", "3", "--out", s(&f)]);
    // Grid mismatch between symbol and function is a validation error.
    assert_eq!(fio(&["apply", "--symbol", s(&id), "--in", s(&f), "--out", s(&g)]).status.code(), Some(1));
    ok(&["gen", "--kind", "identity", "-N", "32", "--out", s(&id)]);
    for path in ["direct", "separable"] {
        ok(&["apply", "--symbol", s(&id), "--in", s(&f), "--out", s(&g), "--path", path]);
        let fv = decode_grid(&std::fs::read(&f).unwrap()).unwrap().into_function();
        let gv = decode_grid(&std::fs::read(&g).unwrap()).unwrap().into_function();
        assert!(fv.max_abs_diff(&gv) <= 1e-12, "{path}");
    }
    ok(&["apply", "--symbol", s(&id), "--in", s(&f), "--out", s(&g), "--adjoint"]);
}

#[test]
fn norms_match_golden() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.fiog");
    ok(&["gen", "--kind", "lacunary", "--seed", "7", "-N", "32", "--levels", "4", "--out", s(&f)]);
    let mut all = String::new();
    for args in [
        vec!["--space", "lp", "--p", "3"],
        vec!["--space", "sobolev", "--s", "0.5", "--p", "1.5"],
        vec!["--space", "zygmund", "--r", "1"],
        vec!["--space", "hfio", "--p", "1.5", "--s", "0.25", "--quad", "32"],
        vec!["--space", "hfio-alt", "--p", "4", "--quad", "32"],
    ] {
        let mut full = vec!["norm", "--in", s(&f)];
        full.extend(args);
        let out = ok(&full);
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        all.push_str(&serde_json::to_string(&v).unwrap());
        all.push('\n');
    }
    check_golden("norms_lacunary_seed7.json", &all);
    let out_path = dir.path().join("n.json");
    ok(&["norm", "--in", s(&f), "--space", "lp", "--p", "2", "--json", s(&out_path)]);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(v["space"], "lp");
}

#[test]
fn smooth_and_seminorm() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.fios");
    let (sharp, flat) = (dir.path().join("s.fios"), dir.path().join("f.fios"));
    ok(&["gen", "--kind", "multiplication", "--seed", "5", "-N", "16", "--levels", "3", "--out", s(&a)]);
    ok(&["smooth", "--in", s(&a), "--beta", "0.5", "--out-sharp", s(&sharp), "--out-flat", s(&flat)]);
    let orig = decode_symbol(&std::fs::read(&a).unwrap()).unwrap();
    let sh = decode_symbol(&std::fs::read(&sharp).unwrap()).unwrap();
    let fl = decode_symbol(&std::fs::read(&flat).unwrap()).unwrap();
    assert!(fio_core::symbols::max_abs_diff_of_sum(&orig, &[&sh, &fl]).unwrap() <= 1e-12);

    let out = ok(&["seminorm", "--in", s(&flat), "--r", "1", "--m", "-0.5", "--delta", "0.5", "--l", "1"]);
    check_golden("seminorm_flat_seed5.json", &String::from_utf8(out.stdout).unwrap());
    let bad = fio(&["smooth", "--in", s(&a), "--beta", "1.5", "--out-sharp", s(&sharp), "--out-flat", s(&flat)]);
    assert_eq!(bad.status.code(), Some(1));
}

fn small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("cfg.json");
    let text = format!(
        r#"{{
  "grid": {{"n": 2, "N": 32}},
  "seed": 11,
  "ensemble": {{"count": 3, "k_max": 4}},
  "sandwich": {{"N": 32, "shells": [1, 2, 3], "samples": 4 {extra}}},
  "bound_sweep": {{"sizes": [32], "ps": [1.5, 3.0]}},
  "embedding": {{"sizes": [32], "ps": [1.5, 2.0], "count": 3}},
  "three_lines": {{"sizes": [8], "t_samples": [0.0, 10.0, -10.0], "restarts": 2, "sphere_nodes": 16}}
}}"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn lab_sandwich_report() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    let (out, csv) = (dir.path().join("r.jsonl"), dir.path().join("r.csv"));
    ok(&["lab", "sandwich", "--config", s(&cfg), "--out", s(&out), "--csv", s(&csv)]);
    let text = std::fs::read_to_string(&out).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["record"], "summary");
    assert_eq!(last["passed"], true);
    assert!(last.get("runtime_seconds").is_none());
    let lower = last["checks"].as_array().unwrap().iter().find(|c| c["name"] == "lower_bound").unwrap();
    assert_eq!(lower["passed"], true);
    check_golden("lab_sandwich_small.json", &text);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("id,pass,"));
    assert_eq!(table.lines().count(), text.lines().count());
}

#[test]
fn lab_reports_are_thread_independent() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "");
    for exp in ["pipeline", "bound-sweep", "embedding", "three-lines"] {
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        let one = fio(&["--threads", "1", "lab", exp, "--config", s(&cfg), "--out", s(&a)]);
        let three = fio(&["lab", exp, "--config", s(&cfg), "--out", s(&b), "--threads", "3"]);
        assert_eq!(one.status.code(), three.status.code(), "{exp}");
        assert!(matches!(one.status.code(), Some(0) | Some(2)), "{exp}: {}", String::from_utf8_lossy(&one.stderr));
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{exp}");
        if exp == "pipeline" {
            check_golden("lab_pipeline_small.json", &std::fs::read_to_string(&a).unwrap());
        }
    }
}

#[test]
fn lab_exit_codes() {
    let dir = TempDir::new().unwrap();
    // A pinned constant far from the measured one fails the check: exit 2.
    let cfg = small_config(dir.path(), r#", "pinned_upper": 100.0"#);
    let out = fio(&["lab", "sandwich", "--config", s(&cfg), "--out", s(&dir.path().join("r.jsonl"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("upper_matches_pinned"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"grid": {"n": 2, "N": 32}, "typo": 1}"#).unwrap();
    assert_eq!(fio(&["lab", "pipeline", "--config", s(&bad)]).status.code(), Some(1));
    assert_eq!(fio(&["lab", "pipeline", "--config", s(&dir.path().join("missing.json"))]).status.code(), Some(1));

    let timed = fio(&["lab", "pipeline", "--config", s(&small_config(dir.path(), "")), "--runtime"]);
    let last: Value = serde_json::from_str(String::from_utf8_lossy(&timed.stdout).lines().last().unwrap()).unwrap();
    assert!(last["runtime_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn shipped_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    fio_core::config::Config::from_json(&std::fs::read_to_string(path).unwrap()).unwrap();
}
