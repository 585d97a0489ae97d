use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polarsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarsim"))
        .args(args)
        .env_remove("POLARSIM_SEED")
        .output()
        .expect("spawn polarsim")
}

fn ok(args: &[&str]) -> Output {
    let out = polarsim(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    let base = ["simulate", "--n", "5", "--d", "3", "--sample-every", "50"];
    for (dir, seed) in [(&a, "11"), (&b, "11"), (&c, "12")] {
        let mut args = base.to_vec();
        args.extend(["--seed", seed, "--out", s(dir)]);
        ok(&args);
    }
    for f in ["trace.csv", "final.json", "initial.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_ne!(
        fs::read(a.join("initial.json")).unwrap(),
        fs::read(c.join("initial.json")).unwrap()
    );
    let m = json(&a.join("manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["seed"], 11);
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&[
        "simulate",
        "--n",
        "4",
        "--seed",
        "3",
        "--sample-every",
        "10",
        "--out",
        s(&a),
    ]);
    ok(&["rerun", s(&a.join("manifest.json")), "--out", s(&b)]);
    let outputs = json(&a.join("manifest.json"))["outputs"]
        .as_array()
        .unwrap()
        .clone();
    assert!(!outputs.is_empty());
    for f in outputs {
        let f = f.as_str().unwrap();
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn seed_is_read_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    let st = Command::new(env!("CARGO_BIN_EXE_polarsim"))
        .args(["simulate", "--n", "3", "--out", s(&out)])
        .env("POLARSIM_SEED", "99")
        .output()
        .unwrap();
    assert!(st.status.success());
    assert_eq!(json(&out.join("manifest.json"))["seed"], 99);
}

#[test]
fn bad_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        polarsim(&["simulate", "--rule", "bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(polarsim(&["simulate", "--n", "0"]).status.code(), Some(2));
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"agents\": 3").unwrap();
    assert_eq!(
        polarsim(&["analyze", "--init", s(&bad)]).status.code(),
        Some(2)
    );
    assert_eq!(polarsim(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn collapse_rejects_a_single_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let init = tmp.path().join("one.json");
    fs::write(
        &init,
        r#"{"d": 2, "alpha": 1.0, "opinions": [[1.0, 0.0], [0.6, 0.8], [0.8, 0.6]]}"#,
    )
    .unwrap();
    let out = polarsim(&[
        "construct",
        "collapse",
        "--init",
        s(&init),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn executed_constructions_verify() {
    let tmp = tempfile::tempdir().unwrap();
    for (verb, n, d) in [
        ("to-inactive", "6", "3"),
        ("tighten", "4", "3"),
        ("collapse", "4", "4"),
    ] {
        let dir = tmp.path().join(verb);
        ok(&[
            "construct",
            verb,
            "--n",
            n,
            "--d",
            d,
            "--seed",
            "5",
            "--execute",
            "--out",
            s(&dir),
        ]);
        assert_eq!(json(&dir.join("verify.json"))["passed"], true, "{verb}");
        assert!(
            !json(&dir.join("schedule.json"))["steps"]
                .as_array()
                .unwrap()
                .is_empty(),
            "{verb}"
        );
    }
    let c = json(&tmp.path().join("tighten/verify.json"))["details"]["contraction_factor"]
        .as_f64()
        .unwrap();
    assert!(c < 1.0);
}

#[test]
fn antipodal_ensemble_is_polarized_at_once() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("ens");
    ok(&[
        "ensemble",
        "--n",
        "4",
        "--init-kind",
        "antipodal",
        "--runs",
        "2",
        "--out",
        s(&dir),
    ]);
    let r = json(&dir.join("ensemble.json"));
    assert_eq!(r["runs"], 2);
    assert_eq!(r["polarized_fraction"], 1.0);
    assert_eq!(r["median_steps"], 0.0);
}

#[test]
fn lab_reports_are_written() {
    let tmp = tempfile::tempdir().unwrap();
    let tc = tmp.path().join("tc");
    ok(&[
        "lab",
        "two-chain",
        "--trials",
        "200",
        "--seed",
        "1",
        "--out",
        s(&tc),
    ]);
    let r = json(&tc.join("two_chain.json"));
    assert_eq!(r["trials"], 200);
    assert!(r["estimate"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());

    let az = tmp.path().join("az");
    ok(&[
        "lab",
        "azuma",
        "--t",
        "50,200",
        "--trials",
        "2000",
        "--out",
        s(&az),
    ]);
    let r = json(&az.join("azuma.json"));
    assert_eq!(r.as_array().unwrap().len(), 2);

    let dp = tmp.path().join("dp");
    ok(&["lab", "dprime-scan", "--configs", "40", "--out", s(&dp)]);
    assert!(json(&dp.join("dprime_scan.json"))["violations"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn analyze_reads_a_simulated_state() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    ok(&[
        "simulate",
        "--n",
        "4",
        "--init-kind",
        "antipodal",
        "--out",
        s(&dir),
    ]);
    let report = tmp.path().join("report.json");
    let out = ok(&[
        "analyze",
        "--init",
        s(&dir.join("final.json")),
        "--out",
        s(&report),
    ]);
    let printed: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed, json(&report));
}

#[test]
fn constants_json_has_the_table() {
    let out = ok(&["constants", "--json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
    assert!(!v.as_object().unwrap().is_empty());
}
