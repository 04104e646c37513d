use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dynperc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynperc"))
        .args(args)
        .env_remove("DYNPERC_OUT_DIR")
        .output()
        .expect("spawn dynperc")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn peierls_reports_beta_p() {
    let v = stdout_json(&dynperc(&["contour", "peierls", "--beta", "1", "--L", "3"]));
    assert!((v["beta_p"].as_f64().unwrap() - 3f64.ln() / 2.0).abs() < 1e-15);
    assert_eq!(v["converges"], true);
}

#[test]
fn lss_quarter_on_degree_two() {
    let v = stdout_json(&dynperc(&["rc", "lss", "--q", "0.25", "--delta", "2"]));
    assert_eq!(v["rho"].as_f64().unwrap(), 0.25);
}

#[test]
fn exact_writes_measure_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exact.json",
        r#"{"graph":{"kind":"box","d":2,"size":1,"boundary":"plus"},
            "measure":{"kind":"gibbs","beta":0.5,"h":0.0},
            "compare":{"kind":"gibbs","beta":0.5,"h":0.5}}"#,
    );
    let out = dir.path().join("o");
    let o = dynperc(&["exact", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["dominated_by_compare"]["holds"], true, "{s}");
    assert_eq!(s["fkg_lattice"], true, "{s}");
    let m: Value = serde_json::from_str(&fs::read_to_string(out.join("measure.json")).unwrap()).unwrap();
    assert_eq!(m["probs"].as_array().unwrap().len(), 512);
    assert_eq!(m["labels"].as_array().unwrap().len(), 9);
}

#[test]
fn movability_product_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "mov.json",
        r#"{"graph":{"kind":"box","d":1,"size":1,"boundary":"free"},
            "mu1":{"kind":"product","p":0.3},"mu2":{"kind":"product","p":0.6},
            "direction":"down"}"#,
    );
    let v = stdout_json(&dynperc(&["movability", "--config", &cfg]));
    assert!((v["eps_max"].as_f64().unwrap() - 0.5).abs() < 1e-5, "{v}");
}

#[test]
fn simulate_is_reproducible_and_writes_events() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"graph":{"kind":"torus","d":2,"size":4},"rates":{"family":"contact","lambda":2.0},
            "init":{"mode":"ones"},"horizon":2.0,"replicas":3,"seed":11}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = dynperc(&["simulate", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ea = fs::read_to_string(a.join("events.jsonl")).unwrap();
    assert_eq!(ea, fs::read_to_string(b.join("events.jsonl")).unwrap());
    let first: Value = serde_json::from_str(ea.lines().next().unwrap()).unwrap();
    for key in ["t", "site", "state"] {
        assert!(first.get(key).is_some());
    }
}

#[test]
fn couple_audits_have_no_violations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "couple.json",
        r#"{"graph":{"kind":"torus","d":2,"size":4},"rates":{"family":"scaled_contact","a":1.5,"b":1.5},
            "init":{"mode":"ones"},
            "coupling":{"kind":"prop41","rates2":{"family":"contact","lambda":2.0},"horizon":1.0},
            "replicas":20,"seed":5}"#,
    );
    let v = stdout_json(&dynperc(&["couple", "--config", &cfg]));
    assert_eq!(v["violations"], 0);
    assert!((v["parameters"]["eps2"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["parameters"]["eps3"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!(v["parameters"]["eps"].as_f64().unwrap() > 0.0);
}

#[test]
fn percolation_summary_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "perc.json",
        r#"{"graph":{"kind":"box","d":2,"size":2,"boundary":"plus"},
            "spec":{"family":"glauber","beta":0.4,"h":0.0},
            "crossing":{"state":true,"kind":{"kind":"origin_to_boundary","l":2}},
            "event":"always","tau":0.5,"replicas":50,"seed":3,"init":{"mode":"burnin","t_b":2.0}}"#,
    );
    let v = stdout_json(&dynperc(&["percolation", "--config", &cfg, "--seed", "4"]));
    assert_eq!(v["seed"], 4);
    assert_eq!(v["replicas"], 50);
    let e = v["estimate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&e));
}

#[test]
fn contour_flipmap_on_unit_square() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "flip.json",
        r#"{"graph":{"kind":"box","d":2,"size":2,"boundary":"plus"},
            "contour":[[-1,-1],[1,-1],[1,1],[-1,1]],"beta":0.7,"samples":50,"seed":1}"#,
    );
    let v = stdout_json(&dynperc(&["contour", "flipmap", "--config", &cfg]));
    assert_eq!(v["pass"], true, "{v}");
}

#[test]
fn rc_check93_exact_on_two_by_two() {
    let v = stdout_json(&dynperc(&[
        "rc",
        "check93",
        "--box",
        r#"{"kind":"box","d":2,"sides":[2,2],"boundary":"plus"}"#,
        "--p",
        "0.7",
        "--eps",
        "0.1",
    ]));
    assert_eq!(v["pass"], true, "{v}");
    assert_eq!(v["details"]["mode"], "exact");
}

#[test]
fn experiment_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.json",
        r#"{"experiment":"lemma1_2_sandwich","graph":{"kind":"box","d":2,"size":1,"boundary":"free"},
            "params":{"beta":0.5,"p":0.9,"h_grid":[-3.0,0.0,3.0]},"seed":1}"#,
    );
    let a = stdout_json(&dynperc(&["experiment", "--config", &cfg]));
    let b = stdout_json(&dynperc(&["experiment", "--config", &cfg]));
    assert_eq!(a, b);
    assert_eq!(a["experiment"], "lemma1_2_sandwich");
    assert!(a["config"].is_object());

    let out = dir.path().join("csv");
    let o = dynperc(&["experiment", "--config", &cfg, "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("table.csv")).unwrap();
    assert!(csv.starts_with("h,"), "{csv}");
}

#[test]
fn out_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "exp.json",
        r#"{"experiment":"lemma1_2_sandwich","graph":{"kind":"box","d":2,"size":1,"boundary":"free"},
            "params":{"beta":0.5,"p":0.9,"h_grid":[0.0]},"seed":1}"#,
    );
    let out = dir.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_dynperc"))
        .args(["experiment", "--config", &cfg])
        .env("DYNPERC_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.json").exists());
}

#[test]
fn invalid_experiment_config_lists_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"experiment":"thm1_9_contact","graph":{"kind":"torus","d":2,"size":4},
            "params":{},"replicas":0,"seed":1}"#,
    );
    let o = dynperc(&["experiment", "--config", &cfg]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    for field in ["replicas", "lambda1", "lambda2"] {
        assert!(err.contains(field), "{err}");
    }
}
