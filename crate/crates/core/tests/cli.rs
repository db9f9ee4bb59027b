use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eqlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

fn sorted(names: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn diag(values: &[f64]) -> String {
    let n = values.len();
    let rows: Vec<String> = (0..n)
        .map(|i| {
            let row: Vec<String> = (0..n)
                .map(|j| if i == j { format!("[{}, 0]", values[i]) } else { "[0, 0]".into() })
                .collect();
            format!("[{}]", row.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

#[test]
fn counterexample_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = eqlab(&["counterexample", "--k", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mode"], "counterexample");
    assert_eq!(v["passed"], true);
    let r = &v["result"];
    assert_eq!(
        keys(r),
        sorted(&[
            "k", "sigma_sq", "delta", "d_eff", "purity_omega", "bound_delta",
            "reimann_purity_bound", "tight", "exceeds_purity_bound", "chain_holds",
        ])
    );
    assert!((r["sigma_sq"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert!((r["purity_omega"].as_f64().unwrap() - 0.1).abs() < 1e-9);
    assert!((r["reimann_purity_bound"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    assert_eq!(r["tight"], true);
}

#[test]
fn check_gaps_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // sigma_z (x) I + I (x) diag(0, 1) = diag(1, 2, -1, 0)
    write(dir.path(), "product.json", &diag(&[1.0, 2.0, -1.0, 0.0]));
    write(dir.path(), "good.json", &diag(&[0.0, 1.1, 2.3, 3.6]));

    let out = eqlab(&["check-gaps", "--hamiltonian", "product.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(keys(&v["result"]), sorted(&["dim", "energies", "gaps"]));
    let gaps = &v["result"]["gaps"];
    assert_eq!(keys(gaps), sorted(&["pass", "tolerance", "violations", "near_misses"]));
    let first = &gaps["violations"][0];
    assert_eq!(keys(first), sorted(&["k", "l", "m", "n", "gap_kl", "gap_mn", "mismatch"]));

    let out = eqlab(&["check-gaps", "--hamiltonian", "good.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));

    let out = eqlab(&["check-gaps", "--hamiltonian", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hamiltonian.file"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eqlab(&["nonsense"], dir.path()).status.code(), Some(1));
    assert_eq!(eqlab(&["theorem1"], dir.path()).status.code(), Some(1));
    write(dir.path(), "c.json", r#"{"mode": "sweep"}"#);
    let out = eqlab(&["theorem1", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`mode`"));
}

#[test]
fn theorem1_writes_report_and_series() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "t1.json",
        r#"{
            "mode": "theorem1",
            "seed": 4,
            "hamiltonian": {"ensemble": {"kind": "gue", "dim": 6}},
            "state": {"random_mixed": {"rank": 2}},
            "observable": "random",
            "time_average": {"n_samples": 500},
            "series": {"n_points": 11, "t_max": 5.0},
            "out": "results"
        }"#,
    );
    let out = eqlab(&["theorem1", "--config", "t1.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("results/report.json")).unwrap()).unwrap();
    assert_eq!(keys(&report), sorted(&["mode", "seed", "passed", "result"]));
    assert_eq!(keys(&report["result"]), sorted(&["dim", "theorem1", "sampled_sigma_sq"]));
    assert_eq!(
        keys(&report["result"]["theorem1"]),
        sorted(&[
            "sigma_sq", "delta", "operator_norm", "d_eff", "purity_omega", "bound_delta",
            "bound_norm", "reimann_purity_bound", "tight", "exceeds_purity_bound", "chain_holds",
        ])
    );
    let csv = fs::read_to_string(dir.path().join("results/series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,expectation_re,expectation_im,mean_re,mean_im"));
    assert_eq!(lines.count(), 11);

    let again = eqlab(&["theorem1", "--config", "t1.json", "--out", "second"], dir.path());
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        fs::read(dir.path().join("results/report.json")).unwrap(),
        fs::read(dir.path().join("second/report.json")).unwrap()
    );
}

#[test]
fn subsystem_and_universality_configs() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sub.json",
        r#"{
            "mode": "subsystem",
            "hamiltonian": {"ensemble": {"kind": "gue", "dim": 8}},
            "state": "haar_pure",
            "split": {"d_s": 2, "d_b": 4},
            "time_average": {"n_samples": 400},
            "series": {"n_points": 5}
        }"#,
    );
    let out = eqlab(&["subsystem", "--config", "sub.json", "--seed", "3"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["seed"], 3);
    assert_eq!(
        keys(&v["result"]),
        sorted(&["d_s", "d_b", "d_eff", "gap_valid", "bound", "estimate", "stderr", "holds"])
    );

    write(dir.path(), "h.json", &diag(&[0.0, 1.1, 2.3, 3.6]));
    write(
        dir.path(),
        "uni.json",
        r#"{
            "mode": "universality",
            "hamiltonian": {"file": "h.json"},
            "state": {"eigenmix": {"weights": [0.5, 0.5]}},
            "partition": {"band_edges": [1.7]},
            "band": 0,
            "measurements": ["bands", {"perturbed_bands": {"eta": 0.01, "count": 2}}]
        }"#,
    );
    let out = eqlab(&["universality", "--config", "uni.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = &json(&out)["result"];
    assert_eq!(r["total_outcomes"], 6);
    assert!(r["epsilon"].as_f64().unwrap() < 0.05);

    write(
        dir.path(),
        "cor.json",
        r#"{
            "mode": "corollary",
            "hamiltonian": {"file": "h.json"},
            "state": {"eigenmix": {"weights": [1, 1, 1, 1]}},
            "measurements": [{"random": {"outcomes": 3}}, "energy"]
        }"#,
    );
    let out = eqlab(&["corollary", "--config", "cor.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        keys(&json(&out)["result"]),
        sorted(&[
            "d_eff", "total_outcomes", "weighted_outcomes", "bound_weighted", "bound_count",
            "empirical_avg", "stderr", "holds",
        ])
    );
}

#[test]
fn gue_sweep_has_no_violations_and_ignores_threads() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sweep.json",
        r#"{"mode": "sweep", "seed": 1, "sweep": {"instances": 100, "dims": [16], "ensemble": "gue"}}"#,
    );
    let a = eqlab(&["sweep", "--config", "sweep.json", "--threads", "1", "--out", "a"], dir.path());
    let b = eqlab(&["sweep", "--config", "sweep.json", "--threads", "4", "--out", "b"], dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    let ra = fs::read(dir.path().join("a/report.json")).unwrap();
    assert_eq!(ra, fs::read(dir.path().join("b/report.json")).unwrap());
    let v: Value = serde_json::from_slice(&ra).unwrap();
    let s = &v["result"];
    assert_eq!(s["violation_count"], 0);
    assert_eq!(s["instances"].as_array().unwrap().len(), 100);
    assert!(s["max_ratio"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(
        keys(s),
        sorted(&[
            "seed", "instances", "subsystem", "max_ratio", "violation_count",
            "subsystem_violations", "scaled_distance_quantiles", "scaling",
        ])
    );
}
