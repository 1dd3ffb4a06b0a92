use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use fracorder_core::inverse::observation_curve;
use fracorder_reference::{gamma_reference, mittag_leffler_reference};
use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        serde_json::from_slice(&std::fs::read(self.out.join(name)).unwrap()).unwrap()
    }

    fn csv(&self, name: &str) -> (Vec<String>, Vec<Vec<f64>>) {
        let mut r = csv::Reader::from_path(self.out.join(name)).unwrap();
        let header = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
        (header, rows)
    }
}

fn fracorder(dir: &Path, args: &[&str]) -> Run {
    let out = dir.join("out");
    let output = Command::new(env!("CARGO_BIN_EXE_fracorder"))
        .args(args)
        .args(["--out", out.to_str().unwrap()])
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    Run { code: output.status.code().unwrap(), stderr: String::from_utf8_lossy(&output.stderr).into(), out }
}

/// Writes `config.json` into a fresh directory.
fn setup(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("config.json"), config).unwrap();
    dir
}

fn neumann(phi: &str, extra: &str) -> String {
    format!(
        r#"{{"problem": {{"basis": "neumann_cosine_1d", "phi": {{"kind": "coefficients", "data": {phi}}}}},
            "t0": 1.0, "num_modes": 4, "output_dir": "unused"{extra}}}"#
    )
}

fn get(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn forward_single_mode_is_flat() {
    let dir = setup(&neumann("[1.0]", r#", "rho": 0.6, "grid": {"x_points": 11, "t": [0.5, 2.0]}"#));
    let run = fracorder(dir.path(), &["forward", "--config", "config.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let (header, rows) = run.csv("forward.csv");
    assert_eq!(header, ["x", "t", "u", "t_pow_1_minus_rho_u"]);
    assert_eq!(rows.len(), 22);
    let g = gamma_reference(0.6, 40);
    for r in rows {
        let want = r[1].powf(-0.4) / (g * PI.sqrt());
        assert!((r[2] - want).abs() <= 1e-14 * want);
        assert!((r[3] - 1.0 / (g * PI.sqrt())).abs() <= 1e-14);
    }
    let report = run.json("report.json");
    assert_eq!(report["num_modes_used"], 1);
    assert_eq!(get(&report, "truncation_bound"), 0.0);
}

#[test]
fn forward_two_term_example() {
    // φ = 1 + cos x in orthonormal coefficients.
    let phi = format!("[{}, {}]", PI.sqrt(), (PI / 2.0).sqrt());
    let dir = setup(&neumann(&phi, r#", "rho": 0.5, "grid": {"x_points": 9, "t": [1.0, 3.0]}"#));
    let run = fracorder(dir.path(), &["forward", "--config", "config.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for r in run.csv("forward.csv").1 {
        let (x, t) = (r[0], r[1]);
        let want = (1.0 / gamma_reference(0.5, 40) + mittag_leffler_reference(0.5, 0.5, -t.sqrt(), 40).unwrap() * x.cos())
            / t.sqrt();
        assert!((r[2] - want).abs() <= 1e-14, "x={x} t={t}");
    }
}

#[test]
fn forward_rejects_negative_time() {
    let dir = setup(&neumann("[1.0]", r#", "rho": 0.5, "grid": {"t": [0.5, -1.0]}"#));
    let run = fracorder(dir.path(), &["forward", "--config", "config.json"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("-1"));
}

#[test]
fn observe_examples() {
    let dir = setup(&neumann("[1.0, 0.2]", ""));
    let run = fracorder(dir.path(), &["observe", "--config", "config.json", "--rho", "0.5"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let obs = run.json("observation.json");
    assert!((get(&obs, "d0") - 0.564_189_583_547_756_3).abs() < 1e-16);
    assert_eq!(get(&obs, "phi1"), 1.0);
    assert!((get(&obs["unit_first_mode"], "phi1") - PI.sqrt()).abs() < 1e-15);

    let run = fracorder(dir.path(), &["observe", "--config", "config.json", "--rho", "0.9"]);
    let ratio = get(&run.json("observation.json"), "ratio");
    assert!(ratio > 0.0 && ratio < 1.0);
}

#[test]
fn observe_needs_zero_first_eigenvalue() {
    let dir = setup(
        r#"{"problem": {"basis": "abstract", "eigendata_path": "eig.json"}, "rho": 0.5, "t0": 1.0,
            "num_modes": 3, "output_dir": "unused"}"#,
    );
    std::fs::write(dir.path().join("eig.json"), r#"{"eigenvalues": [0.1, 1, 4], "phi": [1, 0.5, 0.2]}"#).unwrap();
    let run = fracorder(dir.path(), &["observe", "--config", "config.json"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("first eigenvalue"));

    std::fs::write(dir.path().join("eig.json"), r#"{"eigenvalues": [0, 1, 4], "phi": [1, 0.5, 0.2]}"#).unwrap();
    let run = fracorder(dir.path(), &["observe", "--config", "config.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.json("observation.json").get("unit_first_mode").is_none());
}

#[test]
fn invert_examples() {
    let dir = setup(&neumann("[2.0]", ""));
    let d0 = (2.0 * 0.564_189_583_547_756_3f64).to_string();
    let run = fracorder(dir.path(), &["invert", "--config", "config.json", "--d0", &d0]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let inv = run.json("inversion.json");
    assert!((get(&inv, "rho_hat") - 0.5).abs() < 1e-14);
    assert_eq!(inv["solvable"], true);
    assert!(get(&inv, "sensitivity") > 0.0);

    let run = fracorder(dir.path(), &["invert", "--config", "config.json", "--d0", "3.0"]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("d0/phi1 < 1"), "{}", run.stderr);

    let run = fracorder(dir.path(), &["invert", "--config", "config.json", "--d0", "1.6", "--t0", "2"]);
    assert_eq!(run.code, 0);
    let rho = get(&run.json("inversion.json"), "rho_hat");
    assert!((observation_curve(rho, 2.0).unwrap() - 0.8).abs() < 1e-14);
}

#[test]
fn invert_from_observation_file() {
    let dir = setup(&neumann("[1.0]", ""));
    std::fs::write(dir.path().join("obs.json"), r#"{"t0": 2.0, "d0": 0.4, "phi1": 0.5}"#).unwrap();
    let run = fracorder(dir.path(), &["invert", "--config", "config.json", "--observation", "obs.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let inv = run.json("inversion.json");
    assert_eq!(get(&inv, "t0"), 2.0);
    assert!((get(&inv, "ratio") - 0.8).abs() < 1e-15);

    std::fs::write(dir.path().join("obs.json"), r#"{"t0": 1.0, "d0": -0.1, "phi1": 1.0}"#).unwrap();
    let run = fracorder(dir.path(), &["invert", "--config", "config.json", "--observation", "obs.json"]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("0 < d0/phi1"));
}

#[test]
fn config_errors_exit_two() {
    let dir = setup(&neumann("[1.0]", r#", "rho": 0.5, "d0": 0.3"#));
    assert_eq!(fracorder(dir.path(), &["roundtrip", "--config", "config.json"]).code, 2);
    assert_eq!(fracorder(dir.path(), &["invert", "--config", "config.json"]).code, 2);
    assert_eq!(fracorder(dir.path(), &["roundtrip", "--config", "missing.json"]).code, 2);
    let dir = setup(&neumann("[1.0]", r#", "rho": 0.5"#));
    assert_eq!(fracorder(dir.path(), &["observe", "--config", "config.json", "--t0", "0.5"]).code, 2);
    assert_eq!(fracorder(dir.path(), &["observe", "--config", "config.json", "--rho", "1.2"]).code, 2);
}

#[test]
fn roundtrip_examples() {
    let dir = setup(&neumann("[1.0, -0.3]", ""));
    let run = fracorder(dir.path(), &["roundtrip", "--config", "config.json", "--rho", "0.5"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.json("report.json");
    assert!(get(&report, "abs_error") <= 1e-9);
    assert!(report["warnings"].as_array().unwrap().is_empty());
    assert!(run.out.join("observation.json").exists() && run.out.join("inversion.json").exists());

    let run = fracorder(dir.path(), &["roundtrip", "--config", "config.json", "--rho", "0.33", "--t1", "7"]);
    let c = &run.json("report.json")["consistency"];
    assert!(get(c, "difference") <= 1e-8);
    assert_eq!(c["consistent"], true);

    let run = fracorder(dir.path(), &["roundtrip", "--config", "config.json", "--rho", "0.999"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let warnings = run.json("report.json")["warnings"].as_array().unwrap().clone();
    assert!(warnings.iter().any(|w| w.as_str().unwrap().contains("boundary")), "{warnings:?}");
}

#[test]
fn verify_passes_and_emits_curve() {
    let dir = tempfile::tempdir().unwrap();
    let run = fracorder(dir.path(), &["verify", "--t0", "3"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = run.json("report.json");
    assert_eq!(report["failed"], 0);
    assert!(report["cases"].as_array().unwrap().len() > 40);
    let (header, rows) = run.csv("curve.csv");
    assert_eq!(header, ["rho", "g", "dg_drho"]);
    assert_eq!(rows.len(), 999);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1] && w[0][2] > 0.0));
    assert_eq!(rows[499][1], observation_curve(0.5, 3.0).unwrap());
}

#[test]
fn verify_detects_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let run = fracorder(dir.path(), &["verify", "--inject-fault", "ml-perturbation"]);
    assert_eq!(run.code, 5);
    assert!(run.stderr.contains("FAIL [special]"));
    assert!(run.json("report.json")["failed"].as_u64().unwrap() > 0);
}
