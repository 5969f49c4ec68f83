use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn thinobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinobs")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn oracle_config(dir: &Path, nodes: &str, model: &str, amplitude: f64, extra: &str) -> PathBuf {
    let out = dir.join("out");
    let body = format!(
        r#"{{"dim": 2, "nodes_per_axis": {nodes}, "nonlinearity": {{"name": "{model}"}},
            "boundary": {{"generator": "oracle_trace", "amplitude": {amplitude}}},
            "output": {:?} {extra}}}"#,
        out.to_str().unwrap()
    );
    write_config(dir, "run.json", &body)
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[65, 33]", "quadratic", 1.0, "");
    let o = thinobs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in ["field.thob", "frequency.csv", "decay.csv", "frequency.gp", "decay.gp", "blowup.dat", "blowup_3.thob"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let m = manifest(&out);
    assert_eq!(m["format_versions"]["thob"], 1);
    assert_eq!(m["solver"]["status"], "CONVERGED");
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    let v = thinobs(&["validate", "--run", out.to_str().unwrap()]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[33, 17]", "minimal_surface", 0.1, "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = thinobs(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut compared = 0;
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name.ends_with(".thob") || name.ends_with(".csv") {
            assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name}");
            compared += 1;
        }
    }
    assert_eq!(compared, 7);
    assert_eq!(manifest(&a)["config_digest"], manifest(&b)["config_digest"]);
}

#[test]
fn missing_dim_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"nodes_per_axis": [5, 3], "nonlinearity": {"name": "quadratic"},
            "boundary": {"generator": "constant", "value": 1.0}}"#,
    );
    let o = thinobs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`dim`"));
    let cfg = write_config(dir.path(), "broken.json", "{\"dim\": ");
    assert_eq!(code(&thinobs(&["solve", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&thinobs(&["solve", "--config", "/nonexistent/run.json"])), 2);
}

#[test]
fn unknown_generator_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"dim": 2, "nodes_per_axis": [5, 3], "nonlinearity": {"name": "quadratic"},
            "boundary": {"generator": "spline"}}"#,
    );
    let o = thinobs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("boundary") && err.contains("spline"), "{err}");
}

#[test]
fn overrides_are_applied_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[33, 17]", "quadratic", 1.0, "");
    let c = cfg.to_str().unwrap();
    let o = thinobs(&["frequency", "--config", c, "--rho-min", "0.2", "--rho-max", "0.4", "--alpha", "0.25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let csv = std::fs::read_to_string(out.join("frequency.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert_eq!(manifest(&out)["monotonicity"]["alpha"], 0.25);
    assert_eq!(code(&thinobs(&["frequency", "--config", c, "--alpha", "2"])), 2);
    assert_eq!(code(&thinobs(&["decay", "--config", c, "--rho-min", "0.5", "--rho-max", "0.4"])), 2);
    assert_eq!(code(&thinobs(&["run", "--config", c, "--delta", "0.7"])), 2);
}

#[test]
fn seed_changes_the_digest_only_through_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[17, 9]", "quadratic", 1.0, "");
    let c = cfg.to_str().unwrap();
    let mut digests = Vec::new();
    for seed in ["0", "0", "5"] {
        assert_eq!(code(&thinobs(&["solve", "--config", c, "--seed", seed])), 0);
        digests.push(manifest(&dir.path().join("out"))["config_digest"].clone());
    }
    assert_eq!(digests[0], digests[1]);
    assert_ne!(digests[0], digests[2]);
}

#[test]
fn analysis_subcommands_reuse_a_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[33, 17]", "quadratic", 1.0, "");
    let c = cfg.to_str().unwrap();
    let solved = dir.path().join("solved");
    assert_eq!(code(&thinobs(&["solve", "--config", c, "--out", solved.to_str().unwrap()])), 0);
    let field = solved.join("field.thob");
    for (sub, file) in [("frequency", "frequency.csv"), ("decay", "decay.csv"), ("blowup", "blowup_0.thob")] {
        let out = dir.path().join(sub);
        let o = thinobs(&[sub, "--config", c, "--field", field.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(file).exists());
        assert!(!out.join("field.thob").exists());
    }
    let out = dir.path().join("fb");
    let o = thinobs(&["freeboundary", "--config", c, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let m = manifest(&out);
    assert_eq!(m["free_boundary"]["contact_nodes"].as_array().unwrap().len(), 16);
    assert!(m["frequency"].is_null());
}

#[test]
fn non_convergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let extra = r#", "solver": {"method": "projected_gradient", "max_iterations": 2, "initial": "zero"}"#;
    let cfg = oracle_config(dir.path(), "[33, 17]", "quadratic", 1.0, extra);
    let o = thinobs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let m = manifest(&dir.path().join("out"));
    assert_eq!(m["stage_failures"][0]["stage"], "solve");
    assert_eq!(m["solver"]["status"], "NON_CONVERGED");
}

#[test]
fn oracle_grid_matches_solver() {
    let dir = tempfile::tempdir().unwrap();
    let o = thinobs(&["oracle", "--grid", "5x3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["max_field_difference"].as_f64().unwrap() <= 1e-8);
    assert!(v["energy_difference"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["field"].as_array().unwrap().len(), 15);
    assert!(dir.path().join("oracle.thob").exists());
    assert_eq!(code(&thinobs(&["oracle", "--grid", "33x17"])), 2);
    assert_eq!(code(&thinobs(&["oracle", "--grid", "5by3"])), 2);
}

#[test]
fn validate_flags_tampered_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[17, 9]", "quadratic", 1.0, "");
    assert_eq!(code(&thinobs(&["run", "--config", cfg.to_str().unwrap()])), 0);
    let out = dir.path().join("out");
    assert_eq!(code(&thinobs(&["validate", "--seed", "3", "--run", out.to_str().unwrap()])), 0);
    std::fs::write(out.join("decay.csv"), "rho,l2norm,supnorm,supgrad\n").unwrap();
    let o = thinobs(&["validate", "--run", out.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("decay.csv"));
    std::fs::remove_file(out.join("field.thob")).unwrap();
    assert_eq!(code(&thinobs(&["validate", "--run", out.to_str().unwrap()])), 4);
}

#[test]
fn exact_benchmark_manifest_129x65() {
    // decay slope in [1.45, 1.55] and fitted C = 0 within slack
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[129, 65]", "quadratic", 1.0, "");
    let o = thinobs(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir.path().join("out"));
    for key in ["l2_slope", "sup_slope"] {
        let s = m["decay"][key].as_f64().unwrap();
        assert!((1.45..=1.55).contains(&s), "{key} {s}");
    }
    assert_eq!(m["monotonicity"]["status"], "MONOTONE");
    assert_eq!(m["monotonicity"]["fitted_c"].as_f64(), Some(0.0), "{}", m["monotonicity"]);
}

#[test]
fn exact_benchmark_needs_no_correction_at_257x129() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = oracle_config(dir.path(), "[257, 129]", "quadratic", 1.0, r#", "analysis": {"blowup": false}"#);
    let o = thinobs(&["frequency", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&dir.path().join("out"));
    assert_eq!(m["monotonicity"]["fitted_c"].as_f64(), Some(0.0));
    assert_eq!(m["monotonicity_trusted"]["fitted_c"].as_f64(), Some(0.0));
}
