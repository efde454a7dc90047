//! End-to-end tests driving the compiled binary.

use std::io::Write;
use std::process::{Command, Output};

fn hctree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hctree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn critical_values_and_usage_errors() {
    let json = stdout_json(&hctree(&["critical", "--k", "2"]));
    assert_eq!(json, serde_json::json!({"k": 2, "lambda_cr": 4.0}));
    let json = stdout_json(&hctree(&["critical", "--k", "3"]));
    assert_eq!(json["lambda_cr"], 1.6875);

    let bad = hctree(&["critical", "--k", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let missing = hctree(&["critical"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn fixpoints_regimes_and_schema() {
    let json = stdout_json(&hctree(&["fixpoints", "--k", "2", "--norm", "4.2"]));
    let keys: Vec<&str> = json
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    let mut expected = vec![
        "alpha_star",
        "beta_star",
        "holder",
        "k",
        "norm",
        "regime",
        "theta",
        "xi",
    ];
    expected.sort_unstable();
    assert_eq!(sorted, expected);
    assert_eq!(json["regime"], "supercritical_contractive");
    assert!((json["theta"].as_f64().unwrap() - 0.9491486243775878).abs() < 1e-9);

    let json = stdout_json(&hctree(&["fixpoints", "--k", "2", "--norm", "3.0"]));
    assert_eq!(json["regime"], "subcritical");
    assert!(json["alpha_star"].is_null());
    assert!(json["theta"].is_null());

    let json = stdout_json(&hctree(&["fixpoints", "--k", "2", "--norm", "5.0"]));
    assert_eq!(json["regime"], "supercritical_noncontractive");
    assert!(json["holder"].is_null());
}

#[test]
fn orbit_single_seed_and_grid() {
    let json = stdout_json(&hctree(&[
        "orbit", "--k", "2", "--norm", "4.2", "--t", "1/10",
    ]));
    assert_eq!(json["class"], "even_to_alpha_star_odd_to_beta_star");
    assert!((json["even_limit"].as_f64().unwrap() - 0.1527958167867657).abs() < 1e-7);

    let json = stdout_json(&hctree(&[
        "orbit", "--k", "2", "--norm", "3.0", "--grid", "5",
    ]));
    let entries = json.as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for entry in entries {
        assert_eq!(entry["class"], "converges_to_xi");
    }

    let missing = hctree(&["orbit", "--k", "2", "--norm", "4.2"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bg_root_value_of_half() {
    let json = stdout_json(&hctree(&[
        "bg-root", "--k", "2", "--norm", "4.2", "--t", "1/2",
    ]));
    assert!((json["z0"].as_f64().unwrap() - 1.0 / 4.2).abs() < 1e-9);
    assert!(json["error_bound"].as_f64().unwrap() < 1e-10);
    assert_eq!(json["t"], "1/2");
}

#[test]
fn bg_scan_csv_is_monotone_and_deterministic() {
    let args = ["bg-scan", "--k", "2", "--norm", "4.2", "--grid", "9"];
    let first = hctree(&args);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,z0,error_bound"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[8][0], "1");
    let z: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(
        z.windows(2).all(|w| w[1] < w[0]),
        "z0 column must strictly decrease"
    );
    assert!((z[0] - 0.3710137070227581).abs() < 1e-9);
    assert!((z[8] - 0.1527958167867657).abs() < 1e-9);

    let second = hctree(&args);
    assert_eq!(
        first.stdout, second.stdout,
        "bg-scan must be byte-deterministic"
    );

    // outside the contractive window the command refuses
    let refused = hctree(&["bg-scan", "--k", "2", "--norm", "5.0", "--grid", "9"]);
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("contractive"));
}

#[test]
fn marginal_closed_form() {
    let json = stdout_json(&hctree(&[
        "marginal",
        "--k",
        "2",
        "--activity",
        "finite:1=2,-1=2",
    ]));
    assert_eq!(json["target"], "");
    assert_eq!(json["support"], serde_json::json!([-1, 0, 1]));
    let p = json["p"].as_array().unwrap();
    assert!((p[1].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((p[0].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let bad = hctree(&["marginal", "--k", "2", "--activity", "finite:0=1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sample_lines_are_admissible_and_deterministic() {
    let args = [
        "sample",
        "--k",
        "2",
        "--activity",
        "finite:1=2.1,-1=2.1",
        "--t",
        "1/2",
        "--depth",
        "3",
        "--count",
        "5",
        "--seed",
        "7",
    ];
    let first = hctree(&args);
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    for (i, line) in lines.iter().enumerate() {
        let json: serde_json::Value = line.parse().unwrap();
        assert_eq!(json["seed"].as_u64().unwrap(), 7 + i as u64);
        let spins = json["spins"].as_object().unwrap();
        assert_eq!(spins.len(), 15); // |V_3| for k = 2
        for (address, spin) in spins {
            if address.is_empty() {
                continue;
            }
            let parent = &address[..address.len() - 1];
            let parent_spin = spins[parent].as_i64().unwrap();
            assert!(
                parent_spin == 0 || spin.as_i64().unwrap() == 0,
                "edge {parent}->{address} violates admissibility"
            );
        }
    }
    let second = hctree(&args);
    assert_eq!(
        first.stdout, second.stdout,
        "sample must be byte-deterministic"
    );
}

#[test]
fn verify_passes_and_fault_injection_fails() {
    let ok = hctree(&["verify", "dynamics"]);
    assert!(
        ok.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let results: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!(results
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["pass"].as_bool().unwrap()));
    assert!(String::from_utf8_lossy(&ok.stderr).contains("ok   dynamics::theta_limit"));

    let broken = hctree(&["verify", "dynamics", "--inject-fault", "theta"]);
    assert_eq!(broken.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&broken.stderr).contains("FAIL dynamics::theta_limit"));

    let unknown = hctree(&["verify", "everything"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let mut config = tempfile::NamedTempFile::new().unwrap();
    write!(config, r#"{{"k": 2, "norm": 4.2}}"#).unwrap();
    let path = config.path().to_str().unwrap();

    let json = stdout_json(&hctree(&["fixpoints", "--config", path]));
    assert_eq!(json["regime"], "supercritical_contractive");

    // explicit flag wins over the file
    let json = stdout_json(&hctree(&["fixpoints", "--config", path, "--norm", "3.0"]));
    assert_eq!(json["regime"], "subcritical");

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, r#"{{"k": 2, "normn": 4.2}}"#).unwrap();
    let refused = hctree(&["fixpoints", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(
        refused.status.code(),
        Some(2),
        "unknown config keys must be rejected"
    );
}
