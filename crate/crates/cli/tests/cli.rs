//! End-to-end checks of the `qtm` binary: exit codes, error surfaces,
//! manifest integrity, and output formats.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qtm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qtm"))
}

fn run_ok(args: &[&str], dir: &Path) -> Output {
    let out = qtm().args(args).current_dir(dir).output().expect("spawn qtm");
    assert!(
        out.status.success(),
        "qtm {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn unknown_command_exits_2_with_usage() {
    let out = qtm().arg("frobnicate").output().expect("spawn qtm");
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn config_errors_exit_1_with_position() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");

    fs::write(&cfg, "[device]\ng_MHz = -5.0\n").unwrap();
    let out = qtm()
        .args(["steady", "--config", cfg.to_str().unwrap()])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("g_MHz") && stderr.contains("line 2"), "{stderr}");

    fs::write(&cfg, "[device]\nnot_a_key = 1\n").unwrap();
    let out = qtm()
        .args(["steady", "--config", cfg.to_str().unwrap()])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not_a_key"), "{stderr}");
}

#[test]
fn manifest_checksums_match_outputs() {
    let dir = TempDir::new().unwrap();
    run_ok(&["steady", "--out", "run"], dir.path());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap())
            .unwrap();
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for rec in outputs {
        let name = rec["path"].as_str().unwrap();
        let bytes = fs::read(dir.path().join("run").join(name)).unwrap();
        let digest = {
            use sha2::Digest;
            hex::encode(sha2::Sha256::digest(&bytes))
        };
        assert_eq!(rec["sha256"].as_str().unwrap(), digest, "checksum of {name}");
    }
    assert_eq!(manifest["command"], "steady");
    assert!(manifest["config"].as_str().unwrap().contains("omega_GHz"));
}

#[test]
fn eigen_output_matches_level_table() {
    let dir = TempDir::new().unwrap();
    run_ok(&["eigen", "--out", "run"], dir.path());
    let csv = fs::read_to_string(dir.path().join("run/eigen.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "label,freq_GHz");
    let expected = [
        ("0", 0.0),
        ("a", 5.305),
        ("s", 6.426),
        ("2+L", 10.542),
        ("2-", 11.598),
        ("2+U", 12.787),
    ];
    for ((label, ghz), line) in expected.iter().zip(lines) {
        let mut parts = line.split(',');
        assert_eq!(parts.next().unwrap(), *label);
        let value: f64 = parts.next().unwrap().parse().unwrap();
        // quoted-parameter rounding keeps the worst line within 1.5 MHz
        assert!((value - ghz).abs() <= 1.5e-3, "{label}: {value} vs {ghz}");
    }
}

#[test]
fn threads_do_not_change_sweep_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[heat_sweep]\npoints = 21\n").unwrap();
    run_ok(
        &["heat-sweep", "--config", cfg.to_str().unwrap(), "--out", "a", "--threads", "1"],
        dir.path(),
    );
    run_ok(
        &["heat-sweep", "--config", cfg.to_str().unwrap(), "--out", "b", "--threads", "4"],
        dir.path(),
    );
    let a = fs::read(dir.path().join("a/heat_sweep.csv")).unwrap();
    let b = fs::read(dir.path().join("b/heat_sweep.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn spectrum_command_writes_valid_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[spectrum]\nmode = \"s\"\nrabi_MHz = 10.0\npoints = 101\n").unwrap();
    run_ok(
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", "run"],
        dir.path(),
    );
    let csv = fs::read_to_string(dir.path().join("run/spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "detuning_MHz,psd_W_per_Hz");
    let mut count = 0;
    for line in lines {
        let mut parts = line.split(',');
        let _d: f64 = parts.next().unwrap().parse().unwrap();
        let psd: f64 = parts.next().unwrap().parse().unwrap();
        assert!(psd >= -1e-15);
        count += 1;
    }
    assert_eq!(count, 101);
}

#[test]
fn mollow_roundtrip_through_binary() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "[mollow]\nrabi_MHz = 30.0\nscale = 2.5\npoints = 401\n").unwrap();
    run_ok(
        &["calibrate-mollow", "--config", cfg.to_str().unwrap(), "--out", "run"],
        dir.path(),
    );
    let report = fs::read_to_string(dir.path().join("run/mollow_fit.txt")).unwrap();
    let get = |key: &str| -> f64 {
        report
            .lines()
            .find(|l| l.trim_start().starts_with(key))
            .and_then(|l| l.split('=').nth(1))
            .map(|v| v.trim().parse().unwrap())
            .unwrap_or_else(|| panic!("missing {key} in: {report}"))
    };
    assert!((get("rabi_MHz") - 30.0).abs() / 30.0 < 1e-3, "{report}");
    assert!((get("scale") - 2.5).abs() / 2.5 < 1e-3, "{report}");
}

#[test]
fn fit_dephasing_recovers_kappa_through_binary() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(
        &cfg,
        "[fit_dephasing]\nnoise_powers = [0.0, 1.0, 2.0, 4.0]\nkappa_phi_MHz = 0.32\npoints = 161\n",
    )
    .unwrap();
    run_ok(
        &["fit-dephasing", "--config", cfg.to_str().unwrap(), "--out", "run"],
        dir.path(),
    );
    let report = fs::read_to_string(dir.path().join("run/dephasing_fit.txt")).unwrap();
    let kappa: f64 = report
        .lines()
        .find(|l| l.trim_start().starts_with("kappa_phi_MHz_per_unit"))
        .and_then(|l| l.split('=').nth(1))
        .map(|v| v.trim().parse().unwrap())
        .expect("kappa in report");
    assert!((kappa - 0.32).abs() / 0.32 < 0.01, "kappa = {kappa}");
    // per-point CSV present with the declared columns
    let csv = fs::read_to_string(dir.path().join("run/dephasing_fit.csv")).unwrap();
    assert!(csv.starts_with("noise_power,gamma_phi_MHz,sigma_MHz\n"));
}

#[test]
fn commands_do_not_mutate_inputs() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "seed = 3\n[heat_sweep]\npoints = 5\n").unwrap();
    let before = fs::read(&cfg).unwrap();
    run_ok(
        &["heat-sweep", "--config", cfg.to_str().unwrap(), "--out", "run"],
        dir.path(),
    );
    assert_eq!(before, fs::read(&cfg).unwrap());
}
