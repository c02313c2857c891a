//! Command-level acceptance: reproducibility of manifests, stable CSV
//! schemas across solvers, headline values on analytic instances, and exit
//! codes as documented (0 pass, 2 non-convergence/violation, 1 usage error).

use std::path::{Path, PathBuf};

use qedft_cli::commands::{run_command, Command, OBSERVABLES_HEADER};
use qedft_cli::config::RunConfig;

fn small_config() -> RunConfig {
    RunConfig::parse(
        "\
[model]
length = 8.0
points = 8
electrons = 1
modes = 1
coupling = 0.3
fock_cutoff = 5
interaction_strength = 0.0

[external]
v_fourier = 1:0.4:0.1
j_modes = 1:0.12:-0.05

[run]
seed = 11
",
    )
    .unwrap()
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qedft-accept-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn determinism_rerun_reproduces_manifest_scalars() {
    // Identical config and seed: every manifest scalar agrees within 1e-11
    // (identically, in practice) and artifact hashes match bit for bit.
    let config = small_config();
    for command in [Command::Exact, Command::Scf, Command::MaxwellResidual] {
        let dir_a = temp_dir(&format!("{}-a", command.name()));
        let dir_b = temp_dir(&format!("{}-b", command.name()));
        let (m_a, code_a) = run_command(command, &config, &dir_a).unwrap();
        let (m_b, code_b) = run_command(command, &config, &dir_b).unwrap();
        assert_eq!(code_a, 0);
        assert_eq!(code_b, 0);
        assert_eq!(m_a.scalars.len(), m_b.scalars.len());
        let mut worst: f64 = 0.0;
        for (key, value) in &m_a.scalars {
            let other = m_b.scalars.get(key).unwrap_or_else(|| panic!("missing scalar {key}"));
            worst = worst.max((value - other).abs());
            assert!(
                (value - other).abs() <= 1e-11,
                "{}: scalar {key} differs: {value} vs {other}",
                command.name()
            );
        }
        assert_eq!(m_a.artifact_sha256, m_b.artifact_sha256, "{}", command.name());
        println!(
            "[PASS] determinism ({}): {} scalars reproduced, worst |delta| = {worst:.1e}",
            command.name(),
            m_a.scalars.len()
        );
    }
}

#[test]
fn exact_decoupled_energy_lands_in_manifest() {
    // gamma = 0 with nonzero j: the manifest's e0 is the analytic
    // completed-square photon energy (free matter contributes zero).
    let mut config = small_config();
    config.apply("model", "coupling", "0.0").unwrap();
    config.apply("external", "v_fourier", "").unwrap();
    config.apply("model", "fock_cutoff", "7").unwrap();
    config.validate().unwrap();
    let dir = temp_dir("decoupled");
    let (manifest, code) = run_command(Command::Exact, &config, &dir).unwrap();
    assert_eq!(code, 0);
    // Both signed modes of the +-1 pair carry |j|^2.
    let omega = 2.0 * std::f64::consts::PI / 8.0;
    let expect = -2.0 * omega * (0.12f64 * 0.12 + 0.05 * 0.05);
    let e0 = manifest.scalars["e0"];
    assert!((e0 - expect).abs() < 1e-8, "e0 {e0} vs analytic {expect}");
    println!("[PASS] exact decoupled manifest: e0 = {e0:.12} matches analytic {expect:.12}");
}

#[test]
fn exact_and_scf_csv_schemas_are_diffable() {
    let config = small_config();
    let dir_exact = temp_dir("schema-exact");
    let dir_scf = temp_dir("schema-scf");
    let (_, code) = run_command(Command::Exact, &config, &dir_exact).unwrap();
    assert_eq!(code, 0);
    let (_, code) = run_command(Command::Scf, &config, &dir_scf).unwrap();
    assert_eq!(code, 0);
    let header_exact = read_header(&dir_exact.join("observables.csv"));
    let header_scf = read_header(&dir_scf.join("observables.csv"));
    assert_eq!(header_exact, header_scf);
    assert_eq!(header_exact, OBSERVABLES_HEADER.join(","));
    let rows = |p: &Path| std::fs::read_to_string(p).unwrap().lines().count();
    assert_eq!(
        rows(&dir_exact.join("observables.csv")),
        rows(&dir_scf.join("observables.csv"))
    );
    println!("[PASS] schema stability: exact and scf observables share header `{header_exact}`");
}

#[test]
fn forced_scan_violation_exits_with_code_2() {
    // Inflating epsilon_int to 1e+3 turns every distinct pair into a
    // violation; the command must report it through the exit status.
    let mut config = small_config();
    config.apply("run", "scan_count", "3").unwrap();
    config.apply("run", "scan_eps_int", "1e3").unwrap();
    config.apply("model", "fock_cutoff", "4").unwrap();
    let dir = temp_dir("scan-violation");
    let (manifest, code) = run_command(Command::HkScan, &config, &dir).unwrap();
    assert_eq!(code, 2);
    assert_eq!(manifest.status, "violation");
    assert!(manifest.scalars["violations"] > 0.0);
    assert!(dir.join("scan_report.json").exists());
    assert!(dir.join("distances.csv").exists());
    println!(
        "[PASS] forced scan violation: exit 2 with {} violations recorded",
        manifest.scalars["violations"]
    );
}

#[test]
fn honest_scan_passes_with_exit_0() {
    let mut config = small_config();
    config.apply("run", "scan_count", "3").unwrap();
    let dir = temp_dir("scan-ok");
    let (manifest, code) = run_command(Command::HkScan, &config, &dir).unwrap();
    assert_eq!(code, 0, "manifest: {manifest:?}");
    assert_eq!(manifest.status, "ok");
    println!("[PASS] hk-scan exit 0 on a clean scan");
}

#[test]
fn non_convergence_exits_2_with_manifest() {
    let mut config = small_config();
    config.apply("model", "interaction_strength", "0.5").unwrap();
    config.apply("model", "electrons", "2").unwrap();
    config.apply("solver", "max_iterations", "2").unwrap();
    let dir = temp_dir("scf-nonconv");
    let (manifest, code) = run_command(Command::Scf, &config, &dir).unwrap();
    assert_eq!(code, 2);
    assert_eq!(manifest.status, "non-converged");
    assert!(dir.join("manifest.json").exists());
    assert!(dir.join("residuals.csv").exists());
    println!("[PASS] scf non-convergence: exit 2, manifest status `{}`", manifest.status);
}

#[test]
fn displacement_check_command_passes() {
    let mut config = small_config();
    config.apply("external", "b_modes", "1:0.1:0.0").unwrap();
    config.apply("model", "fock_cutoff", "8").unwrap();
    let dir = temp_dir("displace");
    let (manifest, code) = run_command(Command::DisplaceCheck, &config, &dir).unwrap();
    assert_eq!(code, 0, "manifest: {manifest:?}");
    assert!(manifest.scalars["energy_difference"] < 1e-7);
    assert!(dir.join("displace_report.json").exists());
    println!(
        "[PASS] displace-check: energy difference {:.2e} under threshold {:.2e}",
        manifest.scalars["energy_difference"], manifest.scalars["threshold"]
    );
}

#[test]
fn binary_reports_usage_and_config_errors_with_exit_1() {
    let exe = env!("CARGO_BIN_EXE_qedft");
    // Missing config file.
    let out = std::process::Command::new(exe)
        .args(["exact", "--config", "/nonexistent/qedft.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // Bad key in an otherwise valid config.
    let dir = temp_dir("usage");
    let path = dir.join("bad.conf");
    std::fs::write(&path, "[model]\nwavelength = 3.0\n").unwrap();
    let out = std::process::Command::new(exe)
        .args(["exact", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("wavelength"), "stderr: {stderr}");
    println!("[PASS] usage/config errors exit 1 with diagnostics");
}

#[test]
fn binary_end_to_end_with_overrides() {
    let exe = env!("CARGO_BIN_EXE_qedft");
    let dir = temp_dir("e2e");
    let config_path = dir.join("run.conf");
    std::fs::write(
        &config_path,
        "\
[model]
length = 8.0
points = 8
electrons = 1
modes = 1
coupling = 0.2
fock_cutoff = 4
interaction_strength = 0.0

[external]
j_modes = 1:0.1:0.0

[run]
seed = 5
",
    )
    .unwrap();
    let out_dir = dir.join("out");
    let out = std::process::Command::new(exe)
        .args([
            "exact",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            "9",
            "--override",
            "model.coupling=0.25",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 9);
    assert!(manifest["config"].as_str().unwrap().contains("coupling = 2.5"));
    assert!(out_dir.join("observables.csv").exists());
    println!("[PASS] binary end-to-end: overrides and seed land in the manifest");
}
