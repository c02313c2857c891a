//! Command implementations shared by the binary and the integration tests.

use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};

use qedft_core::displacement::verify_equivalence;
use qedft_core::hk::{scan_injectivity, ScanConfig};
use qedft_core::observables::{
    density, energy_decomposition, field_expectation, ground_state, maxwell_residual,
    physical_current,
};
use qedft_core::scf::{ks_bond_current, scf_loop};
use qedft_core::{build_hamiltonian, CoreError};

use crate::config::RunConfig;
use crate::manifest::RunManifest;
use crate::output::{write_csv, write_json};

pub const OBSERVABLES_HEADER: [&str; 4] = ["x", "n", "J", "A"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Exact,
    Scf,
    DisplaceCheck,
    HkScan,
    MaxwellResidual,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Scf => "scf",
            Command::DisplaceCheck => "displace-check",
            Command::HkScan => "hk-scan",
            Command::MaxwellResidual => "maxwell-residual",
        }
    }
}

/// Execute a command, writing all artifacts under `out_dir`. Returns the
/// manifest and the process exit code (0 pass/converged, 2 for
/// non-convergence or violation). Failures still leave a manifest behind.
pub fn run_command(command: Command, config: &RunConfig, out_dir: &Path) -> Result<(RunManifest, i32)> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut manifest = RunManifest::new(command.name(), config.seed, config.to_text());
    let start = Instant::now();
    let code = match execute(command, config, out_dir, &mut manifest) {
        Ok(code) => code,
        Err(err) => {
            manifest.status = "error".to_string();
            manifest.error = Some(format!("{err:#}"));
            2
        }
    };
    manifest.wall_time_seconds = start.elapsed().as_secs_f64();
    manifest.write(out_dir)?;
    Ok((manifest, code))
}

fn execute(
    command: Command,
    config: &RunConfig,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<i32> {
    match command {
        Command::Exact | Command::MaxwellResidual => run_exact(command, config, out, manifest),
        Command::Scf => run_scf(config, out, manifest),
        Command::DisplaceCheck => run_displace(config, out, manifest),
        Command::HkScan => run_scan(config, out, manifest),
    }
}

fn run_exact(
    command: Command,
    config: &RunConfig,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<i32> {
    let spec = config.hamiltonian_spec()?;
    let op = build_hamiltonian(&spec)?;
    let gs = ground_state(&op, &config.eig_options())?;
    let n = density(&op, &gs.state);
    let current = physical_current(&op, &gs.state);
    let field = field_expectation(&op, &gs.state);
    let a_grid = field.grid_values_with_flag(&spec.grid, spec.dipole);
    let residuals = maxwell_residual(&op, &gs.state)?;
    let decomposition = energy_decomposition(&op, &gs.state)?;

    let rows: Vec<Vec<f64>> = (0..spec.grid.points())
        .map(|i| vec![spec.grid.x(i), n[i], current[i], a_grid[i]])
        .collect();
    let hash = write_csv(out, "observables.csv", &OBSERVABLES_HEADER, &rows)?;
    manifest.artifact_sha256.insert("observables.csv".into(), hash);

    let mode_rows: Vec<Vec<f64>> = residuals
        .iter()
        .zip(spec.modes.modes())
        .map(|(r, &m)| vec![m as f64, r.re, r.im, r.norm()])
        .collect();
    let hash = write_csv(out, "maxwell.csv", &["mode", "re", "im", "abs"], &mode_rows)?;
    manifest.artifact_sha256.insert("maxwell.csv".into(), hash);

    manifest.set("e0", gs.energy);
    manifest.set("gap", gs.gap);
    manifest.set("solver_residual", gs.residual);
    manifest.set("truncation_tail", gs.truncation_tail);
    manifest.set("degenerate", if gs.degenerate { 1.0 } else { 0.0 });
    manifest.set("iterations", gs.iterations as f64);
    manifest.set(
        "maxwell_residual_max",
        residuals.iter().map(|r| r.norm()).fold(0.0f64, f64::max),
    );
    manifest.set("total_charge", spec.grid.spacing() * n.iter().sum::<f64>());
    manifest.set("current_mean", current.iter().sum::<f64>() / current.len() as f64);
    manifest.set("energy_universal", decomposition.universal);
    manifest.set("energy_external_potential", decomposition.external_potential);
    manifest.set("energy_external_current", decomposition.external_current);
    if command == Command::MaxwellResidual {
        for (r, &m) in residuals.iter().zip(spec.modes.modes()) {
            manifest.set(&format!("maxwell_residual_abs_mode_{m}"), r.norm());
        }
    }
    Ok(0)
}

fn run_scf(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<i32> {
    let spec = config.hamiltonian_spec()?;
    let result = scf_loop(&spec, &config.scf_config())?;
    let state = &result.state;
    let a_grid = state.field.grid_values_with_flag(&spec.grid, spec.dipole);
    let current = ks_bond_current(&state.orbitals, &a_grid, &spec.grid);

    let rows: Vec<Vec<f64>> = (0..spec.grid.points())
        .map(|i| vec![spec.grid.x(i), state.density[i], current[i], a_grid[i]])
        .collect();
    let hash = write_csv(out, "observables.csv", &OBSERVABLES_HEADER, &rows)?;
    manifest.artifact_sha256.insert("observables.csv".into(), hash);

    let residual_rows: Vec<Vec<f64>> = result
        .history
        .iter()
        .map(|r| vec![r.iteration as f64, r.density_residual, r.field_residual, r.energy])
        .collect();
    let hash = write_csv(
        out,
        "residuals.csv",
        &["iteration", "density_residual", "field_residual", "energy"],
        &residual_rows,
    )?;
    manifest.artifact_sha256.insert("residuals.csv".into(), hash);

    manifest.set("e_mf", result.energy);
    manifest.set("energy_shift", result.energy_shift);
    manifest.set("iterations", result.iterations as f64);
    manifest.set("converged", if result.converged { 1.0 } else { 0.0 });
    if let Some(last) = result.history.last() {
        manifest.set("density_residual", last.density_residual);
        manifest.set("field_residual", last.field_residual);
    }
    manifest.set(
        "maxwell_residual_max",
        result.maxwell_residual.iter().map(|r| r.norm()).fold(0.0f64, f64::max),
    );
    manifest.set("energy_kinetic_coupling", state.energy.kinetic_coupling);
    manifest.set("energy_external", state.energy.external);
    manifest.set("energy_hartree", state.energy.hartree);
    manifest.set("energy_photon", state.energy.photon);
    manifest.set("energy_double_counting", state.energy.double_counting);
    manifest.set(
        "oscillation_detected",
        if result.oscillation_detected { 1.0 } else { 0.0 },
    );
    if result.converged {
        Ok(0)
    } else {
        manifest.status = "non-converged".to_string();
        if result.oscillation_detected {
            manifest.error =
                Some("period-2 residual cycle detected; try a smaller solver.beta".to_string());
        }
        Ok(2)
    }
}

fn run_displace(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<i32> {
    let spec = config.hamiltonian_spec()?;
    if spec.external.vector_potential.is_none() {
        anyhow::bail!("displace-check needs a nonzero external.b_modes block");
    }
    let report = verify_equivalence(&spec, &config.eig_options())?;
    let json = serde_json::to_string_pretty(&report)?;
    let hash = write_json(out, "displace_report.json", &json)?;
    manifest.artifact_sha256.insert("displace_report.json".into(), hash);

    manifest.set("energy_difference", report.energy_difference);
    manifest.set("shift", report.shift);
    manifest.set("density_deviation", report.density_deviation);
    manifest.set("current_deviation", report.current_deviation);
    manifest.set("field_shift_deviation", report.field_shift_deviation);
    manifest.set("state_overlap_defect", report.state_overlap_defect);
    manifest.set("truncation_leakage", report.truncation_leakage);
    manifest.set("threshold", report.threshold);
    manifest.set("passes", if report.passes { 1.0 } else { 0.0 });
    if report.passes {
        Ok(0)
    } else {
        manifest.status =
            if report.degenerate { "degenerate".to_string() } else { "violation".to_string() };
        Ok(2)
    }
}

fn run_scan(config: &RunConfig, out: &Path, manifest: &mut RunManifest) -> Result<i32> {
    let spec = config.hamiltonian_spec()?;
    let scan_config = ScanConfig {
        count: config.scan_count,
        seed: config.seed,
        epsilon_external: config.scan_eps_ext,
        epsilon_internal: config.scan_eps_int,
        amplitude_range: (config.scan_amp_min, config.scan_amp_max),
        workers: config.scan_workers,
        eig: config.eig_options(),
    };
    let report = match scan_injectivity(&spec, &scan_config) {
        Ok(report) => report,
        Err(err @ CoreError::ScanAborted { .. }) => {
            manifest.status = "error".to_string();
            manifest.error = Some(err.to_string());
            return Ok(2);
        }
        Err(err) => return Err(err.into()),
    };

    let json = serde_json::to_string_pretty(&report)?;
    let hash = write_json(out, "scan_report.json", &json)?;
    manifest.artifact_sha256.insert("scan_report.json".into(), hash);

    let rows: Vec<Vec<f64>> = report
        .pairs
        .iter()
        .map(|p| {
            vec![p.a as f64, p.b as f64, p.external, p.internal, p.margin_ab, p.margin_ba]
        })
        .collect();
    let hash = write_csv(
        out,
        "distances.csv",
        &["a", "b", "d_ext", "d_int", "margin_ab", "margin_ba"],
        &rows,
    )?;
    manifest.artifact_sha256.insert("distances.csv".into(), hash);

    manifest.set("samples", report.samples.len() as f64);
    manifest.set("violations", report.violations.len() as f64);
    manifest.set("degenerate_count", report.degenerate_count as f64);
    manifest.set("min_ratio", report.min_ratio);
    manifest.set(
        "worst_recovery_error",
        report.samples.iter().map(|s| s.recovery_error).fold(0.0f64, f64::max),
    );
    if report.passes {
        Ok(0)
    } else {
        manifest.status = "violation".to_string();
        Ok(2)
    }
}
