//! Numerical probes of the uniqueness statements: the map from external
//! pairs `(v, j)` to ground-state internal pairs `(n, A)` is checked for
//! injectivity by falsification scans, the external current is recovered
//! from the internal pair through the static Maxwell relation, and the
//! variational cross-inequalities behind the uniqueness proof are evaluated
//! directly on solved instances.

use num_complex::Complex64 as C64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::field::TransverseCurrent;
use crate::grid::ScalarField;
use crate::hamiltonian::{HamiltonianSpec, PauliFierzOp};
use crate::lanczos::EigOptions;
use crate::observables::{
    density, field_expectation, ground_state, recovered_current, GroundStateResult,
};

/// Subtract the spatial mean from a raw potential; idempotent.
pub fn gauge_fix(raw: &ScalarField) -> ScalarField {
    ScalarField::gauge_fixed(raw.grid(), raw.values().to_vec()).expect("finite values")
}

/// Recover the external current from a solved ground state. Degenerate
/// ground states are inconclusive and rejected.
pub fn recover_external(
    op: &PauliFierzOp,
    ground: &GroundStateResult,
) -> Result<TransverseCurrent> {
    if ground.degenerate {
        return Err(CoreError::DegenerateGroundState { gap: ground.gap });
    }
    recovered_current(op, &ground.state)
}

/// A solved instance carrying everything the cross-checks need.
#[derive(Debug, Clone)]
pub struct SolvedInstance {
    pub spec: HamiltonianSpec,
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub density: Vec<f64>,
    pub field_amplitudes: Vec<C64>,
    pub field_grid: Vec<f64>,
    pub recovery_error: f64,
    pub truncation_tail: f64,
}

/// Solve one spec and package the internal pair.
pub fn solve_instance(spec: &HamiltonianSpec, opts: &EigOptions) -> Result<SolvedInstance> {
    let op = PauliFierzOp::build(spec.clone())?;
    let gs = ground_state(&op, opts)?;
    let n = density(&op, &gs.state);
    let alpha = field_expectation(&op, &gs.state);
    let field_grid = alpha.grid_values_with_flag(&spec.grid, spec.dipole);
    let recovery_error = if gs.degenerate {
        f64::NAN
    } else {
        let rec = recovered_current(&op, &gs.state)?;
        rec.coefficients()
            .iter()
            .zip(spec.external.current.coefficients())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    Ok(SolvedInstance {
        spec: spec.clone(),
        energy: gs.energy,
        gap: gs.gap,
        degenerate: gs.degenerate,
        density: n,
        field_amplitudes: alpha.amplitudes().to_vec(),
        field_grid,
        recovery_error,
        truncation_tail: gs.truncation_tail,
    })
}

/// Both directions of the uniqueness proof's strict variational inequality,
/// evaluated with the ground states swapped:
///
/// ```text
/// E_a < E_b + integral n_b (v_a - v_b)
///           - sum_n omega_n (alpha_{b,n} conj(j_{a,n} - j_{b,n}) + c.c.)
/// ```
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CrossCheckRecord {
    pub margin_ab: f64,
    pub margin_ba: f64,
    /// `||n_a - n_b||_2 + ||A_a - A_b||_2` on the grid.
    pub internal_distance: f64,
    pub degenerate: bool,
}

pub fn variational_cross_check(a: &SolvedInstance, b: &SolvedInstance) -> CrossCheckRecord {
    let margin = |from: &SolvedInstance, to: &SolvedInstance| -> f64 {
        // Upper bound on `from`'s ground energy evaluated with `to`'s state.
        let grid = &from.spec.grid;
        let dv = grid.spacing()
            * to.density
                .iter()
                .zip(from.spec.external.potential.values())
                .zip(to.spec.external.potential.values())
                .map(|((n, va), vb)| n * (va - vb))
                .sum::<f64>();
        let modes = &from.spec.modes;
        let dj: f64 = (0..modes.len())
            .map(|k| {
                let delta =
                    from.spec.external.current.coefficients()[k] - to.spec.external.current.coefficients()[k];
                -2.0 * modes.omega(k) * (to.field_amplitudes[k] * delta.conj()).re
            })
            .sum();
        to.energy + dv + dj - from.energy
    };
    CrossCheckRecord {
        margin_ab: margin(a, b),
        margin_ba: margin(b, a),
        internal_distance: internal_distance(a, b),
        degenerate: a.degenerate || b.degenerate,
    }
}

fn external_distance(a: &SolvedInstance, b: &SolvedInstance) -> f64 {
    let dv = a
        .spec
        .external
        .potential
        .values()
        .iter()
        .zip(b.spec.external.potential.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let dj = a
        .spec
        .external
        .current
        .coefficients()
        .iter()
        .zip(b.spec.external.current.coefficients())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    dv + dj
}

fn internal_distance(a: &SolvedInstance, b: &SolvedInstance) -> f64 {
    let dn = a
        .density
        .iter()
        .zip(&b.density)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let da = a
        .field_grid
        .iter()
        .zip(&b.field_grid)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    dn + da
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSample {
    pub index: usize,
    pub potential: Vec<f64>,
    /// Positive-mode coefficients `(n, re, im)`.
    pub current: Vec<(i32, f64, f64)>,
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub recovery_error: f64,
    pub truncation_tail: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairDistance {
    pub a: usize,
    pub b: usize,
    pub external: f64,
    pub internal: f64,
    pub margin_ab: f64,
    pub margin_ba: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub seed: u64,
    pub count: usize,
    pub epsilon_external: f64,
    pub epsilon_internal: f64,
    pub samples: Vec<ScanSample>,
    pub pairs: Vec<PairDistance>,
    /// Minimum `d_int / d_ext` over non-degenerate pairs.
    pub min_ratio: f64,
    /// Pairs with `d_ext > eps_ext` but `d_int < eps_int`.
    pub violations: Vec<(usize, usize)>,
    pub degenerate_count: usize,
    pub passes: bool,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub count: usize,
    pub seed: u64,
    pub epsilon_external: f64,
    pub epsilon_internal: f64,
    /// Amplitude window for sampled potentials and currents.
    pub amplitude_range: (f64, f64),
    /// Worker threads for the independent solves.
    pub workers: usize,
    pub eig: EigOptions,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            count: 10,
            seed: 1,
            epsilon_external: 1e-2,
            epsilon_internal: 1e-6,
            amplitude_range: (0.05, 0.5),
            workers: 2,
            eig: EigOptions::default(),
        }
    }
}

/// Draw `count` gauge-fixed external pairs as low-mode Fourier potentials
/// and random per-mode current coefficients, with amplitudes in the
/// configured window.
pub fn sample_external_pairs(
    base: &HamiltonianSpec,
    config: &ScanConfig,
) -> Vec<HamiltonianSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid = &base.grid;
    let (lo, hi) = config.amplitude_range;
    let positive_modes: Vec<i32> =
        base.modes.modes().iter().copied().filter(|&n| n > 0).collect();
    (0..config.count)
        .map(|_| {
            let mut values = vec![0.0; grid.points()];
            for &m in &positive_modes {
                let amp = lo + (hi - lo) * rng.random::<f64>();
                let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                let k = 2.0 * std::f64::consts::PI * m as f64 / grid.length();
                for (i, v) in values.iter_mut().enumerate() {
                    *v += amp * (k * grid.x(i) + phase).cos();
                }
            }
            let potential = ScalarField::gauge_fixed(grid, values).expect("finite");
            let pairs: Vec<(i32, C64)> = positive_modes
                .iter()
                .map(|&n| {
                    let amp = lo + (hi - lo) * rng.random::<f64>();
                    let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
                    (n, C64::from_polar(amp, phase))
                })
                .collect();
            let current = TransverseCurrent::from_pairs(&base.modes, &pairs).expect("modes");
            let mut spec = base.clone();
            spec.external.potential = potential;
            spec.external.current = current;
            spec.external.vector_potential = None;
            spec
        })
        .collect()
}

/// Falsification scan: solve every sampled pair exactly, report all pairwise
/// external/internal distances and the variational cross-margins, and flag
/// any injectivity violation. Samples run as independent jobs across
/// `config.workers` threads; the report reduction is ordered by index.
pub fn scan_injectivity(base: &HamiltonianSpec, config: &ScanConfig) -> Result<ScanReport> {
    let specs = sample_external_pairs(base, config);
    let results = solve_all(&specs, config)?;

    let mut pairs = Vec::new();
    let mut violations = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for a in 0..results.len() {
        for b in (a + 1)..results.len() {
            let cross = variational_cross_check(&results[a], &results[b]);
            let d_ext = external_distance(&results[a], &results[b]);
            let d_int = cross.internal_distance;
            if !cross.degenerate {
                if d_ext > 0.0 {
                    min_ratio = min_ratio.min(d_int / d_ext);
                }
                if d_ext > config.epsilon_external && d_int < config.epsilon_internal {
                    violations.push((a, b));
                }
            }
            pairs.push(PairDistance {
                a,
                b,
                external: d_ext,
                internal: d_int,
                margin_ab: cross.margin_ab,
                margin_ba: cross.margin_ba,
            });
        }
    }

    let samples: Vec<ScanSample> = results
        .iter()
        .enumerate()
        .map(|(index, r)| ScanSample {
            index,
            potential: r.spec.external.potential.values().to_vec(),
            current: r
                .spec
                .external
                .current
                .coefficients()
                .iter()
                .zip(r.spec.modes.modes())
                .filter(|(_, &n)| n > 0)
                .map(|(c, &n)| (n, c.re, c.im))
                .collect(),
            energy: r.energy,
            gap: r.gap,
            degenerate: r.degenerate,
            recovery_error: r.recovery_error,
            truncation_tail: r.truncation_tail,
        })
        .collect();

    let degenerate_count = results.iter().filter(|r| r.degenerate).count();
    let passes = violations.is_empty();
    Ok(ScanReport {
        seed: config.seed,
        count: config.count,
        epsilon_external: config.epsilon_external,
        epsilon_internal: config.epsilon_internal,
        samples,
        pairs,
        min_ratio,
        violations,
        degenerate_count,
        passes,
    })
}

/// Solve all sampled specs, splitting the indices across worker threads.
fn solve_all(specs: &[HamiltonianSpec], config: &ScanConfig) -> Result<Vec<SolvedInstance>> {
    let workers = config.workers.clamp(1, specs.len().max(1));
    let mut slots: Vec<Option<Result<SolvedInstance>>> = (0..specs.len()).map(|_| None).collect();
    if workers <= 1 {
        for (i, spec) in specs.iter().enumerate() {
            slots[i] = Some(solve_instance(spec, &config.eig));
        }
    } else {
        let chunk = specs.len().div_ceil(workers);
        let chunks: Vec<&mut [Option<Result<SolvedInstance>>]> =
            slots.chunks_mut(chunk).collect();
        std::thread::scope(|scope| {
            for (w, slot_chunk) in chunks.into_iter().enumerate() {
                let eig = config.eig.clone();
                scope.spawn(move || {
                    for (offset, slot) in slot_chunk.iter_mut().enumerate() {
                        let idx = w * chunk + offset;
                        *slot = Some(solve_instance(&specs[idx], &eig));
                    }
                });
            }
        });
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.expect("all slots filled").map_err(|e| CoreError::ScanAborted {
                sample: i,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Identity check used by the reports: re-solving the same external pair
/// must reproduce the internal pair within twice the solver tolerance.
pub fn map_well_definedness(spec: &HamiltonianSpec, opts: &EigOptions) -> Result<f64> {
    let a = solve_instance(spec, opts)?;
    let b = solve_instance(spec, opts)?;
    Ok(internal_distance(&a, &b))
}
