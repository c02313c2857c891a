//! Maxwell-Kohn-Sham self-consistent field solver.
//!
//! Non-interacting orbitals in the effective potential couple to a classical
//! static field determined mode-by-mode by the coherent stationarity of the
//! photon sector (the closed-form solution of the shifted-oscillator
//! eigenproblems, equivalently the static Maxwell equation):
//!
//! ```text
//! E_k phi_k = [ 1/2 (p + A(x))^2 - v(x) + v_Hxc(x) ] phi_k
//! alpha_n   = j_n + gamma sigma_n + jxc_n
//! ```
//!
//! where `sigma` is the orbital current source in external-current units.
//! v1 ships the mean-field level only: `v_Hxc` is the Hartree potential and
//! the xc current is zero; the `XcChoice` slot is where functional pairs
//! plug in.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::field::{from_mode_coefficients, ClassicalField, TransverseCurrent};
use crate::grid::{Grid1D, ModeSet, ScalarField};
use crate::hamiltonian::{HamiltonianSpec, SoftCoulomb};
use crate::linalg::hermitian_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mixing {
    Linear { beta: f64 },
    Anderson { depth: usize, beta: f64 },
}

/// Exchange-correlation level. `MeanField` is the Hartree potential with no
/// xc current; further functional pairs extend this enum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum XcChoice {
    MeanField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldInit {
    /// Start from `alpha = 0`.
    Zero,
    /// Start from the external current's coherent field, `alpha = j`.
    ExternalOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SCFConfig {
    pub mixing: Mixing,
    pub max_iterations: usize,
    /// Tolerance on `dx * sum |n_out - n_in|`.
    pub tol_density: f64,
    /// Tolerance on `||alpha_out - alpha_in||_2`.
    pub tol_field: f64,
    pub xc: XcChoice,
    pub init: FieldInit,
}

impl Default for SCFConfig {
    fn default() -> Self {
        Self {
            mixing: Mixing::Linear { beta: 0.3 },
            max_iterations: 200,
            tol_density: 1e-8,
            tol_field: 1e-8,
            xc: XcChoice::MeanField,
            init: FieldInit::Zero,
        }
    }
}

impl SCFConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol_density <= 0.0 || self.tol_field <= 0.0 {
            return Err(CoreError::InvalidParameter {
                name: "tolerance",
                message: "convergence tolerances must be positive".into(),
            });
        }
        let beta = match self.mixing {
            Mixing::Linear { beta } | Mixing::Anderson { beta, .. } => beta,
        };
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(CoreError::InvalidParameter {
                name: "beta",
                message: format!("mixing parameter must lie in (0, 1], got {beta}"),
            });
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidParameter {
                name: "max_iterations",
                message: "need at least one iteration".into(),
            });
        }
        Ok(())
    }
}

/// Mean-field total-energy breakdown; the sum of the five parts is `E_MF`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsEnergyBreakdown {
    /// `sum_k <phi_k| (p + A)^2 / 2 |phi_k>` plus the coherent-state
    /// fluctuation energy `N_e/2 sum_n g_n^2`.
    pub kinetic_coupling: f64,
    /// `integral n v`.
    pub external: f64,
    /// `1/2 integral integral w n n`.
    pub hartree: f64,
    /// `sum_n omega_n |alpha_n|^2 - sum_n omega_n (alpha_n conj(j_n) + c.c.)`.
    pub photon: f64,
    /// `integral A J_s - sum_n omega_n (alpha_n conj(J^s_n) + c.c.)`; zero by
    /// the pairing identity, recorded as a cross-check of the bookkeeping.
    pub double_counting: f64,
}

impl KsEnergyBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic_coupling + self.external + self.hartree + self.photon + self.double_counting
    }
}

#[derive(Debug, Clone)]
pub struct KSState {
    pub orbitals: Vec<Vec<C64>>,
    pub eigenvalues: Vec<f64>,
    pub density: Vec<f64>,
    pub field: ClassicalField,
    pub energy: KsEnergyBreakdown,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub density_residual: f64,
    pub field_residual: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct SCFResult {
    pub converged: bool,
    pub iterations: usize,
    pub state: KSState,
    pub energy: f64,
    /// Additive constant from absorbing an external vector potential into
    /// the current before iterating (zero when the spec had none).
    pub energy_shift: f64,
    pub history: Vec<IterationRecord>,
    /// Final fixed-point defect per mode, `omega_n (j_n + gamma sigma_n - alpha_n)`.
    pub maxwell_residual: Vec<C64>,
    /// Period-2 residual cycle detected; a smaller mixing parameter usually
    /// breaks it.
    pub oscillation_detected: bool,
}

/// Hartree potential `v_H(x) = dx sum_x' w(x - x') |n(x')|`, returned
/// zero-mean (the constant is gauge). Enters the KS operator with `+` sign,
/// which reproduces the repulsive pair-interaction energy convention.
pub fn hartree_potential(
    density: &[f64],
    interaction: &SoftCoulomb,
    grid: &Grid1D,
) -> ScalarField {
    let n = grid.points();
    let dx = grid.spacing();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            dx * (0..n)
                .map(|l| interaction.evaluate(grid.min_image_distance(i, l)) * density[l].abs())
                .sum::<f64>()
        })
        .collect();
    ScalarField::gauge_fixed(grid, values).expect("finite values")
}

/// Single-particle operator `h = 1/2 (p + A)^2 - v + v_Hxc` with the same
/// central-difference discretization as the exact matter sector.
pub fn ks_hamiltonian(
    v: &ScalarField,
    v_hxc: &ScalarField,
    a_values: &[f64],
    grid: &Grid1D,
) -> DMatrix<C64> {
    let n = grid.points();
    let dx = grid.spacing();
    let mut h = DMatrix::<C64>::zeros(n, n);
    let hop = C64::new(0.0, -1.0 / (2.0 * dx)); // <i|p|i+1>
    for i in 0..n {
        let right = (i + 1) % n;
        let kin = C64::new(-1.0 / (2.0 * dx * dx), 0.0);
        let coupling = hop * (0.5 * (a_values[i] + a_values[right]));
        h[(i, right)] += kin + coupling;
        h[(right, i)] += kin + coupling.conj();
        h[(i, i)] += C64::new(
            1.0 / (dx * dx) + 0.5 * a_values[i] * a_values[i] - v.values()[i] + v_hxc.values()[i],
            0.0,
        );
    }
    h
}

/// Lowest `n_e` orthonormal eigenpairs of the single-particle operator.
pub fn solve_orbitals(h: &DMatrix<C64>, n_e: usize) -> (Vec<Vec<C64>>, Vec<f64>) {
    let (values, vectors) = hermitian_eigen(h);
    (vectors.into_iter().take(n_e).collect(), values.into_iter().take(n_e).collect())
}

/// Orbital density `n(x) = -sum_k |phi_k(x)|^2 / dx`; integrates to `-N_e`.
pub fn orbital_density(orbitals: &[Vec<C64>], grid: &Grid1D) -> Vec<f64> {
    let dx = grid.spacing();
    (0..grid.points())
        .map(|i| -orbitals.iter().map(|phi| phi[i].norm_sqr()).sum::<f64>() / dx)
        .collect()
}

/// Orbital current source in external-current coefficient units:
///
/// ```text
/// sigma_n = -(2 omega_n^3 L)^(-1/2) sum_k <phi_k| { p + A, conj(phi_n) }/2 |phi_k>
/// ```
///
/// The mode projection of the physical Kohn-Sham current
/// `J_s = sum_k j_p[phi_k] - n A`; `gamma sigma_n` sources mode `n`.
pub fn ks_physical_current(
    orbitals: &[Vec<C64>],
    a_values: &[f64],
    grid: &Grid1D,
    modes: &ModeSet,
    dipole: bool,
) -> TransverseCurrent {
    let n = grid.points();
    let dx = grid.spacing();
    let coefficients: Vec<C64> = (0..modes.len())
        .map(|mode| {
            let k = modes.wavenumber(mode);
            let f = |i: usize| -> C64 {
                if dipole {
                    C64::ONE
                } else {
                    C64::from_polar(1.0, -k * grid.x(i))
                }
            };
            let mut m_s = C64::ZERO;
            for phi in orbitals {
                // (1/2){p, f}: bond terms with averaged mode function.
                for i in 0..n {
                    let right = (i + 1) % n;
                    let avg = 0.5 * (f(i) + f(right));
                    let hop = C64::new(0.0, -1.0 / (2.0 * dx));
                    m_s += phi[i].conj() * hop * avg * phi[right];
                    m_s += phi[right].conj() * (-hop) * avg * phi[i];
                }
                // f(x) A(x) on the diagonal.
                for i in 0..n {
                    m_s += f(i) * a_values[i] * phi[i].norm_sqr();
                }
            }
            let prefactor = 1.0 / (2.0 * modes.omega(mode).powi(3) * grid.length()).sqrt();
            -prefactor * m_s
        })
        .collect();
    TransverseCurrent::from_measured(modes, coefficients).expect("mode count matches")
}

/// Kohn-Sham bond current on the grid (same convention as the exact solver's
/// physical current: entry `i` is the bond `x_i -> x_{i+1}`).
pub fn ks_bond_current(orbitals: &[Vec<C64>], a_values: &[f64], grid: &Grid1D) -> Vec<f64> {
    let n = grid.points();
    let dx = grid.spacing();
    (0..n)
        .map(|i| {
            let right = (i + 1) % n;
            let mut para = 0.0;
            let mut dens = 0.0;
            for phi in orbitals {
                let rho = phi[i].conj() * phi[right];
                para += rho.im;
                dens += rho.re;
            }
            -para / (dx * dx) - 0.5 * (a_values[i] + a_values[right]) * dens / dx
        })
        .collect()
}

/// Photon-sector stationarity: the coherent amplitudes sourced by the total
/// shifted current, `alpha_n = j_n + gamma sigma_n + jxc_n`.
pub fn update_field(
    j: &TransverseCurrent,
    j_s: &TransverseCurrent,
    j_xc: &TransverseCurrent,
    modes: &ModeSet,
) -> ClassicalField {
    let gamma = modes.coupling();
    let amplitudes = (0..modes.len())
        .map(|n| {
            j.coefficients()[n] + gamma * j_s.coefficients()[n] + j_xc.coefficients()[n]
        })
        .collect();
    ClassicalField::from_amplitudes(modes, amplitudes).expect("mode count matches")
}

/// Product-state (Slater determinant (x) coherent field) expectation of the
/// full Hamiltonian, assembled analytically. Variational: `E_MF >= E_0`.
pub fn mean_field_energy(
    orbitals: &[Vec<C64>],
    alpha: &ClassicalField,
    spec: &HamiltonianSpec,
) -> KsEnergyBreakdown {
    let grid = &spec.grid;
    let modes = &spec.modes;
    let dx = grid.spacing();
    let a_values = alpha.grid_values_with_flag(grid, spec.dipole);
    let density = orbital_density(orbitals, grid);

    // <(p + A)^2 / 2> via the v = v_Hxc = 0 operator, plus the coherent-state
    // field fluctuation around its mean.
    let zero = ScalarField::zero(grid);
    let h0 = ks_hamiltonian(&zero, &zero, &a_values, grid);
    let mut kinetic_coupling = 0.0;
    for phi in orbitals {
        let mut acc = C64::ZERO;
        for i in 0..grid.points() {
            for jx in 0..grid.points() {
                acc += phi[i].conj() * h0[(i, jx)] * phi[jx];
            }
        }
        kinetic_coupling += acc.re;
    }
    let vacuum: f64 =
        (0..modes.len()).map(|n| modes.amplitude(n) * modes.amplitude(n)).sum::<f64>();
    kinetic_coupling += 0.5 * orbitals.len() as f64 * vacuum;

    let external = dx
        * density.iter().zip(spec.external.potential.values()).map(|(n, v)| n * v).sum::<f64>();

    let mut hartree = 0.0;
    for i in 0..grid.points() {
        for l in 0..grid.points() {
            hartree += 0.5
                * dx
                * dx
                * spec.interaction.evaluate(grid.min_image_distance(i, l))
                * density[i]
                * density[l];
        }
    }

    let j = &spec.external.current;
    let mut photon = 0.0;
    for n in 0..modes.len() {
        let a = alpha.amplitudes()[n];
        photon += modes.omega(n) * (a.norm_sqr() - 2.0 * (a * j.coefficients()[n].conj()).re);
    }

    // Double-counting bookkeeping: integral A . J_s against the mode-space
    // pairing; identically zero by the transform's pairing identity.
    let sigma = ks_physical_current(orbitals, &a_values, grid, modes, spec.dipole);
    let sigma_grid =
        from_mode_coefficients(&sigma.clone().symmetrized(), grid).unwrap_or_else(|_| vec![0.0; grid.points()]);
    let pairing: f64 = (0..modes.len())
        .map(|n| {
            2.0 * modes.omega(n) * (alpha.amplitudes()[n] * sigma.coefficients()[n].conj()).re
        })
        .sum();
    let double_counting = dx * sigma_grid.iter().zip(&a_values).map(|(s, a)| s * a).sum::<f64>()
        - modes.coupling() * pairing;

    KsEnergyBreakdown { kinetic_coupling, external, hartree, photon, double_counting }
}

/// Self-consistent solution of the coupled orbital/field fixed point.
///
/// An external vector potential, if present, is first absorbed into the
/// current by the displacement identity (`j <- j + b`); the reported energy
/// adds the constant shift back so it refers to the original problem.
pub fn scf_loop(spec: &HamiltonianSpec, config: &SCFConfig) -> Result<SCFResult> {
    config.validate()?;
    spec.validate()?;
    let (spec, energy_shift) = crate::displacement::transform_spec(spec);
    let grid = &spec.grid;
    let modes = &spec.modes;
    let n_e = spec.electrons;
    let j = &spec.external.current;
    let j_xc = TransverseCurrent::zero(modes);

    let mut alpha: Vec<C64> = match config.init {
        FieldInit::Zero => vec![C64::ZERO; modes.len()],
        FieldInit::ExternalOnly => j.coefficients().to_vec(),
    };
    // External-potential-only orbitals seed the density.
    let zero = ScalarField::zero(grid);
    let a0 = ClassicalField::from_amplitudes(modes, alpha.clone())
        .expect("mode count")
        .grid_values_with_flag(grid, spec.dipole);
    let h0 = ks_hamiltonian(&spec.external.potential, &zero, &a0, grid);
    let (phi0, _) = solve_orbitals(&h0, n_e);
    let mut density = orbital_density(&phi0, grid);

    let mut history = Vec::new();
    let mut anderson = AndersonMixer::new(&config.mixing);
    let mut converged = false;
    let mut oscillation = false;
    let mut last: Option<(Vec<Vec<C64>>, Vec<f64>, Vec<f64>, Vec<C64>)> = None;

    let mut iterations = 0;
    for iter in 1..=config.max_iterations {
        iterations = iter;
        let v_hxc = match config.xc {
            XcChoice::MeanField => hartree_potential(&density, &spec.interaction, grid),
        };
        let field = ClassicalField::from_amplitudes(modes, alpha.clone()).expect("mode count");
        let a_values = field.grid_values_with_flag(grid, spec.dipole);
        let h = ks_hamiltonian(&spec.external.potential, &v_hxc, &a_values, grid);
        let (orbitals, eigenvalues) = solve_orbitals(&h, n_e);
        let density_out = orbital_density(&orbitals, grid);
        let sigma = ks_physical_current(&orbitals, &a_values, grid, modes, spec.dipole);
        let alpha_out: Vec<C64> =
            update_field(j, &sigma, &j_xc, modes).amplitudes().to_vec();

        let res_n = grid.spacing()
            * density_out.iter().zip(&density).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let res_a = alpha_out
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let field_out = ClassicalField::from_amplitudes(modes, alpha_out.clone()).expect("modes");
        let energy = mean_field_energy(&orbitals, &field_out, &spec).total();
        history.push(IterationRecord {
            iteration: iter,
            density_residual: res_n,
            field_residual: res_a,
            energy,
        });
        last = Some((orbitals, eigenvalues, density_out.clone(), alpha_out.clone()));

        if res_n <= config.tol_density && res_a <= config.tol_field {
            converged = true;
            break;
        }

        // Period-2 cycling shows up as matching residuals two apart while
        // nothing decays.
        if history.len() >= 4 {
            let r = &history[history.len() - 4..];
            let close = |a: f64, b: f64| (a - b).abs() <= 0.05 * a.abs().max(b.abs()).max(1e-300);
            if close(r[3].density_residual, r[1].density_residual)
                && close(r[2].density_residual, r[0].density_residual)
                && r[3].density_residual > config.tol_density * 10.0
            {
                oscillation = true;
            }
        }

        let (new_density, new_alpha) =
            anderson.step(&config.mixing, &density, &alpha, &density_out, &alpha_out);
        density = new_density;
        alpha = new_alpha;
    }

    let (orbitals, eigenvalues, density_out, alpha_out) =
        last.expect("at least one iteration ran");
    let field = ClassicalField::from_amplitudes(modes, alpha_out.clone()).expect("modes");
    let a_values = field.grid_values_with_flag(grid, spec.dipole);
    let energy = mean_field_energy(&orbitals, &field, &spec);
    let sigma = ks_physical_current(&orbitals, &a_values, grid, modes, spec.dipole);
    let maxwell_residual: Vec<C64> = (0..modes.len())
        .map(|n| {
            modes.omega(n)
                * (j.coefficients()[n] + modes.coupling() * sigma.coefficients()[n]
                    - alpha_out[n])
        })
        .collect();

    let state = KSState {
        orbitals,
        eigenvalues,
        density: density_out,
        field,
        energy,
        iteration: iterations,
    };
    Ok(SCFResult {
        converged,
        iterations,
        energy: energy.total() + energy_shift,
        energy_shift,
        state,
        history,
        maxwell_residual,
        oscillation_detected: oscillation,
    })
}

/// DIIS-style Anderson mixer over the concatenated real vector
/// `[n; Re alpha; Im alpha]`; falls back to plain linear mixing while the
/// history is short or the normal equations degenerate.
struct AndersonMixer {
    history_x: Vec<Vec<f64>>,
    history_f: Vec<Vec<f64>>,
    depth: usize,
}

impl AndersonMixer {
    fn new(mixing: &Mixing) -> Self {
        let depth = match mixing {
            Mixing::Linear { .. } => 0,
            Mixing::Anderson { depth, .. } => (*depth).max(1),
        };
        Self { history_x: Vec::new(), history_f: Vec::new(), depth }
    }

    fn step(
        &mut self,
        mixing: &Mixing,
        density: &[f64],
        alpha: &[C64],
        density_out: &[f64],
        alpha_out: &[C64],
    ) -> (Vec<f64>, Vec<C64>) {
        let beta = match *mixing {
            Mixing::Linear { beta } | Mixing::Anderson { beta, .. } => beta,
        };
        // The field map is explicit (coherent amplitudes from the fresh
        // orbitals), so under linear mixing it takes its updated value
        // directly and only the density is damped; Anderson extrapolates the
        // joint vector.
        if self.depth == 0 {
            let new_density =
                density.iter().zip(density_out).map(|(d, o)| d + beta * (o - d)).collect();
            return (new_density, alpha_out.to_vec());
        }

        let pack = |n: &[f64], a: &[C64]| -> Vec<f64> {
            let mut x = n.to_vec();
            x.extend(a.iter().map(|z| z.re));
            x.extend(a.iter().map(|z| z.im));
            x
        };
        let x = pack(density, alpha);
        let gx = pack(density_out, alpha_out);
        let f: Vec<f64> = gx.iter().zip(&x).map(|(g, xi)| g - xi).collect();

        let mixed = {
            self.history_x.push(x.clone());
            self.history_f.push(f.clone());
            if self.history_x.len() > self.depth {
                self.history_x.remove(0);
                self.history_f.remove(0);
            }
            self.anderson_extrapolate(beta).unwrap_or_else(|| linear_combination(&x, &f, beta))
        };

        let n_sites = density.len();
        let n_modes = alpha.len();
        let new_density = mixed[..n_sites].to_vec();
        let new_alpha = (0..n_modes)
            .map(|k| C64::new(mixed[n_sites + k], mixed[n_sites + n_modes + k]))
            .collect();
        (new_density, new_alpha)
    }

    fn anderson_extrapolate(&self, beta: f64) -> Option<Vec<f64>> {
        let m = self.history_f.len();
        if m < 2 {
            return None;
        }
        // Constrained least squares: minimize ||sum c_i f_i|| with sum c = 1.
        let mut b = DMatrix::<f64>::zeros(m + 1, m + 1);
        for i in 0..m {
            for jx in 0..m {
                b[(i, jx)] =
                    self.history_f[i].iter().zip(&self.history_f[jx]).map(|(a, c)| a * c).sum();
            }
            b[(i, m)] = -1.0;
            b[(m, i)] = -1.0;
        }
        let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
        rhs[m] = -1.0;
        let coeffs = crate::linalg::solve_dense(b, rhs)?;
        if !coeffs.iter().take(m).all(|c| c.is_finite()) {
            return None;
        }
        let dim = self.history_x[0].len();
        let mut out = vec![0.0; dim];
        for i in 0..m {
            for (o, (xi, fi)) in out.iter_mut().zip(self.history_x[i].iter().zip(&self.history_f[i]))
            {
                *o += coeffs[i] * (xi + beta * fi);
            }
        }
        Some(out)
    }
}

fn linear_combination(x: &[f64], f: &[f64], beta: f64) -> Vec<f64> {
    x.iter().zip(f).map(|(xi, fi)| xi + beta * fi).collect()
}
