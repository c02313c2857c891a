//! The model Pauli-Fierz Hamiltonian on the composite electron (x) photon
//! Hilbert space.
//!
//! ```text
//! H = sum_k 1/2 (p_k + A(x_k) + b(x_k))^2 - sum_k v(x_k) + sum_{k<l} w(x_k - x_l)
//!   + sum_n omega_n a_n^dag a_n - sum_n omega_n (a_n conj(j_n) + a_n^dag j_n)
//! ```
//!
//! with `A(x) = sum_n g_n (a_n e^(i k_n x) + a_n^dag e^(-i k_n x))`,
//! `g_n = gamma (2 omega_n L)^(-1/2)`, central finite differences for `p`
//! and `p^2`, symmetrized `(pA + Ap)/2` ordering, and the soft-Coulomb
//! minimum-image interaction `w(d) = w_0 / sqrt(d^2 + a^2)`. Under the
//! dipole flag the mode functions `e^(+-i k x)` are replaced by 1.
//!
//! The operator is stored as a sum of small tensor-product terms (matter
//! sparse or diagonal, photon ladder programs) and applied matrix-free;
//! at desk scales a matvec streams a few tens of millions of fused
//! complex operations.

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};
use crate::fermion::{MatterBasis, SpMat};
use crate::field::{ClassicalField, TransverseCurrent};
use crate::fock::{FockSpace, PhotonHop};
use crate::grid::{Grid1D, ModeSet, ScalarField};
use crate::lanczos::HermitianOp;

/// Default cap on the composite Hilbert-space dimension.
pub const DEFAULT_DIM_BUDGET: usize = 5_000_000;

/// Soft-Coulomb pair interaction `w(d) = strength / sqrt(d_min^2 + softening^2)`
/// with the minimum-image distance on the periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SoftCoulomb {
    pub strength: f64,
    pub softening: f64,
}

impl SoftCoulomb {
    pub fn none() -> Self {
        Self { strength: 0.0, softening: 1.0 }
    }

    pub fn evaluate(&self, d: f64) -> f64 {
        self.strength / (d * d + self.softening * self.softening).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength.is_finite() && self.strength >= 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "w0",
                message: format!("interaction strength must be >= 0, got {}", self.strength),
            });
        }
        if !(self.softening.is_finite() && self.softening > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "softening",
                message: format!("softening must be > 0, got {}", self.softening),
            });
        }
        Ok(())
    }
}

/// External pair labeling the Hamiltonian: scalar potential `v` (zero-mean)
/// and transversal current `j`, plus an optional external vector potential
/// `b` awaiting the displacement transform.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExternalPair {
    pub potential: ScalarField,
    pub current: TransverseCurrent,
    pub vector_potential: Option<TransverseCurrent>,
}

impl ExternalPair {
    pub fn new(potential: ScalarField, current: TransverseCurrent) -> Self {
        Self { potential, current, vector_potential: None }
    }

    pub fn with_vector_potential(mut self, b: TransverseCurrent) -> Self {
        self.vector_potential = Some(b);
        self
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HamiltonianSpec {
    pub grid: Grid1D,
    pub modes: ModeSet,
    pub electrons: usize,
    pub external: ExternalPair,
    pub interaction: SoftCoulomb,
    pub fock_cutoff: usize,
    pub dipole: bool,
    pub dim_budget: usize,
}

impl HamiltonianSpec {
    pub fn new(
        grid: Grid1D,
        modes: ModeSet,
        electrons: usize,
        external: ExternalPair,
        interaction: SoftCoulomb,
        fock_cutoff: usize,
    ) -> Self {
        Self {
            grid,
            modes,
            electrons,
            external,
            interaction,
            fock_cutoff,
            dipole: false,
            dim_budget: DEFAULT_DIM_BUDGET,
        }
    }

    pub fn matter_dim(&self) -> usize {
        let n = self.grid.points();
        if self.electrons == 1 {
            n
        } else {
            n * (n - 1) / 2
        }
    }

    pub fn photon_dim(&self) -> usize {
        (self.fock_cutoff + 1).pow(self.modes.len() as u32)
    }

    pub fn composite_dim(&self) -> usize {
        self.matter_dim() * self.photon_dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.interaction.validate()?;
        if self.fock_cutoff < 1 {
            return Err(CoreError::InvalidParameter {
                name: "fock_cutoff",
                message: format!("need n_max >= 1, got {}", self.fock_cutoff),
            });
        }
        if self.external.potential.values().len() != self.grid.points() {
            return Err(CoreError::LengthMismatch {
                expected: self.grid.points(),
                got: self.external.potential.values().len(),
            });
        }
        let vbar = self.external.potential.mean();
        let vscale =
            self.external.potential.values().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        if vbar.abs() > 1e-10 * vscale {
            return Err(CoreError::InvalidParameter {
                name: "potential",
                message: format!("external potential must be gauge-fixed to zero mean, mean = {vbar:.3e}"),
            });
        }
        for current in std::iter::once(&self.external.current)
            .chain(self.external.vector_potential.iter())
        {
            if current.modes().modes() != self.modes.modes() {
                return Err(CoreError::InvalidParameter {
                    name: "current",
                    message: "current coefficients use a different mode set".into(),
                });
            }
            current.check_conjugation_symmetry()?;
        }
        let dim = self.composite_dim();
        if dim > self.dim_budget {
            return Err(CoreError::DimensionBudget { dim, budget: self.dim_budget });
        }
        Ok(())
    }

    /// Grid rendering of the external vector potential `b`, through the same
    /// amplitude convention as the quantized field (so it is exactly the
    /// field shift induced by the coherent displacement with parameters
    /// `b_n`). Zero when absent.
    pub fn b_grid(&self) -> Vec<f64> {
        match &self.external.vector_potential {
            None => vec![0.0; self.grid.points()],
            Some(b) => ClassicalField::from_amplitudes(&self.modes, b.coefficients().to_vec())
                .expect("mode count consistent")
                .grid_values_with_flag(&self.grid, self.dipole),
        }
    }
}

/// One tensor-product term `(per-config coefficients) x (photon program)`.
struct PairTerm {
    coeff: Vec<C64>,
    program: Vec<PhotonHop>,
}

/// One minimal-coupling term `(matter one-body) x (single ladder)`.
struct CouplingTerm {
    matter: SpMat,
    program: Vec<PhotonHop>,
}

/// Assembled Hamiltonian. See the module docs for the operator content.
pub struct PauliFierzOp {
    spec: HamiltonianSpec,
    matter: MatterBasis,
    fock: FockSpace,
    matter_diag: Vec<f64>,
    photon_diag: Vec<f64>,
    matter_onebody: SpMat,
    couplings: Vec<CouplingTerm>,
    pair_terms: Vec<PairTerm>,
    photon_linear: Vec<(C64, Vec<PhotonHop>)>,
}

/// Assemble the Hamiltonian for `spec`.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<PauliFierzOp> {
    PauliFierzOp::build(spec.clone())
}

impl PauliFierzOp {
    pub fn build(spec: HamiltonianSpec) -> Result<Self> {
        spec.validate()?;
        let matter = MatterBasis::new(spec.grid.points(), spec.electrons)?;
        let fock = FockSpace::new(spec.modes.len(), spec.fock_cutoff);
        let grid = &spec.grid;
        let modes = &spec.modes;
        let n_sites = grid.points();
        let dx = grid.spacing();
        let b_grid = spec.b_grid();

        // Matter diagonal: -v + b^2/2 per occupied site, plus the pair
        // interaction.
        let site_term: Vec<f64> = (0..n_sites)
            .map(|i| -spec.external.potential.values()[i] + 0.5 * b_grid[i] * b_grid[i])
            .collect();
        let mut matter_diag = matter.site_diag(&site_term);
        let pair = matter.pair_diag(|p, q| spec.interaction.evaluate(grid.min_image_distance(p, q)));
        for (d, w) in matter_diag.iter_mut().zip(&pair) {
            *d += w;
        }

        // Photon diagonal: free mode energies.
        let mut photon_diag = vec![0.0; fock.dim()];
        for (m, d) in photon_diag.iter_mut().enumerate() {
            for idx in 0..modes.len() {
                *d += modes.omega(idx) * fock.occupation(m, idx) as f64;
            }
        }

        // One-body matter sector: kinetic 1/2 p^2 and the symmetrized
        // coupling to the classical external potential, (p b + b p)/2.
        let hop = C64::new(0.0, -1.0 / (2.0 * dx)); // <i|p|i+1>
        let mut one_body_entries: Vec<(usize, usize, C64)> = Vec::new();
        for i in 0..n_sites {
            let right = (i + 1) % n_sites;
            let kin = C64::new(-1.0 / (2.0 * dx * dx), 0.0);
            let bfac = 0.5 * (b_grid[i] + b_grid[right]);
            one_body_entries.push((i, right, kin + hop * bfac));
            one_body_entries.push((right, i, kin + (hop * bfac).conj()));
            one_body_entries.push((i, i, C64::new(1.0 / (dx * dx), 0.0)));
        }
        let matter_onebody = matter.one_body(&one_body_entries);

        // Mode functions on the grid.
        let phi = |idx: usize, i: usize| -> C64 {
            if spec.dipole {
                C64::ONE
            } else {
                C64::from_polar(1.0, modes.wavenumber(idx) * grid.x(i))
            }
        };

        // Minimal coupling, linear in the ladder operators:
        //   sum_n g_n [ C_n (x) a_n + C_n^dag (x) a_n^dag ],
        //   C_n = (p phi_n + phi_n p)/2 + b(x) phi_n.
        let mut couplings = Vec::new();
        for idx in 0..modes.len() {
            let g = modes.amplitude(idx);
            if g == 0.0 {
                continue;
            }
            let mut entries: Vec<(usize, usize, C64)> = Vec::new();
            for i in 0..n_sites {
                let right = (i + 1) % n_sites;
                let mean_r = 0.5 * (phi(idx, i) + phi(idx, right));
                entries.push((i, right, g * hop * mean_r));
                entries.push((right, i, g * (-hop) * mean_r));
                entries.push((i, i, g * b_grid[i] * phi(idx, i)));
            }
            let matter_c = matter.one_body(&entries);
            let matter_c_dag = matter_c.hermitian_conjugate();
            couplings.push(CouplingTerm { matter: matter_c, program: fock.ladder_program(&[(idx, -1)]) });
            couplings.push(CouplingTerm { matter: matter_c_dag, program: fock.ladder_program(&[(idx, 1)]) });
        }

        // Two-photon sector from 1/2 A(x)^2: for every ordered mode pair and
        // ladder combination, coefficient 1/2 g_m g_n sum_{p in c} phi phi'.
        // Terms with identical photon action are merged; same-mode mixed
        // products keep their operator order (they differ by the commutator).
        let mut merged: Vec<(Vec<(usize, i32)>, Vec<C64>)> = Vec::new();
        let zero_coeff = vec![C64::ZERO; matter.dim()];
        for m in 0..modes.len() {
            for n in 0..modes.len() {
                let gg = 0.5 * modes.amplitude(m) * modes.amplitude(n);
                if gg == 0.0 {
                    continue;
                }
                for (dir_m, dir_n) in [(-1, -1), (-1, 1), (1, -1), (1, 1)] {
                    let site_fn: Vec<C64> = (0..n_sites)
                        .map(|i| {
                            let fm = if dir_m < 0 { phi(m, i) } else { phi(m, i).conj() };
                            let fn_ = if dir_n < 0 { phi(n, i) } else { phi(n, i).conj() };
                            gg * fm * fn_
                        })
                        .collect();
                    let coeff = matter.site_diag_complex(&site_fn);
                    let ops = canonical_pair(&[(m, dir_m), (n, dir_n)]);
                    match merged.iter_mut().find(|(k, _)| *k == ops) {
                        Some((_, acc)) => {
                            for (a, c) in acc.iter_mut().zip(&coeff) {
                                *a += c;
                            }
                        }
                        None => {
                            let mut acc = zero_coeff.clone();
                            for (a, c) in acc.iter_mut().zip(&coeff) {
                                *a += c;
                            }
                            merged.push((ops, acc));
                        }
                    }
                }
            }
        }
        let pair_terms = merged
            .into_iter()
            .filter(|(_, coeff)| coeff.iter().any(|c| c.norm_sqr() > 0.0))
            .map(|(ops, coeff)| PairTerm { coeff, program: fock.ladder_program(&ops) })
            .collect();

        // External-current coupling: -sum_n omega_n (a_n conj(j_n) + a_n^dag j_n).
        let mut photon_linear = Vec::new();
        for idx in 0..modes.len() {
            let j = spec.external.current.coefficients()[idx];
            if j.norm_sqr() == 0.0 {
                continue;
            }
            let w = modes.omega(idx);
            photon_linear.push((-w * j.conj(), fock.ladder_program(&[(idx, -1)])));
            photon_linear.push((-w * j, fock.ladder_program(&[(idx, 1)])));
        }

        Ok(Self {
            spec,
            matter,
            fock,
            matter_diag,
            photon_diag,
            matter_onebody,
            couplings,
            pair_terms,
            photon_linear,
        })
    }

    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn matter(&self) -> &MatterBasis {
        &self.matter
    }

    pub fn fock(&self) -> &FockSpace {
        &self.fock
    }

    pub fn photon_dim(&self) -> usize {
        self.fock.dim()
    }

    /// `<x, H x>` for a normalized state.
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut y = vec![C64::ZERO; x.len()];
        self.apply(x, &mut y);
        crate::linalg::dot(x, &y).re
    }

    /// Materialize the dense matrix; intended for small oracle problems.
    pub fn dense_matrix(&self) -> nalgebra::DMatrix<C64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::<C64>::zeros(n, n);
        let mut x = vec![C64::ZERO; n];
        let mut y = vec![C64::ZERO; n];
        for col in 0..n {
            x[col] = C64::ONE;
            y.fill(C64::ZERO);
            self.apply(&x, &mut y);
            for row in 0..n {
                m[(row, col)] = y[row];
            }
            x[col] = C64::ZERO;
        }
        m
    }
}

/// Canonical key for a two-ladder product: operators on distinct modes (or
/// equal modes with equal direction) commute and are sorted; same-mode
/// mixed products keep their order.
fn canonical_pair(ops: &[(usize, i32); 2]) -> Vec<(usize, i32)> {
    let [a, b] = *ops;
    if a.0 == b.0 && a.1 != b.1 {
        vec![a, b]
    } else {
        let mut v = vec![a, b];
        v.sort_unstable();
        v
    }
}

impl HermitianOp for PauliFierzOp {
    fn dim(&self) -> usize {
        self.matter.dim() * self.fock.dim()
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let p = self.fock.dim();
        let nc = self.matter.dim();
        debug_assert_eq!(x.len(), nc * p);
        debug_assert_eq!(y.len(), nc * p);

        // Diagonal part.
        for c in 0..nc {
            let base = self.matter_diag[c];
            let xb = &x[c * p..(c + 1) * p];
            let yb = &mut y[c * p..(c + 1) * p];
            for ((yi, xi), d) in yb.iter_mut().zip(xb).zip(&self.photon_diag) {
                *yi += (base + d) * xi;
            }
        }

        // Matter one-body (x) photon identity: contiguous block axpys.
        for row in 0..nc {
            let (cols, vals) = self.matter_onebody.row(row);
            for (col, amp) in cols.iter().zip(vals) {
                let (dst, src) = block_pair(y, x, row, *col as usize, p);
                for (yi, xi) in dst.iter_mut().zip(src) {
                    *yi += amp * xi;
                }
            }
        }

        // Minimal coupling: matter hop (x) single ladder.
        for term in &self.couplings {
            for row in 0..nc {
                let (cols, vals) = term.matter.row(row);
                for (col, amp) in cols.iter().zip(vals) {
                    let (dst, src) = block_pair(y, x, row, *col as usize, p);
                    for hop in &term.program {
                        dst[hop.dst as usize] += amp * hop.amp * src[hop.src as usize];
                    }
                }
            }
        }

        // Two-photon terms: per-config scalar (x) photon pair program.
        for term in &self.pair_terms {
            for c in 0..nc {
                let s = term.coeff[c];
                if s.norm_sqr() == 0.0 {
                    continue;
                }
                let xb = &x[c * p..(c + 1) * p];
                let yb = &mut y[c * p..(c + 1) * p];
                for hop in &term.program {
                    yb[hop.dst as usize] += s * hop.amp * xb[hop.src as usize];
                }
            }
        }

        // External-current coupling in the photon sector.
        for (coeff, program) in &self.photon_linear {
            for c in 0..nc {
                let xb = &x[c * p..(c + 1) * p];
                let yb = &mut y[c * p..(c + 1) * p];
                for hop in program {
                    yb[hop.dst as usize] += coeff * hop.amp * xb[hop.src as usize];
                }
            }
        }
    }
}

/// Destination/source photon blocks for a matter matrix entry.
fn block_pair<'y, 'x>(
    y: &'y mut [C64],
    x: &'x [C64],
    dst_c: usize,
    src_c: usize,
    p: usize,
) -> (&'y mut [C64], &'x [C64]) {
    (&mut y[dst_c * p..(dst_c + 1) * p], &x[src_c * p..(src_c + 1) * p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norm};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn small_spec(gamma: f64, w0: f64, electrons: usize) -> HamiltonianSpec {
        let grid = Grid1D::new(6.0, 6).unwrap();
        let modes = ModeSet::new(&grid, &[1], gamma).unwrap();
        let v = ScalarField::gauge_fixed(
            &grid,
            (0..6).map(|i| 0.4 * (2.0 * std::f64::consts::PI * i as f64 / 6.0).cos()).collect(),
        )
        .unwrap();
        let j = TransverseCurrent::from_pairs(&modes, &[(1, C64::new(0.15, 0.1))]).unwrap();
        let external = ExternalPair::new(v, j);
        HamiltonianSpec::new(grid, modes, electrons, external, SoftCoulomb { strength: w0, softening: 1.0 }, 3)
    }

    fn random_state(dim: usize, seed: u64) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<C64> =
            (0..dim).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let n = norm(&v);
        v.iter_mut().for_each(|z| *z /= n);
        v
    }

    #[test]
    fn operator_is_hermitian_on_random_vectors() {
        for (electrons, w0) in [(1, 0.0), (2, 0.5)] {
            let op = PauliFierzOp::build(small_spec(0.4, w0, electrons)).unwrap();
            let dim = op.dim();
            for trial in 0..100 {
                let u = random_state(dim, 1000 + trial);
                let v = random_state(dim, 2000 + trial);
                let mut hu = vec![C64::ZERO; dim];
                let mut hv = vec![C64::ZERO; dim];
                op.apply(&u, &mut hu);
                op.apply(&v, &mut hv);
                let a = dot(&u, &hv);
                let b = dot(&v, &hu).conj();
                let scale = norm(&hu).max(norm(&hv)).max(1.0);
                assert!(
                    (a - b).norm() < 1e-12 * scale,
                    "hermiticity defect {} at trial {trial}",
                    (a - b).norm()
                );
            }
        }
    }

    #[test]
    fn dense_matrix_matches_apply() {
        let op = PauliFierzOp::build(small_spec(0.3, 0.0, 1)).unwrap();
        let m = op.dense_matrix();
        let x = random_state(op.dim(), 7);
        let mut y = vec![C64::ZERO; op.dim()];
        op.apply(&x, &mut y);
        for r in 0..op.dim() {
            let mut acc = C64::ZERO;
            for c in 0..op.dim() {
                acc += m[(r, c)] * x[c];
            }
            assert!((acc - y[r]).norm() < 1e-12);
        }
        // Hermiticity of the materialized matrix itself.
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                assert!((m[(r, c)] - m[(c, r)].conj()).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn free_particle_ground_energy_is_zero() {
        // gamma = 0, v = 0, w = 0, j = 0: decoupled free lattice particle;
        // the dispersion minimum sits at q = 0 with energy exactly 0.
        let grid = Grid1D::new(6.0, 6).unwrap();
        let modes = ModeSet::new(&grid, &[1], 0.0).unwrap();
        let external =
            ExternalPair::new(ScalarField::zero(&grid), TransverseCurrent::zero(&modes));
        let spec = HamiltonianSpec::new(grid, modes, 1, external, SoftCoulomb::none(), 2);
        let op = PauliFierzOp::build(spec).unwrap();
        let (vals, _) = crate::linalg::hermitian_eigen(&op.dense_matrix());
        assert!(vals[0].abs() < 1e-12, "E_0 = {}", vals[0]);
    }

    #[test]
    fn decoupled_current_completes_the_square() {
        // gamma = 0 with j != 0: photon sector ground energy -sum omega |j|^2,
        // matter decoupled with v = 0 contributing zero.
        let grid = Grid1D::new(8.0, 8).unwrap();
        let modes = ModeSet::new(&grid, &[1], 0.0).unwrap();
        let j = TransverseCurrent::from_pairs(&modes, &[(1, C64::new(0.2, -0.1))]).unwrap();
        let external = ExternalPair::new(ScalarField::zero(&grid), j.clone());
        let spec = HamiltonianSpec::new(grid, modes.clone(), 1, external, SoftCoulomb::none(), 8);
        let op = PauliFierzOp::build(spec).unwrap();
        let (vals, _) = crate::linalg::hermitian_eigen(&op.dense_matrix());
        let expect: f64 = (0..modes.len())
            .map(|idx| -modes.omega(idx) * j.coefficients()[idx].norm_sqr())
            .sum();
        assert!((vals[0] - expect).abs() < 1e-9, "E_0 = {}, expected {expect}", vals[0]);
    }

    #[test]
    fn budget_rejection_reports_dimension() {
        let mut spec = small_spec(0.1, 0.0, 2);
        spec.dim_budget = 10;
        match PauliFierzOp::build(spec.clone()).map(|_| ()) {
            Err(CoreError::DimensionBudget { dim, budget }) => {
                assert_eq!(dim, spec.composite_dim());
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget rejection, got {other:?}"),
        }
    }

    #[test]
    fn dipole_flag_builds_hermitian_operator() {
        let mut spec = small_spec(0.5, 0.0, 1);
        spec.dipole = true;
        let op = PauliFierzOp::build(spec).unwrap();
        let m = op.dense_matrix();
        for r in 0..op.dim() {
            for c in 0..op.dim() {
                assert!((m[(r, c)] - m[(c, r)].conj()).norm() < 1e-13);
            }
        }
    }
}
