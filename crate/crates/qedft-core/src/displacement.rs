//! Coherent displacement of the photon modes: recasting an external vector
//! potential as an external current, plus the numerical verification that
//! both problems carry the same physics.
//!
//! The displacement with parameters `b_n` shifts `a_n -> a_n - b_n` under
//! conjugation, which removes `b(x)` from the minimal-coupling term and
//! moves it into the external current: the transformed problem has `b = 0`,
//! `j_n' = j_n + b_n`, and an additive constant
//! `sum_n omega_n (|b_n|^2 + b_n conj(j_n) + conj(b_n) j_n)`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::field::TransverseCurrent;
use crate::fock::{displacement_matrix, FockSpace};
use crate::hamiltonian::{HamiltonianSpec, PauliFierzOp};
use crate::lanczos::EigOptions;
use crate::linalg::{dot, norm};
use crate::observables::{density, field_expectation, ground_state, physical_current};

/// Multi-mode displacement as a tensor product of per-mode factors on the
/// truncated photon space. The factors are exact untruncated matrix elements
/// restricted to the kept levels, so the operator is unitary only up to a
/// leakage that concentrates near the cutoff; callers report it.
pub struct DisplacementOperator {
    fock: FockSpace,
    factors: Vec<DMatrix<C64>>,
}

impl DisplacementOperator {
    pub fn new(b: &TransverseCurrent, fock: &FockSpace) -> Self {
        let factors = b
            .coefficients()
            .iter()
            .map(|&beta| displacement_matrix(beta, fock.cutoff()))
            .collect();
        Self { fock: fock.clone(), factors }
    }

    /// Apply to a photon-space or composite (matter (x) photon) vector.
    pub fn apply(&self, state: &[C64]) -> Vec<C64> {
        let p = self.fock.dim();
        assert_eq!(state.len() % p, 0);
        let mut out = state.to_vec();
        let mut scratch = vec![C64::ZERO; p];
        for block in out.chunks_mut(p) {
            for (mode, factor) in self.factors.iter().enumerate() {
                self.fock.apply_mode_matrix(mode, factor, block, &mut scratch);
                block.copy_from_slice(&scratch);
            }
        }
        out
    }

    /// Materialize the full photon-space matrix (intended for small spaces).
    pub fn photon_matrix(&self) -> DMatrix<C64> {
        let p = self.fock.dim();
        let mut m = DMatrix::<C64>::zeros(p, p);
        let mut unit = vec![C64::ZERO; p];
        for col in 0..p {
            unit[col] = C64::ONE;
            let image = self.apply(&unit);
            for row in 0..p {
                m[(row, col)] = image[row];
            }
            unit[col] = C64::ZERO;
        }
        m
    }

    /// `||D^dag D - I||` restricted to the span of basis states whose
    /// per-mode occupations stay at least `margin` below the cutoff; the
    /// deficiency on that span bounds how non-unitary the truncation made us.
    pub fn unitarity_defect(&self, margin: usize) -> f64 {
        let m = self.photon_matrix();
        let gram = m.adjoint() * &m;
        let p = self.fock.dim();
        let within = |idx: usize| {
            (0..self.fock.n_modes())
                .all(|mode| self.fock.occupation(idx, mode) + margin <= self.fock.cutoff())
        };
        let mut worst = 0.0f64;
        for col in (0..p).filter(|&c| within(c)) {
            for row in (0..p).filter(|&r| within(r)) {
                let expect = if row == col { C64::ONE } else { C64::ZERO };
                worst = worst.max((gram[(row, col)] - expect).norm());
            }
        }
        worst
    }
}

/// Rewrite a spec with external vector potential `b` as the equivalent
/// `b = 0` spec with shifted current, returning the additive energy shift.
pub fn transform_spec(spec: &HamiltonianSpec) -> (HamiltonianSpec, f64) {
    let mut out = spec.clone();
    let Some(b) = spec.external.vector_potential.clone() else {
        return (out, 0.0);
    };
    let j = &spec.external.current;
    let mut shift = 0.0;
    let shifted: Vec<C64> = (0..spec.modes.len())
        .map(|n| {
            let bn = b.coefficients()[n];
            let jn = j.coefficients()[n];
            shift += spec.modes.omega(n) * (bn.norm_sqr() + 2.0 * (bn * jn.conj()).re);
            jn + bn
        })
        .collect();
    out.external.current = TransverseCurrent::from_measured(&spec.modes, shifted)
        .expect("mode count unchanged");
    out.external.vector_potential = None;
    (out, shift)
}

/// Everything the equivalence check measures.
#[derive(Debug, Clone, Serialize)]
pub struct DisplacementReport {
    /// `|E_0(original) - E_0(transformed) - shift|`.
    pub energy_difference: f64,
    pub shift: f64,
    /// Max-norm deviation of the charge densities.
    pub density_deviation: f64,
    /// Max-norm deviation of the physical bond currents.
    pub current_deviation: f64,
    /// `max_x |<A>_orig(x) - (<A>_transf(x) - b(x))|`: the transformed
    /// problem's field absorbs the external potential.
    pub field_shift_deviation: f64,
    /// `|1 - |<D[b] psi_orig, psi_transf>||`.
    pub state_overlap_defect: f64,
    /// `|1 - ||D[b] psi_orig|||`: norm lost to the Fock cutoff.
    pub truncation_leakage: f64,
    pub tail_original: f64,
    pub tail_transformed: f64,
    pub degenerate: bool,
    /// Threshold the deviations were held against.
    pub threshold: f64,
    pub passes: bool,
}

/// Solve the original (`b != 0`) and transformed (`b = 0`) problems and
/// check every equivalence identity. A degenerate ground state on either
/// side marks the report inconclusive (`passes = false`, `degenerate = true`).
pub fn verify_equivalence(spec: &HamiltonianSpec, opts: &EigOptions) -> Result<DisplacementReport> {
    let (transformed, shift) = transform_spec(spec);
    let op_a = PauliFierzOp::build(spec.clone())?;
    let op_b = PauliFierzOp::build(transformed)?;
    let gs_a = ground_state(&op_a, opts)?;
    let gs_b = ground_state(&op_b, opts)?;

    let b = spec
        .external
        .vector_potential
        .clone()
        .unwrap_or_else(|| TransverseCurrent::zero(&spec.modes));
    let b_grid = spec.b_grid();

    let energy_difference = (gs_a.energy - gs_b.energy - shift).abs();

    let n_a = density(&op_a, &gs_a.state);
    let n_b = density(&op_b, &gs_b.state);
    let density_deviation =
        n_a.iter().zip(&n_b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);

    let j_a = physical_current(&op_a, &gs_a.state);
    let j_b = physical_current(&op_b, &gs_b.state);
    let current_deviation =
        j_a.iter().zip(&j_b).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);

    let a_orig = field_expectation(&op_a, &gs_a.state).grid_values_with_flag(&spec.grid, spec.dipole);
    let a_transf = field_expectation(&op_b, &gs_b.state).grid_values_with_flag(&spec.grid, spec.dipole);
    let field_shift_deviation = (0..spec.grid.points())
        .map(|i| (a_orig[i] - (a_transf[i] - b_grid[i])).abs())
        .fold(0.0f64, f64::max);

    let displacement = DisplacementOperator::new(&b, op_a.fock());
    let displaced = displacement.apply(&gs_a.state.amplitudes);
    let displaced_norm = norm(&displaced);
    let truncation_leakage = (1.0 - displaced_norm).abs();
    let overlap = dot(&displaced, &gs_b.state.amplitudes).norm() / displaced_norm.max(1e-300);
    let state_overlap_defect = (1.0 - overlap).abs();

    let degenerate = gs_a.degenerate || gs_b.degenerate;
    let threshold =
        1e-7 + 10.0 * (gs_a.truncation_tail + gs_b.truncation_tail + truncation_leakage);
    let passes = !degenerate
        && energy_difference <= threshold
        && density_deviation <= threshold
        && current_deviation <= threshold
        && field_shift_deviation <= threshold;

    Ok(DisplacementReport {
        energy_difference,
        shift,
        density_deviation,
        current_deviation,
        field_shift_deviation,
        state_overlap_defect,
        truncation_leakage,
        tail_original: gs_a.truncation_tail,
        tail_transformed: gs_b.truncation_tail,
        degenerate,
        threshold,
        passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, ModeSet, ScalarField};
    use crate::hamiltonian::{ExternalPair, SoftCoulomb};
    use crate::lanczos::lowest_eigenpairs;

    fn spec_with_b(cutoff: usize, b_scale: f64) -> HamiltonianSpec {
        let grid = Grid1D::new(6.0, 6).unwrap();
        let modes = ModeSet::new(&grid, &[1], 0.3).unwrap();
        let v = ScalarField::gauge_fixed(
            &grid,
            (0..6).map(|i| 0.4 * (2.0 * std::f64::consts::PI * i as f64 / 6.0).cos()).collect(),
        )
        .unwrap();
        let j = TransverseCurrent::from_pairs(&modes, &[(1, C64::new(0.1, 0.05))]).unwrap();
        let b =
            TransverseCurrent::from_pairs(&modes, &[(1, b_scale * C64::new(0.8, -0.6))]).unwrap();
        let external = ExternalPair::new(v, j).with_vector_potential(b);
        HamiltonianSpec::new(grid, modes, 1, external, SoftCoulomb::none(), cutoff)
    }

    #[test]
    fn transform_without_b_is_identity() {
        let mut spec = spec_with_b(3, 0.1);
        spec.external.vector_potential = None;
        let (out, shift) = transform_spec(&spec);
        assert_eq!(out, spec);
        assert_eq!(shift, 0.0);
    }

    #[test]
    fn shift_with_zero_current_is_field_energy() {
        let mut spec = spec_with_b(3, 0.25);
        spec.external.current = TransverseCurrent::zero(&spec.modes);
        let b = spec.external.vector_potential.clone().unwrap();
        let (out, shift) = transform_spec(&spec);
        let expect: f64 = (0..spec.modes.len())
            .map(|n| spec.modes.omega(n) * b.coefficients()[n].norm_sqr())
            .sum();
        assert!((shift - expect).abs() < 1e-14);
        for (jn, bn) in out.external.current.coefficients().iter().zip(b.coefficients()) {
            assert!((jn - bn).norm() < 1e-15);
        }
    }

    #[test]
    fn double_transform_with_negated_b_round_trips() {
        let spec = spec_with_b(3, 0.2);
        let b = spec.external.vector_potential.clone().unwrap();
        let (mut once, s1) = transform_spec(&spec);
        once.external.vector_potential = Some(once.external.current.clone().scaled(0.0).add(&b.scaled(-1.0)));
        let (twice, s2) = transform_spec(&once);
        for (a, c) in
            twice.external.current.coefficients().iter().zip(spec.external.current.coefficients())
        {
            assert!((a - c).norm() < 1e-14);
        }
        assert!((s1 + s2).abs() < 1e-12, "shifts sum to {}", s1 + s2);
    }

    #[test]
    fn weak_field_equivalence_passes() {
        let spec = spec_with_b(8, 0.125); // |b_1| = 0.125
        let report = verify_equivalence(&spec, &EigOptions::default()).unwrap();
        assert!(report.passes, "report: {report:?}");
        assert!(report.energy_difference < 1e-7);
        assert!(report.density_deviation < 1e-7);
        assert!(report.current_deviation < 1e-7);
        assert!(report.field_shift_deviation < 1e-7);
        assert!(report.state_overlap_defect < 1e-6);
    }

    #[test]
    fn strong_field_deviations_shrink_with_cutoff() {
        let coarse = verify_equivalence(&spec_with_b(4, 1.0), &EigOptions::default()).unwrap();
        let fine = verify_equivalence(&spec_with_b(10, 1.0), &EigOptions::default()).unwrap();
        assert!(fine.truncation_leakage < coarse.truncation_leakage);
        assert!(fine.energy_difference < coarse.energy_difference.max(1e-9));
        assert!(fine.passes);
    }

    #[test]
    fn lowest_three_eigenvalues_shift_by_constant() {
        let spec = spec_with_b(8, 0.125);
        let (transformed, shift) = transform_spec(&spec);
        let op_a = PauliFierzOp::build(spec).unwrap();
        let op_b = PauliFierzOp::build(transformed).unwrap();
        let opts = EigOptions { n_eigs: 3, ..Default::default() };
        let ev_a = lowest_eigenpairs(&op_a, &opts).unwrap();
        let ev_b = lowest_eigenpairs(&op_b, &opts).unwrap();
        for k in 0..3 {
            assert!(
                (ev_a.values[k] - ev_b.values[k] - shift).abs() < 1e-7,
                "level {k}: {} vs {} + {shift}",
                ev_a.values[k],
                ev_b.values[k]
            );
        }
    }

    #[test]
    fn displacement_unitarity_defect_is_small_away_from_cutoff() {
        let fock = FockSpace::new(2, 8);
        let modes = ModeSet::new(&Grid1D::new(6.0, 6).unwrap(), &[1], 0.3).unwrap();
        let b = TransverseCurrent::from_pairs(&modes, &[(1, C64::new(0.04, 0.02))]).unwrap();
        let d = DisplacementOperator::new(&b, &fock);
        // Displacing a state at least 4 levels below the cutoff by |b| ~ 0.045
        // leaves its tail far below 1e-10; restricted there, D is unitary.
        assert!(d.unitarity_defect(4) < 1e-10, "defect {}", d.unitarity_defect(4));
        // The defect grows as the restriction approaches the cutoff.
        assert!(d.unitarity_defect(0) > d.unitarity_defect(4));
        // b = 0 is exactly the identity.
        let id = DisplacementOperator::new(&TransverseCurrent::zero(&modes), &fock);
        let m = id.photon_matrix();
        for r in 0..fock.dim() {
            for c in 0..fock.dim() {
                let expect = if r == c { C64::ONE } else { C64::ZERO };
                assert!((m[(r, c)] - expect).norm() < 1e-14);
            }
        }
    }
}
