//! Mode-space representations of transversal currents and classical fields,
//! with the transforms between them and static Maxwell solves.
//!
//! Mode coefficients are the normative representation; grid arrays are
//! derived views. Conventions (natural units, box length L):
//!
//! ```text
//! to_mode:    j_n = (2 omega_n^3 L)^(-1/2) * dx * sum_x f(x) e^(-i k_n x)
//! from_mode:  j(x) = sum_n sqrt(2 omega_n^3 / L) * j_n e^(i k_n x)
//! field grid: A(x) = sum_n g_n (alpha_n e^(i k_n x) + conj(alpha_n) e^(-i k_n x))
//! ```
//!
//! with `g_n = gamma (2 omega_n L)^(-1/2)`. The two current transforms are
//! exact inverses on represented modes, and the pairing
//!
//! ```text
//! dx * sum_x j(x) A(x) = gamma * sum_n omega_n (alpha_n conj(j_n) + c.c.)
//! ```
//!
//! holds identically, which is what fixes every prefactor here.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{Grid1D, ModeSet};

/// Tolerance for the conjugation-symmetry invariant `j_n = conj(j_{-n})`.
const CONJUGATION_TOL: f64 = 1e-10;

/// Transversal current (or any current-like quantity) as mode coefficients.
///
/// Coefficients are stored in the owning [`ModeSet`]'s order and satisfy
/// `j_n = conj(j_{-n})`, which makes the derived grid field real. "Transversal"
/// here means supported on the represented nonzero modes: projection onto the
/// mode set is the 1D stand-in for removing the longitudinal part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransverseCurrent {
    modes: ModeSet,
    coefficients: Vec<C64>,
}

impl TransverseCurrent {
    pub fn zero(modes: &ModeSet) -> Self {
        Self { modes: modes.clone(), coefficients: vec![C64::ZERO; modes.len()] }
    }

    /// Build from per-positive-mode coefficients; negative modes are filled
    /// by conjugation so the symmetry holds by construction.
    pub fn from_pairs(modes: &ModeSet, pairs: &[(i32, C64)]) -> Result<Self> {
        let mut c = vec![C64::ZERO; modes.len()];
        for &(n, v) in pairs {
            if n <= 0 {
                return Err(CoreError::InvalidParameter {
                    name: "pairs",
                    message: format!("coefficients are keyed by positive mode index, got {n}"),
                });
            }
            let idx = modes.index_of(n).ok_or(CoreError::InvalidParameter {
                name: "pairs",
                message: format!("mode {n} not in the mode set"),
            })?;
            c[idx] = v;
            c[modes.negated_index(idx)] = v.conj();
        }
        Ok(Self { modes: modes.clone(), coefficients: c })
    }

    /// Wrap measured coefficients without the symmetry check. Used for
    /// quantities read off a truncated state, whose conjugation defect is a
    /// diagnostic (it scales with the Fock tail) rather than an input error.
    pub fn from_measured(modes: &ModeSet, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != modes.len() {
            return Err(CoreError::LengthMismatch {
                expected: modes.len(),
                got: coefficients.len(),
            });
        }
        Ok(Self { modes: modes.clone(), coefficients })
    }

    /// Wrap a full signed-mode coefficient vector, checking the symmetry.
    pub fn from_coefficients(modes: &ModeSet, coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.len() != modes.len() {
            return Err(CoreError::LengthMismatch {
                expected: modes.len(),
                got: coefficients.len(),
            });
        }
        let current = Self { modes: modes.clone(), coefficients };
        current.check_conjugation_symmetry()?;
        Ok(current)
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: i32) -> C64 {
        self.modes.index_of(n).map_or(C64::ZERO, |i| self.coefficients[i])
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.norm() == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_conjugation_symmetry(&self) -> Result<()> {
        let scale = self.norm().max(1.0);
        for idx in 0..self.modes.len() {
            let neg = self.modes.negated_index(idx);
            let defect = (self.coefficients[idx] - self.coefficients[neg].conj()).norm();
            if defect > CONJUGATION_TOL * scale {
                return Err(CoreError::ConjugationSymmetry {
                    mode: self.modes.modes()[idx],
                    defect,
                });
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a + b)
            .collect();
        Self { modes: self.modes.clone(), coefficients }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            modes: self.modes.clone(),
            coefficients: self.coefficients.iter().map(|c| c * factor).collect(),
        }
    }

    /// Project onto the conjugation-symmetric subspace,
    /// `j_n <- (j_n + conj(j_{-n})) / 2`. Idempotent; used to clean measured
    /// coefficients before grid rendering.
    pub fn symmetrized(&self) -> Self {
        let coefficients = (0..self.modes.len())
            .map(|idx| {
                0.5 * (self.coefficients[idx]
                    + self.coefficients[self.modes.negated_index(idx)].conj())
            })
            .collect();
        Self { modes: self.modes.clone(), coefficients }
    }

    /// Render on the grid; see module docs for the convention.
    pub fn grid_values(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        from_mode_coefficients(self, grid)
    }
}

/// Classical field (vector-potential expectation) as per-mode coherent
/// amplitudes `alpha_n = <a_n>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalField {
    modes: ModeSet,
    amplitudes: Vec<C64>,
}

impl ClassicalField {
    pub fn zero(modes: &ModeSet) -> Self {
        Self { modes: modes.clone(), amplitudes: vec![C64::ZERO; modes.len()] }
    }

    pub fn from_amplitudes(modes: &ModeSet, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != modes.len() {
            return Err(CoreError::LengthMismatch { expected: modes.len(), got: amplitudes.len() });
        }
        Ok(Self { modes: modes.clone(), amplitudes })
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: i32) -> C64 {
        self.modes.index_of(n).map_or(C64::ZERO, |i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `A(x) = sum_n g_n (alpha_n e^(i k_n x) + c.c.)`, real by construction.
    pub fn grid_values(&self, grid: &Grid1D) -> Vec<f64> {
        self.grid_values_with_flag(grid, false)
    }

    /// Grid rendering with the long-wavelength flattening `e^(+-i k x) -> 1`
    /// applied when `dipole` is set.
    pub fn grid_values_with_flag(&self, grid: &Grid1D, dipole: bool) -> Vec<f64> {
        let mut out = vec![0.0; grid.points()];
        for (idx, alpha) in self.amplitudes.iter().enumerate() {
            let g = self.modes.amplitude(idx);
            if dipole {
                let c = 2.0 * g * alpha.re;
                out.iter_mut().for_each(|v| *v += c);
            } else {
                let k = self.modes.wavenumber(idx);
                for (i, v) in out.iter_mut().enumerate() {
                    let phase = C64::from_polar(1.0, k * grid.x(i));
                    *v += 2.0 * g * (alpha * phase).re;
                }
            }
        }
        out
    }
}

/// Project a real grid field onto the mode set (forward transform).
///
/// The mean and all unrepresented Fourier content are discarded; this *is*
/// the transversal projection by the crate's convention. Conjugation symmetry
/// holds exactly by construction since the input is real.
pub fn to_mode_coefficients(
    field: &[f64],
    grid: &Grid1D,
    modes: &ModeSet,
) -> Result<TransverseCurrent> {
    if field.len() != grid.points() {
        return Err(CoreError::LengthMismatch { expected: grid.points(), got: field.len() });
    }
    for &n in modes.modes() {
        if 2 * n.unsigned_abs() as usize >= grid.points() {
            return Err(CoreError::AliasedMode { mode: n, points: grid.points() });
        }
    }
    let dx = grid.spacing();
    let length = grid.length();
    let coefficients = (0..modes.len())
        .map(|idx| {
            let k = modes.wavenumber(idx);
            let omega = modes.omega(idx);
            let sum: C64 = field
                .iter()
                .enumerate()
                .map(|(i, &f)| f * C64::from_polar(1.0, -k * grid.x(i)))
                .sum();
            let prefactor = 1.0 / (2.0 * omega.powi(3) * length).sqrt();
            prefactor * dx * sum
        })
        .collect();
    Ok(TransverseCurrent { modes: modes.clone(), coefficients })
}

/// Render mode coefficients on the grid (inverse transform).
///
/// Exact inverse of [`to_mode_coefficients`] on represented modes. Rejects
/// coefficient sets that break conjugation symmetry, since those have no
/// real grid image.
pub fn from_mode_coefficients(current: &TransverseCurrent, grid: &Grid1D) -> Result<Vec<f64>> {
    current.check_conjugation_symmetry()?;
    let modes = &current.modes;
    let length = grid.length();
    let mut out = vec![0.0; grid.points()];
    for (idx, j) in current.coefficients.iter().enumerate() {
        let k = modes.wavenumber(idx);
        let weight = (2.0 * modes.omega(idx).powi(3) / length).sqrt();
        for (i, v) in out.iter_mut().enumerate() {
            *v += (weight * j * C64::from_polar(1.0, k * grid.x(i))).re;
        }
    }
    Ok(out)
}

/// Solve the static Maxwell equation `-d^2 A / dx^2 = j(x)` (mu0 c = 1)
/// spectrally on the represented modes.
///
/// The returned amplitudes are `alpha_n = j_n / gamma`: rendering them
/// through the field convention reproduces exactly the grid solution of the
/// Poisson problem, independent of `gamma`. Requires `gamma > 0` since a
/// zero-coupling mode set renders every classical field as zero.
pub fn solve_static_maxwell(source: &TransverseCurrent, modes: &ModeSet) -> Result<ClassicalField> {
    source.check_conjugation_symmetry()?;
    if modes.coupling() <= 0.0 {
        return Err(CoreError::InvalidParameter {
            name: "coupling",
            message: "static Maxwell solve needs gamma > 0 to represent the field".into(),
        });
    }
    let amplitudes = source.coefficients.iter().map(|j| j / modes.coupling()).collect();
    ClassicalField::from_amplitudes(modes, amplitudes)
}

/// Inverse of [`solve_static_maxwell`] in mode space: the current whose
/// static solution is the vector potential `b`.
pub fn b_to_current(b: &TransverseCurrent, modes: &ModeSet) -> TransverseCurrent {
    b.scaled(modes.coupling())
}

/// Spectral second derivative restricted to the represented modes,
/// used to verify Maxwell residuals.
pub fn spectral_neg_laplacian(field: &[f64], grid: &Grid1D, modes: &ModeSet) -> Vec<f64> {
    let mut out = vec![0.0; grid.points()];
    for idx in 0..modes.len() {
        let k = modes.wavenumber(idx);
        let coeff: C64 = field
            .iter()
            .enumerate()
            .map(|(i, &f)| f * C64::from_polar(1.0, -k * grid.x(i)))
            .sum::<C64>()
            / grid.points() as f64;
        for (i, v) in out.iter_mut().enumerate() {
            *v += (k * k * coeff * C64::from_polar(1.0, k * grid.x(i))).re;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(gamma: f64) -> (Grid1D, ModeSet) {
        let grid = Grid1D::new(10.0, 16).unwrap();
        let modes = ModeSet::new(&grid, &[1, 2], gamma).unwrap();
        (grid, modes)
    }

    #[test]
    fn zero_field_gives_zero_coefficients() {
        let (grid, modes) = setup(1.0);
        let j = to_mode_coefficients(&vec![0.0; 16], &grid, &modes).unwrap();
        assert!(j.is_zero());
        let back = from_mode_coefficients(&j, &grid).unwrap();
        assert!(back.iter().all(|v| v.abs() == 0.0));
    }

    #[test]
    fn constant_field_projects_to_zero() {
        let (grid, modes) = setup(1.0);
        let j = to_mode_coefficients(&vec![3.7; 16], &grid, &modes).unwrap();
        assert!(j.norm() < 1e-13);
    }

    #[test]
    fn cosine_projection_matches_analytic_integral() {
        // field = cos(k_1 x): the analytic overlap integral gives
        // j_{+-1} = (2 omega_1^3 L)^(-1/2) * L / 2.
        let (grid, modes) = setup(1.0);
        let k1 = modes.wavenumber(modes.index_of(1).unwrap());
        let field: Vec<f64> = (0..16).map(|i| (k1 * grid.x(i)).cos()).collect();
        let j = to_mode_coefficients(&field, &grid, &modes).unwrap();
        let omega = k1.abs();
        let expected = 0.5 * grid.length() / (2.0 * omega.powi(3) * grid.length()).sqrt();
        assert!((j.coefficient(1) - expected).norm() < 1e-12);
        assert!((j.coefficient(-1) - expected).norm() < 1e-12);
        assert!(j.coefficient(2).norm() < 1e-13);
    }

    #[test]
    fn round_trip_is_identity_on_represented_modes() {
        let (grid, modes) = setup(1.0);
        let j = TransverseCurrent::from_pairs(
            &modes,
            &[(1, C64::new(0.3, -0.7)), (2, C64::new(-0.2, 0.11))],
        )
        .unwrap();
        let field = from_mode_coefficients(&j, &grid).unwrap();
        let j2 = to_mode_coefficients(&field, &grid, &modes).unwrap();
        for (a, b) in j.coefficients().iter().zip(j2.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
        let field2 = from_mode_coefficients(&j2, &grid).unwrap();
        for (a, b) in field.iter().zip(&field2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_field_is_scaled_cosine() {
        // j_{+-1} = 1 renders as 2 sqrt(2 w^3 / L) cos(k_1 x).
        let (grid, modes) = setup(1.0);
        let j = TransverseCurrent::from_pairs(&modes, &[(1, C64::ONE)]).unwrap();
        let field = from_mode_coefficients(&j, &grid).unwrap();
        let k1 = modes.wavenumber(modes.index_of(1).unwrap());
        let amp = 2.0 * (2.0 * k1.abs().powi(3) / grid.length()).sqrt();
        for (i, v) in field.iter().enumerate() {
            assert!((v - amp * (k1 * grid.x(i)).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn broken_conjugation_symmetry_is_rejected() {
        let (_, modes) = setup(1.0);
        let mut c = vec![C64::ZERO; modes.len()];
        c[0] = C64::new(0.5, 0.1);
        assert!(matches!(
            TransverseCurrent::from_coefficients(&modes, c),
            Err(CoreError::ConjugationSymmetry { .. })
        ));
    }

    #[test]
    fn transforms_are_linear() {
        let (grid, modes) = setup(1.0);
        let f1: Vec<f64> = (0..16).map(|i| (0.3 + 2.1 * grid.x(i)).sin()).collect();
        let f2: Vec<f64> = (0..16).map(|i| (1.8 * grid.x(i)).cos() - 0.4).collect();
        let combo: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let j1 = to_mode_coefficients(&f1, &grid, &modes).unwrap();
        let j2 = to_mode_coefficients(&f2, &grid, &modes).unwrap();
        let jc = to_mode_coefficients(&combo, &grid, &modes).unwrap();
        for idx in 0..modes.len() {
            let lin = 2.0 * j1.coefficients()[idx] - 0.5 * j2.coefficients()[idx];
            assert!((jc.coefficients()[idx] - lin).norm() < 1e-12);
        }
    }

    #[test]
    fn static_maxwell_solves_cosine_source() {
        // source = cos(k_1 x) -> A = cos(k_1 x) / k_1^2, for any gamma > 0.
        for gamma in [1.0, 0.05] {
            let (grid, modes) = setup(gamma);
            let k1 = modes.wavenumber(modes.index_of(1).unwrap());
            let source_grid: Vec<f64> = (0..16).map(|i| (k1 * grid.x(i)).cos()).collect();
            let source = to_mode_coefficients(&source_grid, &grid, &modes).unwrap();
            let a = solve_static_maxwell(&source, &modes).unwrap();
            let a_grid = a.grid_values(&grid);
            for (i, v) in a_grid.iter().enumerate() {
                assert!((v - (k1 * grid.x(i)).cos() / (k1 * k1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn static_maxwell_residual_on_random_source() {
        let (grid, modes) = setup(0.3);
        let source = TransverseCurrent::from_pairs(
            &modes,
            &[(1, C64::new(0.4, 0.2)), (2, C64::new(-0.15, 0.6))],
        )
        .unwrap();
        let a = solve_static_maxwell(&source, &modes).unwrap();
        let lhs = spectral_neg_laplacian(&a.grid_values(&grid), &grid, &modes);
        let rhs = from_mode_coefficients(&source, &grid).unwrap();
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).abs() < 1e-10);
        }
    }

    #[test]
    fn b_to_current_round_trips_with_maxwell_solve() {
        let (_, modes) = setup(0.7);
        let b = TransverseCurrent::from_pairs(
            &modes,
            &[(1, C64::new(0.9, -0.3)), (2, C64::new(0.2, 0.25))],
        )
        .unwrap();
        let j = b_to_current(&b, &modes);
        let a = solve_static_maxwell(&j, &modes).unwrap();
        for (alpha, bn) in a.amplitudes().iter().zip(b.coefficients()) {
            assert!((alpha - bn).norm() < 1e-12);
        }
        assert!(b_to_current(&TransverseCurrent::zero(&modes), &modes).is_zero());
    }

    #[test]
    fn minimal_coupling_pairing_identity() {
        // dx * sum j(x) A(x) = gamma * sum_n omega_n (alpha_n conj(j_n) + c.c.)
        // Checked at gamma = 1 (the identity proper) and gamma = 0.05.
        for gamma in [1.0, 0.05] {
            let (grid, modes) = setup(gamma);
            let j = TransverseCurrent::from_pairs(
                &modes,
                &[(1, C64::new(0.31, -0.12)), (2, C64::new(-0.05, 0.22))],
            )
            .unwrap();
            let alpha = ClassicalField::from_amplitudes(
                &modes,
                vec![
                    C64::new(0.4, 0.1),
                    C64::new(-0.2, 0.3),
                    C64::new(0.7, -0.6),
                    C64::new(0.05, 0.9),
                ],
            )
            .unwrap();
            let j_grid = from_mode_coefficients(&j, &grid).unwrap();
            let a_grid = alpha.grid_values(&grid);
            let lhs: f64 =
                grid.spacing() * j_grid.iter().zip(&a_grid).map(|(a, b)| a * b).sum::<f64>();
            let rhs: f64 = gamma
                * (0..modes.len())
                    .map(|idx| {
                        2.0 * modes.omega(idx)
                            * (alpha.amplitudes()[idx] * j.coefficients()[idx].conj()).re
                    })
                    .sum::<f64>();
            assert!(
                (lhs - rhs).abs() < 1e-10,
                "pairing identity failed at gamma={gamma}: lhs={lhs}, rhs={rhs}"
            );
        }
    }

    #[test]
    fn classical_field_grid_values_are_real_by_construction() {
        let (grid, modes) = setup(0.5);
        // Deliberately unpaired amplitudes still render to a real field.
        let a = ClassicalField::from_amplitudes(
            &modes,
            vec![C64::new(1.0, 2.0), C64::ZERO, C64::new(-0.3, 0.4), C64::ZERO],
        )
        .unwrap();
        let vals = a.grid_values(&grid);
        assert!(vals.iter().all(|v| v.is_finite()));
    }
}
