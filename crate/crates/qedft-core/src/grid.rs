//! Periodic 1D matter grid, photon mode set, and scalar fields.
//!
//! Natural units throughout: hbar = c = m = |e| = eps0 = 1 (hence mu0 = 1).
//! The quantization box has length L; allowed photon wavenumbers are
//! k_n = 2 pi n / L for nonzero signed integers n with omega_n = |k_n|.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Uniformly discretized periodic interval of length `L` with `N_g` points.
///
/// Grid point `i` sits at `x_i = i * dx`, `dx = L / N_g`; indexing wraps
/// periodically (index `N_g` is index `0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    points: usize,
}

impl Grid1D {
    /// Minimum number of grid points accepted. Four points is the smallest
    /// grid on which the `n = +-1` mode pair is unaliased.
    pub const MIN_POINTS: usize = 4;

    pub fn new(length: f64, points: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "length",
                message: format!("must be positive and finite, got {length}"),
            });
        }
        if points < Self::MIN_POINTS {
            return Err(CoreError::InvalidParameter {
                name: "points",
                message: format!("need at least {} grid points, got {points}", Self::MIN_POINTS),
            });
        }
        Ok(Self { length, points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i % self.points) as f64 * self.spacing()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Minimum-image distance between grid points `i` and `j`.
    pub fn min_image_distance(&self, i: usize, j: usize) -> f64 {
        let d = (self.x(i) - self.x(j)).abs();
        d.min(self.length - d)
    }
}

/// Finite set of quantized photon modes on the box of length `L`.
///
/// The set is closed under negation (`n` present iff `-n` is), carries no
/// zero mode, and shares one coupling scale `gamma` that multiplies the
/// quantized field amplitude wherever the vector-potential operator appears:
/// `g_n = gamma * (2 omega_n L)^(-1/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    box_length: f64,
    modes: Vec<i32>,
    coupling: f64,
}

impl ModeSet {
    /// Build the mode set `{+-n : n in positive_modes}` on `grid`'s box.
    pub fn new(grid: &Grid1D, positive_modes: &[i32], coupling: f64) -> Result<Self> {
        if positive_modes.is_empty() {
            return Err(CoreError::InvalidParameter {
                name: "modes",
                message: "mode list must not be empty".into(),
            });
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(CoreError::InvalidParameter {
                name: "coupling",
                message: format!("must be finite and >= 0, got {coupling}"),
            });
        }
        let mut seen = Vec::new();
        for &n in positive_modes {
            if n <= 0 {
                return Err(CoreError::InvalidParameter {
                    name: "modes",
                    message: format!("mode indices are given as positive integers, got {n}"),
                });
            }
            if 2 * n as usize >= grid.points() {
                return Err(CoreError::AliasedMode { mode: n, points: grid.points() });
            }
            if seen.contains(&n) {
                return Err(CoreError::InvalidParameter {
                    name: "modes",
                    message: format!("duplicate mode {n}"),
                });
            }
            seen.push(n);
        }
        let mut modes: Vec<i32> = seen.iter().flat_map(|&n| [-n, n]).collect();
        modes.sort_unstable();
        Ok(Self { box_length: grid.length(), modes, coupling })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Signed mode indices in ascending order.
    pub fn modes(&self) -> &[i32] {
        &self.modes
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn with_coupling(&self, coupling: f64) -> Self {
        Self { coupling, ..self.clone() }
    }

    /// Position of signed mode `n` in the storage order.
    pub fn index_of(&self, n: i32) -> Option<usize> {
        self.modes.iter().position(|&m| m == n)
    }

    /// Position of the negated mode for storage slot `idx`.
    pub fn negated_index(&self, idx: usize) -> usize {
        self.index_of(-self.modes[idx]).expect("mode set closed under negation")
    }

    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.modes[idx] as f64 / self.box_length
    }

    pub fn omega(&self, idx: usize) -> f64 {
        self.wavenumber(idx).abs()
    }

    /// Quantized-field amplitude prefactor `g_n = gamma (2 omega_n L)^(-1/2)`.
    pub fn amplitude(&self, idx: usize) -> f64 {
        self.coupling / (2.0 * self.omega(idx) * self.box_length).sqrt()
    }

    /// Same prefactor at unit coupling, `(2 omega_n L)^(-1/2)`.
    pub fn bare_amplitude(&self, idx: usize) -> f64 {
        1.0 / (2.0 * self.omega(idx) * self.box_length).sqrt()
    }
}

/// Real scalar field sampled on a [`Grid1D`].
///
/// When used as an external potential the spatial mean is fixed to zero;
/// constant shifts are pure gauge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zero(grid: &Grid1D) -> Self {
        Self { grid: *grid, values: vec![0.0; grid.points()] }
    }

    /// Wrap raw samples without changing them. Fails on length mismatch or
    /// non-finite entries.
    pub fn from_values(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(CoreError::LengthMismatch { expected: grid.points(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidParameter {
                name: "values",
                message: "field contains non-finite samples".into(),
            });
        }
        Ok(Self { grid: *grid, values })
    }

    /// Gauge-fixed construction: subtracts the spatial mean. Idempotent.
    pub fn gauge_fixed(grid: &Grid1D, values: Vec<f64>) -> Result<Self> {
        let mut f = Self::from_values(grid, values)?;
        let mean = f.mean();
        for v in &mut f.values {
            *v -= mean;
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}
