//! Truncated multi-mode Fock space.
//!
//! Occupations are capped at `cutoff` photons per mode; the basis index is
//! little-endian mixed radix, `idx = sum_k m_k (cutoff+1)^k`. Ladder actions
//! are precompiled into flat `(dst, src, amp)` programs so the Hamiltonian
//! matvec streams through them without index arithmetic.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// One scatter entry of a photon-space operator: `y[dst] += amp * x[src]`.
#[derive(Debug, Clone, Copy)]
pub struct PhotonHop {
    pub dst: u32,
    pub src: u32,
    pub amp: f64,
}

#[derive(Debug, Clone)]
pub struct FockSpace {
    n_modes: usize,
    cutoff: usize,
    dim: usize,
    strides: Vec<usize>,
}

impl FockSpace {
    pub fn new(n_modes: usize, cutoff: usize) -> Self {
        assert!(cutoff >= 1, "fock cutoff must be at least 1");
        let base = cutoff + 1;
        let mut strides = Vec::with_capacity(n_modes);
        let mut dim = 1usize;
        for _ in 0..n_modes {
            strides.push(dim);
            dim *= base;
        }
        Self { n_modes, cutoff, dim, strides }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.strides[mode]) % (self.cutoff + 1)
    }

    pub fn occupations(&self, idx: usize) -> Vec<usize> {
        (0..self.n_modes).map(|k| self.occupation(idx, k)).collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> usize {
        occupations.iter().zip(&self.strides).map(|(&m, &s)| m * s).sum()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// Compile the normal-ordered product of ladder operators given
    /// right-to-left (the last entry acts on the ket first). `+1` raises,
    /// `-1` lowers. Entries whose action leaves the truncated space are
    /// dropped, which is exactly the hard-cutoff truncation.
    pub fn ladder_program(&self, ops: &[(usize, i32)]) -> Vec<PhotonHop> {
        let mut program = Vec::new();
        'idx: for src in 0..self.dim {
            let mut occ = self.occupations(src);
            let mut amp = 1.0f64;
            for &(mode, dir) in ops.iter().rev() {
                if dir < 0 {
                    if occ[mode] == 0 {
                        continue 'idx;
                    }
                    amp *= (occ[mode] as f64).sqrt();
                    occ[mode] -= 1;
                } else {
                    if occ[mode] == self.cutoff {
                        continue 'idx;
                    }
                    occ[mode] += 1;
                    amp *= (occ[mode] as f64).sqrt();
                }
            }
            program.push(PhotonHop { dst: self.index_of(&occ) as u32, src: src as u32, amp });
        }
        program
    }

    /// Apply a dense one-mode matrix along `mode` to a photon-space vector.
    pub fn apply_mode_matrix(&self, mode: usize, m: &DMatrix<C64>, input: &[C64], out: &mut [C64]) {
        let base = self.cutoff + 1;
        debug_assert_eq!(m.nrows(), base);
        debug_assert_eq!(input.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(C64::ZERO);
        let stride = self.strides[mode];
        let block = stride * base;
        let mut offset = 0;
        while offset < self.dim {
            for lo in 0..stride {
                for row in 0..base {
                    let mut acc = C64::ZERO;
                    for col in 0..base {
                        acc += m[(row, col)] * input[offset + lo + col * stride];
                    }
                    out[offset + lo + row * stride] = acc;
                }
            }
            offset += block;
        }
    }

    /// Probability that `mode` is exactly at the cutoff level, the per-mode
    /// truncation tail of a normalized photon-space (or composite, when
    /// called blockwise) vector.
    pub fn cutoff_weight(&self, mode: usize, state: &[C64]) -> f64 {
        debug_assert_eq!(state.len() % self.dim, 0);
        let mut acc = 0.0;
        for (i, v) in state.iter().enumerate() {
            if self.occupation(i % self.dim, mode) == self.cutoff {
                acc += v.norm_sqr();
            }
        }
        acc
    }
}

/// Generalized Laguerre polynomial `L_n^(k)(x)` by the stable three-term
/// recurrence; `n` stays small (at most the Fock cutoff).
fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut curr = 1.0 + kf - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * curr - (jf + kf) * prev) / (jf + 1.0);
        prev = curr;
        curr = next;
    }
    curr
}

/// Matrix elements of the single-mode displacement `D(beta) = exp(beta a^dag
/// - conj(beta) a)` on the truncated ladder, from the closed form
///
/// ```text
/// <m|D|n> = sqrt(n!/m!) beta^(m-n) e^(-|beta|^2/2) L_n^(m-n)(|beta|^2)   (m >= n)
/// <m|D|n> = sqrt(m!/n!) (-conj(beta))^(n-m) e^(-|beta|^2/2) L_m^(n-m)(|beta|^2)
/// ```
///
/// These are the exact untruncated elements restricted to the kept levels,
/// so the matrix is only approximately unitary; the deficiency concentrates
/// near the cutoff and is reported as leakage by the callers.
pub fn displacement_matrix(beta: C64, cutoff: usize) -> DMatrix<C64> {
    let dim = cutoff + 1;
    let x = beta.norm_sqr();
    let gauss = (-0.5 * x).exp();
    let mut d = DMatrix::<C64>::zeros(dim, dim);
    for m in 0..dim {
        for n in 0..dim {
            let (lo, diff) = if m >= n { (n, m - n) } else { (m, n - m) };
            // sqrt(lo! / (lo+diff)!)
            let mut ratio = 1.0f64;
            for i in (lo + 1)..=(lo + diff) {
                ratio /= i as f64;
            }
            let ratio = ratio.sqrt();
            let pow = if m >= n { beta.powu(diff as u32) } else { (-beta.conj()).powu(diff as u32) };
            d[(m, n)] = ratio * pow * gauss * laguerre(lo, diff, x);
        }
    }
    d
}
