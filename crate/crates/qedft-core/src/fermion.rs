//! Spinless-fermion matter basis on the periodic grid.
//!
//! Configurations are site-occupation bitmasks with a fixed particle number;
//! antisymmetry is carried by Jordan-Wigner signs in the second-quantized
//! matrix elements, with sites ordered 0..N_g-1.

use std::collections::HashMap;

use num_complex::Complex64 as C64;

use crate::error::{CoreError, Result};

/// Minimal row-compressed complex sparse matrix.
#[derive(Debug, Clone)]
pub struct SpMat {
    pub dim: usize,
    pub row_ptr: Vec<u32>,
    pub cols: Vec<u32>,
    pub vals: Vec<C64>,
}

impl SpMat {
    pub fn from_triplets(dim: usize, mut entries: Vec<(u32, u32, C64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        // merge duplicates
        let mut merged: Vec<(u32, u32, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some((lr, lc, lv)) if *lr == r && *lc == c => *lv += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v.norm_sqr() > 0.0);
        let mut row_ptr = vec![0u32; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r as usize + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = merged.iter().map(|&(_, c, _)| c).collect();
        let vals = merged.iter().map(|&(_, _, v)| v).collect();
        Self { dim, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[C64]) {
        let lo = self.row_ptr[r] as usize;
        let hi = self.row_ptr[r + 1] as usize;
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    /// Dense apply for tests and small problems: `y += M x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            let mut acc = C64::ZERO;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c as usize];
            }
            y[r] += acc;
        }
    }

    pub fn hermitian_conjugate(&self) -> Self {
        let mut entries = Vec::with_capacity(self.nnz());
        for r in 0..self.dim {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                entries.push((*c, r as u32, v.conj()));
            }
        }
        Self::from_triplets(self.dim, entries)
    }
}

#[derive(Debug, Clone)]
pub struct MatterBasis {
    sites: usize,
    electrons: usize,
    configs: Vec<u64>,
    index: HashMap<u64, u32>,
}

impl MatterBasis {
    pub fn new(sites: usize, electrons: usize) -> Result<Self> {
        if !(1..=2).contains(&electrons) {
            return Err(CoreError::InvalidParameter {
                name: "electrons",
                message: format!("the model supports 1 or 2 electrons, got {electrons}"),
            });
        }
        if sites > 63 {
            return Err(CoreError::InvalidParameter {
                name: "sites",
                message: format!("at most 63 grid sites supported, got {sites}"),
            });
        }
        let mut configs = Vec::new();
        if electrons == 1 {
            for p in 0..sites {
                configs.push(1u64 << p);
            }
        } else {
            for p in 0..sites {
                for q in (p + 1)..sites {
                    configs.push((1u64 << p) | (1u64 << q));
                }
            }
        }
        configs.sort_unstable();
        let index = configs.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        Ok(Self { sites, electrons, configs, index })
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn electrons(&self) -> usize {
        self.electrons
    }

    pub fn config(&self, i: usize) -> u64 {
        self.configs[i]
    }

    pub fn occupied_sites(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.configs[i];
        (0..self.sites).filter(move |p| mask & (1 << p) != 0)
    }

    pub fn occupies(&self, i: usize, site: usize) -> bool {
        self.configs[i] & (1 << site) != 0
    }

    /// Second-quantize a one-body operator given as site-space entries
    /// `(q, p, amp)` meaning `amp * c_q^dag c_p`.
    pub fn one_body(&self, site_entries: &[(usize, usize, C64)]) -> SpMat {
        let mut triplets = Vec::new();
        for (ci, &mask) in self.configs.iter().enumerate() {
            for &(q, p, amp) in site_entries {
                if mask & (1 << p) == 0 {
                    continue;
                }
                if q != p && mask & (1 << q) != 0 {
                    continue;
                }
                let removed = mask & !(1u64 << p);
                let sign_p = parity_below(removed, p);
                let sign_q = parity_below(removed, q);
                let target = removed | (1u64 << q);
                let sign = sign_p * sign_q;
                let row = self.index[&target];
                triplets.push((row, ci as u32, amp * sign));
            }
        }
        SpMat::from_triplets(self.dim(), triplets)
    }

    /// Per-configuration sum of a site function: `d[c] = sum_{p in c} f(p)`.
    pub fn site_diag(&self, f: &[f64]) -> Vec<f64> {
        (0..self.dim()).map(|c| self.occupied_sites(c).map(|p| f[p]).sum()).collect()
    }

    /// Complex variant of [`Self::site_diag`] for phase-weighted sums.
    pub fn site_diag_complex(&self, f: &[C64]) -> Vec<C64> {
        (0..self.dim()).map(|c| self.occupied_sites(c).map(|p| f[p]).sum()).collect()
    }

    /// Per-configuration pair interaction: `d[c] = sum_{p<q in c} w(p, q)`.
    pub fn pair_diag(&self, w: impl Fn(usize, usize) -> f64) -> Vec<f64> {
        (0..self.dim())
            .map(|c| {
                let sites: Vec<usize> = self.occupied_sites(c).collect();
                let mut acc = 0.0;
                for (a, &p) in sites.iter().enumerate() {
                    for &q in &sites[a + 1..] {
                        acc += w(p, q);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Jordan-Wigner parity `(-1)^(number of occupied sites below `site`)`.
fn parity_below(mask: u64, site: usize) -> f64 {
    let below = mask & ((1u64 << site) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn dimensions() {
        assert_eq!(MatterBasis::new(16, 1).unwrap().dim(), 16);
        assert_eq!(MatterBasis::new(16, 2).unwrap().dim(), 120);
        assert!(MatterBasis::new(16, 3).is_err());
    }

    #[test]
    fn number_operator_is_diagonal_occupation() {
        let b = MatterBasis::new(5, 2).unwrap();
        let site = 3;
        let m = b.one_body(&[(site, site, C64::ONE)]);
        for c in 0..b.dim() {
            let (cols, vals) = m.row(c);
            if b.occupies(c, site) {
                assert_eq!(cols, &[c as u32]);
                assert!((vals[0] - C64::ONE).norm() < 1e-15);
            } else {
                assert!(cols.is_empty());
            }
        }
    }

    #[test]
    fn one_body_preserves_hermiticity() {
        let b = MatterBasis::new(6, 2).unwrap();
        // Hermitian site matrix: hop with complex amplitude plus conjugate.
        let amp = C64::new(0.3, -0.8);
        let entries = vec![(1usize, 4usize, amp), (4usize, 1usize, amp.conj())];
        let m = b.one_body(&entries);
        let n = b.dim();
        let mut dense = vec![vec![C64::ZERO; n]; n];
        for r in 0..n {
            let (cols, vals) = m.row(r);
            for (c, v) in cols.iter().zip(vals) {
                dense[r][*c as usize] = *v;
            }
        }
        for r in 0..n {
            for c in 0..n {
                assert!((dense[r][c] - dense[c][r].conj()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn two_body_sector_matches_first_quantized_slater_matrix() {
        // Cross-check the Jordan-Wigner build against the explicit
        // antisymmetrized pair-basis matrix elements
        //   <(i',j')|h x 1 + 1 x h|(i,j)>
        //     = h_{i'i} d_{j'j} + h_{j'j} d_{i'i} - h_{i'j} d_{j'i} - h_{j'i} d_{i'j}
        let sites = 4;
        let b = MatterBasis::new(sites, 2).unwrap();
        let mut h = vec![vec![C64::ZERO; sites]; sites];
        let vals = [
            (0, 1, C64::new(0.7, 0.2)),
            (1, 2, C64::new(-0.4, 0.9)),
            (2, 3, C64::new(0.1, -0.5)),
            (3, 0, C64::new(0.3, 0.6)),
            (0, 0, C64::new(1.1, 0.0)),
            (2, 2, C64::new(-0.8, 0.0)),
        ];
        for &(i, j, v) in &vals {
            h[i][j] += v;
            if i != j {
                h[j][i] += v.conj();
            }
        }
        let mut entries = Vec::new();
        for i in 0..sites {
            for j in 0..sites {
                if h[i][j].norm() > 0.0 {
                    entries.push((i, j, h[i][j]));
                }
            }
        }
        let m = b.one_body(&entries);

        // Pair basis (i<j) in the same order as the bitmask-sorted configs.
        let pairs: Vec<(usize, usize)> = (0..b.dim())
            .map(|c| {
                let s: Vec<usize> = b.occupied_sites(c).collect();
                (s[0], s[1])
            })
            .collect();
        let delta = |a: usize, bb: usize| if a == bb { C64::ONE } else { C64::ZERO };
        for (r, &(ip, jp)) in pairs.iter().enumerate() {
            let mut expect = vec![C64::ZERO; b.dim()];
            for (c, &(i, j)) in pairs.iter().enumerate() {
                expect[c] = h[ip][i] * delta(jp, j) + h[jp][j] * delta(ip, i)
                    - h[ip][j] * delta(jp, i)
                    - h[jp][i] * delta(ip, j);
            }
            let mut got = vec![C64::ZERO; b.dim()];
            let (cols, vals) = m.row(r);
            for (c, v) in cols.iter().zip(vals) {
                got[*c as usize] = *v;
            }
            for c in 0..b.dim() {
                assert!(
                    (got[c] - expect[c]).norm() < 1e-13,
                    "mismatch at ({r},{c}): got {}, expected {}",
                    got[c],
                    expect[c]
                );
            }
        }
        // sanity: the sparse apply agrees with the dense rows
        let x: Vec<C64> = (0..b.dim()).map(|i| C64::new(i as f64, -0.5 * i as f64)).collect();
        let mut y = vec![C64::ZERO; b.dim()];
        m.apply_into(&x, &mut y);
        assert!(dot(&y, &y).re > 0.0);
    }

    #[test]
    fn pair_diag_counts_each_pair_once() {
        let b = MatterBasis::new(4, 2).unwrap();
        let d = b.pair_diag(|p, q| (p * 10 + q) as f64);
        for c in 0..b.dim() {
            let s: Vec<usize> = b.occupied_sites(c).collect();
            assert!((d[c] - (s[0] * 10 + s[1]) as f64).abs() < 1e-15);
        }
    }
}
