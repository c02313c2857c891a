//! Small dense/vector linear-algebra helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`
pub fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(x: &mut [C64], s: f64) {
    for xi in x.iter_mut() {
        *xi *= s;
    }
}

/// Rotate a vector's global phase so its largest-magnitude entry is real
/// and positive. Makes eigenvector output deterministic up to solver noise.
pub fn fix_phase(x: &mut [C64]) {
    let mut best = 0usize;
    let mut best_mag = 0.0;
    for (i, v) in x.iter().enumerate() {
        let m = v.norm_sqr();
        if m > best_mag + 1e-30 {
            best_mag = m;
            best = i;
        }
    }
    if best_mag == 0.0 {
        return;
    }
    let phase = x[best] / x[best].norm();
    let rot = phase.conj();
    for v in x.iter_mut() {
        *v *= rot;
    }
}

/// Full eigendecomposition of a complex Hermitian matrix via the real
/// symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`, whose spectrum is
/// that of `H` doubled. Returns eigenvalues ascending with orthonormal
/// eigenvectors, phases fixed deterministically.
pub fn hermitian_eigen(h: &DMatrix<C64>) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = h.nrows();
    assert_eq!(n, h.ncols(), "hermitian_eigen needs a square matrix");
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = h[(i, j)];
            m[(i, j)] = v.re;
            m[(i + n, j + n)] = v.re;
            m[(i, j + n)] = -v.im;
            m[(i + n, j)] = v.im;
        }
    }
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    // Each complex eigenvector appears twice in the embedding (z and i z);
    // Gram-Schmidt against the kept set filters the duplicates.
    let mut values = Vec::with_capacity(n);
    let mut vectors: Vec<Vec<C64>> = Vec::with_capacity(n);
    for &col in &order {
        if vectors.len() == n {
            break;
        }
        let mut z: Vec<C64> =
            (0..n).map(|i| C64::new(eig.eigenvectors[(i, col)], eig.eigenvectors[(i + n, col)])).collect();
        for prev in &vectors {
            let overlap = dot(prev, &z);
            axpy(&mut z, -overlap, prev);
        }
        let nrm = norm(&z);
        if nrm < 0.5 {
            continue;
        }
        scale(&mut z, 1.0 / nrm);
        fix_phase(&mut z);
        values.push(eig.eigenvalues[col]);
        vectors.push(z);
    }
    assert_eq!(vectors.len(), n, "embedding extraction lost eigenvectors");
    (values, vectors)
}

/// Solve the small dense real system `a x = b` by LU. Panics if singular;
/// callers guard with regularization.
pub fn solve_dense(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b)
}
