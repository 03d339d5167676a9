//! Thin helpers over `nalgebra` for the dense Hermitian matrices used
//! throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type Complex = Complex64;
pub type CMatrix = DMatrix<Complex>;
pub type CVector = DVector<Complex>;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue in magnitude, which is the spectral norm.
    pub fn spectral_norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen { values: Vec::new(), vectors: CMatrix::zeros(0, 0) };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).min()
}

/// (M + M*) / 2
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|x| x * 0.5)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Largest entry-wise deviation of `m` from its conjugate transpose.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut defect: f64 = 0.0;
    for j in 0..n {
        for k in j..n {
            defect = defect.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    defect
}

/// Quadratic form v* M v, real part only (M Hermitian).
pub fn quadratic_form(m: &CMatrix, v: &CVector) -> f64 {
    (v.adjoint() * m * v)[(0, 0)].re
}

/// Scales `v` by a unit phase so that its largest-magnitude entry is real
/// and positive. Ties go to the lowest index.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.norm() > v[best].norm() {
            best = i;
        }
    }
    let pivot = v.get(best).copied().unwrap_or(ZERO);
    if pivot.norm() > 0.0 {
        let phase = pivot.conj() / pivot.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
        v[best] = Complex::new(v[best].re, 0.0);
    }
}

/// e^{iθ}
pub fn cis(theta: f64) -> Complex {
    Complex::new(theta.cos(), theta.sin())
}

/// Powers 1, p, p², …, p^d.
pub(crate) fn powers(p: Complex, d: usize) -> Vec<Complex> {
    let mut out = Vec::with_capacity(d + 1);
    let mut acc = ONE;
    for _ in 0..=d {
        out.push(acc);
        acc *= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(2.0, 0.0), Complex::new(0.0, 1.0), Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)],
        );
        let eig = hermitian_eigen(&m);
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
        let lam = CMatrix::from_diagonal(&DVector::from_iterator(2, eig.values.iter().map(|&x| Complex::new(x, 0.0))));
        let back = &eig.vectors * lam * eig.vectors.adjoint();
        assert!(max_abs(&(back - m)) < 1e-14);
    }

    #[test]
    fn phase_is_fixed() {
        let mut v = CVector::from_vec(vec![Complex::new(0.1, 0.0), Complex::new(0.0, -2.0)]);
        fix_phase(&mut v);
        assert_eq!(v[1].im, 0.0);
        assert!((v[1].re - 2.0).abs() < 1e-15);
        assert!((v[0] - Complex::new(0.0, 0.1)).norm() < 1e-15);
    }
}
