//! Reduction modulo the ideal `(zᴺ z̄ᴺ − 1)`.
//!
//! Every monomial `z̄ᵃ zᵇ` with `a, b ≥ N` folds to `z̄^{a−N} z^{b−N}`, so the
//! unique reduced representative has support `{(a, b) : min(a, b) < N}`. In
//! the block basis `ψ(z), zᴺψ(z), …, z^{Nm}ψ(z)` with `ψ(z) = (1, …, z^{N−1})ᵀ`
//! that support is exactly the first block row and column: block `(0, k)` is
//! `A_k` and block `(k, 0)` is `A_k*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram;
use crate::linalg::{self, CMatrix, Complex, ZERO};
use crate::poly::Poly;
use crate::wire;

/// Reduced representative of a Hermitian polynomial with data `(A₀, …, A_m)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigNormalForm {
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    #[serde(with = "wire::matrix_list")]
    data: Vec<CMatrix>,
}

impl TrigNormalForm {
    /// Builds a normal form from its data blocks. Trailing zero blocks are
    /// dropped so that `m` is minimal; `A₀` must be Hermitian.
    pub fn new(n: usize, data: Vec<CMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModulus);
        }
        if data.iter().any(|a| a.nrows() != n || a.ncols() != n) {
            return Err(Error::Dimension(format!("every data block must be {n}x{n}")));
        }
        let mut data = data;
        while data.len() > 1 && data.last().is_some_and(|a| a.iter().all(|x| *x == ZERO)) {
            data.pop();
        }
        if data.is_empty() {
            data.push(CMatrix::zeros(n, n));
        }
        let a0 = &data[0];
        if linalg::hermitian_defect(a0) > 1e-12 * (1.0 + linalg::max_abs(a0)) {
            return Err(Error::NotHermitian { defect: linalg::hermitian_defect(a0) });
        }
        Ok(TrigNormalForm { n, m: data.len() - 1, data })
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn block_degree(&self) -> usize {
        self.m
    }

    pub fn data(&self) -> &[CMatrix] {
        &self.data
    }

    /// `A_k` for `|k| ≤ m`, using `A_{−k} = A_k*`; zero beyond the degree.
    pub fn block(&self, k: i64) -> CMatrix {
        let idx = k.unsigned_abs() as usize;
        match self.data.get(idx) {
            Some(a) if k >= 0 => a.clone(),
            Some(a) => a.adjoint(),
            None => CMatrix::zeros(self.n, self.n),
        }
    }

    /// Size `N(m+1)` of the block matrices built from this form.
    pub fn size(&self) -> usize {
        self.n * (self.m + 1)
    }

    /// The matrix symbol `S(ζ) = A₀ + Σ_k (ζᵏ A_k + ζ̄ᵏ A_k*)` on `|ζ| = 1`.
    pub fn symbol(&self, zeta: Complex) -> CMatrix {
        let mut s = self.data[0].clone();
        let mut pow = Complex::new(1.0, 0.0);
        for a in &self.data[1..] {
            pow *= zeta;
            s += a.map(|x| x * pow) + a.adjoint().map(|x| x * pow.conj());
        }
        s
    }
}

/// Result of [`reduce`]: `f = reconstruct(normal) + quotient·(zᴺz̄ᴺ − 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub normal: TrigNormalForm,
    pub quotient: Poly,
}

/// Folds every monomial of `f` with both exponents `≥ N` down to the reduced
/// support, collecting the quotient. Monomials are processed in decreasing
/// total degree.
pub fn reduce(f: &Poly, n: usize) -> Result<Reduction> {
    if n == 0 {
        return Err(Error::InvalidModulus);
    }
    f.require_hermitian()?;
    let d = f.deg();
    let mut reduced = CMatrix::zeros(d + 1, d + 1);
    let mut quotient = CMatrix::zeros(d + 1, d + 1);
    let mut order: Vec<(usize, usize)> = (0..=d).flat_map(|a| (0..=d).map(move |b| (a, b))).collect();
    order.sort_by_key(|&(a, b)| (std::cmp::Reverse(a + b), a));
    for (a, b) in order {
        let c = f.coeff(a, b);
        if c == ZERO {
            continue;
        }
        let folds = a.min(b) / n;
        let (ra, rb) = (a - folds * n, b - folds * n);
        reduced[(ra, rb)] += c;
        // z̄ᵃzᵇ − z̄^{ra}z^{rb} = z̄^{ra}z^{rb}·(Xᶠ − 1) with X = zᴺz̄ᴺ, and
        // Xᶠ − 1 = (X − 1)(1 + X + … + X^{f−1}).
        for i in 0..folds {
            quotient[(ra + i * n, rb + i * n)] += c;
        }
    }
    let quotient = Poly::from_matrix(quotient)?;
    quotient.require_hermitian().map_err(|_| Error::Inconsistent("reduction quotient is not Hermitian".into()))?;
    let normal = split_blocks(&Poly::from_matrix(reduced)?, n)?;
    Ok(Reduction { normal, quotient })
}

/// Reads the data blocks off a polynomial already in reduced form.
fn split_blocks(f: &Poly, n: usize) -> Result<TrigNormalForm> {
    let blocks = (f.deg() + 1).div_ceil(n);
    let padded = f.padded_matrix(blocks * n);
    let data = (0..blocks).map(|k| padded.view((0, k * n), (n, n)).into_owned()).collect();
    TrigNormalForm::new(n, data)
}

/// The Hermitian polynomial whose block coefficient matrix has `A_k` in block
/// `(0, k)`, `A_k*` in block `(k, 0)` and zeros elsewhere.
pub fn reconstruct(t: &TrigNormalForm) -> Poly {
    let n = t.n;
    let mut m = CMatrix::zeros(t.size(), t.size());
    m.view_mut((0, 0), (n, n)).copy_from(&t.data[0]);
    for (k, a) in t.data.iter().enumerate().skip(1) {
        m.view_mut((0, k * n), (n, n)).copy_from(a);
        m.view_mut((k * n, 0), (n, n)).copy_from(&a.adjoint());
    }
    Poly::from_matrix(m).expect("normal form blocks are finite and within the degree cap")
}

/// Confirms that `f` and `g` have entry-wise equal orbit Gram matrices (to
/// 1e-10) at every angle in `thetas`.
pub fn gram_invariance_check(f: &Poly, g: &Poly, n: usize, thetas: &[f64]) -> Result<bool> {
    for &theta in thetas {
        let a = gram::orbit_gram(f, n, theta)?;
        let b = gram::orbit_gram(g, n, theta)?;
        if linalg::max_abs(&(a - b)) > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}
