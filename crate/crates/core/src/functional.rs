//! The orbit-averaged circle functional `F_N`.
//!
//! `F_N(f)` integrates, over `θ`, the average of the entries of the orbit
//! Gram matrix at `e^{iθ}`. Because `(1/N²) Σ_{j,k} ω^{ℓ(j−k)}` is 1 when
//! `N | ℓ` and 0 otherwise, this collapses to the sum of the diagonal
//! coefficients `a_{ℓℓ}` with `N | ℓ`. [`fn_diagonal`] uses that closed form;
//! [`fn_quadrature`] evaluates the defining integral independently.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gram::{self, OrbitConfig};
use crate::linalg::{CMatrix, Complex, ZERO};
use crate::poly::{HoloPoly, Poly};

/// 1 if `N` divides `ℓ`, else 0.
pub fn circulant_average(ell: usize, n: usize) -> u32 {
    assert!(n > 0, "modulus must be positive");
    u32::from(ell.is_multiple_of(n))
}

/// `a₀₀ + a_{N,N} + a_{2N,2N} + ⋯`
pub fn fn_diagonal(f: &Poly, n: usize) -> Result<Complex> {
    if n == 0 {
        return Err(Error::InvalidModulus);
    }
    Ok((0..=f.deg()).step_by(n).map(|l| f.coeff(l, l)).sum())
}

/// Uniform-grid quadrature of the defining integral. `samples == 0` picks
/// `2·deg + 2`, which is already exact for the trigonometric integrand.
pub fn fn_quadrature(f: &Poly, n: usize, samples: usize) -> Result<Complex> {
    if n == 0 {
        return Err(Error::InvalidModulus);
    }
    let min = gram::min_samples(f.deg());
    let samples = if samples == 0 { min } else { samples };
    if samples < min {
        return Err(Error::TooFewSamples { samples, min });
    }
    let mut acc = ZERO;
    for s in 0..samples {
        let orbit = OrbitConfig::new(n, 2.0 * PI * s as f64 / samples as f64)?;
        let entries: Complex = gram::pairwise(f, &orbit.points).iter().sum();
        acc += entries / (n * n) as f64;
    }
    Ok(acc / samples as f64)
}

/// `ṽ(z) = Σ_j v_j z^{N−j}` for `v ∈ ℂᴺ`.
pub fn embed_vector(v: &[Complex], n: usize) -> Result<HoloPoly> {
    if v.len() != n {
        return Err(Error::Dimension(format!("vector has length {}, expected {n}", v.len())));
    }
    let mut coeffs = vec![ZERO; n + 1];
    for (j, &x) in v.iter().enumerate() {
        coeffs[n - j] = x;
    }
    Ok(HoloPoly::new(coeffs))
}

/// `F_N(z̄^{Ns} z^{Nt} · conj(ṽ) · w̃ · f_A)` with `f_A = Σ a_jk z̄ʲ zᵏ`, which
/// equals `δ_{st} · v* A w`.
pub fn matrix_product_via_fn(v: &[Complex], a: &CMatrix, w: &[Complex], s: usize, t: usize) -> Result<Complex> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::Dimension("A must be a nonempty square matrix".into()));
    }
    let vt = embed_vector(v, n)?;
    let wt = embed_vector(w, n)?;
    let fa = Poly::from_matrix(a.clone())?;
    let product = Poly::conj_product(&vt, &wt).mul(&fa)?.shift(n * s, n * t)?;
    fn_diagonal(&product, n)
}

/// `F_N(|h|² f)`, which is nonnegative whenever every orbit Gram matrix of
/// `f` is positive semidefinite.
pub fn fn_positivity_check(f: &Poly, n: usize, h: &HoloPoly) -> Result<f64> {
    f.require_hermitian()?;
    Ok(fn_diagonal(&Poly::hermitian_square(h).mul(f)?, n)?.re)
}
