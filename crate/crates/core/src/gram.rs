//! Gram matrices of pairwise polarized evaluations.
//!
//! For points `p₁, …, p_ℓ` the Gram matrix of `f` has entry `(j, k) =
//! f(p_j, p̄_k)`. If `f` is a sum of squares modulo an ideal and every pair of
//! points annihilates the ideal, this matrix is positive semidefinite, so a
//! vector with a negative quadratic form refutes membership. For the ideal
//! `(zᴺz̄ᴺ − 1)` the annihilating configurations are root-of-unity orbits
//! `ξ, ωξ, …, ω^{N−1}ξ` with `|ξ| = 1` and `ω = e^{2πi/N}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cis, powers, CMatrix, CVector, Complex, ZERO};
use crate::poly::Poly;
use crate::wire;

/// Default number of grid samples for sweeps.
pub const DEFAULT_SAMPLES: usize = 1024;

const GOLDEN_ITERS: usize = 60;

/// The orbit `(ξ, ωξ, …, ω^{N−1}ξ)` with `ξ = e^{iθ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitConfig {
    pub n: usize,
    pub theta: f64,
    pub points: Vec<Complex>,
}

impl OrbitConfig {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModulus);
        }
        let xi = cis(theta);
        let points = (0..n).map(|j| xi * cis(2.0 * PI * j as f64 / n as f64)).collect();
        Ok(OrbitConfig { n, theta, points })
    }
}

/// A vector `v` whose quadratic form against the orbit Gram matrix at angle
/// `theta` is negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefutationWitness {
    pub theta: f64,
    #[serde(with = "wire::complex_vec")]
    pub v: Vec<Complex>,
    pub value: f64,
}

/// A refutation on an explicit point list, used for the trivial ideal where
/// every configuration is admissible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    #[serde(with = "wire::complex_vec")]
    pub points: Vec<Complex>,
    #[serde(with = "wire::complex_vec")]
    pub v: Vec<Complex>,
    pub value: f64,
}

/// Most negative sample of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstSample {
    pub theta: f64,
    pub lambda: f64,
    #[serde(with = "wire::complex_vec")]
    pub v: Vec<Complex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSweep {
    pub grid: Vec<f64>,
    pub min_eigs: Vec<f64>,
    pub worst: WorstSample,
    /// Present only when the refined minimum clears `-10·tol·(1 + ‖Gram‖)`.
    pub witness: Option<RefutationWitness>,
}

impl GramSweep {
    pub fn min_eig(&self) -> f64 {
        self.worst.lambda
    }
}

/// Pairwise polarized evaluations without any symmetry requirement.
pub(crate) fn pairwise(f: &Poly, points: &[Complex]) -> CMatrix {
    let d = f.deg();
    let a = f.matrix();
    let ell = points.len();
    // a_p[j] = A ψ(p_j); conj_pows[k] = conj(ψ(p_k))
    let a_p: Vec<CVector> = points.iter().map(|&p| a * CVector::from_vec(powers(p, d))).collect();
    let conj_pows: Vec<Vec<Complex>> = points.iter().map(|&p| powers(p.conj(), d)).collect();
    CMatrix::from_fn(ell, ell, |j, k| conj_pows[k].iter().zip(a_p[j].iter()).fold(ZERO, |acc, (x, y)| acc + x * y))
}

/// `[f(p_j, p̄_k)]_{j,k}` for a Hermitian `f`.
pub fn gram_at_points(f: &Poly, points: &[Complex]) -> Result<CMatrix> {
    f.require_hermitian()?;
    Ok(pairwise(f, points))
}

/// Gram matrix of `f` on the orbit `ξ, ωξ, …, ω^{N−1}ξ` with `ξ = e^{iθ}`.
pub fn orbit_gram(f: &Poly, n: usize, theta: f64) -> Result<CMatrix> {
    gram_at_points(f, &OrbitConfig::new(n, theta)?.points)
}

/// `v* G v` recomputed from scratch on the orbit at `w.theta`.
pub fn witness_check(f: &Poly, n: usize, w: &RefutationWitness) -> Result<f64> {
    if w.v.len() != n {
        return Err(Error::Dimension(format!("witness vector has length {}, expected {n}", w.v.len())));
    }
    let g = orbit_gram(f, n, w.theta)?;
    Ok(linalg::quadratic_form(&g, &CVector::from_column_slice(&w.v)))
}

/// `v* G v` on an explicit point list.
pub fn witness_check_points(f: &Poly, w: &PointWitness) -> Result<f64> {
    if w.v.len() != w.points.len() {
        return Err(Error::Dimension("witness vector and point list differ in length".into()));
    }
    let g = gram_at_points(f, &w.points)?;
    Ok(linalg::quadratic_form(&g, &CVector::from_column_slice(&w.v)))
}

struct Sample {
    lambda: f64,
    vector: CVector,
    norm: f64,
}

fn sample(f: &Poly, n: usize, theta: f64) -> Result<Sample> {
    let eig = linalg::hermitian_eigen(&orbit_gram(f, n, theta)?);
    let mut vector = eig.vectors.column(0).into_owned();
    linalg::fix_phase(&mut vector);
    Ok(Sample { lambda: eig.min(), vector, norm: eig.spectral_norm() })
}

/// Smallest sweep size accepted for a polynomial of degree `deg`.
pub fn min_samples(deg: usize) -> usize {
    2 * deg + 2
}

/// Samples the smallest orbit Gram eigenvalue on `θ_s = 2πs/samples`. When
/// some sample is negative beyond `tol·(1 + ‖G‖)`, the minimum is refined by
/// golden-section search between the neighbouring grid points and, if it
/// clears the `10·tol` band, returned as a witness.
pub fn gram_sweep(f: &Poly, n: usize, samples: usize, tol: f64) -> Result<GramSweep> {
    f.require_hermitian()?;
    if n == 0 {
        return Err(Error::InvalidModulus);
    }
    let min = min_samples(f.deg());
    if samples < min {
        return Err(Error::TooFewSamples { samples, min });
    }
    let step = 2.0 * PI / samples as f64;
    let grid: Vec<f64> = (0..samples).map(|s| step * s as f64).collect();
    let mut min_eigs = Vec::with_capacity(samples);
    let mut worst: Option<(usize, Sample)> = None;
    for (s, &theta) in grid.iter().enumerate() {
        let smp = sample(f, n, theta)?;
        min_eigs.push(smp.lambda);
        if worst.as_ref().is_none_or(|(_, w)| smp.lambda < w.lambda) {
            worst = Some((s, smp));
        }
    }
    let (ws, wsample) = worst.expect("at least two samples");
    let mut worst = WorstSample { theta: grid[ws], lambda: wsample.lambda, v: wsample.vector.as_slice().to_vec() };

    let mut witness = None;
    if wsample.lambda < -tol * (1.0 + wsample.norm) {
        let (theta, smp) = refine(f, n, grid[ws] - step, grid[ws] + step)?;
        let (theta, smp) = if smp.lambda < wsample.lambda { (theta, smp) } else { (grid[ws], wsample) };
        worst = WorstSample { theta, lambda: smp.lambda, v: smp.vector.as_slice().to_vec() };
        let candidate = RefutationWitness { theta, v: worst.v.clone(), value: 0.0 };
        let value = witness_check(f, n, &candidate)?;
        if value < -10.0 * tol * (1.0 + smp.norm) {
            witness = Some(RefutationWitness { value, ..candidate });
        }
    }
    Ok(GramSweep { grid, min_eigs, worst, witness })
}

/// Golden-section minimization of the smallest Gram eigenvalue on `[lo, hi]`.
fn refine(f: &Poly, n: usize, mut lo: f64, mut hi: f64) -> Result<(f64, Sample)> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = sample(f, n, x1)?.lambda;
    let mut f2 = sample(f, n, x2)?.lambda;
    for _ in 0..GOLDEN_ITERS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = sample(f, n, x1)?.lambda;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = sample(f, n, x2)?.lambda;
        }
    }
    let theta = if f1 <= f2 { x1 } else { x2 };
    let theta = theta.rem_euclid(2.0 * PI);
    Ok((theta, sample(f, n, theta)?))
}

/// Repeats the sweep with doubled grids until a witness appears or
/// `max_refine` doublings are spent.
pub fn find_witness(f: &Poly, n: usize, samples: usize, tol: f64, max_refine: usize) -> Result<Option<RefutationWitness>> {
    let mut samples = samples.max(min_samples(f.deg()));
    for _ in 0..=max_refine {
        if let Some(w) = gram_sweep(f, n, samples, tol)?.witness {
            return Ok(Some(w));
        }
        samples *= 2;
    }
    Ok(None)
}

/// Refutes membership in plain Σ²ₕ: on the `d+1` roots of unity the Gram
/// matrix is congruent to the coefficient matrix, so its most negative
/// eigenvector is a witness whenever the coefficient matrix is indefinite.
pub fn point_witness(f: &Poly, tol: f64) -> Result<Option<PointWitness>> {
    let ell = f.deg() + 1;
    let points: Vec<Complex> = (0..ell).map(|j| cis(2.0 * PI * j as f64 / ell as f64)).collect();
    let g = gram_at_points(f, &points)?;
    let eig = linalg::hermitian_eigen(&g);
    let mut v = eig.vectors.column(0).into_owned();
    linalg::fix_phase(&mut v);
    let w = PointWitness { points, v: v.as_slice().to_vec(), value: 0.0 };
    let value = witness_check_points(f, &w)?;
    Ok((value < -10.0 * tol * (1.0 + eig.spectral_norm())).then_some(PointWitness { value, ..w }))
}
