//! Block Toeplitz matrices, block traces and recovery of a positive block
//! matrix `Q` whose block-diagonal sums reproduce the data of a normal form.
//!
//! If `h_i(z) = g_iᵀ (1, z, …, z^{N(m+1)−1})` then `Σ|h_i|²` has coefficient
//! matrix `Q = Σ conj(g_i) g_iᵀ`, and reducing it modulo `(zᴺz̄ᴺ − 1)` sends
//! block `(j, j+k)` of `Q` to block `(0, k)`. A PSD `Q` with
//! `block_trace(Q, k) = A_k` therefore factors into a certificate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cis, CMatrix, CVector, Complex, ZERO};
use crate::poly::{HoloPoly, DEFAULT_TOL};
use crate::reduction::TrigNormalForm;
use crate::wire;

/// Full matrix with block `(j, k) = A_{k−j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockToeplitz {
    pub n: usize,
    pub m: usize,
    #[serde(with = "wire::matrix")]
    pub matrix: CMatrix,
}

impl BlockToeplitz {
    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    /// `1 + ‖T‖₂`, the scale used by relative tolerances.
    pub fn scale(&self) -> f64 {
        1.0 + linalg::hermitian_eigen(&self.matrix).spectral_norm()
    }
}

pub fn build_toeplitz(t: &TrigNormalForm) -> BlockToeplitz {
    let (n, m) = (t.modulus(), t.block_degree());
    let mut matrix = CMatrix::zeros(t.size(), t.size());
    for j in 0..=m {
        for k in 0..=m {
            let block = t.block(k as i64 - j as i64);
            matrix.view_mut((j * n, k * n), (n, n)).copy_from(&block);
        }
    }
    BlockToeplitz { n, m, matrix }
}

/// `T_k`: identity blocks on block diagonal `k`, positive `k` above the main
/// diagonal.
pub fn elementary_toeplitz(k: i64, n: usize, m: usize) -> Result<CMatrix> {
    if k.unsigned_abs() as usize > m {
        return Err(Error::DiagonalOutOfRange { k, m });
    }
    let size = n * (m + 1);
    Ok(CMatrix::from_fn(size, size, |r, c| {
        let (br, bc) = ((r / n) as i64, (c / n) as i64);
        if bc - br == k && r % n == c % n {
            Complex::new(1.0, 0.0)
        } else {
            ZERO
        }
    }))
}

fn block_count(q: &CMatrix, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidModulus);
    }
    if q.nrows() != q.ncols() || q.nrows() == 0 || !q.nrows().is_multiple_of(n) {
        return Err(Error::Dimension(format!("expected a square matrix of size a positive multiple of {n}")));
    }
    Ok(q.nrows() / n)
}

/// `Trace[T_{−k} Q] = Σ_j Q_{j−k, j}`, the sum of the blocks on block
/// diagonal `k`.
pub fn block_trace(q: &CMatrix, n: usize, k: i64) -> Result<CMatrix> {
    let blocks = block_count(q, n)?;
    let m = blocks - 1;
    if k.unsigned_abs() as usize > m {
        return Err(Error::DiagonalOutOfRange { k, m });
    }
    let mut acc = CMatrix::zeros(n, n);
    for j in 0..blocks as i64 {
        let row = j - k;
        if (0..blocks as i64).contains(&row) {
            acc += q.view((row as usize * n, j as usize * n), (n, n));
        }
    }
    Ok(acc)
}

/// Largest entry-wise deviation of `block_trace(q, k)` from `A_k`, `0 ≤ k ≤ m`.
pub fn trace_residual(q: &CMatrix, t: &TrigNormalForm) -> Result<f64> {
    let n = t.modulus();
    if q.nrows() != t.size() {
        return Err(Error::Dimension(format!("expected a {0}x{0} matrix", t.size())));
    }
    let mut worst: f64 = 0.0;
    for k in 0..=t.block_degree() {
        let diff = block_trace(q, n, k as i64)? - &t.data()[k];
        worst = worst.max(linalg::max_abs(&diff));
    }
    Ok(worst)
}

/// A positive semidefinite block matrix with prescribed block traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositiveBlockQ {
    pub n: usize,
    pub m: usize,
    #[serde(with = "wire::matrix")]
    pub matrix: CMatrix,
    pub min_eig: f64,
    /// Trace-constraint residual against the target data.
    pub residual: f64,
    pub iterations: usize,
    /// Best feasibility residual seen at every 100th iteration.
    pub checkpoints: Vec<f64>,
}

impl PositiveBlockQ {
    pub fn squares(&self) -> Vec<HoloPoly> {
        factor_to_squares(&self.matrix)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoverOptions {
    pub feas_tol: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        RecoverOptions { feas_tol: 1e-8, max_iters: 20_000, tol: DEFAULT_TOL }
    }
}

const CHECKPOINT_EVERY: usize = 100;
const SHIFT_CHECK_EVERY: usize = 10;

/// Finds a PSD `Q` with `block_trace(Q, k) = A_k` by Dykstra's alternating
/// projections between the PSD cone and the affine trace set.
///
/// When the symbol is bounded below by `μ > 0` on the circle, the search runs
/// on data with `A₀` lowered by `δ(m+1)I`, `δ = μ / (2(m+1))`, and stops as
/// soon as the affine iterate `X` satisfies `X + δI ⪰ 0`. The returned
/// `Q = X + δI` then meets the trace constraints to rounding error and is
/// strictly positive definite.
///
/// Without such a margin the feasible set has empty interior and the
/// projections crawl. The best PSD iterate then seeds a Levenberg–Marquardt
/// solve on a factor `G` of `Q = G*G`, which stays PSD by construction.
pub fn recover_q(t: &TrigNormalForm, opts: &RecoverOptions) -> Result<PositiveBlockQ> {
    let toep = build_toeplitz(t);
    let eig = linalg::hermitian_eigen(&toep.matrix);
    let scale = 1.0 + eig.spectral_norm();
    if eig.min() < -opts.tol * scale {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    let (n, m) = (t.modulus(), t.block_degree());
    let finish = |q: CMatrix, iterations: usize, checkpoints: Vec<f64>| -> Result<PositiveBlockQ> {
        let residual = trace_residual(&q, t)?;
        let min_eig = linalg::min_eigenvalue(&q);
        Ok(PositiveBlockQ { n, m, matrix: q, min_eig, residual, iterations, checkpoints })
    };
    if m == 0 {
        return finish(t.data()[0].clone(), 0, Vec::new());
    }

    let delta = symbol_lower_estimate(t).max(0.0) / (2.0 * (m + 1) as f64);
    let target = (opts.feas_tol * 1e-3).max(1e-14 * scale);
    let mut spent = 0;
    let mut best = f64::INFINITY;
    let shifts: &[f64] = if delta > 0.0 { &[delta, 0.0] } else { &[0.0] };
    for &shift in shifts {
        let mut solver = Dykstra::new(t, shift);
        let mut chunk = WARM_START_ITERS;
        while spent < opts.max_iters {
            let budget = chunk.min(opts.max_iters - spent);
            let done = solver.run(budget, opts.feas_tol);
            spent += budget;
            if let Some(q) = done {
                return finish(q, solver.iterations, solver.checkpoints);
            }
            best = best.min(solver.best);
            if let Some(g) = polish_factor(t, &solver.best_iterate(), target, POLISH_ITERS) {
                let q = linalg::hermitian_part(&(g.adjoint() * g));
                if trace_residual(&q, t)? <= opts.feas_tol {
                    return finish(q, solver.iterations, solver.checkpoints);
                }
            }
            if shift > 0.0 {
                break;
            }
            chunk *= 4;
        }
    }
    Err(Error::NoConvergence { iters: spent, residual: best })
}

const WARM_START_ITERS: usize = 500;
const POLISH_ITERS: usize = 100;

/// `min_θ λ_min(S(e^{iθ}))` sampled on a uniform grid.
fn symbol_lower_estimate(t: &TrigNormalForm) -> f64 {
    let samples = (64 * (t.block_degree() + 1)).max(512);
    (0..samples).map(|s| linalg::min_eigenvalue(&t.symbol(cis(2.0 * PI * s as f64 / samples as f64)))).fold(f64::INFINITY, f64::min)
}

/// Block `(j, j+k)` set to `A_k / (m+1−k)`, mirrored below the diagonal.
fn lifted_start(data: &[CMatrix], n: usize) -> CMatrix {
    let m = data.len() - 1;
    let size = n * (m + 1);
    let mut x = CMatrix::zeros(size, size);
    for (k, a) in data.iter().enumerate() {
        let share = a.map(|v| v / (m + 1 - k) as f64);
        for j in 0..=m - k {
            x.view_mut((j * n, (j + k) * n), (n, n)).copy_from(&share);
            if k > 0 {
                x.view_mut(((j + k) * n, j * n), (n, n)).copy_from(&share.adjoint());
            }
        }
    }
    x
}

/// Orthogonal projection of a Hermitian matrix onto the trace set: every
/// block on diagonal `k` moves by the same share of the defect.
fn project_affine(y: &CMatrix, data: &[CMatrix], n: usize) -> CMatrix {
    let m = data.len() - 1;
    let mut x = y.clone();
    for (k, a) in data.iter().enumerate() {
        let mut sum = CMatrix::zeros(n, n);
        for j in 0..=m - k {
            sum += y.view((j * n, (j + k) * n), (n, n));
        }
        let corr = (a - sum).map(|v| v / (m + 1 - k) as f64);
        for j in 0..=m - k {
            let mut upper = x.view_mut((j * n, (j + k) * n), (n, n));
            upper += &corr;
            if k > 0 {
                let mut lower = x.view_mut(((j + k) * n, j * n), (n, n));
                lower += corr.adjoint();
            }
        }
    }
    x
}

fn trace_defect(y: &CMatrix, data: &[CMatrix], n: usize) -> f64 {
    let m = data.len() - 1;
    let mut worst: f64 = 0.0;
    for (k, a) in data.iter().enumerate() {
        let mut sum = -a;
        for j in 0..=m - k {
            sum += y.view((j * n, (j + k) * n), (n, n));
        }
        worst = worst.max(linalg::max_abs(&sum));
    }
    worst
}

fn clip_psd(m: &CMatrix) -> CMatrix {
    let eig = linalg::hermitian_eigen(m);
    let size = m.nrows();
    let mut out = CMatrix::zeros(size, size);
    for (i, &lambda) in eig.values.iter().enumerate() {
        if lambda > 0.0 {
            let u = eig.vectors.column(i);
            out += (u * u.adjoint()).map(|v| v * lambda);
        }
    }
    linalg::hermitian_part(&out)
}

/// Resumable Dykstra iteration on data with `A₀` lowered by `shift·(m+1)·I`.
/// Results are shifted back by `shift·I`.
struct Dykstra {
    n: usize,
    data: Vec<CMatrix>,
    shift: f64,
    x: CMatrix,
    p: CMatrix,
    best: f64,
    best_y: CMatrix,
    iterations: usize,
    /// Best trace defect so far, recorded every 100 iterations.
    checkpoints: Vec<f64>,
}

impl Dykstra {
    fn new(t: &TrigNormalForm, shift: f64) -> Self {
        let n = t.modulus();
        let mut data = t.data().to_vec();
        data[0] -= CMatrix::identity(n, n).map(|v| v * (shift * (t.block_degree() + 1) as f64));
        let x = lifted_start(&data, n);
        let size = t.size();
        let best_y = clip_psd(&x);
        let best = trace_defect(&best_y, &data, n);
        Dykstra { n, data, shift, x, p: CMatrix::zeros(size, size), best, best_y, iterations: 0, checkpoints: Vec::new() }
    }

    fn shifted(&self, q: CMatrix) -> CMatrix {
        let size = q.nrows();
        q + CMatrix::identity(size, size).map(|v| v * self.shift)
    }

    fn best_iterate(&self) -> CMatrix {
        self.shifted(self.best_y.clone())
    }

    /// Runs up to `iters` more iterations. Returns a certificate matrix once
    /// the PSD iterate meets the traces to `feas_tol`, or once the shifted
    /// affine iterate is PSD.
    fn run(&mut self, iters: usize, feas_tol: f64) -> Option<CMatrix> {
        for _ in 0..iters {
            self.iterations += 1;
            let y = clip_psd(&(&self.x + &self.p));
            self.p += &self.x - &y;
            self.x = project_affine(&y, &self.data, self.n);

            let defect = trace_defect(&y, &self.data, self.n);
            if defect < self.best {
                self.best = defect;
                self.best_y = y.clone();
            }
            if self.iterations.is_multiple_of(CHECKPOINT_EVERY) {
                self.checkpoints.push(self.best);
            }
            if defect <= feas_tol {
                return Some(self.shifted(y));
            }
            if self.shift > 0.0 && self.iterations.is_multiple_of(SHIFT_CHECK_EVERY) && linalg::min_eigenvalue(&self.x) >= -0.5 * self.shift
            {
                return Some(self.shifted(self.x.clone()));
            }
        }
        None
    }
}

/// Levenberg–Marquardt on `G` for `block_trace(G*G, k) = A_k`, `0 ≤ k ≤ m`.
///
/// Factors with `r ≤ N` rows, then one with full row count, are each started
/// from the leading `r` eigenpairs of the current start. Low `r` converges
/// fast when it matches the rank of a solution but can stall in spurious
/// minima; full `r` has no spurious minima but crawls near rank-deficient
/// solutions. So after each sweep the best partial factor becomes the next
/// start, and its truncations get another chance.
fn polish_factor(t: &TrigNormalForm, start: &CMatrix, target: f64, max_iters: usize) -> Option<CMatrix> {
    let size = t.size();
    let layout = ResidualLayout::new(t.modulus(), t.block_degree());
    let mut start = start.clone();
    for _ in 0..POLISH_ROUNDS {
        let eig = linalg::hermitian_eigen(&start);
        let floor = 1e-8 * (1.0 + eig.spectral_norm()).sqrt();
        let mut best: Option<(f64, CMatrix)> = None;
        // An outer spectral factor has at most N rows; the full-rank run
        // only serves to improve the next start.
        let ranks = (1..=t.modulus().min(size)).chain((t.modulus() < size).then_some(size));
        for rank in ranks {
            let mut g = CMatrix::zeros(rank, size);
            for r in 0..rank {
                let i = size - 1 - r;
                let root = eig.values[i].max(0.0).sqrt().max(floor);
                for c in 0..size {
                    g[(r, c)] = eig.vectors[(c, i)].conj() * root;
                }
            }
            let (g, defect) = levenberg_marquardt(t, &layout, g, target, max_iters);
            if defect <= target {
                return Some(g);
            }
            if best.as_ref().is_none_or(|(d, _)| defect < *d) {
                best = Some((defect, g));
            }
        }
        let (_, g) = best?;
        start = g.adjoint() * g;
    }
    None
}

const POLISH_ROUNDS: usize = 3;
const STALL_WINDOW: usize = 10;

/// Returns the final factor and its largest trace defect. Gives up once ten
/// iterations fail to cut the residual norm by 10%.
fn levenberg_marquardt(t: &TrigNormalForm, layout: &ResidualLayout, mut g: CMatrix, target: f64, max_iters: usize) -> (CMatrix, f64) {
    let mut r = factor_residual(t, layout, &g);
    let mut norm = r.norm();
    let mut nu = 1.0;
    let mut history = vec![norm];
    for _ in 0..max_iters {
        if r.amax() <= target {
            break;
        }
        if history.len() > STALL_WINDOW && norm > 0.9 * history[history.len() - 1 - STALL_WINDOW] {
            break;
        }
        let jac = factor_jacobian(t, layout, &g);
        let mut lhs = &jac * jac.transpose();
        let mu = nu * norm * norm;
        for i in 0..lhs.nrows() {
            lhs[(i, i)] += mu;
        }
        let Some(chol) = lhs.cholesky() else { break };
        let step = jac.transpose() * chol.solve(&(-&r));
        let trial = apply_step(&g, &step);
        let r_trial = factor_residual(t, layout, &trial);
        let trial_norm = r_trial.norm();
        if trial_norm < norm {
            g = trial;
            r = r_trial;
            norm = trial_norm;
            nu = (nu * 0.5).max(1e-8);
        } else {
            nu *= 4.0;
        }
        history.push(norm);
    }
    let defect = r.amax();
    (g, defect)
}

/// Row layout of the factor residual: the upper triangle of the Hermitian
/// `k = 0` defect (real diagonal) followed by every entry for `k ≥ 1`.
/// `None` marks entries fixed by Hermitian symmetry.
struct ResidualLayout {
    n: usize,
    slots: Vec<Option<(usize, bool)>>,
    rows: usize,
}

impl ResidualLayout {
    fn new(n: usize, m: usize) -> Self {
        let mut slots = Vec::with_capacity(n * n * (m + 1));
        let mut rows = 0;
        for k in 0..=m {
            for q in 0..n {
                for p in 0..n {
                    let slot = match (k, p.cmp(&q)) {
                        (0, std::cmp::Ordering::Greater) => None,
                        (0, std::cmp::Ordering::Equal) => Some((rows, false)),
                        _ => Some((rows, true)),
                    };
                    if let Some((_, im)) = slot {
                        rows += 1 + usize::from(im);
                    }
                    slots.push(slot);
                }
            }
        }
        ResidualLayout { n, slots, rows }
    }

    fn slot(&self, k: usize, p: usize, q: usize) -> Option<(usize, bool)> {
        self.slots[k * self.n * self.n + q * self.n + p]
    }
}

/// Defects of `block_trace(G*G, k) − A_k`, `k = 0..=m`, in the row layout.
fn factor_residual(t: &TrigNormalForm, layout: &ResidualLayout, g: &CMatrix) -> DVector<f64> {
    let n = t.modulus();
    let q = g.adjoint() * g;
    let mut out = DVector::zeros(layout.rows);
    for (k, a) in t.data().iter().enumerate() {
        let mut sum = -a;
        for j in 0..=t.block_degree() - k {
            sum += q.view((j * n, (j + k) * n), (n, n));
        }
        for c in 0..n {
            for r in 0..n {
                if let Some((row, im)) = layout.slot(k, r, c) {
                    out[row] = sum[(r, c)].re;
                    if im {
                        out[row + 1] = sum[(r, c)].im;
                    }
                }
            }
        }
    }
    out
}

/// Jacobian of [`factor_residual`] with respect to the real and imaginary
/// parts of every entry of `G`.
fn factor_jacobian(t: &TrigNormalForm, layout: &ResidualLayout, g: &CMatrix) -> DMatrix<f64> {
    let n = t.modulus();
    let m = t.block_degree() as i64;
    let (rank, size) = g.shape();
    let mut jac = DMatrix::zeros(layout.rows, 2 * rank * size);
    let mut add = |k: i64, p: usize, q: usize, col: usize, v: Complex| {
        if !(0..=m).contains(&k) {
            return;
        }
        if let Some((row, im)) = layout.slot(k as usize, p, q) {
            jac[(row, col)] += v.re;
            if im {
                jac[(row + 1, col)] += v.im;
            }
        }
    };
    for i in 0..rank {
        for c in 0..size {
            for (part, alpha) in [(0, Complex::new(1.0, 0.0)), (1, Complex::new(0.0, 1.0))] {
                let col = 2 * (i * size + c) + part;
                // dQ = α·u·e_cᵀ + conj(α)·e_c·u*, u = conj(row i of G).
                for a in 0..size {
                    let (ba, bc) = ((a / n) as i64, (c / n) as i64);
                    add(bc - ba, a % n, c % n, col, alpha * g[(i, a)].conj());
                    add(ba - bc, c % n, a % n, col, alpha.conj() * g[(i, a)]);
                }
            }
        }
    }
    jac
}

fn apply_step(g: &CMatrix, step: &DVector<f64>) -> CMatrix {
    let (rank, size) = g.shape();
    CMatrix::from_fn(rank, size, |i, c| {
        let idx = 2 * (i * size + c);
        g[(i, c)] + Complex::new(step[idx], step[idx + 1])
    })
}

/// Eigen-factorization `Q = G*G` with `G = Λ^{1/2} U*`. Row `i` of `G` holds
/// the coefficients of `h_i`; negative eigenvalues are clipped and eigenvalues
/// at or below `1e−12·(1 + ‖Q‖)` are dropped. Squares come in order of
/// decreasing eigenvalue.
pub fn factor_to_squares(q: &CMatrix) -> Vec<HoloPoly> {
    let eig = linalg::hermitian_eigen(q);
    let cutoff = 1e-12 * (1.0 + eig.spectral_norm());
    let mut squares = Vec::new();
    for (i, &lambda) in eig.values.iter().enumerate().rev() {
        if lambda <= cutoff {
            continue;
        }
        // Row of U* is the conjugated eigenvector.
        let mut row: CVector = eig.vectors.column(i).map(|v| v.conj() * lambda.sqrt());
        linalg::fix_phase(&mut row);
        squares.push(HoloPoly::new(row.as_slice().to_vec()));
    }
    squares
}

/// `w* Toep(a₀, …, a_m) w` for a scalar normal form, with the Toeplitz matrix
/// sized to `w` and `a_k = 0` beyond `m`. Equals the circle mean of
/// `|w(ζ̄)|² f(ζ)` with `w(z) = Σ w_j zʲ`.
pub fn scalar_toeplitz_quadratic(t: &TrigNormalForm, w: &[Complex]) -> Result<Complex> {
    if t.modulus() != 1 {
        return Err(Error::Domain("the scalar quadratic form needs N = 1".into()));
    }
    let len = w.len();
    let mut acc = ZERO;
    for j in 0..len {
        for k in 0..len {
            let a = t.block(k as i64 - j as i64)[(0, 0)];
            acc += w[j].conj() * a * w[k];
        }
    }
    Ok(acc)
}
