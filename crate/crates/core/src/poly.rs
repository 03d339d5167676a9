//! Polynomials in `z` and `z̄` stored as square coefficient matrices.
//!
//! Entry `(j, k)` of the matrix is the coefficient of `z̄ʲ zᵏ`, so a
//! polynomial of degree `d` reads `ψ(z)* A ψ(z)` with `ψ(z) = (1, z, …, z^d)ᵀ`.
//! Rows index the conjugate exponent and columns the holomorphic one; every
//! other module relies on this layout.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, powers, CMatrix, Complex, ONE, ZERO};
use crate::wire::{self, Pair};

/// Largest degree any polynomial may reach.
pub const MAX_DEGREE: usize = 512;

/// Default relative tolerance for positivity tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Relative tolerance used by [`Poly::is_hermitian`].
const HERMITIAN_TOL: f64 = 1e-12;

/// A polynomial `Σ a[j][k] z̄ʲ zᵏ` with complex coefficients.
///
/// The stored degree is minimal: the last row and last column are never both
/// zero unless the degree is 0. Coefficients are always finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct Poly {
    coeffs: CMatrix,
}

/// A holomorphic polynomial `Σ h[j] zʲ`; the zero polynomial has no
/// coefficients and otherwise the last coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HoloPoly {
    #[serde(with = "wire::complex_vec")]
    coeffs: Vec<Complex>,
}

impl HoloPoly {
    pub fn new(mut coeffs: Vec<Complex>) -> Self {
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        HoloPoly { coeffs }
    }

    pub fn zero() -> Self {
        HoloPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, j: usize) -> Complex {
        self.coeffs.get(j).copied().unwrap_or(ZERO)
    }

    pub fn eval(&self, p: Complex) -> Complex {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * p + c)
    }
}

impl Poly {
    fn from_trimmed(mut coeffs: CMatrix) -> Self {
        let mut d = coeffs.nrows().saturating_sub(1);
        while d > 0 && (0..=d).all(|i| coeffs[(d, i)] == ZERO && coeffs[(i, d)] == ZERO) {
            d -= 1;
        }
        if d + 1 != coeffs.nrows() {
            coeffs = coeffs.view((0, 0), (d + 1, d + 1)).into_owned();
        }
        Poly { coeffs }
    }

    /// Builds a polynomial from a square coefficient matrix (row = conjugate
    /// exponent). Trailing zero rows/columns are trimmed.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("coefficient matrix must be square, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Ok(Poly::zero());
        }
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let x = m[(r, c)];
                if !x.re.is_finite() || !x.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        let p = Poly::from_trimmed(m);
        if p.deg() > MAX_DEGREE {
            return Err(Error::DegreeOverflow { degree: p.deg(), max: MAX_DEGREE });
        }
        Ok(p)
    }

    /// Real coefficient rows, handy for literals in tests and examples.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("coefficient rows must form a square matrix".into()));
        }
        Poly::from_matrix(CMatrix::from_fn(n, n, |r, c| Complex::new(rows[r][c], 0.0)))
    }

    pub fn zero() -> Self {
        Poly { coeffs: CMatrix::zeros(1, 1) }
    }

    pub fn constant(c: Complex) -> Self {
        Poly { coeffs: CMatrix::from_element(1, 1, c) }
    }

    /// `c · z̄ʲ zᵏ`
    pub fn monomial(conj_exp: usize, holo_exp: usize, c: Complex) -> Result<Self> {
        let d = conj_exp.max(holo_exp);
        if d > MAX_DEGREE {
            return Err(Error::DegreeOverflow { degree: d, max: MAX_DEGREE });
        }
        let mut m = CMatrix::zeros(d + 1, d + 1);
        m[(conj_exp, holo_exp)] = c;
        Ok(Poly::from_trimmed(m))
    }

    pub fn z() -> Self {
        Poly::from_trimmed(CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]))
    }

    pub fn zbar() -> Self {
        Poly::from_trimmed(CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]))
    }

    /// The ideal generator `zᴺ z̄ᴺ − 1`.
    pub fn generator(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidModulus);
        }
        Ok(&Poly::monomial(n, n, ONE)? - &Poly::constant(ONE))
    }

    pub fn deg(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    /// Coefficient of `z̄ʲ zᵏ` (zero outside the stored range).
    pub fn coeff(&self, conj_exp: usize, holo_exp: usize) -> Complex {
        if conj_exp <= self.deg() && holo_exp <= self.deg() {
            self.coeffs[(conj_exp, holo_exp)]
        } else {
            ZERO
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.coeffs
    }

    /// The coefficient matrix zero-padded to `size × size` (`size ≥ deg + 1`).
    pub fn padded_matrix(&self, size: usize) -> CMatrix {
        let n = self.coeffs.nrows();
        assert!(size >= n, "cannot pad degree {} into size {}", self.deg(), size);
        let mut m = CMatrix::zeros(size, size);
        m.view_mut((0, 0), (n, n)).copy_from(&self.coeffs);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// `f*`, whose coefficient matrix is the conjugate transpose.
    pub fn involution(&self) -> Poly {
        Poly { coeffs: self.coeffs.adjoint() }
    }

    /// Largest entry-wise gap between `A` and `A*`.
    pub fn hermitian_defect(&self) -> f64 {
        linalg::hermitian_defect(&self.coeffs)
    }

    /// `f = f*` up to rounding (relative tolerance 1e-12).
    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= HERMITIAN_TOL * (1.0 + self.max_abs_coeff())
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian { defect: self.hermitian_defect() })
        }
    }

    /// `(f + f*) / 2`
    pub fn hermitian_part(&self) -> Poly {
        Poly { coeffs: linalg::hermitian_part(&self.coeffs) }
    }

    /// Max-norm of the coefficients.
    pub fn max_abs_coeff(&self) -> f64 {
        linalg::max_abs(&self.coeffs)
    }

    /// `Σ |a_jk|`
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn scale(&self, c: Complex) -> Poly {
        Poly::from_trimmed(self.coeffs.map(|x| x * c))
    }

    fn combine(&self, other: &Poly, sign: f64) -> Poly {
        let n = self.coeffs.nrows().max(other.coeffs.nrows());
        let mut m = self.padded_matrix(n);
        let o = other.coeffs.nrows();
        for r in 0..o {
            for c in 0..o {
                m[(r, c)] += other.coeffs[(r, c)] * sign;
            }
        }
        Poly::from_trimmed(m)
    }

    /// Product of two polynomials: a 2-D convolution of coefficient matrices.
    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        let degree = self.deg() + other.deg();
        if degree > MAX_DEGREE {
            return Err(Error::DegreeOverflow { degree, max: MAX_DEGREE });
        }
        let mut m = CMatrix::zeros(degree + 1, degree + 1);
        let (a, b) = (&self.coeffs, &other.coeffs);
        for j1 in 0..a.nrows() {
            for k1 in 0..a.ncols() {
                let x = a[(j1, k1)];
                if x == ZERO {
                    continue;
                }
                for j2 in 0..b.nrows() {
                    for k2 in 0..b.ncols() {
                        m[(j1 + j2, k1 + k2)] += x * b[(j2, k2)];
                    }
                }
            }
        }
        Ok(Poly::from_trimmed(m))
    }

    /// Multiplies by the monomial `z̄ʲ zᵏ`.
    pub fn shift(&self, conj_exp: usize, holo_exp: usize) -> Result<Poly> {
        self.mul(&Poly::monomial(conj_exp, holo_exp, ONE)?)
    }

    /// `f^e` by repeated squaring.
    pub fn pow(&self, mut e: u32) -> Result<Poly> {
        let degree = self.deg() as u64 * e as u64;
        if degree > MAX_DEGREE as u64 {
            return Err(Error::DegreeOverflow { degree: degree.min(usize::MAX as u64) as usize, max: MAX_DEGREE });
        }
        let mut base = self.clone();
        let mut acc = Poly::constant(ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Polarized evaluation `f(p, q̄) = Σ a[j][k] q̄ʲ pᵏ`, treating `z` and `z̄`
    /// as independent variables.
    pub fn polarized_eval(&self, p: Complex, q: Complex) -> Complex {
        let d = self.deg();
        let pp = powers(p, d);
        let qq = powers(q.conj(), d);
        qq.iter().enumerate().map(|(j, &qj)| qj * pp.iter().enumerate().map(|(k, &pk)| self.coeffs[(j, k)] * pk).sum::<Complex>()).sum()
    }

    /// `f(p, p̄)`
    pub fn eval(&self, p: Complex) -> Complex {
        self.polarized_eval(p, p)
    }

    /// Smallest eigenvalue and spectral norm of the coefficient matrix.
    pub fn coeff_matrix_spectrum(&self) -> Result<(f64, f64)> {
        self.require_hermitian()?;
        let eig = linalg::hermitian_eigen(&self.coeffs);
        Ok((eig.min(), eig.spectral_norm()))
    }

    /// Membership in Σ²ₕ: the coefficient matrix is positive semidefinite,
    /// i.e. its smallest eigenvalue is at least `-tol·(1 + ‖A‖₂)`.
    pub fn coeff_matrix_psd(&self, tol: f64) -> Result<bool> {
        let (min, norm) = self.coeff_matrix_spectrum()?;
        Ok(min >= -tol * (1.0 + norm))
    }

    /// Normalized integral of `f(e^{iθ}, e^{-iθ})` over the circle, which is
    /// the trace of the coefficient matrix.
    pub fn circle_integral(&self) -> Complex {
        self.coeffs.diagonal().iter().sum()
    }

    /// `|h(z)|²`, the rank-one matrix with entry `(j, k) = h_k · conj(h_j)`.
    pub fn hermitian_square(h: &HoloPoly) -> Poly {
        Poly::conj_product(h, h)
    }

    /// `conj(v(z)) · w(z)`, entry `(j, k) = conj(v_j) · w_k`.
    pub fn conj_product(v: &HoloPoly, w: &HoloPoly) -> Poly {
        let n = v.coeffs.len().max(w.coeffs.len()).max(1);
        Poly::from_trimmed(CMatrix::from_fn(n, n, |j, k| v.coeff(j).conj() * w.coeff(k)))
    }
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.combine(rhs, -1.0)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: -&self.coeffs }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::format(self))
    }
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    deg: usize,
    coeffs: Vec<Vec<Pair>>,
}

impl From<Poly> for PolyJson {
    fn from(p: Poly) -> Self {
        PolyJson { deg: p.deg(), coeffs: wire::matrix_rows(&p.coeffs) }
    }
}

impl TryFrom<PolyJson> for Poly {
    type Error = Error;

    fn try_from(j: PolyJson) -> Result<Self> {
        if j.coeffs.len() != j.deg + 1 {
            return Err(Error::Dimension(format!("deg {} needs {} coefficient rows, got {}", j.deg, j.deg + 1, j.coeffs.len())));
        }
        let m = wire::rows_matrix(&j.coeffs).ok_or_else(|| Error::Dimension("ragged coefficient rows".into()))?;
        Poly::from_matrix(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn z_plus_zbar_sq() -> Poly {
        (&Poly::z() + &Poly::zbar()).pow(2).unwrap()
    }

    fn example_n2() -> Poly {
        Poly::from_real_rows(&[&[10.0, 2.0, 0.0], &[2.0, 10.0, -2.0], &[0.0, -2.0, 0.0]]).unwrap()
    }

    #[test]
    fn involution_of_z_is_zbar() {
        assert_eq!(Poly::z().involution(), Poly::zbar());
        let f = z_plus_zbar_sq();
        assert_eq!(f.involution(), f);
        let g = Poly::monomial(1, 1, c(0.0, 1.0)).unwrap();
        assert_eq!(g.involution(), Poly::monomial(1, 1, c(0.0, -1.0)).unwrap());
    }

    #[test]
    fn products() {
        assert_eq!(Poly::zbar().mul(&Poly::z()).unwrap(), Poly::monomial(1, 1, ONE).unwrap());
        let sq = z_plus_zbar_sq();
        let expected = Poly::from_real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 2.0, 0.0], &[1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(sq, expected);
        let g = Poly::generator(2).unwrap();
        let g2 = g.mul(&g).unwrap();
        let mut m = CMatrix::zeros(5, 5);
        m[(4, 4)] = ONE;
        m[(2, 2)] = c(-2.0, 0.0);
        m[(0, 0)] = ONE;
        assert_eq!(g2, Poly::from_matrix(m).unwrap());
    }

    #[test]
    fn degree_cap() {
        let big = Poly::monomial(0, 300, ONE).unwrap();
        assert!(matches!(big.mul(&big), Err(Error::DegreeOverflow { degree: 600, .. })));
        assert!(Poly::monomial(513, 0, ONE).is_err());
    }

    #[test]
    fn trimming_keeps_minimal_degree() {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 0)] = ONE;
        let p = Poly::from_matrix(m).unwrap();
        assert_eq!(p.deg(), 1);
        assert_eq!(Poly::from_matrix(CMatrix::zeros(3, 3)).unwrap().deg(), 0);
        let diff = &Poly::z() - &Poly::z();
        assert_eq!(diff, Poly::zero());
    }

    #[test]
    fn rejects_non_finite() {
        let m = CMatrix::from_element(1, 1, c(f64::NAN, 0.0));
        assert!(matches!(Poly::from_matrix(m), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn hermitian_square_layout() {
        let h = HoloPoly::new(vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)]);
        let sq = Poly::hermitian_square(&h);
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(sq.coeff(j, k), h.coeff(k) * h.coeff(j).conj());
            }
        }
        assert!(sq.is_hermitian());
        assert!(sq.coeff_matrix_psd(DEFAULT_TOL).unwrap());

        let one_plus_z = Poly::hermitian_square(&HoloPoly::new(vec![ONE, ONE]));
        assert_eq!(one_plus_z, Poly::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap());
        assert_eq!(Poly::hermitian_square(&HoloPoly::new(vec![ONE])), Poly::constant(ONE));
    }

    #[test]
    fn polarized_examples() {
        let f = z_plus_zbar_sq();
        assert_eq!(f.polarized_eval(c(0.0, 0.0), c(1.0, 0.0)), c(1.0, 0.0));
        assert_eq!(f.polarized_eval(c(1.0, 0.0), c(1.0, 0.0)), c(4.0, 0.0));
        let zz = Poly::monomial(1, 1, ONE).unwrap();
        assert_eq!(zz.polarized_eval(c(2.0, 0.0), c(0.0, 3.0)), c(0.0, -6.0));
    }

    #[test]
    fn coefficient_matrix_tests() {
        assert!(!z_plus_zbar_sq().coeff_matrix_psd(DEFAULT_TOL).unwrap());
        assert!(!example_n2().coeff_matrix_psd(DEFAULT_TOL).unwrap());
        let shifted = Poly::from_real_rows(&[&[5.0, 2.0, 0.0], &[2.0, 10.0, -2.0], &[0.0, -2.0, 5.0]]).unwrap();
        assert!(shifted.coeff_matrix_psd(DEFAULT_TOL).unwrap());
        assert!(matches!(Poly::z().coeff_matrix_psd(DEFAULT_TOL), Err(Error::NotHermitian { .. })));
    }

    /// Uniform-grid average of f(e^{iθ}, e^{-iθ}); exact for grids of more
    /// than `deg` points.
    fn circle_quadrature(f: &Poly, samples: usize) -> Complex {
        let mut acc = ZERO;
        for s in 0..samples {
            let xi = linalg::cis(2.0 * std::f64::consts::PI * s as f64 / samples as f64);
            acc += f.eval(xi);
        }
        acc / samples as f64
    }

    #[test]
    fn circle_integral_examples() {
        assert_eq!(Poly::constant(ONE).circle_integral(), ONE);
        assert_eq!(Poly::z().circle_integral(), ZERO);
        let f = z_plus_zbar_sq();
        let q = circle_quadrature(&f, 2 * f.deg() + 2);
        assert!((q - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(f.circle_integral(), c(2.0, 0.0));
    }

    #[test]
    fn json_shape() {
        let json = serde_json::to_string(&Poly::z()).unwrap();
        assert_eq!(json, r#"{"deg":1,"coeffs":[[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]}"#);
        let back: Poly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Poly::z());
        assert!(serde_json::from_str::<Poly>(r#"{"deg":1,"coeffs":[[[0,0]]]}"#).is_err());
    }

    fn arb_complex() -> impl Strategy<Value = Complex> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c(a, b))
    }

    fn arb_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        (0..=max_deg).prop_flat_map(|d| {
            proptest::collection::vec(arb_complex(), (d + 1) * (d + 1))
                .prop_map(move |v| Poly::from_matrix(CMatrix::from_row_slice(d + 1, d + 1, &v)).unwrap())
        })
    }

    fn arb_int_poly(max_deg: usize) -> impl Strategy<Value = Poly> {
        (0..=max_deg).prop_flat_map(|d| {
            proptest::collection::vec((-5i32..5, -5i32..5), (d + 1) * (d + 1)).prop_map(move |v| {
                let v: Vec<Complex> = v.into_iter().map(|(a, b)| c(a as f64, b as f64)).collect();
                Poly::from_matrix(CMatrix::from_row_slice(d + 1, d + 1, &v)).unwrap()
            })
        })
    }

    fn arb_holo(max_deg: usize) -> impl Strategy<Value = HoloPoly> {
        proptest::collection::vec(arb_complex(), 1..=max_deg + 1).prop_map(HoloPoly::new)
    }

    proptest! {
        #[test]
        fn involution_is_an_involution(f in arb_poly(6)) {
            prop_assert_eq!(f.involution().involution(), f);
        }

        #[test]
        fn hermitian_iff_polarization_symmetric(f in arb_poly(5), seed in arb_complex(), herm in any::<bool>()) {
            let f = if herm { f.hermitian_part() } else { f };
            let mut symmetric = true;
            for i in 0..100 {
                let t = i as f64;
                let p = seed * c((0.37 * t).cos(), (1.3 * t).sin());
                let q = c((0.7 * t).sin(), (0.21 * t).cos() * 1.5);
                let a = f.polarized_eval(p, q);
                let b = f.polarized_eval(q, p).conj();
                if (a - b).norm() > 1e-12 * (1.0 + a.norm() + b.norm()) * (1.0 + f.l1_norm()) {
                    symmetric = false;
                }
            }
            prop_assert_eq!(f.is_hermitian(), symmetric);
        }

        #[test]
        fn mul_commutes_and_associates(f in arb_int_poly(3), g in arb_int_poly(3), h in arb_int_poly(3)) {
            prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
            prop_assert_eq!(f.mul(&g).unwrap().mul(&h).unwrap(), f.mul(&g.mul(&h).unwrap()).unwrap());
        }

        #[test]
        fn square_is_nonnegative_on_circle(h in arb_holo(6), theta in 0.0..6.3f64) {
            let p = linalg::cis(theta);
            let v = Poly::hermitian_square(&h).eval(p);
            let direct = h.eval(p).norm_sqr();
            prop_assert!((v.re - direct).abs() <= 1e-12 * (1.0 + direct));
            prop_assert!(v.im.abs() <= 1e-12 * (1.0 + direct));
        }

        #[test]
        fn circle_integral_of_g_gstar_nonnegative(g in arb_poly(4)) {
            let s = g.mul(&g.involution()).unwrap().circle_integral();
            prop_assert!(s.im.abs() <= 1e-10 * (1.0 + s.re.abs()));
            prop_assert!(s.re >= -1e-10);
        }

        #[test]
        fn circle_integral_matches_quadrature(f in arb_poly(6)) {
            let q = circle_quadrature(&f, 2 * f.deg() + 2);
            prop_assert!((q - f.circle_integral()).norm() <= 1e-10 * (1.0 + f.l1_norm()));
        }

        #[test]
        fn sums_of_squares_are_psd(h in arb_holo(5), g in arb_holo(5)) {
            let f = &Poly::hermitian_square(&h) + &Poly::hermitian_square(&g);
            prop_assert!(f.coeff_matrix_psd(DEFAULT_TOL).unwrap());
        }
    }
}
