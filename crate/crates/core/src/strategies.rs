//! Proptest generators shared by the unit tests.

use proptest::prelude::*;

use crate::linalg::{self, CMatrix, Complex};
use crate::poly::{HoloPoly, Poly};

pub fn complex(bound: f64) -> impl Strategy<Value = Complex> {
    (-bound..bound, -bound..bound).prop_map(|(a, b)| Complex::new(a, b))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex(1.0), rows * cols).prop_map(move |v| CMatrix::from_row_slice(rows, cols, &v))
}

pub fn poly(max_deg: usize) -> impl Strategy<Value = Poly> {
    (0..=max_deg).prop_flat_map(|d| matrix(d + 1, d + 1)).prop_map(|m| Poly::from_matrix(m).unwrap())
}

pub fn hermitian(max_deg: usize) -> impl Strategy<Value = Poly> {
    (0..=max_deg).prop_flat_map(|d| matrix(d + 1, d + 1)).prop_map(|m| Poly::from_matrix(linalg::hermitian_part(&m)).unwrap())
}

/// Hermitian with small integer entries, so arithmetic on it is exact.
pub fn int_hermitian(max_deg: usize) -> impl Strategy<Value = Poly> {
    (0..=max_deg).prop_flat_map(|d| proptest::collection::vec((-4i32..5, -4i32..5), (d + 1) * (d + 1)).prop_map(move |v| (d, v))).prop_map(
        |(d, v)| {
            let m = CMatrix::from_fn(d + 1, d + 1, |r, k| {
                let (a, b) = v[r * (d + 1) + k];
                Complex::new(a as f64, b as f64)
            });
            Poly::from_matrix(&m + m.adjoint()).unwrap()
        },
    )
}

pub fn holo(max_deg: usize) -> impl Strategy<Value = HoloPoly> {
    proptest::collection::vec(complex(1.0), 1..=max_deg + 1).prop_map(HoloPoly::new)
}

/// `Σ |h_i|²` with between 1 and `max_squares` terms.
pub fn sum_of_squares(max_squares: usize, max_deg: usize) -> impl Strategy<Value = Poly> {
    proptest::collection::vec(holo(max_deg), 1..=max_squares)
        .prop_map(|hs| hs.iter().fold(Poly::zero(), |acc, h| &acc + &Poly::hermitian_square(h)))
}
