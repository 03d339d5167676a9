//! Hermitian sums of squares modulo `(zᴺ z̄ᴺ − 1)`.
//!
//! A Hermitian polynomial `f(z, z̄)` is tested for membership in
//! `Σ²ₕ + (zᴺz̄ᴺ − 1)`. Members come with an explicit certificate
//! `f = Σ|h_i|² + q·(zᴺz̄ᴺ − 1)`; non-members come with a vector whose
//! quadratic form against an orbit Gram matrix of `f` is negative.
//!
//! ```
//! use hsos::{decide, parse, DecideOptions, Verdict};
//!
//! let f = parse("10 + 2*z + 2*zbar + 10*z*zbar - 2*z^2*zbar - 2*z*zbar^2").unwrap();
//! let d = decide(&f, 2, &DecideOptions::default()).unwrap();
//! assert_eq!(d.verdict, Verdict::Member);
//! assert!(d.certificate.unwrap().residual < 1e-8);
//! ```

pub mod certify;
pub mod error;
pub mod functional;
pub mod gram;
pub mod linalg;
pub mod parser;
pub mod poly;
pub mod reduction;
#[cfg(test)]
mod strategies;
pub mod toeplitz;
mod wire;

pub use certify::{decide, decide_plain, verify_certificate, DecideOptions, Decision, Diagnostics, SosCertificate, Verdict};
pub use error::{Error, Result};
pub use functional::{fn_diagonal, fn_quadrature, matrix_product_via_fn};
pub use gram::{gram_at_points, gram_sweep, orbit_gram, witness_check, GramSweep, RefutationWitness};
pub use linalg::{CMatrix, CVector, Complex};
pub use parser::{format, parse, ParseError};
pub use poly::{HoloPoly, Poly};
pub use reduction::{reconstruct, reduce, Reduction, TrigNormalForm};
pub use toeplitz::{block_trace, build_toeplitz, factor_to_squares, recover_q, BlockToeplitz, PositiveBlockQ, RecoverOptions};
