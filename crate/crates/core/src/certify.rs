//! The decision pipeline: certificates for members, refutation witnesses for
//! non-members, and an explicit boundary verdict when floating point cannot
//! tell the two apart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{self, PointWitness, RefutationWitness, DEFAULT_SAMPLES};
use crate::linalg::{self, CMatrix};
use crate::poly::{HoloPoly, Poly, DEFAULT_TOL};
use crate::reduction::{reduce, TrigNormalForm};
use crate::toeplitz::{self, RecoverOptions};

/// `f = Σ|h_i|² + q·(zᴺz̄ᴺ − 1)` up to `residual`. `n = 0` stands for the
/// zero ideal, where the multiplier plays no role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    pub n: usize,
    pub squares: Vec<HoloPoly>,
    pub multiplier: Poly,
    pub residual: f64,
}

/// Largest coefficient of `f − Σ|h_i|² − q·(zᴺz̄ᴺ − 1)`, recomputed with
/// polynomial arithmetic only.
pub fn verify_certificate(f: &Poly, n: usize, cert: &SosCertificate) -> Result<f64> {
    let mut rest = f.clone();
    for h in &cert.squares {
        rest = &rest - &Poly::hermitian_square(h);
    }
    if n > 0 {
        rest = &rest - &cert.multiplier.mul(&Poly::generator(n)?)?;
    }
    Ok(rest.max_abs_coeff())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    NonMember,
    Boundary,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Member => 0,
            Verdict::NonMember => 1,
            Verdict::Boundary => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Member => "member",
            Verdict::NonMember => "non-member",
            Verdict::Boundary => "boundary",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Smallest eigenvalue of the block Toeplitz matrix, or of the
    /// coefficient matrix for the zero ideal.
    pub min_eig: f64,
    pub scale: f64,
    pub band: f64,
    pub sweep_min_eig: Option<f64>,
    pub sweep_theta: Option<f64>,
    pub sweep_samples: Option<usize>,
    pub recover_iterations: Option<usize>,
    pub recover_residual: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub n: usize,
    pub certificate: Option<SosCertificate>,
    pub witness: Option<RefutationWitness>,
    pub point_witness: Option<PointWitness>,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecideOptions {
    pub tol: f64,
    pub samples: usize,
    /// Grid doublings allowed when hunting for a witness.
    pub max_refine: usize,
    pub cert_tol: f64,
    pub recover: RecoverOptions,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { tol: DEFAULT_TOL, samples: DEFAULT_SAMPLES, max_refine: 4, cert_tol: 1e-8, recover: RecoverOptions::default() }
    }
}

impl DecideOptions {
    pub fn with_tol(tol: f64) -> Self {
        DecideOptions { tol, recover: RecoverOptions { tol, ..RecoverOptions::default() }, ..DecideOptions::default() }
    }
}

/// Certificate for `f` from a PSD block matrix whose block traces are the
/// normal-form data of `f`. The multiplier is the reduction quotient of `f`
/// minus that of `Σ|h_i|²`.
pub fn certificate_from_q(f: &Poly, n: usize, q: &CMatrix) -> Result<SosCertificate> {
    let squares = toeplitz::factor_to_squares(q);
    let mut sum = Poly::zero();
    for h in &squares {
        sum = &sum + &Poly::hermitian_square(h);
    }
    let multiplier = (&reduce(f, n)?.quotient - &reduce(&sum.hermitian_part(), n)?.quotient).hermitian_part();
    let mut cert = SosCertificate { n, squares, multiplier, residual: 0.0 };
    cert.residual = verify_certificate(f, n, &cert)?;
    Ok(cert)
}

/// Decides membership of `f` in `Σ²ₕ + (zᴺz̄ᴺ − 1)`; `n = 0` selects the zero
/// ideal.
pub fn decide(f: &Poly, n: usize, opts: &DecideOptions) -> Result<Decision> {
    f.require_hermitian()?;
    if n == 0 {
        return decide_plain(f, opts);
    }
    let red = reduce(f, n)?;
    if red.normal.data().iter().all(|a| linalg::max_abs(a) == 0.0) {
        let cert = SosCertificate { n, squares: Vec::new(), multiplier: red.quotient.clone(), residual: 0.0 };
        let residual = verify_certificate(f, n, &cert)?;
        let cert = SosCertificate { residual, ..cert };
        return Ok(Decision {
            verdict: Verdict::Member,
            n,
            certificate: Some(cert),
            witness: None,
            point_witness: None,
            diagnostics: Diagnostics { scale: 1.0, band: opts.tol, ..Diagnostics::default() },
        });
    }
    let toep = toeplitz::build_toeplitz(&red.normal);
    let eig = linalg::hermitian_eigen(&toep.matrix);
    let scale = 1.0 + eig.spectral_norm();
    let band = opts.tol * scale;
    let samples = opts.samples.max(gram::min_samples(f.deg()));
    let sweep = gram::gram_sweep(f, n, samples, opts.tol)?;
    let mut diagnostics = Diagnostics {
        min_eig: eig.min(),
        scale,
        band,
        sweep_min_eig: Some(sweep.min_eig()),
        sweep_theta: Some(sweep.worst.theta),
        sweep_samples: Some(samples),
        ..Diagnostics::default()
    };
    let decision =
        |verdict, certificate, witness, diagnostics| Decision { verdict, n, certificate, witness, point_witness: None, diagnostics };

    if let Some(w) = sweep.witness {
        return Ok(decision(Verdict::NonMember, None, Some(w), diagnostics));
    }
    if eig.min() <= -band {
        return match gram::find_witness(f, n, samples * 2, opts.tol, opts.max_refine)? {
            Some(w) => Ok(decision(Verdict::NonMember, None, Some(w), diagnostics)),
            None => {
                Err(Error::Inconsistent(format!("block Toeplitz eigenvalue {:.3e} is negative but no orbit witness was found", eig.min())))
            }
        };
    }
    if eig.min() < band {
        if let Ok(q) = toeplitz::recover_q(&red.normal, &opts.recover) {
            let cert = certificate_from_q(f, n, &q.matrix)?;
            if cert.residual <= opts.cert_tol {
                diagnostics.recover_iterations = Some(q.iterations);
                diagnostics.recover_residual = Some(q.residual);
                diagnostics.note = Some("Toeplitz eigenvalue within the boundary band; certificate verified".into());
                return Ok(decision(Verdict::Member, Some(cert), None, diagnostics));
            }
        }
        let eps = 10.0 * opts.tol * scale;
        let cert = regularized_attempt(f, &red.normal, eps, opts, &mut diagnostics);
        diagnostics.note = Some(format!("Toeplitz eigenvalue within the boundary band; certificate regularized by {eps:.3e}"));
        return Ok(decision(Verdict::Boundary, cert, None, diagnostics));
    }
    match toeplitz::recover_q(&red.normal, &opts.recover) {
        Ok(q) => {
            diagnostics.recover_iterations = Some(q.iterations);
            diagnostics.recover_residual = Some(q.residual);
            let cert = certificate_from_q(f, n, &q.matrix)?;
            if cert.residual <= opts.cert_tol {
                Ok(decision(Verdict::Member, Some(cert), None, diagnostics))
            } else {
                diagnostics.note = Some(format!("certificate residual {:.3e} exceeds the tolerance", cert.residual));
                Ok(decision(Verdict::Boundary, Some(cert), None, diagnostics))
            }
        }
        Err(Error::NoConvergence { iters, residual }) => {
            diagnostics.recover_iterations = Some(iters);
            diagnostics.recover_residual = Some(residual);
            diagnostics.note = Some("positive block matrix search did not converge".into());
            Ok(decision(Verdict::Boundary, None, None, diagnostics))
        }
        Err(e) => Err(e),
    }
}

fn regularized_attempt(f: &Poly, t: &TrigNormalForm, eps: f64, opts: &DecideOptions, diag: &mut Diagnostics) -> Option<SosCertificate> {
    let n = t.modulus();
    let mut data = t.data().to_vec();
    data[0] += CMatrix::identity(n, n).map(|v| v * eps);
    let shifted = TrigNormalForm::new(n, data).ok()?;
    let q = toeplitz::recover_q(&shifted, &opts.recover).ok()?;
    diag.recover_iterations = Some(q.iterations);
    diag.recover_residual = Some(q.residual);
    certificate_from_q(f, n, &q.matrix).ok()
}

/// Membership in plain `Σ²ₕ`: the coefficient matrix must be PSD. Members
/// get its eigen-factorization as certificate; non-members get a witness on
/// roots of unity.
pub fn decide_plain(f: &Poly, opts: &DecideOptions) -> Result<Decision> {
    f.require_hermitian()?;
    let eig = linalg::hermitian_eigen(f.matrix());
    let scale = 1.0 + eig.spectral_norm();
    let band = opts.tol * scale;
    let mut diagnostics = Diagnostics { min_eig: eig.min(), scale, band, ..Diagnostics::default() };
    if eig.min() <= -band {
        let w = gram::point_witness(f, opts.tol)?.ok_or_else(|| {
            Error::Inconsistent(format!("coefficient eigenvalue {:.3e} is negative but no point witness was found", eig.min()))
        })?;
        return Ok(Decision { verdict: Verdict::NonMember, n: 0, certificate: None, witness: None, point_witness: Some(w), diagnostics });
    }
    let squares = toeplitz::factor_to_squares(f.matrix());
    let mut cert = SosCertificate { n: 0, squares, multiplier: Poly::zero(), residual: 0.0 };
    cert.residual = verify_certificate(f, 0, &cert)?;
    let verdict = if cert.residual <= opts.cert_tol {
        Verdict::Member
    } else {
        diagnostics.note = Some(format!("certificate residual {:.3e} exceeds the tolerance", cert.residual));
        Verdict::Boundary
    };
    Ok(Decision { verdict, n: 0, certificate: Some(cert), witness: None, point_witness: None, diagnostics })
}
