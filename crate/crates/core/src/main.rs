use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use hsos::certify::{decide, verify_certificate, DecideOptions, Decision, SosCertificate};
use hsos::error::Error;
use hsos::functional::{fn_diagonal, fn_quadrature};
use hsos::gram::{self, DEFAULT_SAMPLES};
use hsos::linalg::{self, CMatrix, Complex};
use hsos::poly::{Poly, DEFAULT_TOL};
use hsos::reduction::{reconstruct, reduce};
use hsos::toeplitz::build_toeplitz;

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NOINPUT: u8 = 66;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IOERR: u8 = 74;

/// Hermitian sums of squares modulo (z^N zbar^N - 1).
#[derive(Parser)]
#[command(name = "hsos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Polynomial expression, a file holding one (text or JSON), or `-` for stdin.
    #[arg(allow_hyphen_values = true)]
    input: String,
    /// Exponent N of the ideal generator; 0 selects the zero ideal where supported.
    #[arg(long = "n")]
    n: usize,
    /// Relative tolerance. Defaults to $HSOS_TOL, then 1e-9.
    #[arg(long)]
    tol: Option<f64>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership; exit 0 member, 1 non-member, 2 boundary.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Print the certificate of a member as JSON.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Recompute the residual of a certificate.
    Verify {
        /// Polynomial expression, file or `-`.
        #[arg(allow_hyphen_values = true)]
        input: String,
        /// Certificate JSON file.
        #[arg(long)]
        cert: String,
        /// Residual bound for a zero exit status.
        #[arg(long, default_value_t = 1e-8)]
        cert_tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print the normal form and the quotient.
    Reduce {
        #[command(flatten)]
        input: Input,
    },
    /// Print the orbit Gram matrix at angle theta.
    Gram {
        #[command(flatten)]
        input: Input,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Print the smallest orbit Gram eigenvalue on a uniform grid as CSV.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Print the orbit functional by the diagonal formula and by quadrature.
    Fn {
        #[command(flatten)]
        input: Input,
        /// Quadrature samples; 0 picks the exact minimum.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Print the block Toeplitz matrix and its smallest eigenvalue.
    Toeplitz {
        #[command(flatten)]
        input: Input,
    },
}

enum Failure {
    Lib(Error),
    Io(String, io::Error),
    Output(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn report(&self) -> u8 {
        match self {
            Failure::Lib(e) => {
                eprintln!("hsos: {e}");
                match e {
                    Error::InvalidModulus | Error::TooFewSamples { .. } => EXIT_USAGE,
                    Error::Parse(_)
                    | Error::Json(_)
                    | Error::NotHermitian { .. }
                    | Error::DegreeOverflow { .. }
                    | Error::NonFinite { .. } => EXIT_DATA,
                    _ => EXIT_SOFTWARE,
                }
            }
            Failure::Io(path, e) => {
                eprintln!("hsos: cannot read {path}: {e}");
                EXIT_NOINPUT
            }
            Failure::Output(e) => {
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("hsos: cannot write output: {e}");
                }
                EXIT_IOERR
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => ExitCode::from(f.report()),
    }
}

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io("stdin".into(), e))?;
        return Ok(s);
    }
    if Path::new(arg).is_file() {
        return fs::read_to_string(arg).map_err(|e| Failure::Io(arg.into(), e));
    }
    Ok(arg.to_string())
}

fn load_poly(arg: &str) -> Result<Poly, Failure> {
    let text = read_source(arg)?;
    if text.trim_start().starts_with('{') {
        return Ok(serde_json::from_str(&text).map_err(Error::from)?);
    }
    Ok(hsos::parser::parse(text.trim()).map_err(Error::from)?)
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, Failure> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("HSOS_TOL") {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Lib(Error::Domain(format!("HSOS_TOL is not a number: {s}")))),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn decide_options(tol: f64, samples: usize) -> DecideOptions {
    DecideOptions { samples, ..DecideOptions::with_tol(tol) }
}

fn complex_str(c: Complex) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn print_matrix(out: &mut impl Write, m: &CMatrix) -> io::Result<()> {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| complex_str(m[(r, c)])).collect();
        writeln!(out, "[{}]", row.join(", "))?;
    }
    Ok(())
}

fn matrix_json(m: &CMatrix) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
    json!(rows)
}

fn emit_json(out: &mut impl Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    writeln!(out, "{s}").map_err(Failure::Output)
}

fn print_decision(out: &mut impl Write, d: &Decision) -> io::Result<()> {
    writeln!(out, "verdict: {}", d.verdict)?;
    writeln!(out, "N: {}", d.n)?;
    let diag = &d.diagnostics;
    let label = if d.n == 0 { "coefficient matrix" } else { "block Toeplitz" };
    writeln!(out, "{label} min eigenvalue: {:.6e} (band {:.3e})", diag.min_eig, diag.band)?;
    if let (Some(lambda), Some(theta)) = (diag.sweep_min_eig, diag.sweep_theta) {
        writeln!(out, "orbit Gram min eigenvalue: {lambda:.6e} at theta {theta:.9}")?;
    }
    if let Some(c) = &d.certificate {
        writeln!(out, "certificate: {} squares, residual {:.3e}", c.squares.len(), c.residual)?;
    }
    if let Some(w) = &d.witness {
        writeln!(out, "witness: theta {:.12}, value {:.6e}", w.theta, w.value)?;
    }
    if let Some(w) = &d.point_witness {
        writeln!(out, "witness: {} points, value {:.6e}", w.points.len(), w.value)?;
    }
    if let Some(note) = &diag.note {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

fn run(cmd: Command) -> Result<u8, Failure> {
    let mut out = io::stdout().lock();
    let io_err = Failure::Output;
    match cmd {
        Command::Check { input, samples } => {
            let f = load_poly(&input.input)?;
            let d = decide(&f, input.n, &decide_options(resolve_tol(input.tol)?, samples))?;
            if input.json {
                emit_json(&mut out, &d)?;
            } else {
                print_decision(&mut out, &d).map_err(io_err)?;
            }
            Ok(d.verdict.exit_code() as u8)
        }
        Command::Certify { input, samples } => {
            let f = load_poly(&input.input)?;
            let d = decide(&f, input.n, &decide_options(resolve_tol(input.tol)?, samples))?;
            match (&d.certificate, d.verdict) {
                (Some(c), hsos::Verdict::Member) => emit_json(&mut out, c)?,
                _ => {
                    eprintln!("hsos: no certificate, verdict is {}", d.verdict);
                    if input.json {
                        emit_json(&mut out, &d)?;
                    }
                }
            }
            Ok(d.verdict.exit_code() as u8)
        }
        Command::Verify { input, cert, cert_tol, json } => {
            let f = load_poly(&input)?;
            let text = fs::read_to_string(&cert).map_err(|e| Failure::Io(cert.clone(), e))?;
            let c: SosCertificate = serde_json::from_str(&text).map_err(Error::from)?;
            let residual = verify_certificate(&f, c.n, &c)?;
            if json {
                emit_json(&mut out, &json!({ "n": c.n, "residual": residual, "valid": residual <= cert_tol }))?;
            } else {
                writeln!(out, "residual: {residual:e}").map_err(io_err)?;
            }
            Ok(if residual <= cert_tol { 0 } else { 1 })
        }
        Command::Reduce { input } => {
            let f = load_poly(&input.input)?;
            let r = reduce(&f, input.n)?;
            if input.json {
                emit_json(&mut out, &r)?;
            } else {
                writeln!(out, "normal form: {}", reconstruct(&r.normal)).map_err(io_err)?;
                writeln!(out, "quotient: {}", r.quotient).map_err(io_err)?;
                for (k, a) in r.normal.data().iter().enumerate() {
                    writeln!(out, "A{k}:").map_err(io_err)?;
                    print_matrix(&mut out, a).map_err(io_err)?;
                }
            }
            Ok(0)
        }
        Command::Gram { input, theta } => {
            let f = load_poly(&input.input)?;
            let g = gram::orbit_gram(&f, input.n, theta)?;
            let lambda = linalg::min_eigenvalue(&g);
            if input.json {
                emit_json(&mut out, &json!({ "n": input.n, "theta": theta, "gram": matrix_json(&g), "min_eig": lambda }))?;
            } else {
                print_matrix(&mut out, &g).map_err(io_err)?;
                writeln!(out, "min eigenvalue: {lambda}").map_err(io_err)?;
            }
            Ok(0)
        }
        Command::Sweep { input, samples } => {
            let f = load_poly(&input.input)?;
            let s = gram::gram_sweep(&f, input.n, samples, resolve_tol(input.tol)?)?;
            if input.json {
                emit_json(&mut out, &s)?;
            } else {
                writeln!(out, "theta,lambda_min").map_err(io_err)?;
                for (theta, lambda) in s.grid.iter().zip(&s.min_eigs) {
                    writeln!(out, "{theta},{lambda}").map_err(io_err)?;
                }
            }
            Ok(0)
        }
        Command::Fn { input, samples } => {
            let f = load_poly(&input.input)?;
            let diagonal = fn_diagonal(&f, input.n)?;
            let quadrature = fn_quadrature(&f, input.n, samples)?;
            if input.json {
                emit_json(
                    &mut out,
                    &json!({ "n": input.n, "diagonal": [diagonal.re, diagonal.im], "quadrature": [quadrature.re, quadrature.im] }),
                )?;
            } else {
                writeln!(out, "diagonal: {}", complex_str(diagonal)).map_err(io_err)?;
                writeln!(out, "quadrature: {}", complex_str(quadrature)).map_err(io_err)?;
            }
            Ok(0)
        }
        Command::Toeplitz { input } => {
            let f = load_poly(&input.input)?;
            let t = build_toeplitz(&reduce(&f, input.n)?.normal);
            let lambda = t.min_eigenvalue();
            if input.json {
                emit_json(&mut out, &json!({ "n": t.n, "m": t.m, "matrix": matrix_json(&t.matrix), "min_eig": lambda }))?;
            } else {
                print_matrix(&mut out, &t.matrix).map_err(io_err)?;
                writeln!(out, "min eigenvalue: {lambda}").map_err(io_err)?;
            }
            Ok(0)
        }
    }
}
