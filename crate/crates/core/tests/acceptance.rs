use std::f64::consts::PI;
use std::process::Command;

use hsos::linalg::{self, cis};
use hsos::toeplitz::{scalar_toeplitz_quadratic, trace_residual};
use hsos::{
    build_toeplitz, decide, fn_diagonal, fn_quadrature, format, gram_at_points, gram_sweep, matrix_product_via_fn, orbit_gram, parse,
    reconstruct, recover_q, reduce, verify_certificate, witness_check, CMatrix, CVector, Complex, DecideOptions, HoloPoly, Poly,
    RecoverOptions, TrigNormalForm, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

const EXAMPLE: &str = "10 + 2*z + 2*zbar + 10*z*zbar - 2*z^2*zbar - 2*z*zbar^2";

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn rc(rng: &mut ChaCha8Rng) -> Complex {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn in_disc(rng: &mut ChaCha8Rng) -> Complex {
    Complex::from_polar(rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..2.0 * PI))
}

fn real(rows: &[&[f64]]) -> CMatrix {
    CMatrix::from_fn(rows.len(), rows[0].len(), |r, k| c(rows[r][k], 0.0))
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Poly {
    let m = CMatrix::from_fn(d + 1, d + 1, |_, _| rc(rng));
    Poly::from_matrix(linalg::hermitian_part(&m)).unwrap()
}

fn random_holo(rng: &mut ChaCha8Rng, d: usize) -> HoloPoly {
    HoloPoly::new((0..=d).map(|_| rc(rng)).collect())
}

fn max_entry_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::max_abs(&(a - b))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn hsos_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hsos")).args(args).output().expect("failed to run hsos")
}

fn criterion_1() -> Outcome {
    let f = parse("(z + zbar)^2").map_err(|e| e.to_string())?;
    let expected = real(&[&[0.0, 0.0, 1.0], &[0.0, 2.0, 0.0], &[1.0, 0.0, 0.0]]);
    ensure(*f.matrix() == expected, || format!("coefficient matrix {}", f.matrix()))?;
    let g = gram_at_points(&f, &[c(0.0, 0.0), c(1.0, 0.0)]).map_err(|e| e.to_string())?;
    ensure(g == real(&[&[0.0, 1.0], &[1.0, 4.0]]), || format!("gram {g}"))?;
    let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
    ensure((det - c(-1.0, 0.0)).norm() <= 1e-12, || format!("determinant {det}"))?;
    let out = hsos_bin(&["check", "(z + zbar)^2", "--n", "0"]);
    ensure(out.status.code() == Some(1), || format!("check exited with {:?}", out.status.code()))
}

fn criterion_2() -> Outcome {
    let f = parse(EXAMPLE).map_err(|e| e.to_string())?;
    let expected = real(&[&[10.0, 2.0, 0.0], &[2.0, 10.0, -2.0], &[0.0, -2.0, 0.0]]);
    ensure(*f.matrix() == expected, || format!("coefficient matrix {}", f.matrix()))?;
    let min = linalg::min_eigenvalue(f.matrix());
    ensure(min < -0.3, || format!("coefficient matrix min eig {min}"))?;

    for s in 0..64 {
        let theta = 2.0 * PI * s as f64 / 64.0;
        let g = orbit_gram(&f, 2, theta).map_err(|e| e.to_string())?;
        let sin = theta.sin();
        let want = CMatrix::from_row_slice(2, 2, &[c(20.0, 0.0), c(0.0, 8.0 * sin), c(0.0, -8.0 * sin), c(20.0, 0.0)]);
        ensure(max_entry_diff(&g, &want) <= 1e-12, || format!("orbit gram at {theta}: {g}"))?;
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        ensure((det - (400.0 - 64.0 * sin * sin)).abs() <= 1e-10, || format!("determinant {det} at {theta}"))?;
    }
    let sweep = gram_sweep(&f, 2, 1024, 1e-9).map_err(|e| e.to_string())?;
    ensure((sweep.min_eig() - 12.0).abs() <= 1e-9, || format!("sweep minimum {}", sweep.min_eig()))?;
    ensure((sweep.worst.theta.sin().abs() - 1.0).abs() <= 1e-12, || format!("sweep minimum at {}", sweep.worst.theta))?;
    let at_half_pi = linalg::min_eigenvalue(&orbit_gram(&f, 2, PI / 2.0).map_err(|e| e.to_string())?);
    ensure((at_half_pi - 12.0).abs() <= 1e-9, || format!("min eig at pi/2 {at_half_pi}"))?;

    let d = decide(&f, 2, &DecideOptions::default()).map_err(|e| e.to_string())?;
    ensure(d.verdict == Verdict::Member, || format!("verdict {}", d.verdict))?;
    let cert = d.certificate.ok_or("no certificate")?;
    let residual = verify_certificate(&f, 2, &cert).map_err(|e| e.to_string())?;
    ensure(residual <= 1e-8, || format!("certificate residual {residual}"))?;

    let shifted = real(&[&[5.0, 2.0, 0.0], &[2.0, 10.0, -2.0], &[0.0, -2.0, 5.0]]);
    let min = linalg::min_eigenvalue(&shifted);
    ensure(min > 0.0, || format!("shifted matrix min eig {min}"))?;
    let shifted = Poly::from_matrix(shifted).map_err(|e| e.to_string())?;
    let diff = &(&f - &shifted) - &Poly::generator(2).map_err(|e| e.to_string())?.scale(c(-5.0, 0.0));
    ensure(diff.max_abs_coeff() == 0.0, || "shifted matrix differs from f by more than a multiple of the generator".into())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..500 {
        let d = rng.gen_range(0..=10);
        let n = rng.gen_range(1..=4);
        let f = Poly::from_matrix(CMatrix::from_fn(d + 1, d + 1, |_, _| in_disc(&mut rng))).unwrap();
        let diag = fn_diagonal(&f, n).map_err(|e| e.to_string())?;
        let quad = fn_quadrature(&f, n, 0).map_err(|e| e.to_string())?;
        let bound = 1e-10 * (1.0 + f.l1_norm());
        ensure((diag - quad).norm() <= bound, || format!("case {i}: {diag} vs {quad}"))?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..200 {
        let n = rng.gen_range(1..=4);
        let v: Vec<Complex> = (0..n).map(|_| rc(&mut rng)).collect();
        let w: Vec<Complex> = (0..n).map(|_| rc(&mut rng)).collect();
        let a = CMatrix::from_fn(n, n, |_, _| rc(&mut rng));
        let (s, t) = (rng.gen_range(0..=3), rng.gen_range(0..=3));
        let got = matrix_product_via_fn(&v, &a, &w, s, t).map_err(|e| e.to_string())?;
        let (vv, wv) = (CVector::from_vec(v), CVector::from_vec(w));
        let want = if s == t { vv.dotc(&(&a * &wv)) } else { c(0.0, 0.0) };
        let bound = 1e-9 * (1.0 + a.norm() * vv.norm() * wv.norm());
        ensure((got - want).norm() <= bound, || format!("case {i}: {got} vs {want}"))?;
    }
    Ok(())
}

/// Circle mean of `|w(ζ̄)|² f(ζ)` by exact quadrature.
fn quadrature_quadratic(t: &TrigNormalForm, w: &[Complex]) -> f64 {
    let samples = 4 * (w.len() + t.block_degree()) + 8;
    let mut acc = 0.0;
    for s in 0..samples {
        let z = cis(2.0 * PI * s as f64 / samples as f64);
        let wz = w.iter().rev().fold(c(0.0, 0.0), |acc, &x| acc * z.conj() + x);
        acc += wz.norm_sqr() * t.symbol(z)[(0, 0)].re;
    }
    acc / samples as f64
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100 {
        let d = rng.gen_range(0..=8);
        let h = random_holo(&mut rng, d);
        let red = reduce(&Poly::hermitian_square(&h), 1).map_err(|e| e.to_string())?;
        let f = reconstruct(&red.normal);
        let dec = decide(&f, 1, &DecideOptions::default()).map_err(|e| e.to_string())?;
        ensure(dec.verdict == Verdict::Member, || format!("case {i}: verdict {}", dec.verdict))?;
        let squares = dec.certificate.ok_or("no certificate")?.squares;
        let data = red.normal.data();
        let top = squares.iter().map(HoloPoly::degree).max().unwrap_or(0).max(data.len() - 1);
        let mut worst = 0.0f64;
        for k in 0..=top {
            let mut a = c(0.0, 0.0);
            for sq in &squares {
                for j in k..=sq.degree() {
                    a += sq.coeff(j) * sq.coeff(j - k).conj();
                }
            }
            let want = data.get(k).map_or(c(0.0, 0.0), |m| m[(0, 0)]);
            worst = worst.max((a - want).norm());
        }
        ensure(worst <= 1e-9, || format!("case {i}: autocorrelation residual {worst}"))?;
    }
    for i in 0..50 {
        let m = rng.gen_range(0..=6);
        let mut data: Vec<CMatrix> = (0..=m).map(|_| CMatrix::from_element(1, 1, rc(&mut rng))).collect();
        data[0] = linalg::hermitian_part(&data[0]);
        let t = TrigNormalForm::new(1, data).map_err(|e| e.to_string())?;
        let w: Vec<Complex> = (0..=m).map(|_| rc(&mut rng)).collect();
        let direct = scalar_toeplitz_quadratic(&t, &w).map_err(|e| e.to_string())?;
        let quad = quadrature_quadratic(&t, &w);
        ensure((direct - c(quad, 0.0)).norm() <= 1e-10, || format!("quadratic case {i}: {direct} vs {quad}"))?;
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = DecideOptions::default();
    for i in 0..100 {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(0..=4);
        let mut f = Poly::zero();
        for _ in 0..rng.gen_range(1..=3) {
            let d = rng.gen_range(0..=n * (m + 1) - 1);
            f = &f + &Poly::hermitian_square(&random_holo(&mut rng, d));
        }
        let red = reduce(&f, n).map_err(|e| e.to_string())?;
        let f = reconstruct(&red.normal);

        let dec = decide(&f, n, &opts).map_err(|e| e.to_string())?;
        ensure(dec.verdict == Verdict::Member, || format!("case {i} (N={n}): verdict {} {:?}", dec.verdict, dec.diagnostics))?;
        let cert = dec.certificate.ok_or("no certificate")?;
        let residual = verify_certificate(&f, n, &cert).map_err(|e| e.to_string())?;
        ensure(residual <= 1e-8, || format!("case {i}: certificate residual {residual}"))?;

        let q = recover_q(&red.normal, &RecoverOptions::default()).map_err(|e| format!("case {i}: {e}"))?;
        let trace = trace_residual(&q.matrix, &red.normal).map_err(|e| e.to_string())?;
        ensure(trace <= 1e-8, || format!("case {i}: trace residual {trace}"))?;

        let toep = build_toeplitz(&red.normal);
        let (min, scale) = (toep.min_eigenvalue(), toep.scale());
        ensure(min >= -1e-9 * scale, || format!("case {i}: Toeplitz min eig {min}"))?;
        let sweep = gram_sweep(&f, n, 1024, opts.tol).map_err(|e| e.to_string())?;
        ensure(sweep.min_eig() >= -1e-8 * scale, || format!("case {i}: sweep min eig {}", sweep.min_eig()))?;
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(0..=4);
        let mut data: Vec<CMatrix> = (0..=m).map(|_| CMatrix::from_fn(n, n, |_, _| rc(&mut rng))).collect();
        data[0] = linalg::hermitian_part(&data[0]);
        let base = build_toeplitz(&TrigNormalForm::new(n, data.clone()).map_err(|e| e.to_string())?).min_eigenvalue();
        let shift = base + 0.1 + rng.gen_range(0.0..1.0);
        data[0] -= CMatrix::identity(n, n).map(|x| x * shift);
        let t = TrigNormalForm::new(n, data).map_err(|e| e.to_string())?;
        let min = build_toeplitz(&t).min_eigenvalue();
        ensure(min <= -0.1 + 1e-9, || format!("case {i}: Toeplitz min eig {min}"))?;

        let f = reconstruct(&t);
        let dec = decide(&f, n, &DecideOptions::default()).map_err(|e| e.to_string())?;
        ensure(dec.verdict == Verdict::NonMember, || format!("case {i}: verdict {}", dec.verdict))?;
        let w = dec.witness.ok_or("no witness")?;
        let value = witness_check(&f, n, &w).map_err(|e| e.to_string())?;
        ensure(value <= -1e-3, || format!("case {i}: witness value {value}"))?;
    }
    Ok(())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..200 {
        let d = rng.gen_range(0..=12);
        let n = rng.gen_range(1..=4);
        let f = random_hermitian(&mut rng, d);
        let red = reduce(&f, n).map_err(|e| e.to_string())?;
        let normal = reconstruct(&red.normal);
        let multiple = red.quotient.mul(&Poly::generator(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let gap = (&(&f - &normal) - &multiple).max_abs_coeff();
        ensure(gap <= 1e-12 * (1.0 + f.max_abs_coeff()), || format!("case {i}: reduction gap {gap}"))?;
        for a in 0..=normal.deg() {
            for b in 0..=normal.deg() {
                if a.min(b) >= n && normal.coeff(a, b) != c(0.0, 0.0) {
                    return Err(format!("case {i}: normal form has z̄^{a} z^{b}"));
                }
            }
        }
    }
    Ok(())
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..500 {
        let d = rng.gen_range(0..=8);
        let f = Poly::from_matrix(CMatrix::from_fn(d + 1, d + 1, |_, _| match rng.gen_range(0..4) {
            0 => c(0.0, 0.0),
            1 => c(rng.gen_range(-5..6) as f64, 0.0),
            2 => c(rng.gen_range(-1e6..1e6), rng.gen_range(-1e6..1e6)),
            _ => c(rng.gen::<f64>() * 10f64.powi(rng.gen_range(-30..30)), -rng.gen::<f64>()),
        }))
        .unwrap();
        let text = format(&f);
        let back = parse(&text).map_err(|e| format!("case {i}: {e} in {text}"))?;
        ensure(back == f, || format!("case {i}: {text} did not round trip"))?;
    }
    Ok(())
}

fn criterion_10() -> Outcome {
    let first = hsos_bin(&["certify", EXAMPLE, "--n", "2"]);
    let second = hsos_bin(&["certify", EXAMPLE, "--n", "2"]);
    ensure(first.status.success(), || format!("certify exited with {:?}", first.status.code()))?;
    serde_json::from_slice::<serde_json::Value>(&first.stdout).map_err(|e| format!("output is not JSON: {e}"))?;
    ensure(first.stdout == second.stdout, || "outputs differ".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("counterexample (z + zbar)^2", criterion_1),
        ("N=2 worked example", criterion_2),
        ("orbit functional route agreement", criterion_3),
        ("matrix product through the functional", criterion_4),
        ("scalar spectral factorization", criterion_5),
        ("sum of squares round trip", criterion_6),
        ("negative Toeplitz eigenvalue gives a witness", criterion_7),
        ("reduction exactness", criterion_8),
        ("parser round trip", criterion_9),
        ("certificate determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        match run() {
            Ok(()) => println!("PASS {:>2} {name} ({:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
