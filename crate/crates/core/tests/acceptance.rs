//! Acceptance criteria, one report line each. Runs as a plain binary so a
//! failing criterion does not hide the ones after it.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use weyl_walk::coin::{compose, fold_path, phase_closed, phase_recursive, Nu, SignedCoin};
use weyl_walk::linalg::Mat2;
use weyl_walk::oracle::{oracle_coefficients, Displacement, EnumerationCap};
use weyl_walk::propagator::{coefficients, kernel, kernel_table, Method};
use weyl_walk::simulator::{
    evolve_direct, evolve_fourier, evolve_with_table, omega, Boundary, FieldState,
};
use weyl_walk::{CoefficientQuad, PathString};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Walk matrices written out independently of the library, unscaled.
fn reference_matrix(a: u8, b: u8, nu: Complex64) -> Mat2 {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    Mat2(match (a, b) {
        (0, 0) => [[o, z], [-nu, z]],
        (1, 0) => [[o, z], [nu, z]],
        (1, 1) => [[z, nu.conj()], [z, o]],
        _ => [[z, -nu.conj()], [z, o]],
    })
}

fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

fn coefficient_correctness() -> Outcome {
    let mut count = 0;
    for t in 1..=10u32 {
        for d in Displacement::cone(t) {
            let brute =
                oracle_coefficients(d, EnumerationCap::default()).map_err(|e| e.to_string())?;
            let double = coefficients(d, Method::DoubleSum)
                .map_err(|e| e.to_string())?
                .quad;
            let hyper = coefficients(d, Method::Hypergeometric)
                .map_err(|e| e.to_string())?
                .quad;
            check(double == brute && hyper == brute, || {
                format!("{d}: enumeration {brute}, double sum {double}, hypergeometric {hyper}")
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} displacements, exact agreement"))
}

fn closure_algebra() -> Outcome {
    let mut worst = 0.0f64;
    for theta in [0.0, PI / 2.0, PI / 5.0] {
        let nu = Nu::from_angle(theta);
        let v = nu.value();
        for x in SignedCoin::all() {
            for y in SignedCoin::all() {
                let sx = Complex64::new(f64::from(x.sign()), 0.0);
                let sy = Complex64::new(f64::from(y.sign()), 0.0);
                let numeric = reference_matrix(x.label.a, x.label.b, v).scale(sx)
                    * reference_matrix(y.label.a, y.label.b, v).scale(sy);
                let z = compose(x, y);
                let algebraic = reference_matrix(z.label.a, z.label.b, v)
                    .scale(Complex64::new(f64::from(z.sign()), 0.0));
                worst = worst.max(numeric.max_abs_diff(&algebraic));
            }
        }
    }
    check(worst < 1e-14, || format!("max entrywise error {worst:e}"))?;
    Ok(format!("192 products, max error {worst:e}"))
}

fn phase_law() -> Outcome {
    let nu = Complex64::from_polar(1.0, 0.7);
    let mut count = 0u64;
    for t in 1..=8u32 {
        for alpha in 0..(1u64 << t) {
            for beta in 0..(1u64 << t) {
                let s = PathString::new(t, alpha, beta).map_err(|e| e.to_string())?;
                let product = (1..=t).fold(Mat2::identity(), |m, j| {
                    reference_matrix(s.a(j), s.b(j), nu) * m
                });
                let target = reference_matrix(s.a(t), s.b(1), nu);
                let sign = if product.max_abs_diff(&target) < 1e-9 {
                    0
                } else if product.max_abs_diff(&target.scale(Complex64::new(-1.0, 0.0))) < 1e-9 {
                    1
                } else {
                    return Err(format!("{s}: product is not ±A_ab"));
                };
                let closed = phase_closed(&s);
                let recursive = phase_recursive(&s);
                let fold = fold_path(&s).map_err(|e| e.to_string())?.phase_bit();
                check(closed == sign && recursive == sign && fold == sign, || {
                    format!("{s}: matrix sign {sign}, closed {closed}, recursion {recursive}, fold {fold}")
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} strings"))
}

/// Independent column sums of the exact kernel quads at scale `4^t`.
fn quad_sums(t: u32, quads: impl Iterator<Item = CoefficientQuad>) -> [BigInt; 3] {
    let mut s = [BigInt::zero(), BigInt::zero(), BigInt::zero()];
    for q in quads {
        let [c00, c01, c10, c11] = &q.0;
        s[0] += 2 * (c00 * c00 + c10 * c10);
        s[1] += 2 * (c01 * c01 + c11 * c11);
        s[2] += c10 * c11 - c00 * c01;
    }
    if t == 0 {
        // scale 2^-1 with quad (1,1,1,1)
        s[0] /= 4;
        s[1] /= 4;
    }
    s
}

fn unitarity() -> Outcome {
    for t in 0..=64u32 {
        let table = kernel_table(t).map_err(|e| e.to_string())?;
        check(table.gram_exact().is_identity(), || {
            format!("t={t}: Σ K†K ≠ I")
        })?;
        let four_t = BigInt::one() << (2 * t as usize);
        let [s0, s1, s2] = quad_sums(t, table.kernels.iter().map(|k| k.quad.clone()));
        check(s0 == four_t && s1 == four_t && s2.is_zero(), || {
            format!("t={t}: column sums {s0}, {s1}, cross {s2}")
        })?;
    }
    let nu = Nu::from_angle(0.45);
    let spinor = [Complex64::new(0.6, 0.0), Complex64::new(0.0, -0.8)];
    let source = FieldState::centered_delta(0, spinor);
    let mut direct = FieldState::centered_delta(65, spinor);
    let mut worst = 0.0f64;
    for t in 0..=64u32 {
        let via_kernel =
            evolve_with_table(&source, &kernel_table(t).map_err(|e| e.to_string())?, nu);
        worst = worst.max(via_kernel.max_abs_diff(&direct));
        direct = evolve_direct(&direct, 1, nu, Boundary::Padded).map_err(|e| e.to_string())?;
    }
    check(worst < 1e-12, || {
        format!("delta kernel vs direct error {worst:e}")
    })?;
    Ok(format!("exact gram = I for t ≤ 64; delta error {worst:e}"))
}

fn method_triangle() -> Outcome {
    let n = 64usize;
    let offset = (-32, -32);
    let nu = Nu::from_angle(1.3);
    let start = FieldState::random(n, n, offset, 20240611);
    let mut direct = start.clone();
    let mut worst = [0.0f64; 3];
    for t in 0..=64u32 {
        let table = kernel_table(t).map_err(|e| e.to_string())?;
        let fourier = evolve_fourier(&start, t, nu).map_err(|e| e.to_string())?;
        let folded = evolve_with_table(&start, &table, nu).folded_periodic(n, n, offset);
        let errs = [
            direct.max_abs_diff(&fourier),
            direct.max_abs_diff(&folded),
            fourier.max_abs_diff(&folded),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        direct = evolve_direct(&direct, 1, nu, Boundary::Periodic).map_err(|e| e.to_string())?;
    }
    // wrap-free: the same state embedded in a padded window the cone cannot leave
    let t = 64u32;
    let big = n + 2 * t as usize + 2;
    let half = -(big as i64 / 2);
    let embedded = start.resampled(big, big, (half, half));
    let padded = evolve_direct(&embedded, t, nu, Boundary::Padded).map_err(|e| e.to_string())?;
    let free = evolve_with_table(&start, &kernel_table(t).map_err(|e| e.to_string())?, nu);
    let wrap_free = padded.max_abs_diff(&free);
    let max = worst.iter().cloned().fold(wrap_free, f64::max);
    check(max < 1e-10, || {
        format!(
            "direct/fft {:e}, direct/kernel {:e}, fft/kernel {:e}, wrap-free {wrap_free:e}",
            worst[0], worst[1], worst[2]
        )
    })?;
    Ok(format!("64x64 torus, t ≤ 64, max pairwise error {max:e}"))
}

fn causality() -> Outcome {
    let nu = Nu::from_angle(2.1);
    let mut state =
        FieldState::centered_delta(66, [Complex64::new(0.8, 0.1), Complex64::new(-0.3, 0.5)]);
    let zero = Complex64::new(0.0, 0.0);
    let mut checked = 0u64;
    for t in 0..=64i64 {
        for (x, y, v) in state.sites() {
            let r = x.abs() + y.abs();
            if r > t || (t - r) % 2 != 0 {
                check(v[0] == zero && v[1] == zero, || {
                    format!("t={t}: amplitude {v:?} at ({x},{y})")
                })?;
                checked += 1;
            }
        }
        state = evolve_direct(&state, 1, nu, Boundary::Padded).map_err(|e| e.to_string())?;
    }
    Ok(format!("{checked} forbidden site-times exactly zero"))
}

fn census() -> Outcome {
    for t in 0..=16u32 {
        let total: BigInt = Displacement::cone(t)
            .iter()
            .map(|d| {
                let ti = i64::from(t);
                let alpha_hat = ((ti - d.dx + d.dy) / 2) as u64;
                let beta_hat = ((ti - d.dx - d.dy) / 2) as u64;
                binom(u64::from(t), alpha_hat) * binom(u64::from(t), beta_hat)
            })
            .sum();
        let expected = BigInt::one() << (2 * t as usize);
        check(total == expected, || format!("t={t}: {total} ≠ 4^{t}"))?;
    }
    Ok("t ≤ 16".into())
}

fn weyl_limit() -> Outcome {
    let eps = 1e-3;
    let mut worst = 0.0f64;
    for i in 0..24 {
        let dir = 2.0 * PI * f64::from(i) / 24.0;
        let f = |e: f64| omega((e * dir.cos(), e * dir.sin())) / e;
        let richardson = (4.0 * f(eps / 2.0) - f(eps)) / 3.0;
        worst = worst.max((richardson - FRAC_1_SQRT_2).abs());
    }
    check(worst < 1e-6, || format!("max Richardson error {worst:e}"))?;
    Ok(format!("24 directions, max error {worst:e}"))
}

fn spot_values() -> Outcome {
    let cap = EnumerationCap::default();
    let goldens = [
        (
            Displacement::new(1, 0, 1),
            CoefficientQuad::from_i64([1, 0, 0, 0]),
        ),
        (
            Displacement::new(0, 0, 2),
            CoefficientQuad::from_i64([-1, -1, -1, -1]),
        ),
    ];
    for (d, golden) in goldens {
        let brute = oracle_coefficients(d, cap).map_err(|e| e.to_string())?;
        check(brute == golden, || {
            format!("{d}: enumeration {brute}, golden {golden}")
        })?;
        let closed = coefficients(d, Method::Hypergeometric)
            .map_err(|e| e.to_string())?
            .quad;
        check(closed == golden, || {
            format!("{d}: closed form {closed}, golden {golden}")
        })?;
    }
    let nu = Nu::from_angle(0.9);
    let k = kernel(Displacement::new(0, 0, 2))
        .map_err(|e| e.to_string())?
        .matrix(nu);
    let brute = weyl_walk::oracle::oracle_kernel(Displacement::new(0, 0, 2), nu, cap)
        .map_err(|e| e.to_string())?;
    let golden = Mat2::identity().scale(Complex64::new(-0.5, 0.0));
    let err = k.max_abs_diff(&golden).max(brute.max_abs_diff(&golden));
    check(err < 1e-15, || {
        format!("kernel (0,0,2) off -I/2 by {err:e}")
    })?;
    Ok("kernel(0,0,2) = -I/2, quad(1,0,1) = (1,0,0,0), quad(0,0,2) = (-1,-1,-1,-1)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "coefficient correctness (t ≤ 10, three routes, exact)",
            coefficient_correctness,
        ),
        ("closure algebra (< 1e-14)", closure_algebra),
        ("phase law (all strings, t ≤ 8)", phase_law),
        (
            "propagator unitarity (exact, t ≤ 64) and delta evolution (< 1e-12)",
            unitarity,
        ),
        ("method triangle (64x64, t ≤ 64, < 1e-10)", method_triangle),
        ("causality and parity (exact zeros)", causality),
        ("census (t ≤ 16)", census),
        (
            "small-momentum Weyl limit (Richardson < 1e-6 at eps 1e-3)",
            weyl_limit,
        ),
        ("spot values (oracle confirmed)", spot_values),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
