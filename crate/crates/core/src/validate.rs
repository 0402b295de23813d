//! Self-check suites: every closed form against its independent route.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::One;

use crate::coin::{
    coin_matrix, compose, fold_path_with, phase_closed, phase_recursive, CoinLabel, Nu, SignedCoin,
};
use crate::error::Result;
use crate::linalg::Mat2;
use crate::oracle::{
    class_size, oracle_coefficients_with, oracle_kernel, Displacement, EnumerationCap,
};
use crate::path::PathString;
use crate::propagator::{coefficients, kernel_table, within_magnitude_bound, Method};
use crate::simulator::{
    dispersion, evolve_direct, evolve_fourier, evolve_with_table, k_grid, omega, Boundary,
    FieldState,
};

pub type ComposeRule = fn(SignedCoin, SignedCoin) -> SignedCoin;

/// Largest `t` for the exhaustive phase suite.
pub const PHASE_T_MAX: u32 = 8;

#[derive(Clone, Copy, Debug)]
pub struct ValidationConfig {
    pub t_max: u32,
    pub cap: EnumerationCap,
    /// Product rule of the signed algebra; swappable to check that the
    /// suites catch a broken rule.
    pub compose: ComposeRule,
    pub seed: u64,
}

impl ValidationConfig {
    pub fn new(t_max: u32) -> Self {
        ValidationConfig {
            t_max,
            cap: EnumerationCap::default(),
            compose,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: u64,
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn finish(name: &'static str, outcome: Result<std::result::Result<u64, String>>) -> SuiteResult {
    match outcome {
        Ok(Ok(checked)) => SuiteResult {
            name,
            checked,
            failure: None,
        },
        Ok(Err(msg)) => SuiteResult {
            name,
            checked: 0,
            failure: Some(msg),
        },
        Err(e) => SuiteResult {
            name,
            checked: 0,
            failure: Some(format!("error: {e}")),
        },
    }
}

pub fn run_all(cfg: &ValidationConfig) -> Vec<SuiteResult> {
    vec![
        closure_suite(cfg),
        phase_suite(cfg),
        census_suite(cfg),
        coefficient_suite(cfg),
        kernel_oracle_suite(cfg),
        unitarity_suite(cfg),
        causality_suite(cfg),
        delta_evolution_suite(cfg),
        method_triangle_suite(cfg),
        dispersion_suite(cfg),
    ]
}

const CLOSURE_NUS: [f64; 3] = [0.0, PI / 2.0, PI / 5.0];

/// Every signed product against numeric 2x2 multiplication.
pub fn closure_suite(cfg: &ValidationConfig) -> SuiteResult {
    let mut checked = 0;
    for theta in CLOSURE_NUS {
        let nu = Nu::from_angle(theta);
        for x in SignedCoin::all() {
            for y in SignedCoin::all() {
                let numeric = x.matrix(nu) * y.matrix(nu);
                let algebraic = (cfg.compose)(x, y).matrix(nu);
                let err = numeric.max_abs_diff(&algebraic);
                if err >= 1e-14 {
                    return finish(
                        "closure",
                        Ok(Err(format!(
                            "{x} ∘ {y} at nu angle {theta}: entrywise error {err:e}"
                        ))),
                    );
                }
                checked += 1;
            }
        }
    }
    finish("closure", Ok(Ok(checked)))
}

/// Sign of the numeric product `A_{h_t} ... A_{h_1}` relative to `A_{a_t b_1}`.
fn numeric_sign(s: &PathString, nu: Nu) -> Option<u8> {
    let product = s
        .labels()
        .fold(Mat2::identity(), |m, l| coin_matrix(l, nu) * m);
    let target = coin_matrix(CoinLabel::new(s.a(s.steps()), s.b(1)), nu);
    if product.max_abs_diff(&target) < 1e-9 {
        Some(0)
    } else if product.max_abs_diff(&-target) < 1e-9 {
        Some(1)
    } else {
        None
    }
}

/// Exhaustive over all strings with `t ≤ min(t_max, 8)`.
pub fn phase_suite(cfg: &ValidationConfig) -> SuiteResult {
    let nu = Nu::from_angle(PI / 5.0);
    let mut checked = 0;
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        for t in 1..=cfg.t_max.min(PHASE_T_MAX) {
            for alpha in 0..(1u64 << t) {
                for beta in 0..(1u64 << t) {
                    let s = PathString::new(t, alpha, beta)?;
                    let closed = phase_closed(&s);
                    let recursive = phase_recursive(&s);
                    let folded = fold_path_with(&s, cfg.compose)?;
                    let numeric = numeric_sign(&s, nu);
                    let label_ok = folded.label == CoinLabel::new(s.a(t), s.b(1));
                    if closed != recursive
                        || Some(closed) != numeric
                        || folded.phase_bit() != closed
                        || !label_ok
                    {
                        return Ok(Err(format!(
                            "path {s}: closed {closed}, recursive {recursive}, fold {folded}, numeric sign {numeric:?}"
                        )));
                    }
                    checked += 1;
                }
            }
        }
        Ok(Ok(checked))
    })();
    finish("phase", outcome)
}

/// Class sizes over the cone sum to `4^t`.
pub fn census_suite(cfg: &ValidationConfig) -> SuiteResult {
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        for t in 0..=cfg.t_max {
            let mut total = BigInt::from(0);
            for d in Displacement::cone(t) {
                total += class_size(d)?;
            }
            let expected = BigInt::one() << (2 * t as usize);
            if total != expected {
                return Ok(Err(format!("t={t}: census {total}, expected {expected}")));
            }
        }
        Ok(Ok(u64::from(cfg.t_max) + 1))
    })();
    finish("census", outcome)
}

/// Double sum, hypergeometric form and brute force agree exactly.
pub fn coefficient_suite(cfg: &ValidationConfig) -> SuiteResult {
    let fold = |s: &PathString| fold_path_with(s, cfg.compose);
    let mut checked = 0;
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        for t in 1..=cfg.t_max {
            for d in Displacement::cone(t) {
                let expected = oracle_coefficients_with(d, cfg.cap, &fold)?;
                for method in [Method::DoubleSum, Method::Hypergeometric] {
                    let got = coefficients(d, method)?.quad;
                    if got != expected {
                        return Ok(Err(format!(
                            "t={t} displacement {d}: expected quad {expected} (enumeration), got {got} ({method:?})"
                        )));
                    }
                }
                if !within_magnitude_bound(d, &expected)? {
                    return Ok(Err(format!(
                        "t={t} displacement {d}: quad {expected} exceeds class size"
                    )));
                }
                checked += 1;
            }
        }
        Ok(Ok(checked))
    })();
    finish("coefficients", outcome)
}

/// Enumerated numeric path sums against the structural kernel formula.
pub fn kernel_oracle_suite(cfg: &ValidationConfig) -> SuiteResult {
    let mut checked = 0;
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        for t in 0..=cfg.t_max {
            let table = kernel_table(t)?;
            for theta in [0.0, PI / 2.0] {
                let nu = Nu::from_angle(theta);
                for k in &table.kernels {
                    let brute = oracle_kernel(k.displacement, nu, cfg.cap)?;
                    let err = brute.max_abs_diff(&k.matrix(nu));
                    if err >= 1e-12 {
                        return Ok(Err(format!(
                            "t={t} displacement {}: kernel error {err:e} at nu angle {theta}",
                            k.displacement
                        )));
                    }
                    checked += 1;
                }
            }
        }
        Ok(Ok(checked))
    })();
    finish("kernel-oracle", outcome)
}

/// `Σ_d K†K = I` in exact arithmetic.
pub fn unitarity_suite(cfg: &ValidationConfig) -> SuiteResult {
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        for t in 0..=cfg.t_max {
            if !kernel_table(t)?.gram_exact().is_identity() {
                return Ok(Err(format!("t={t}: Σ K†K is not the identity")));
            }
        }
        Ok(Ok(u64::from(cfg.t_max) + 1))
    })();
    finish("unitarity", outcome)
}

fn delta(radius: usize) -> FieldState {
    FieldState::centered_delta(radius, [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])
}

/// Exact zeros outside the cone and on wrong-parity sites.
pub fn causality_suite(cfg: &ValidationConfig) -> SuiteResult {
    let nu = Nu::from_angle(0.37);
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        let mut checked = 0;
        let mut state = delta(cfg.t_max as usize + 1);
        for t in 0..=cfg.t_max {
            for (x, y, v) in state.sites() {
                let inside = Displacement::new(x, y, i64::from(t)).is_admissible();
                if !inside && (v[0] != Complex64::new(0.0, 0.0) || v[1] != Complex64::new(0.0, 0.0))
                {
                    return Ok(Err(format!(
                        "t={t}: nonzero amplitude at ({x},{y}) outside the cone"
                    )));
                }
                checked += 1;
            }
            state = evolve_direct(&state, 1, nu, Boundary::Padded)?;
        }
        Ok(Ok(checked))
    })();
    finish("causality", outcome)
}

/// Kernel convolution of a point source against direct stepping.
pub fn delta_evolution_suite(cfg: &ValidationConfig) -> SuiteResult {
    let nu = Nu::from_angle(-1.2);
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        let mut direct = delta(cfg.t_max as usize + 1);
        let source = delta(0);
        for t in 0..=cfg.t_max {
            let via_kernel = evolve_with_table(&source, &kernel_table(t)?, nu);
            let err = via_kernel.max_abs_diff(&direct);
            if err >= 1e-12 {
                return Ok(Err(format!("t={t}: kernel vs direct error {err:e}")));
            }
            direct = evolve_direct(&direct, 1, nu, Boundary::Padded)?;
        }
        Ok(Ok(u64::from(cfg.t_max) + 1))
    })();
    finish("delta-evolution", outcome)
}

/// Direct, Fourier and (torus-folded) kernel evolution of a random state.
pub fn method_triangle_suite(cfg: &ValidationConfig) -> SuiteResult {
    let (w, h) = (16usize, 16usize);
    let nu = Nu::from_angle(0.9);
    let outcome = (|| -> Result<std::result::Result<u64, String>> {
        let start = FieldState::random(w, h, (-8, -8), cfg.seed);
        let mut direct = start.clone();
        for t in 0..=cfg.t_max {
            let fourier = evolve_fourier(&start, t, nu)?;
            let kernel =
                evolve_with_table(&start, &kernel_table(t)?, nu).folded_periodic(w, h, (-8, -8));
            let errs = [
                direct.max_abs_diff(&fourier),
                direct.max_abs_diff(&kernel),
                fourier.max_abs_diff(&kernel),
            ];
            let worst = errs.iter().cloned().fold(0.0, f64::max);
            if worst >= 1e-10 {
                return Ok(Err(format!("t={t}: pairwise errors {errs:?}")));
            }
            direct = evolve_direct(&direct, 1, nu, Boundary::Periodic)?;
        }
        Ok(Ok(u64::from(cfg.t_max) + 1))
    })();
    finish("method-triangle", outcome)
}

/// Second-order Richardson estimate of `lim ω(εk̂)/ε` along `direction`.
pub fn weyl_slope(direction: f64, eps: f64) -> f64 {
    let f = |e: f64| omega((e * direction.cos(), e * direction.sin())) / e;
    (4.0 * f(eps / 2.0) - f(eps)) / 3.0
}

/// Eigenphase against the closed form on a 65x65 grid, plus the small-k slope.
pub fn dispersion_suite(_cfg: &ValidationConfig) -> SuiteResult {
    let samples = dispersion(&k_grid(65));
    for s in &samples {
        if (s.omega - s.eigenphase).abs() >= 1e-12 {
            return finish(
                "dispersion",
                Ok(Err(format!(
                    "k={:?}: arccos {} vs eigenphase {}",
                    s.k, s.omega, s.eigenphase
                ))),
            );
        }
    }
    for i in 0..16 {
        let dir = 2.0 * PI * f64::from(i) / 16.0;
        let slope = weyl_slope(dir, 1e-3);
        if (slope - FRAC_1_SQRT_2).abs() >= 1e-6 {
            return finish(
                "dispersion",
                Ok(Err(format!(
                    "direction {dir}: slope {slope}, expected 1/sqrt(2)"
                ))),
            );
        }
    }
    finish("dispersion", Ok(Ok(samples.len() as u64 + 16)))
}
