//! Brute-force ground truth: enumerate every binary string connecting two
//! spacetime points and sum directly.
//!
//! The oracle never approximates. When a class is larger than the configured
//! cap it refuses with [`Error::CapExceeded`].

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::{coin_matrix, fold_path, CoinLabel, Direction, Nu, SignedCoin};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::path::{PathString, MAX_PATH_STEPS};

/// Spacetime separation `(x - x', y - y', t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Displacement {
    pub dx: i64,
    pub dy: i64,
    pub t: i64,
}

impl Displacement {
    pub fn new(dx: i64, dy: i64, t: i64) -> Self {
        Displacement { dx, dy, t }
    }

    /// Inside the causal cone with matching parity.
    pub fn is_admissible(&self) -> bool {
        let slack = self.t - self.dx.abs() - self.dy.abs();
        self.t >= 0 && slack >= 0 && slack % 2 == 0
    }

    /// All admissible displacements at time `t`, ordered by `dx` then `dy`.
    pub fn cone(t: u32) -> Vec<Displacement> {
        let t = i64::from(t);
        let mut out = Vec::new();
        for dx in -t..=t {
            let rest = t - dx.abs();
            for dy in (-rest..=rest).step_by(2) {
                out.push(Displacement::new(dx, dy, t));
            }
        }
        out
    }
}

impl fmt::Display for Displacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.dx, self.dy, self.t)
    }
}

/// Numbers of 1-bits `(α̂, β̂)` every connecting string must carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SetBitCounts {
    pub alpha_hat: u32,
    pub beta_hat: u32,
}

/// Occurrences of each direction along a path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepCounts {
    pub r: u32,
    pub l: u32,
    pub u: u32,
    pub d: u32,
}

impl StepCounts {
    pub fn of(path: &PathString) -> Self {
        let mut c = StepCounts::default();
        for dir in path.directions() {
            match dir {
                Direction::R => c.r += 1,
                Direction::L => c.l += 1,
                Direction::U => c.u += 1,
                Direction::D => c.d += 1,
            }
        }
        c
    }

    pub fn displacement(&self) -> Displacement {
        let (r, l, u, d) = (
            i64::from(self.r),
            i64::from(self.l),
            i64::from(self.u),
            i64::from(self.d),
        );
        Displacement::new(r - l, u - d, r + l + u + d)
    }

    pub fn set_bit_counts(&self) -> SetBitCounts {
        SetBitCounts {
            alpha_hat: self.l + self.u,
            beta_hat: self.l + self.d,
        }
    }
}

/// The exact coefficients `c00, c01, c10, c11`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CoefficientQuad(pub [BigInt; 4]);

impl CoefficientQuad {
    pub fn zero() -> Self {
        CoefficientQuad::default()
    }

    pub fn from_i64(c: [i64; 4]) -> Self {
        CoefficientQuad(c.map(BigInt::from))
    }

    pub fn get(&self, label: CoinLabel) -> &BigInt {
        &self.0[label.index()]
    }

    pub fn get_mut(&mut self, label: CoinLabel) -> &mut BigInt {
        &mut self.0[label.index()]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for CoefficientQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.0;
        write!(f, "({a},{b},{c},{d})")
    }
}

/// Refusal threshold on the number of strings a single class may contain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap(pub u128);

impl EnumerationCap {
    /// Largest total string count at t = 12.
    pub const DEFAULT: EnumerationCap = EnumerationCap(1 << 24);
}

impl Default for EnumerationCap {
    fn default() -> Self {
        EnumerationCap::DEFAULT
    }
}

/// `α̂ = (t - dx + dy)/2`, `β̂ = (t - dx - dy)/2`, or `None` when the
/// displacement is outside the cone or has the wrong parity.
pub fn admissible_counts(d: Displacement) -> Result<Option<SetBitCounts>> {
    if d.t < 0 {
        return Err(Error::NegativeTime(d.t));
    }
    if !d.is_admissible() {
        return Ok(None);
    }
    let alpha_hat = (d.t - d.dx + d.dy) / 2;
    let beta_hat = (d.t - d.dx - d.dy) / 2;
    Ok(Some(SetBitCounts {
        alpha_hat: alpha_hat as u32,
        beta_hat: beta_hat as u32,
    }))
}

/// `binom(t, α̂) binom(t, β̂)`: the number of strings connecting `d`.
pub fn class_size(d: Displacement) -> Result<BigInt> {
    Ok(match admissible_counts(d)? {
        Some(c) => binomial(d.t, c.alpha_hat.into()) * binomial(d.t, c.beta_hat.into()),
        None => BigInt::zero(),
    })
}

/// All `t`-bit masks with `ones` set bits, in increasing numeric order.
#[derive(Clone, Debug)]
pub struct Combinations {
    limit: u128,
    next: Option<u128>,
}

impl Combinations {
    pub fn new(t: u32, ones: u32) -> Self {
        let next = (ones <= t).then(|| (1u128 << ones) - 1);
        Combinations {
            limit: 1u128 << t,
            next,
        }
    }
}

impl Iterator for Combinations {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let x = self.next?;
        if x >= self.limit {
            self.next = None;
            return None;
        }
        // Gosper's hack
        self.next = if x == 0 {
            None
        } else {
            let c = x & x.wrapping_neg();
            let r = x + c;
            Some((((r ^ x) >> 2) / c) | r)
        };
        Some(x as u64)
    }
}

fn checked_counts(d: Displacement, cap: EnumerationCap) -> Result<Option<SetBitCounts>> {
    let Some(counts) = admissible_counts(d)? else {
        return Ok(None);
    };
    if d.t > i64::from(MAX_PATH_STEPS) {
        return Err(Error::PathTooLong {
            t: d.t as u32,
            max: MAX_PATH_STEPS,
        });
    }
    let size = class_size(d)?;
    let size = size.to_u128().unwrap_or(u128::MAX);
    if size > cap.0 {
        return Err(Error::CapExceeded {
            class_size: size,
            cap: cap.0,
        });
    }
    Ok(Some(counts))
}

/// Every string connecting `d`, alpha-major lexicographic order.
/// Inadmissible displacements yield nothing.
pub fn enumerate_paths(
    d: Displacement,
    cap: EnumerationCap,
) -> Result<impl Iterator<Item = PathString>> {
    let counts = checked_counts(d, cap)?;
    let t = d.t.max(0) as u32;
    let (alphas, beta_hat) = match counts {
        Some(c) => (Combinations::new(t, c.alpha_hat), c.beta_hat),
        None => (Combinations::new(0, 1), 0),
    };
    Ok(alphas.flat_map(move |alpha| {
        Combinations::new(t, beta_hat)
            .map(move |beta| PathString::new(t, alpha, beta).expect("combination fits in t bits"))
    }))
}

/// Signed class sums `c_ab = Σ_{s ∈ S_ab} (-1)^φ(s)` by exhaustive enumeration.
pub fn oracle_coefficients(d: Displacement, cap: EnumerationCap) -> Result<CoefficientQuad> {
    oracle_coefficients_with(d, cap, &fold_path)
}

/// As [`oracle_coefficients`], with a caller-supplied path fold.
pub fn oracle_coefficients_with(
    d: Displacement,
    cap: EnumerationCap,
    fold: &(dyn Fn(&PathString) -> Result<SignedCoin> + Sync),
) -> Result<CoefficientQuad> {
    let Some(counts) = checked_counts(d, cap)? else {
        return Ok(CoefficientQuad::zero());
    };
    let t = d.t as u32;
    let alphas: Vec<u64> = Combinations::new(t, counts.alpha_hat).collect();
    let sums = alphas
        .par_iter()
        .map(|&alpha| -> Result<[i64; 4]> {
            let mut acc = [0i64; 4];
            for beta in Combinations::new(t, counts.beta_hat) {
                let s = PathString::new(t, alpha, beta)?;
                let coin = fold(&s)?;
                acc[coin.label.index()] += i64::from(coin.sign());
            }
            Ok(acc)
        })
        .try_reduce(
            || [0i64; 4],
            |mut a, b| {
                for i in 0..4 {
                    a[i] += b[i];
                }
                Ok(a)
            },
        )?;
    Ok(CoefficientQuad::from_i64(sums))
}

/// Kernel by summing full numeric products `A_{h_t} ... A_{h_1}` of the scaled
/// single-step matrices over every connecting path. Does not use the closure
/// algebra.
pub fn oracle_kernel(d: Displacement, nu: Nu, cap: EnumerationCap) -> Result<Mat2> {
    let Some(counts) = checked_counts(d, cap)? else {
        return Ok(Mat2::zero());
    };
    let t = d.t as u32;
    let half = Complex64::new(0.5, 0.0);
    let steps: [Mat2; 4] = CoinLabel::ALL.map(|l| coin_matrix(l, nu).scale(half));
    let alphas: Vec<u64> = Combinations::new(t, counts.alpha_hat).collect();
    alphas
        .par_iter()
        .map(|&alpha| -> Result<Mat2> {
            let mut acc = Mat2::zero();
            for beta in Combinations::new(t, counts.beta_hat) {
                let s = PathString::new(t, alpha, beta)?;
                let product = s
                    .labels()
                    .fold(Mat2::identity(), |m, l| steps[l.index()] * m);
                acc += product;
            }
            Ok(acc)
        })
        .try_reduce(Mat2::zero, |a, b| Ok(a + b))
}
