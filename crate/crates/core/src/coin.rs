//! The four Weyl transition matrices, their two-bit labels and the signed
//! closure algebra they generate.
//!
//! Matrices here are the unscaled `A_ab`; a single step of the walk applies
//! `A_ab / 2`. The 2^-t factor for a t-step path is applied once, at kernel
//! assembly.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{ExactMat2, NuPoly};
use crate::linalg::Mat2;
use crate::path::PathString;

const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    R,
    L,
    U,
    D,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::R, Direction::L, Direction::U, Direction::D];

    pub fn encode(self) -> CoinLabel {
        match self {
            Direction::R => CoinLabel::new(0, 0),
            Direction::L => CoinLabel::new(1, 1),
            Direction::U => CoinLabel::new(1, 0),
            Direction::D => CoinLabel::new(0, 1),
        }
    }

    pub fn decode(label: CoinLabel) -> Direction {
        match (label.a, label.b) {
            (0, 0) => Direction::R,
            (1, 1) => Direction::L,
            (1, 0) => Direction::U,
            _ => Direction::D,
        }
    }

    /// Unit lattice displacement `(dx, dy)` of this step.
    pub fn offset(self) -> (i64, i64) {
        match self {
            Direction::R => (1, 0),
            Direction::L => (-1, 0),
            Direction::U => (0, 1),
            Direction::D => (0, -1),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Direction::R => "R",
            Direction::L => "L",
            Direction::U => "U",
            Direction::D => "D",
        };
        f.write_str(s)
    }
}

/// Two-bit label `(a, b)` of an unscaled transition matrix `A_ab`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoinLabel {
    pub a: u8,
    pub b: u8,
}

impl CoinLabel {
    pub const ALL: [CoinLabel; 4] = [
        CoinLabel { a: 0, b: 0 },
        CoinLabel { a: 0, b: 1 },
        CoinLabel { a: 1, b: 0 },
        CoinLabel { a: 1, b: 1 },
    ];

    /// Only the low bit of each argument is kept.
    pub fn new(a: u8, b: u8) -> Self {
        CoinLabel { a: a & 1, b: b & 1 }
    }

    /// Position in the `c00, c01, c10, c11` ordering.
    pub fn index(self) -> usize {
        usize::from(2 * self.a + self.b)
    }
}

impl fmt::Display for CoinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a, self.b)
    }
}

/// `±A_ab`: one of the eight elements of the closed signed algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignedCoin {
    pub negative: bool,
    pub label: CoinLabel,
}

impl SignedCoin {
    pub fn positive(label: CoinLabel) -> Self {
        SignedCoin {
            negative: false,
            label,
        }
    }

    pub fn new(negative: bool, label: CoinLabel) -> Self {
        SignedCoin { negative, label }
    }

    /// All eight signed labels.
    pub fn all() -> impl Iterator<Item = SignedCoin> {
        [false, true].into_iter().flat_map(|neg| {
            CoinLabel::ALL
                .into_iter()
                .map(move |l| SignedCoin::new(neg, l))
        })
    }

    pub fn sign(self) -> i32 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    /// The phase bit: 1 for a minus sign.
    pub fn phase_bit(self) -> u8 {
        u8::from(self.negative)
    }

    pub fn matrix(self, nu: Nu) -> Mat2 {
        let m = coin_matrix(self.label, nu);
        if self.negative {
            -m
        } else {
            m
        }
    }
}

impl fmt::Display for SignedCoin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{})",
            if self.negative { '-' } else { '+' },
            self.label
        )
    }
}

/// A validated unimodular parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nu(Complex64);

impl Nu {
    pub const ONE: Nu = Nu(Complex64::new(1.0, 0.0));

    pub fn new(value: Complex64) -> Result<Self> {
        let modulus = value.norm();
        if !modulus.is_finite() || (modulus - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NonUnimodular { modulus });
        }
        Ok(Nu(value))
    }

    /// `nu = e^{i theta}`, unimodular by construction.
    pub fn from_angle(theta: f64) -> Self {
        Nu(Complex64::from_polar(1.0, theta))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

impl Default for Nu {
    fn default() -> Self {
        Nu::ONE
    }
}

/// Unscaled transition matrix `A_ab` (twice the single-step matrix).
pub fn coin_matrix(label: CoinLabel, nu: Nu) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let v = nu.value();
    let vc = v.conj();
    let rows = match (label.a, label.b) {
        (0, 0) => [[one, zero], [-v, zero]],
        (1, 0) => [[one, zero], [v, zero]],
        (1, 1) => [[zero, vc], [zero, one]],
        _ => [[zero, -vc], [zero, one]],
    };
    Mat2(rows)
}

/// Checked variant of [`coin_matrix`] taking a raw complex value.
pub fn coin_matrix_checked(label: CoinLabel, nu: Complex64) -> Result<Mat2> {
    Ok(coin_matrix(label, Nu::new(nu)?))
}

/// Symbolic `A_ab` with entries in `{0, ±1, ±nu, ±nu*}`.
pub fn coin_matrix_exact(label: CoinLabel) -> ExactMat2 {
    let mut m = ExactMat2::zero();
    match (label.a, label.b) {
        (0, 0) => {
            m.entries[0][0] = NuPoly::constant(1);
            m.entries[1][0] = NuPoly::monomial(-1, 1);
        }
        (1, 0) => {
            m.entries[0][0] = NuPoly::constant(1);
            m.entries[1][0] = NuPoly::monomial(1, 1);
        }
        (1, 1) => {
            m.entries[0][1] = NuPoly::monomial(1, -1);
            m.entries[1][1] = NuPoly::constant(1);
        }
        _ => {
            m.entries[0][1] = NuPoly::monomial(-1, -1);
            m.entries[1][1] = NuPoly::constant(1);
        }
    }
    m
}

/// `x ∘ y` in matrix order (`x` is the later factor):
/// `A_ab A_cd = (-1)^{(a⊕c)(b⊕d)} A_ad`.
pub fn compose(x: SignedCoin, y: SignedCoin) -> SignedCoin {
    let (l, r) = (x.label, y.label);
    let flip = ((l.a ^ r.a) & (l.b ^ r.b)) == 1;
    SignedCoin {
        negative: x.negative ^ y.negative ^ flip,
        label: CoinLabel::new(l.a, r.b),
    }
}

/// Folds a path into its overall signed transition matrix
/// `A_{h_t} ... A_{h_1}` using `rule` for each product.
pub fn fold_path_with<F>(s: &PathString, rule: F) -> Result<SignedCoin>
where
    F: Fn(SignedCoin, SignedCoin) -> SignedCoin,
{
    let mut labels = s.labels();
    let first = labels.next().ok_or(Error::EmptyPath)?;
    Ok(labels.fold(SignedCoin::positive(first), |acc, label| {
        rule(SignedCoin::positive(label), acc)
    }))
}

pub fn fold_path(s: &PathString) -> Result<SignedCoin> {
    fold_path_with(s, compose)
}

/// Closed-form path phase `⊕_{j ∈ Z_t} (a_{j-1} ⊕ a_j) b_j` with `a_0 ≡ a_t`.
pub fn phase_closed(s: &PathString) -> u8 {
    let t = s.steps();
    if t == 0 {
        return 0;
    }
    // a_{j-1} ⊕ a_j for all j at once: rotate alpha left by one step within t bits.
    let alpha = s.alpha();
    let prev = if t == 64 {
        alpha.rotate_left(1)
    } else {
        let mask = (1u64 << t) - 1;
        ((alpha << 1) | (alpha >> (t - 1))) & mask
    };
    (((prev ^ alpha) & s.beta()).count_ones() & 1) as u8
}

/// Phase by the step recursion `φ(s_t) = φ(s_{t-1}) ⊕ (a_{t-1} ⊕ a_t)(b_1 ⊕ b_t)`,
/// starting from `φ(s_1) = 0`.
pub fn phase_recursive(s: &PathString) -> u8 {
    let mut phi = 0u8;
    for j in 2..=s.steps() {
        phi ^= (s.a(j - 1) ^ s.a(j)) & (s.b(1) ^ s.b(j));
    }
    phi
}
