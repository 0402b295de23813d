//! Exact symbolic arithmetic over Laurent polynomials in the unimodular
//! parameter nu, where conj(nu) = nu^-1.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::linalg::Mat2;

/// Integer Laurent polynomial `sum_k c_k nu^k`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NuPoly {
    terms: BTreeMap<i32, BigInt>,
}

impl NuPoly {
    pub fn zero() -> Self {
        NuPoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        NuPoly::monomial(c, 0)
    }

    /// `c * nu^power`
    pub fn monomial(c: impl Into<BigInt>, power: i32) -> Self {
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(power, c);
        }
        NuPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, power: i32) -> BigInt {
        self.terms.get(&power).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigInt)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Complex conjugate under |nu| = 1: nu^k maps to nu^-k.
    pub fn conj(&self) -> Self {
        NuPoly {
            terms: self.terms.iter().map(|(k, v)| (-k, v.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        if s.is_zero() {
            return NuPoly::zero();
        }
        NuPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, v * s)).collect(),
        }
    }

    pub fn eval(&self, nu: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, v)| nu.powi(*k) * v.to_f64().unwrap_or(f64::NAN))
            .sum()
    }

    fn add_term(&mut self, power: i32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(power).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&power);
        }
    }
}

impl Add for &NuPoly {
    type Output = NuPoly;

    fn add(self, rhs: &NuPoly) -> NuPoly {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, v.clone());
        }
        out
    }
}

impl Mul for &NuPoly {
    type Output = NuPoly;

    fn mul(self, rhs: &NuPoly) -> NuPoly {
        let mut out = NuPoly::zero();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                out.add_term(k1 + k2, v1 * v2);
            }
        }
        out
    }
}

impl Neg for &NuPoly {
    type Output = NuPoly;

    fn neg(self) -> NuPoly {
        NuPoly {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

impl fmt::Display for NuPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, v) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{v}")?,
                1 => write!(f, "{v}·ν")?,
                -1 => write!(f, "{v}·ν*")?,
                _ => write!(f, "{v}·ν^{k}")?,
            }
        }
        Ok(())
    }
}

/// Exact 2x2 matrix `2^-scale * entries` with entries in the nu ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMat2 {
    pub entries: [[NuPoly; 2]; 2],
    pub scale_exponent: u32,
}

impl ExactMat2 {
    pub fn zero() -> Self {
        ExactMat2 {
            entries: Default::default(),
            scale_exponent: 0,
        }
    }

    pub fn identity() -> Self {
        let mut m = ExactMat2::zero();
        m.entries[0][0] = NuPoly::constant(1);
        m.entries[1][1] = NuPoly::constant(1);
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(NuPoly::is_zero)
    }

    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        ExactMat2 {
            entries: [
                [e[0][0].conj(), e[1][0].conj()],
                [e[0][1].conj(), e[1][1].conj()],
            ],
            scale_exponent: self.scale_exponent,
        }
    }

    /// Rescales entries so that the matrix carries `scale_exponent = target`.
    pub fn with_scale(&self, target: u32) -> Self {
        assert!(target >= self.scale_exponent, "cannot reduce scale exactly");
        let factor = BigInt::one() << (target - self.scale_exponent) as usize;
        ExactMat2 {
            entries: [
                [
                    self.entries[0][0].scale(&factor),
                    self.entries[0][1].scale(&factor),
                ],
                [
                    self.entries[1][0].scale(&factor),
                    self.entries[1][1].scale(&factor),
                ],
            ],
            scale_exponent: target,
        }
    }

    pub fn eval(&self, nu: Complex64) -> Mat2 {
        let s = 0.5f64.powi(self.scale_exponent as i32);
        let e = &self.entries;
        Mat2([
            [e[0][0].eval(nu) * s, e[0][1].eval(nu) * s],
            [e[1][0].eval(nu) * s, e[1][1].eval(nu) * s],
        ])
    }

    /// True when the matrix equals the identity exactly.
    pub fn is_identity(&self) -> bool {
        let one = NuPoly::constant(BigInt::one() << self.scale_exponent as usize);
        self.entries[0][0] == one
            && self.entries[1][1] == one
            && self.entries[0][1].is_zero()
            && self.entries[1][0].is_zero()
    }
}

impl Add for &ExactMat2 {
    type Output = ExactMat2;

    fn add(self, rhs: &ExactMat2) -> ExactMat2 {
        let s = self.scale_exponent.max(rhs.scale_exponent);
        let (a, b) = (self.with_scale(s), rhs.with_scale(s));
        let mut out = ExactMat2::zero();
        out.scale_exponent = s;
        for r in 0..2 {
            for c in 0..2 {
                out.entries[r][c] = &a.entries[r][c] + &b.entries[r][c];
            }
        }
        out
    }
}

impl Mul for &ExactMat2 {
    type Output = ExactMat2;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &ExactMat2) -> ExactMat2 {
        let (a, b) = (&self.entries, &rhs.entries);
        ExactMat2 {
            entries: std::array::from_fn(|r| {
                std::array::from_fn(|c| &(&a[r][0] * &b[0][c]) + &(&a[r][1] * &b[1][c]))
            }),
            scale_exponent: self.scale_exponent + rhs.scale_exponent,
        }
    }
}
