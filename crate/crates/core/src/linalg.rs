//! Small fixed-size complex linear algebra for the 2x2 coin space.

use std::ops::{Add, AddAssign, Mul, Neg};

use num_complex::Complex64;

pub type Spinor = [Complex64; 2];

pub const ZERO_SPINOR: Spinor = [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];

/// A 2x2 complex matrix stored row-major: `m.0[row][col]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2([[Complex64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn from_real(rows: [[f64; 2]; 2]) -> Self {
        Mat2([
            [
                Complex64::new(rows[0][0], 0.0),
                Complex64::new(rows[0][1], 0.0),
            ],
            [
                Complex64::new(rows[1][0], 0.0),
                Complex64::new(rows[1][1], 0.0),
            ],
        ])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut n: u64) -> Mat2 {
        let mut base = *self;
        let mut acc = Mat2::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Both eigenvalues from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = (tr * tr - det * 4.0).sqrt();
        [(tr + disc) * 0.5, (tr - disc) * 0.5]
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(mut self, rhs: Mat2) -> Mat2 {
        self += rhs;
        self
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, rhs: Mat2) {
        for r in 0..2 {
            for c in 0..2 {
                self.0[r][c] += rhs.0[r][c];
            }
        }
    }
}

impl Neg for Mat2 {
    type Output = Mat2;

    fn neg(self) -> Mat2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

pub fn spinor_norm_sqr(v: &Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

pub fn spinor_add_assign(acc: &mut Spinor, v: &Spinor) {
    acc[0] += v[0];
    acc[1] += v[1];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_matches_repeated_product() {
        let m = Mat2([
            [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.5)],
            [Complex64::new(0.7, 0.0), Complex64::new(0.1, -0.4)],
        ]);
        let mut slow = Mat2::identity();
        for _ in 0..13 {
            slow = slow * m;
        }
        assert!(m.pow(13).max_abs_diff(&slow) < 1e-13);
        assert_eq!(m.pow(0), Mat2::identity());
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let m = Mat2::from_real([[2.0, 0.0], [0.0, -3.0]]);
        let mut ev = m.eigenvalues().map(|z| z.re);
        ev.sort_by(f64::total_cmp);
        assert_eq!(ev, [-3.0, 2.0]);
    }
}
