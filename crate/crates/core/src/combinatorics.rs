//! Exact binomial coefficients and terminating Gauss hypergeometric sums.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

static ZERO: BigInt = BigInt::ZERO;

/// `binom(n, k)` by the multiplicative formula; zero whenever `n < 0`,
/// `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by i + 1
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Pascal rows `0..=max_n`, built by additions only.
#[derive(Clone, Debug)]
pub struct BinomialTable {
    rows: Vec<Vec<BigInt>>,
}

impl BinomialTable {
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigInt::one()]);
        for n in 1..=max_n {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigInt::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigInt::one());
            rows.push(row);
        }
        BinomialTable { rows }
    }

    pub fn max_n(&self) -> usize {
        self.rows.len() - 1
    }

    /// Same zero conventions as [`binomial`]. Panics if `n` exceeds the table.
    pub fn get(&self, n: i64, k: i64) -> &BigInt {
        if n < 0 || k < 0 || k > n {
            return &ZERO;
        }
        &self.rows[n as usize][k as usize]
    }
}

/// Rising factorial `(x)_k` over the rationals.
pub fn pochhammer(x: &BigRational, k: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = x.clone();
    for _ in 0..k {
        acc *= &term;
        term += BigRational::one();
    }
    acc
}

/// Parameters of `2F1(upper[0], upper[1]; lower; argument)` with integer
/// parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergeometricTerm {
    pub upper: [i64; 2],
    pub lower: i64,
    pub argument: BigRational,
}

impl HypergeometricTerm {
    /// Number of the last nonvanishing term, i.e. the series is a polynomial
    /// of this degree in the argument.
    pub fn termination_order(&self) -> Option<u64> {
        self.upper
            .iter()
            .filter(|&&a| a <= 0)
            .map(|&a| a.unsigned_abs())
            .min()
    }

    /// Exact value as a finite Pochhammer sum. Fails when the series does not
    /// terminate or a lower Pochhammer factor vanishes before termination.
    pub fn evaluate(&self) -> Result<BigRational> {
        let order = self.termination_order().ok_or_else(|| {
            Error::Hypergeometric(format!(
                "no nonpositive upper parameter in {:?}",
                self.upper
            ))
        })?;
        if self.lower <= 0 && self.lower.unsigned_abs() < order {
            return Err(Error::Hypergeometric(format!(
                "lower parameter {} vanishes before term {order}",
                self.lower
            )));
        }
        let [a, b] = self.upper.map(|v| BigRational::from_integer(v.into()));
        let c = BigRational::from_integer(self.lower.into());
        let mut sum = BigRational::zero();
        let mut term = BigRational::one();
        for k in 0..=order {
            sum += &term;
            if k == order {
                break;
            }
            // term_{k+1} / term_k = (a+k)(b+k) / ((c+k)(k+1)) * z
            let kk = BigRational::from_integer(BigInt::from(k));
            let num = (&a + &kk) * (&b + &kk);
            let den = (&c + &kk) * (&kk + BigRational::one());
            term = term * num / den * &self.argument;
        }
        Ok(sum)
    }
}
