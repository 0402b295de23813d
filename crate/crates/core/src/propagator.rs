//! Closed-form path-sum coefficients and the propagator kernel.
//!
//! A string `α` is described by its slot profile: the number `p` of maximal
//! runs of 1-bits, the last bit `a = a_t` and the first bit `a' = a_1`. Read
//! cyclically, `α` has `2(p - a a')` adjacent pairs of different bits, of
//! which `μ = 2p - a - a'` can be freely selected by the 1-bits of `β`
//! (the pair at `j = 1` is selected exactly when `b_1 = 1`). The sign of a
//! path is the parity of the number of selected pairs.
//!
//! All sums run over the safe ranges `p ∈ [0, t]`, `k ∈ [0, μ]` and rely on
//! binomials vanishing outside their support.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coin::Nu;
use crate::combinatorics::{BinomialTable, HypergeometricTerm};
use crate::error::{Error, Result};
use crate::exact::{ExactMat2, NuPoly};
use crate::linalg::Mat2;
use crate::oracle::{admissible_counts, CoefficientQuad, Displacement};

/// Route used to evaluate the coefficients.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Triple sum over slot profiles, boundary bits and selected pairs.
    DoubleSum,
    /// Sum over slot profiles with the pair sum resummed as a terminating 2F1.
    #[default]
    Hypergeometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SlotProfile {
    pub p: i64,
    pub a: u8,
    pub a_prime: u8,
}

impl SlotProfile {
    pub fn new(p: i64, a: u8, a_prime: u8) -> Self {
        SlotProfile {
            p,
            a: a & 1,
            a_prime: a_prime & 1,
        }
    }

    /// Free pairs `μ = 2p - a - a'`.
    pub fn mu(&self) -> i64 {
        2 * self.p - i64::from(self.a) - i64::from(self.a_prime)
    }

    /// Different-bit adjacent pairs of the cyclic string, `2(p - a a')`.
    pub fn different_pairs(&self) -> i64 {
        2 * (self.p - i64::from(self.a & self.a_prime))
    }
}

/// The counting functions for a fixed number of steps.
#[derive(Clone, Debug)]
struct Counter<'a> {
    binom: &'a BinomialTable,
    t: i64,
}

impl Counter<'_> {
    /// Number of `α` with the given slot profile and `alpha_hat` ones.
    fn u(&self, profile: SlotProfile, alpha_hat: i64) -> BigInt {
        let (t, p) = (self.t, profile.p);
        let (a, a_prime) = (i64::from(profile.a), i64::from(profile.a_prime));
        if alpha_hat == t {
            return BigInt::from(i64::from(a == 1 && a_prime == 1 && p == 1));
        }
        if alpha_hat == 0 {
            return BigInt::from(i64::from(a == 0 && a_prime == 0 && p == 0));
        }
        if alpha_hat < 0 || alpha_hat > t {
            return BigInt::zero();
        }
        self.binom.get(alpha_hat - 1, p - 1) * self.binom.get(t - alpha_hat - 1, p - a - a_prime)
    }

    /// Number of `β` with `b_1 = b` selecting `k` of the free pairs.
    fn w(&self, profile: SlotProfile, b: u8, k: i64, beta_hat: i64) -> BigInt {
        let t = self.t;
        let mu = profile.mu();
        if mu < 0 {
            return BigInt::zero();
        }
        if beta_hat == 0 {
            return BigInt::from(i64::from(b == 0 && k == 0));
        }
        if beta_hat == t {
            return BigInt::from(i64::from(b == 1 && k == mu));
        }
        if beta_hat < 0 || beta_hat > t || mu >= t {
            return BigInt::zero();
        }
        self.binom.get(mu, k) * self.binom.get(t - mu - 1, beta_hat - k - i64::from(b))
    }

    fn boundary_odd(profile: SlotProfile, b: u8) -> bool {
        b & (profile.a ^ profile.a_prime) == 1
    }

    /// `Σ_k (-1)^{k + b(a⊕a')} w` over `k ∈ [0, μ]`.
    fn w_tilde_sum(&self, profile: SlotProfile, b: u8, beta_hat: i64) -> BigInt {
        let mu = profile.mu();
        let mut total = BigInt::zero();
        for k in 0..=mu.max(-1) {
            let w = self.w(profile, b, k, beta_hat);
            if k % 2 == 1 {
                total -= w;
            } else {
                total += w;
            }
        }
        if Self::boundary_odd(profile, b) {
            -total
        } else {
            total
        }
    }

    /// The pair sum through its terminating hypergeometric form. Only defined
    /// for `0 < β̂ < t` and a positive lower parameter.
    fn w_tilde_hypergeometric(&self, profile: SlotProfile, b: u8, beta_hat: i64) -> Result<BigInt> {
        let t = self.t;
        let mu = profile.mu();
        if mu < 0 {
            return Ok(BigInt::zero());
        }
        let b_i = i64::from(b);
        let lower = t - beta_hat - mu + b_i;
        if beta_hat <= 0 || beta_hat >= t || lower <= 0 {
            return Err(Error::UseNormativePath { lower });
        }
        let series = hypergeometric_term(profile, b, beta_hat, t);
        let value = series.evaluate()?
            * BigRational::from_integer(self.binom.get(t - mu - 1, beta_hat - b_i).clone());
        if !value.is_integer() {
            return Err(Error::Hypergeometric(format!(
                "non-integer pair sum {value} for {profile:?}, b={b}, beta_hat={beta_hat}, t={t}"
            )));
        }
        let value = value.to_integer();
        Ok(if Self::boundary_odd(profile, b) {
            -value
        } else {
            value
        })
    }

    fn coefficient_double_sum(&self, a: u8, b: u8, alpha_hat: i64, beta_hat: i64) -> BigInt {
        let mut c = BigInt::zero();
        for p in 0..=self.t {
            for a_prime in 0..=1u8 {
                let profile = SlotProfile::new(p, a, a_prime);
                let u = self.u(profile, alpha_hat);
                if u.is_zero() {
                    continue;
                }
                let boundary = Self::boundary_odd(profile, b);
                for k in 0..=profile.mu() {
                    let w = self.w(profile, b, k, beta_hat);
                    if w.is_zero() {
                        continue;
                    }
                    let term = &u * w;
                    if (k % 2 == 1) ^ boundary {
                        c -= term;
                    } else {
                        c += term;
                    }
                }
            }
        }
        c
    }

    /// Pair sum for the resummed route: hypergeometric where it is defined,
    /// otherwise the signed binomial sum.
    fn w_tilde_resummed(&self, profile: SlotProfile, b: u8, beta_hat: i64) -> Result<BigInt> {
        match self.w_tilde_hypergeometric(profile, b, beta_hat) {
            Err(Error::UseNormativePath { .. }) => Ok(self.w_tilde_sum(profile, b, beta_hat)),
            other => other,
        }
    }

    fn coefficient_resummed(
        &self,
        a: u8,
        b: u8,
        alpha_hat: i64,
        pair_sum: &dyn Fn(SlotProfile, u8) -> Result<BigInt>,
    ) -> Result<BigInt> {
        let mut c = BigInt::zero();
        for p in 0..=self.t {
            for a_prime in 0..=1u8 {
                let profile = SlotProfile::new(p, a, a_prime);
                let u = self.u(profile, alpha_hat);
                if u.is_zero() {
                    continue;
                }
                c += u * pair_sum(profile, b)?;
            }
        }
        Ok(c)
    }
}

/// Parameters `2F1(b - β̂, -μ; t - β̂ - μ + b; -1)` of the resummed pair sum.
pub fn hypergeometric_term(
    profile: SlotProfile,
    b: u8,
    beta_hat: i64,
    t: i64,
) -> HypergeometricTerm {
    let mu = profile.mu();
    let b = i64::from(b & 1);
    HypergeometricTerm {
        upper: [b - beta_hat, -mu],
        lower: t - beta_hat - mu + b,
        argument: BigRational::from_integer(BigInt::from(-1)),
    }
}

fn table_for(t: i64) -> BinomialTable {
    BinomialTable::new(t.max(0) as usize)
}

/// Number of `t`-bit strings `α` with `alpha_hat` ones, `a_t = a`, `a_1 = a'`
/// and `p` runs of ones.
pub fn u_count(a: u8, a_prime: u8, p: i64, alpha_hat: i64, t: i64) -> BigInt {
    let binom = table_for(t);
    Counter { binom: &binom, t }.u(SlotProfile::new(p, a, a_prime), alpha_hat)
}

/// Number of `t`-bit strings `β` with `beta_hat` ones and `b_1 = b` that
/// select `k + b(a⊕a')` of the different-bit pairs of an `α` with profile
/// `(p, a, a')`.
pub fn w_count(a: u8, a_prime: u8, b: u8, p: i64, k: i64, beta_hat: i64, t: i64) -> BigInt {
    let binom = table_for(t);
    Counter { binom: &binom, t }.w(SlotProfile::new(p, a, a_prime), b & 1, k, beta_hat)
}

/// Signed pair sum `Σ_k (-1)^{k + b(a⊕a')} binom(μ,k) binom(t-μ-1, β̂-k-b)`.
pub fn w_tilde(a: u8, a_prime: u8, b: u8, p: i64, beta_hat: i64, t: i64) -> BigInt {
    let binom = table_for(t);
    Counter { binom: &binom, t }.w_tilde_sum(SlotProfile::new(p, a, a_prime), b & 1, beta_hat)
}

/// The same pair sum as [`w_tilde`], through the Pochhammer form of the
/// terminating 2F1. Returns [`Error::UseNormativePath`] when the lower
/// parameter is not positive or `β̂` is at an end of its range.
pub fn w_tilde_hypergeometric(
    a: u8,
    a_prime: u8,
    b: u8,
    p: i64,
    beta_hat: i64,
    t: i64,
) -> Result<BigInt> {
    let binom = table_for(t);
    Counter { binom: &binom, t }.w_tilde_hypergeometric(
        SlotProfile::new(p, a, a_prime),
        b & 1,
        beta_hat,
    )
}

/// Coefficient quad plus a marker for displacements outside the cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coefficients {
    pub quad: CoefficientQuad,
    pub outside_cone: bool,
}

/// Quad used at `t = 0`: the identity is `(1/2) Σ_ab A_ab`.
pub fn zero_time_quad() -> CoefficientQuad {
    CoefficientQuad::from_i64([1, 1, 1, 1])
}

/// Closed-form coefficients `c00, c01, c10, c11` for one displacement.
pub fn coefficients(d: Displacement, method: Method) -> Result<Coefficients> {
    let binom = table_for(d.t);
    coefficients_with_table(d, method, &binom)
}

fn coefficients_with_table(
    d: Displacement,
    method: Method,
    binom: &BinomialTable,
) -> Result<Coefficients> {
    let Some(counts) = admissible_counts(d)? else {
        return Ok(Coefficients {
            quad: CoefficientQuad::zero(),
            outside_cone: true,
        });
    };
    if d.t == 0 {
        return Ok(Coefficients {
            quad: zero_time_quad(),
            outside_cone: false,
        });
    }
    let counter = Counter { binom, t: d.t };
    let (alpha_hat, beta_hat) = (i64::from(counts.alpha_hat), i64::from(counts.beta_hat));
    let mut quad = CoefficientQuad::zero();
    for label in crate::coin::CoinLabel::ALL {
        let (a, b) = (label.a, label.b);
        *quad.get_mut(label) = match method {
            Method::DoubleSum => counter.coefficient_double_sum(a, b, alpha_hat, beta_hat),
            Method::Hypergeometric => {
                counter.coefficient_resummed(a, b, alpha_hat, &|profile, b| {
                    counter.w_tilde_resummed(profile, b, beta_hat)
                })?
            }
        };
    }
    Ok(Coefficients {
        quad,
        outside_cone: false,
    })
}

/// Propagator matrix element `K(dx, dy, t)` in exact form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub displacement: Displacement,
    pub quad: CoefficientQuad,
    pub outside_cone: bool,
}

impl Kernel {
    /// `K = 2^-s Σ_ab c_ab A_ab` with `s = max(t, 1)`.
    pub fn scale_exponent(&self) -> u32 {
        self.displacement.t.max(1) as u32
    }

    pub fn exact(&self) -> ExactMat2 {
        let [c00, c01, c10, c11] = &self.quad.0;
        let mut m = ExactMat2::zero();
        m.scale_exponent = self.scale_exponent();
        m.entries[0][0] = NuPoly::constant(c00 + c10);
        m.entries[1][0] = NuPoly::monomial(c10 - c00, 1);
        m.entries[0][1] = NuPoly::monomial(c11 - c01, -1);
        m.entries[1][1] = NuPoly::constant(c11 + c01);
        m
    }

    pub fn matrix(&self, nu: Nu) -> Mat2 {
        self.exact().eval(nu.value())
    }
}

/// Kernel at a single displacement; zero and marked outside the cone when
/// inadmissible.
pub fn kernel(d: Displacement) -> Result<Kernel> {
    let Coefficients { quad, outside_cone } = coefficients(d, Method::Hypergeometric)?;
    Ok(Kernel {
        displacement: d,
        quad,
        outside_cone,
    })
}

/// All kernels at one time step, one per admissible displacement, ordered by
/// `dx` then `dy`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTable {
    pub t: u32,
    pub kernels: Vec<Kernel>,
}

impl KernelTable {
    /// Memoizes the pair sums over `(μ, β̂ - b)` so each displacement costs
    /// `O(t)` big-integer products.
    pub fn build(t: u32, method: Method) -> Result<Self> {
        let cone = Displacement::cone(t);
        if t == 0 {
            return Ok(KernelTable {
                t,
                kernels: vec![Kernel {
                    displacement: cone[0],
                    quad: zero_time_quad(),
                    outside_cone: false,
                }],
            });
        }
        let ti = i64::from(t);
        let binom = BinomialTable::new(t as usize);
        let counter = Counter {
            binom: &binom,
            t: ti,
        };
        let kernels = match method {
            Method::DoubleSum => cone
                .par_iter()
                .map(|&d| {
                    let c = coefficients_with_table(d, Method::DoubleSum, &binom)?;
                    Ok(Kernel {
                        displacement: d,
                        quad: c.quad,
                        outside_cone: c.outside_cone,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            Method::Hypergeometric => {
                let memo = PairSumMemo::build(&counter)?;
                cone.par_iter()
                    .map(|&d| {
                        let counts = admissible_counts(d)?.expect("cone is admissible");
                        let (alpha_hat, beta_hat) =
                            (i64::from(counts.alpha_hat), i64::from(counts.beta_hat));
                        let mut quad = CoefficientQuad::zero();
                        for label in crate::coin::CoinLabel::ALL {
                            *quad.get_mut(label) = counter.coefficient_resummed(
                                label.a,
                                label.b,
                                alpha_hat,
                                &|profile, b| Ok(memo.get(&counter, profile, b, beta_hat)),
                            )?;
                        }
                        Ok(Kernel {
                            displacement: d,
                            quad,
                            outside_cone: false,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(KernelTable { t, kernels })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn get(&self, dx: i64, dy: i64) -> Option<&Kernel> {
        self.kernels
            .binary_search_by(|k| (k.displacement.dx, k.displacement.dy).cmp(&(dx, dy)))
            .ok()
            .map(|i| &self.kernels[i])
    }

    /// Numeric instantiation at `nu`.
    pub fn matrices(&self, nu: Nu) -> Vec<(Displacement, Mat2)> {
        self.kernels
            .iter()
            .map(|k| (k.displacement, k.matrix(nu)))
            .collect()
    }

    /// `Σ_d K(d)† K(d)` in exact arithmetic.
    pub fn gram_exact(&self) -> ExactMat2 {
        self.kernels
            .par_iter()
            .map(|k| {
                let m = k.exact();
                &m.adjoint() * &m
            })
            .reduce(ExactMat2::zero, |a, b| &a + &b)
    }
}

pub fn kernel_table(t: u32) -> Result<KernelTable> {
    KernelTable::build(t, Method::Hypergeometric)
}

/// Pair sums without the boundary sign, indexed by `(μ, β̂ - b)`, for the
/// interior range `0 < β̂ < t`.
struct PairSumMemo {
    t: i64,
    values: Vec<BigInt>,
}

impl PairSumMemo {
    fn build(counter: &Counter<'_>) -> Result<Self> {
        let t = counter.t;
        let n = (t + 1) as usize;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (mu, m) = ((idx / n) as i64, (idx % n) as i64);
                // a = a' = 0 has no boundary sign and μ = 2p; odd μ needs a ≠ a'
                // with b = 0, which is also sign free.
                let (profile, b, beta_hat) = if mu % 2 == 0 {
                    (SlotProfile::new(mu / 2, 0, 0), 0, m)
                } else {
                    (SlotProfile::new((mu + 1) / 2, 1, 0), 0, m)
                };
                if beta_hat <= 0 || beta_hat >= t {
                    return Ok(BigInt::zero());
                }
                counter.w_tilde_resummed(profile, b, beta_hat)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PairSumMemo { t, values })
    }

    fn get(&self, counter: &Counter<'_>, profile: SlotProfile, b: u8, beta_hat: i64) -> BigInt {
        let mu = profile.mu();
        if mu < 0 {
            return BigInt::zero();
        }
        if beta_hat <= 0 || beta_hat >= self.t {
            return counter.w_tilde_sum(profile, b, beta_hat);
        }
        let m = beta_hat - i64::from(b);
        if m <= 0 || m >= self.t {
            // m = 0 has the single k = 0 term; m = t cannot occur for interior β̂
            return counter.w_tilde_sum(profile, b, beta_hat);
        }
        let n = (self.t + 1) as usize;
        let v = &self.values[mu as usize * n + m as usize];
        if Counter::boundary_odd(profile, b) {
            -v
        } else {
            v.clone()
        }
    }
}

/// `|c_ab| ≤ binom(t, α̂) binom(t, β̂)` for every entry.
pub fn within_magnitude_bound(d: Displacement, quad: &CoefficientQuad) -> Result<bool> {
    let size = crate::oracle::class_size(d)?;
    Ok(quad.0.iter().all(|c| c.abs() <= size))
}
