//! Binary path strings `s_t = a_t b_t ... a_1 b_1`.
//!
//! Step `j` (1-based, 1 = earliest) is stored in bit `j - 1` of the `alpha`
//! and `beta` masks. The textual form lists the latest step first, so the
//! lexicographic order of strings coincides with the numeric order of the
//! masks (alpha first, then beta).

use std::fmt;
use std::str::FromStr;

use crate::coin::{CoinLabel, Direction};
use crate::error::{Error, Result};

pub const MAX_PATH_STEPS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathString {
    steps: u32,
    alpha: u64,
    beta: u64,
}

fn mask(steps: u32) -> u64 {
    if steps >= 64 {
        u64::MAX
    } else {
        (1u64 << steps) - 1
    }
}

impl PathString {
    pub fn new(steps: u32, alpha: u64, beta: u64) -> Result<Self> {
        if steps > MAX_PATH_STEPS {
            return Err(Error::PathTooLong {
                t: steps,
                max: MAX_PATH_STEPS,
            });
        }
        if alpha & !mask(steps) != 0 || beta & !mask(steps) != 0 {
            return Err(Error::InvalidPath(format!(
                "bits set beyond step {steps} (alpha={alpha:#b}, beta={beta:#b})"
            )));
        }
        Ok(PathString { steps, alpha, beta })
    }

    /// Builds a path from directions in time order (earliest first).
    pub fn from_directions(dirs: &[Direction]) -> Result<Self> {
        let steps = u32::try_from(dirs.len()).unwrap_or(u32::MAX);
        if steps > MAX_PATH_STEPS {
            return Err(Error::PathTooLong {
                t: steps,
                max: MAX_PATH_STEPS,
            });
        }
        let (mut alpha, mut beta) = (0u64, 0u64);
        for (i, d) in dirs.iter().enumerate() {
            let label = d.encode();
            alpha |= u64::from(label.a) << i;
            beta |= u64::from(label.b) << i;
        }
        PathString::new(steps, alpha, beta)
    }

    /// Builds a path from the two substrings written latest step first,
    /// e.g. `from_substrings("101", "001")`.
    pub fn from_substrings(alpha: &str, beta: &str) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::InvalidPath(format!(
                "substrings differ in length: {} vs {}",
                alpha.len(),
                beta.len()
            )));
        }
        let a = parse_bits(alpha)?;
        let b = parse_bits(beta)?;
        PathString::new(alpha.len() as u32, a, b)
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    pub fn alpha(&self) -> u64 {
        self.alpha
    }

    pub fn beta(&self) -> u64 {
        self.beta
    }

    /// `a_j` for 1-based step index `j`.
    pub fn a(&self, j: u32) -> u8 {
        debug_assert!(j >= 1 && j <= self.steps);
        ((self.alpha >> (j - 1)) & 1) as u8
    }

    /// `b_j` for 1-based step index `j`.
    pub fn b(&self, j: u32) -> u8 {
        debug_assert!(j >= 1 && j <= self.steps);
        ((self.beta >> (j - 1)) & 1) as u8
    }

    pub fn label(&self, j: u32) -> CoinLabel {
        CoinLabel::new(self.a(j), self.b(j))
    }

    /// Labels in time order, earliest first.
    pub fn labels(&self) -> impl Iterator<Item = CoinLabel> + '_ {
        (1..=self.steps).map(move |j| self.label(j))
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        self.labels().map(Direction::decode)
    }

    pub fn alpha_hat(&self) -> u32 {
        self.alpha.count_ones()
    }

    pub fn beta_hat(&self) -> u32 {
        self.beta.count_ones()
    }

    /// The path truncated to its first `steps` steps (`s_{steps}` in the recursion).
    pub fn prefix(&self, steps: u32) -> PathString {
        let steps = steps.min(self.steps);
        PathString {
            steps,
            alpha: self.alpha & mask(steps),
            beta: self.beta & mask(steps),
        }
    }
}

fn parse_bits(s: &str) -> Result<u64> {
    if s.len() > MAX_PATH_STEPS as usize {
        return Err(Error::PathTooLong {
            t: s.len() as u32,
            max: MAX_PATH_STEPS,
        });
    }
    let mut v = 0u64;
    for ch in s.chars() {
        v <<= 1;
        match ch {
            '0' => {}
            '1' => v |= 1,
            other => {
                return Err(Error::InvalidPath(format!(
                    "unexpected character {other:?}"
                )))
            }
        }
    }
    Ok(v)
}

impl fmt::Display for PathString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in (1..=self.steps).rev() {
            write!(f, "{}{}", self.a(j), self.b(j))?;
        }
        Ok(())
    }
}

/// Parses the interleaved form `a_t b_t ... a_1 b_1`; spaces, `_` and `·`
/// between steps are ignored.
impl FromStr for PathString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '·'))
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::InvalidPath(format!(
                    "unexpected character {other:?}"
                ))),
            })
            .collect::<Result<_>>()?;
        if !bits.len().is_multiple_of(2) {
            return Err(Error::InvalidPath("odd number of bits".into()));
        }
        let steps = (bits.len() / 2) as u32;
        if steps > MAX_PATH_STEPS {
            return Err(Error::PathTooLong {
                t: steps,
                max: MAX_PATH_STEPS,
            });
        }
        let (mut alpha, mut beta) = (0u64, 0u64);
        for (i, pair) in bits.chunks(2).enumerate() {
            let j = steps as usize - 1 - i;
            alpha |= u64::from(pair[0]) << j;
            beta |= u64::from(pair[1]) << j;
        }
        PathString::new(steps, alpha, beta)
    }
}
