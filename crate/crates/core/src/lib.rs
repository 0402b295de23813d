//! Exact discrete propagator for the Weyl quantum walk on the square lattice.
//!
//! Paths of the walk are encoded as binary strings. Because the four
//! transition matrices close under multiplication up to sign, every path
//! contributes `±A_ab` for a label fixed by its first and last step, and the
//! propagator reduces to four signed path counts per displacement. This crate
//! computes those counts in closed form ([`propagator`]), checks them against
//! exhaustive enumeration ([`oracle`]), and evolves lattice fields by direct
//! stepping, kernel convolution and Fourier propagation ([`simulator`]).

pub mod coin;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod path;
pub mod propagator;
pub mod simulator;
pub mod validate;

pub use coin::{
    compose, fold_path, phase_closed, phase_recursive, CoinLabel, Direction, Nu, SignedCoin,
};
pub use error::{Error, Result};
pub use oracle::{CoefficientQuad, Displacement, EnumerationCap};
pub use path::PathString;
pub use propagator::{coefficients, kernel, kernel_table, Kernel, KernelTable, Method};
pub use simulator::{Boundary, FieldState};
