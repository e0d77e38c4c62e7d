//! Exact computations around squares in arithmetic progressions.
//!
//! * [`arith`]: integer square roots, square tests, factorization, squarefree kernels.
//! * [`coloring`]: exponent-parity colorings and monochromatic progression search.
//! * [`square_count`]: locating squares inside a progression (naive and
//!   congruence-accelerated engines), plus the `24n + 1` census.
//! * [`extremal`]: 4-AP detection, the exhaustive four-square scan, lower-bound
//!   searches for the maximal square count, and exact 4-AP-free set sizes.
//! * [`faltings`]: six-fold rational square products, their bounded-height census and
//!   the interval-partition counting ledger.

pub mod arith;
pub mod coloring;
pub mod congruence;
pub mod error;
pub mod extremal;
pub mod faltings;
pub mod serde_int;
pub mod square_count;

pub use arith::Integer;
pub use error::{Error, Result};
