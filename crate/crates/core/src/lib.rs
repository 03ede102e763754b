//! Exact product and quotient sets of bounded-height positive rationals.
//!
//! * [`rational`]: reduced fractions, canonical sets, `F(Q, Q')` enumeration
//!   and pairwise set operations.
//! * [`divisor`]: the divisor-count sieve and its running maximum `T(x)`.
//! * [`decomposition`]: gcd-class decomposition of `A x B` and the sums built
//!   on it.
//! * [`bounds`]: certified and reference lower bounds, compared against exact
//!   set sizes.
//! * [`certificate`]: the level-`n` induction replayed as a checkable tree.
//! * [`search`]: exhaustive, structured and local searches for small
//!   quotient and product sets.
//! * [`harness`]: seeded batch reports.
//! * [`text`]: the line-based rational set format.

pub mod bounds;
pub mod certificate;
pub mod decomposition;
pub mod divisor;
pub mod error;
pub mod format;
pub mod harness;
pub mod rational;
pub mod search;
pub mod text;

pub use error::{Error, Result};
pub use rational::{FareyParams, RationalSet, ReducedFraction};
