//! Density of quotient sets `R(A) = {a/a' : a, a' ∈ A}` in the p-adic
//! numbers.
//!
//! The crate pairs theorem-backed deciders for concrete families of sets
//! (arithmetic and geometric progressions, sums of squares and cubes,
//! Lucas sequences, unions of prime powers) with an independent
//! brute-force oracle that checks finite-precision consequences of each
//! verdict on explicit samples.

pub mod arith;
pub mod constructions;
pub mod error;
pub mod families;
pub mod lucas;
pub mod oracle;
pub mod padic;
pub mod pairs;
pub mod rational;
pub mod verdict;

pub use error::{Error, Result};
pub use families::{decide, FamilySpec};
pub use lucas::{LucasKind, LucasParams};
pub use oracle::{Certificate, OracleReport, ResidueSample, SetSample, ValuationConstraint};
pub use padic::{padic_abs, unit_part, vp, PrimePower, Valuation};
pub use pairs::{Pattern, PrimitiveRootProfile, SieveWitness};
pub use rational::Rational;
pub use verdict::{CrossCheck, DensityStatus, DensityVerdict, OracleConfig};
