//! Computable model of the operator calculus on multivariate Iwasawa
//! algebras: truncated power series over p-adic cyclotomic coefficients,
//! mu-invariants and Weierstrass preparation, character twists and norm
//! descent, explicit Euler-type local factors for semistable elliptic
//! curves, a scenario harness replaying the verifiable identities, and
//! semistability checks on Weierstrass fibrations over P^1.

pub mod chars;
pub mod error;
pub mod euler;
pub mod harness;
pub mod moduli;
pub mod padic;
pub mod series;

pub use error::{Error, Result};
