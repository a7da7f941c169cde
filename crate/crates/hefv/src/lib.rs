//! A somewhat-homomorphic encryption toolkit over power-of-two cyclotomic
//! rings: exact ring arithmetic, key generation, encryption, homomorphic
//! addition and multiplication with relinearisation, integer encodings,
//! parameter selection with noise budgeting, and encrypted linear algebra.

mod error;
mod ntt;

pub mod collections;
pub mod encoding;
pub mod encstats;
pub mod params;
pub mod ring;
pub mod sampling;
pub mod scheme;
pub mod wire;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
