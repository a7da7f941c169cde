//! Division-free encrypted statistics: summary statistics returned as an
//! encrypted numerator with a public plaintext denominator (the client
//! divides after decryption), and a Linear Means classifier score whose
//! sign the client takes post-decryption.
//!
//! Nothing here compares or divides ciphertexts — those operations do not
//! exist homomorphically, and the module is shaped around that constraint.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::collections::CipherVector;
use crate::encoding::encode_int;
use crate::error::{Error, Result};
use crate::scheme::{he_add, he_sub, mul_plain, Ciphertext, RelinKey};

/// A statistic split into an encrypted numerator and a public integer
/// denominator. Sample counts are treated as public metadata.
#[derive(Debug, Clone)]
pub struct StatParts {
    pub numerator: Ciphertext,
    pub denominator: BigInt,
}

/// A trained linear classifier with rational weights rescaled to integers:
/// `weights` and `intercept` are the original real coefficients times
/// `scale`, rounded. Scores come back multiplied by `scale`, which leaves
/// their sign — the class decision — unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearModel {
    pub weights: Vec<BigInt>,
    pub intercept: BigInt,
    pub scale: BigInt,
}

/// Mean of an encrypted sample, as (Σxᵢ, n); the division happens on the
/// client after decryption.
pub fn enc_mean_parts(x: &CipherVector) -> Result<StatParts> {
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(StatParts {
        numerator: x.sum()?,
        denominator: BigInt::from(x.len() as u64),
    })
}

/// Sample covariance of two encrypted samples, as
/// (n·Σxᵢyᵢ − Σxᵢ·Σyᵢ, n(n−1)). Multiplicative depth 1 beyond the inputs:
/// the n· factor is a doubling chain of additions, not a multiplication.
pub fn enc_covariance_parts(
    x: &CipherVector,
    y: &CipherVector,
    rk: &RelinKey,
) -> Result<StatParts> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: y.len(),
        });
    }
    if n < 2 {
        return Err(Error::EmptyInput);
    }
    let cross = x.inner_product(y, rk)?;
    let n_cross = add_times(&cross, n as u64)?;
    let sums = he_mul_sums(x, y, rk)?;
    Ok(StatParts {
        numerator: he_sub(&n_cross, &sums)?,
        denominator: BigInt::from(n as u64) * BigInt::from((n - 1) as u64),
    })
}

fn he_mul_sums(x: &CipherVector, y: &CipherVector, rk: &RelinKey) -> Result<Ciphertext> {
    crate::scheme::he_mul(&x.sum()?, &y.sum()?, rk)
}

/// k·ct by binary double-and-add: ⌈log₂ k⌉ + popcount(k) − 1 additions
/// and no multiplicative depth.
fn add_times(ct: &Ciphertext, k: u64) -> Result<Ciphertext> {
    assert!(k >= 1);
    let mut acc: Option<Ciphertext> = None;
    let mut addend = ct.clone();
    let mut rem = k;
    loop {
        if rem & 1 == 1 {
            acc = Some(match acc {
                None => addend.clone(),
                Some(a) => he_add(&a, &addend)?,
            });
        }
        rem >>= 1;
        if rem == 0 {
            break;
        }
        addend = he_add(&addend, &addend)?;
    }
    Ok(acc.expect("k >= 1"))
}

/// Encrypted Linear Means score Σⱼ wⱼ·xⱼ + intercept. Plain weights are
/// encoded as plaintext polynomials and applied through the caller's
/// encrypted constant one (`enc_one`), so the server never needs the
/// public key. The client takes the sign after decryption.
pub fn linear_means_score(
    model: &LinearModel,
    x: &CipherVector,
    enc_one: &Ciphertext,
    rk: &RelinKey,
) -> Result<Ciphertext> {
    if model.weights.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: model.weights.len(),
            right: x.len(),
        });
    }
    let params = x.params();
    let mut acc = mul_plain(enc_one, &encode_int(&model.intercept, params)?)?;
    for (w, xj) in model.weights.iter().zip(x.elems()) {
        if w.is_zero() {
            continue;
        }
        let enc_w = mul_plain(enc_one, &encode_int(w, params)?)?;
        let term = crate::scheme::he_mul(&enc_w, xj, rk)?;
        acc = he_add(&acc, &term)?;
    }
    Ok(acc)
}
