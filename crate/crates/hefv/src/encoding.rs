//! Integer ↔ plaintext codecs (signed binary representation), the residue
//! number system built on the Chinese remainder theorem, and the rational
//! numerator/denominator representation for non-integer values.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::params::ParamSet;
use crate::ring::{centered_reduce, RingElement};
use crate::sampling::RandomSource;
use crate::scheme::{encrypt, he_add, he_mul, Ciphertext, Plaintext, PublicKey, RelinKey};

/// Encodes an integer as the plaintext polynomial m̊ with m̊(2) = m: the
/// binary expansion of |m| as 0/1 coefficients, all negated when m < 0.
/// Every coefficient is in {-1, 0, 1}, which is what makes the per-
/// coefficient headroom of R_t translate into a guaranteed addition count.
pub fn encode_int(m: &BigInt, params: &ParamSet) -> Result<Plaintext> {
    let n = params.n();
    let mag = m.magnitude();
    if mag.bits() as usize > n {
        return Err(Error::MessageTooLarge {
            value: m.to_string(),
            max_bits: n,
        });
    }
    let sign = if m.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let coeffs = (0..mag.bits())
        .map(|i| if mag.bit(i) { sign.clone() } else { BigInt::zero() })
        .collect();
    Ok(Plaintext::new(RingElement::from_coeffs(
        params.plain_ring(),
        coeffs,
    )?))
}

/// Evaluates the plaintext polynomial at x = 2 over the integers:
/// the inverse of [`encode_int`] and, after homomorphic arithmetic, the
/// map from polynomial results back to integer results.
pub fn decode_int(pt: &Plaintext) -> BigInt {
    let mut acc = BigInt::zero();
    for c in pt.poly().coeffs().iter().rev() {
        acc = acc * 2 + c;
    }
    acc
}

/// A residue number system basis: pairwise coprime moduli m_1..m_k with
/// product M; values live in the symmetric range (-M/2, M/2].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnsBasis {
    moduli: Vec<BigInt>,
    product: BigInt,
}

impl RnsBasis {
    pub fn new(moduli: Vec<BigInt>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::EmptyInput);
        }
        for m in &moduli {
            if *m < BigInt::from(2) {
                return Err(Error::InvalidModulus);
            }
        }
        for i in 0..moduli.len() {
            for j in i + 1..moduli.len() {
                if moduli[i].gcd(&moduli[j]) != BigInt::one() {
                    return Err(Error::NonCoprimeModuli);
                }
            }
        }
        let product = moduli.iter().product();
        Ok(RnsBasis { moduli, product })
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    /// M = Π m_i.
    pub fn product(&self) -> &BigInt {
        &self.product
    }
}

/// Splits x into its centered residues (x mod m_1, …, x mod m_k).
pub fn crt_split(x: &BigInt, basis: &RnsBasis) -> Result<Vec<BigInt>> {
    let m = basis.product();
    if !(x * 2 > -m && x * 2 <= *m) {
        return Err(Error::CrtOutOfRange);
    }
    basis.moduli.iter().map(|mi| centered_reduce(x, mi)).collect()
}

/// Reconstructs the unique x in (-M/2, M/2] congruent to every residue,
/// by Garner's mixed-radix algorithm.
pub fn crt_combine(residues: &[BigInt], basis: &RnsBasis) -> Result<BigInt> {
    let k = basis.moduli.len();
    if residues.len() != k {
        return Err(Error::ResidueCountMismatch {
            expected: k,
            got: residues.len(),
        });
    }
    // mixed-radix digits: x = t_0 + m_0·(t_1 + m_1·(…))
    let mut digits: Vec<BigInt> = Vec::with_capacity(k);
    for j in 0..k {
        let mj = &basis.moduli[j];
        let mut t = residues[j].mod_floor(mj);
        for (l, d) in digits.iter().enumerate() {
            let inv = mod_inverse(&basis.moduli[l], mj);
            t = ((t - d) * inv).mod_floor(mj);
        }
        digits.push(t);
    }
    let mut x = BigInt::zero();
    for j in (0..k).rev() {
        x = x * &basis.moduli[j] + &digits[j];
    }
    Ok(centered_reduce(&x, basis.product())?)
}

/// a^{-1} mod m for coprime a, m.
fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// A rational value held as separately encrypted numerator and
/// denominator. There is no encrypted division, so pairs are never
/// reduced to lowest terms; `den_bound` tracks the plaintext-side growth
/// of the denominator so callers can see the depth budget coming.
#[derive(Debug, Clone)]
pub struct RationalPair {
    num: Ciphertext,
    den: Ciphertext,
    den_bound: BigInt,
}

impl RationalPair {
    /// Encrypts num/den. The denominator must be non-zero.
    pub fn encrypt_fraction(
        num: &BigInt,
        den: &BigInt,
        pk: &PublicKey,
        rng: &mut RandomSource,
    ) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidParameter {
                field: "den",
                reason: "denominator must be non-zero".into(),
            });
        }
        let params = pk.params();
        Ok(RationalPair {
            num: encrypt(pk, &encode_int(num, params)?, rng)?,
            den: encrypt(pk, &encode_int(den, params)?, rng)?,
            den_bound: den.abs(),
        })
    }

    pub fn num(&self) -> &Ciphertext {
        &self.num
    }

    pub fn den(&self) -> &Ciphertext {
        &self.den
    }

    /// Upper bound on |denominator| known without decrypting.
    pub fn den_bound(&self) -> &BigInt {
        &self.den_bound
    }
}

/// (a/b) + (c/d) = (a·d + c·b) / (b·d), all under encryption.
pub fn rational_add(a: &RationalPair, b: &RationalPair, rk: &RelinKey) -> Result<RationalPair> {
    let cross1 = he_mul(&a.num, &b.den, rk)?;
    let cross2 = he_mul(&b.num, &a.den, rk)?;
    Ok(RationalPair {
        num: he_add(&cross1, &cross2)?,
        den: he_mul(&a.den, &b.den, rk)?,
        den_bound: &a.den_bound * &b.den_bound,
    })
}

/// (a/b) · (c/d) = (a·c) / (b·d), all under encryption.
pub fn rational_mul(a: &RationalPair, b: &RationalPair, rk: &RelinKey) -> Result<RationalPair> {
    Ok(RationalPair {
        num: he_mul(&a.num, &b.num, rk)?,
        den: he_mul(&a.den, &b.den, rk)?,
        den_bound: &a.den_bound * &b.den_bound,
    })
}
