//! The encryption scheme itself: key generation, encryption, decryption of
//! 2- and 3-part ciphertexts, homomorphic addition and multiplication, and
//! relinearisation.
//!
//! A ciphertext is a pair of polynomials in R_q; multiplication transiently
//! produces a third part which relinearisation folds back down using a
//! base-2^w digit decomposition against the relinearisation key.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::{same_params, ParamSet};
use crate::ring::{self, RingElement};
use crate::sampling::{sample_gaussian, sample_uniform_r2, sample_uniform_rq, RandomSource};

/// Binary secret s ∈ R_2, stored in the ciphertext ring for arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    s: RingElement,
    params: Arc<ParamSet>,
}

impl SecretKey {
    pub fn poly(&self) -> &RingElement {
        &self.s
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub(crate) fn from_parts(s: RingElement, params: Arc<ParamSet>) -> Self {
        SecretKey { s, params }
    }
}

/// Public key (k_p1, k_p2) = ([-(a·s + e)]_q, a).
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    kp1: RingElement,
    kp2: RingElement,
    params: Arc<ParamSet>,
}

impl PublicKey {
    pub fn kp1(&self) -> &RingElement {
        &self.kp1
    }

    pub fn kp2(&self) -> &RingElement {
        &self.kp2
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub(crate) fn from_parts(kp1: RingElement, kp2: RingElement, params: Arc<ParamSet>) -> Self {
        PublicKey { kp1, kp2, params }
    }
}

/// Relinearisation key: pairs (r0_i, r1_i) with
/// r0_i + r1_i·s ≡ (2^w)^i·s² − e_i  (mod q) for i = 0..=ℓ.
#[derive(Debug, Clone, PartialEq)]
pub struct RelinKey {
    pairs: Vec<(RingElement, RingElement)>,
    params: Arc<ParamSet>,
}

impl RelinKey {
    pub fn pairs(&self) -> &[(RingElement, RingElement)] {
        &self.pairs
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub(crate) fn from_parts(
        pairs: Vec<(RingElement, RingElement)>,
        params: Arc<ParamSet>,
    ) -> Self {
        RelinKey { pairs, params }
    }
}

/// An ordered list of 2 (or, right after a raw multiplication, 3)
/// polynomials in R_q.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    parts: Vec<RingElement>,
    params: Arc<ParamSet>,
}

impl Ciphertext {
    /// Builds a ciphertext from raw parts, validating shape and ring
    /// membership. Parts are centered-reduced.
    pub fn from_parts(parts: Vec<RingElement>, params: Arc<ParamSet>) -> Result<Self> {
        if parts.len() < 2 || parts.len() > 3 {
            return Err(Error::BadCiphertextLength(parts.len()));
        }
        for p in &parts {
            if **p.params() != **params.ring() {
                return Err(Error::ParamMismatch);
            }
        }
        Ok(Ciphertext {
            parts: parts.into_iter().map(|p| p.reduce()).collect(),
            params,
        })
    }

    /// The noiseless encryption of zero, (0, 0). Needs no key.
    pub fn trivial_zero(params: &Arc<ParamSet>) -> Self {
        Ciphertext {
            parts: vec![
                RingElement::zero(params.ring()),
                RingElement::zero(params.ring()),
            ],
            params: params.clone(),
        }
    }

    pub fn parts(&self) -> &[RingElement] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }
}

/// A message: a polynomial in R_t with centered coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaintext {
    poly: RingElement,
}

impl Plaintext {
    /// Wraps a ring element as a message, centered-reducing it into R_t.
    pub fn new(poly: RingElement) -> Self {
        Plaintext { poly: poly.reduce() }
    }

    pub fn zero(params: &Arc<ParamSet>) -> Self {
        Plaintext {
            poly: RingElement::zero(params.plain_ring()),
        }
    }

    pub fn poly(&self) -> &RingElement {
        &self.poly
    }
}

fn check_params(a: &Arc<ParamSet>, b: &Arc<ParamSet>) -> Result<()> {
    if same_params(a, b) {
        Ok(())
    } else {
        Err(Error::ParamMismatch)
    }
}

/// Generates (secret, public, relinearisation) keys:
/// s ~ R_2, a ~ R_q, e ~ χ, k_p = ([-(a·s + e)]_q, a), and relinearisation
/// pairs ([-(a_i·s + e_i) + (2^w)^i·s²]_q, a_i).
pub fn keygen(
    params: &Arc<ParamSet>,
    rng: &mut RandomSource,
) -> Result<(SecretKey, PublicKey, RelinKey)> {
    let ring = params.ring();
    let gauss = params.gauss();
    let s = sample_uniform_r2(ring, rng);

    let a = sample_uniform_rq(ring, rng);
    let e = sample_gaussian(ring, gauss, rng);
    let kp1 = a.mul(&s)?.add(&e)?.neg();

    let s_sq = s.mul(&s)?;
    let w = params.relin_base_log2();
    let ell = params.relin_ell();
    let mut pairs = Vec::with_capacity(ell + 1);
    for i in 0..=ell {
        let a_i = sample_uniform_rq(ring, rng);
        let e_i = sample_gaussian(ring, gauss, rng);
        let base_pow = BigInt::one() << (w as usize * i);
        let r0 = s_sq.scale(&base_pow).sub(&a_i.mul(&s)?.add(&e_i)?)?;
        pairs.push((r0, a_i));
    }

    Ok((
        SecretKey {
            s,
            params: params.clone(),
        },
        PublicKey {
            kp1,
            kp2: a,
            params: params.clone(),
        },
        RelinKey {
            pairs,
            params: params.clone(),
        },
    ))
}

/// Enc(k_p, m̊) = ([k_p1·u + e_1 + Δ·m̊]_q, [k_p2·u + e_2]_q) with
/// u, e_1, e_2 ~ χ.
pub fn encrypt(pk: &PublicKey, pt: &Plaintext, rng: &mut RandomSource) -> Result<Ciphertext> {
    let params = &pk.params;
    if pt.poly.params() != params.plain_ring() {
        return Err(Error::ParamMismatch);
    }
    let ring = params.ring();
    let gauss = params.gauss();
    let u = sample_gaussian(ring, gauss, rng);
    let e1 = sample_gaussian(ring, gauss, rng);
    let e2 = sample_gaussian(ring, gauss, rng);

    let scaled_msg =
        RingElement::from_coeffs(ring, pt.poly.coeffs().to_vec())?.scale(params.delta());
    let c1 = pk.kp1.mul(&u)?.add(&e1)?.add(&scaled_msg)?;
    let c2 = pk.kp2.mul(&u)?.add(&e2)?;
    Ok(Ciphertext {
        parts: vec![c1, c2],
        params: params.clone(),
    })
}

/// Dec(k_s, c) = [⌊t·[c₁ + c₂·s (+ c₃·s²)]_q / q⌉]_t.
///
/// Noise past the threshold is not detectable here: decryption silently
/// yields a wrong plaintext. [`crate::params::noise_budget`] is the
/// diagnostic.
pub fn decrypt(sk: &SecretKey, ct: &Ciphertext) -> Result<Plaintext> {
    check_params(&sk.params, &ct.params)?;
    let params = &sk.params;
    let mut v = ct.parts[0].add(&ct.parts[1].mul(&sk.s)?)?;
    if ct.parts.len() == 3 {
        let s_sq = sk.s.mul(&sk.s)?;
        v = v.add(&ct.parts[2].mul(&s_sq)?)?;
    }
    let rounded = v.scale_round(params.t(), params.q());
    let poly = RingElement::from_coeffs(params.plain_ring(), rounded.into_coeffs())?.reduce();
    Ok(Plaintext { poly })
}

/// Homomorphic addition: ([c₁₁+c₂₁]_q, [c₁₂+c₂₂]_q). Operands must be
/// 2 parts; relinearise a fresh product first.
pub fn he_add(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    check_params(&c1.params, &c2.params)?;
    if c1.len() != 2 || c2.len() != 2 {
        return Err(Error::UnrelinearisedOperand);
    }
    add_parts(c1, c2)
}

/// Homomorphic subtraction, realized as addition of the negated operand.
pub fn he_sub(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    check_params(&c1.params, &c2.params)?;
    if c1.len() != 2 || c2.len() != 2 {
        return Err(Error::UnrelinearisedOperand);
    }
    let parts = c1
        .parts
        .iter()
        .zip(&c2.parts)
        .map(|(a, b)| a.sub(b))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ciphertext {
        parts,
        params: c1.params.clone(),
    })
}

/// Part-wise sum allowing 3-part operands; shorter operands are padded
/// with zero. Internal building block for tree sums of raw products.
pub(crate) fn add_parts(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    let (longer, shorter) = if c1.len() >= c2.len() { (c1, c2) } else { (c2, c1) };
    let mut parts = Vec::with_capacity(longer.len());
    for i in 0..longer.len() {
        if i < shorter.len() {
            parts.push(longer.parts[i].add(&shorter.parts[i])?);
        } else {
            parts.push(longer.parts[i].clone());
        }
    }
    Ok(Ciphertext {
        parts,
        params: c1.params.clone(),
    })
}

/// Raw homomorphic multiplication: the 3-part ciphertext
/// ([⌊t(c₁₁·c₂₁)/q⌉]_q, [⌊t(c₁₁·c₂₂ + c₁₂·c₂₁)/q⌉]_q, [⌊t(c₁₂·c₂₂)/q⌉]_q),
/// with the inner products taken exactly over R — no intermediate mod-q
/// reduction.
pub fn he_mul_raw(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    check_params(&c1.params, &c2.params)?;
    if c1.len() != 2 || c2.len() != 2 {
        return Err(Error::UnrelinearisedOperand);
    }
    let params = &c1.params;
    let (d1, d2, d3) = ring::tensor_lifted(
        &c1.parts[0],
        &c1.parts[1],
        &c2.parts[0],
        &c2.parts[1],
    );
    let t = params.t();
    let q = params.q();
    let parts = vec![
        d1.scale_round(t, q).reduce(),
        d2.scale_round(t, q).reduce(),
        d3.scale_round(t, q).reduce(),
    ];
    Ok(Ciphertext {
        parts,
        params: params.clone(),
    })
}

/// Folds a 3-part ciphertext back to 2 parts: c₃ is decomposed base 2^w
/// into digit polynomials c₃⁽ⁱ⁾ with coefficients in [0, 2^w), and the
/// output is ([c₁ + Σ r0_i·c₃⁽ⁱ⁾]_q, [c₂ + Σ r1_i·c₃⁽ⁱ⁾]_q).
pub fn relinearise(ct: &Ciphertext, rk: &RelinKey) -> Result<Ciphertext> {
    check_params(&ct.params, &rk.params)?;
    if ct.len() != 3 {
        return Err(Error::NothingToRelinearise(ct.len()));
    }
    let params = &ct.params;
    let digits = decompose_digits(&ct.parts[2], params);
    let r0s: Vec<RingElement> = rk.pairs.iter().map(|(r0, _)| r0.clone()).collect();
    let r1s: Vec<RingElement> = rk.pairs.iter().map(|(_, r1)| r1.clone()).collect();
    let (sum0, sum1) = ring::dot2_lifted(&digits, &r0s, &r1s);
    let parts = vec![ct.parts[0].add(&sum0)?, ct.parts[1].add(&sum1)?];
    Ok(Ciphertext {
        parts,
        params: params.clone(),
    })
}

/// Base-2^w digit polynomials of the canonical representative in [0, q).
fn decompose_digits(part: &RingElement, params: &ParamSet) -> Vec<RingElement> {
    let w = params.relin_base_log2() as usize;
    let ell = params.relin_ell();
    let q = params.q();
    let mask: BigInt = (BigInt::one() << w) - 1;
    let n = params.n();
    let mut digit_coeffs: Vec<Vec<BigInt>> = vec![Vec::with_capacity(n); ell + 1];
    for c in part.coeffs() {
        let mut x = c.mod_floor(q);
        for digits in digit_coeffs.iter_mut() {
            digits.push(&x & &mask);
            x >>= w;
        }
        debug_assert!(x.is_zero());
    }
    digit_coeffs
        .into_iter()
        .map(|coeffs| {
            RingElement::from_coeffs(params.ring(), coeffs).expect("digit poly fits ring")
        })
        .collect()
}

/// Full multiplication: raw tensor product followed by relinearisation,
/// returning a 2-part ciphertext.
pub fn he_mul(c1: &Ciphertext, c2: &Ciphertext, rk: &RelinKey) -> Result<Ciphertext> {
    relinearise(&he_mul_raw(c1, c2)?, rk)
}

/// Multiplies a ciphertext by a plaintext polynomial (both components are
/// ring-multiplied by m̊). Consumes no relinearisation and, when t divides
/// q, adds no rounding noise beyond the plaintext's own magnitude.
pub fn mul_plain(ct: &Ciphertext, pt: &Plaintext) -> Result<Ciphertext> {
    let params = &ct.params;
    if pt.poly.params() != params.plain_ring() {
        return Err(Error::ParamMismatch);
    }
    let lifted = RingElement::from_coeffs(params.ring(), pt.poly.coeffs().to_vec())?;
    let parts = ct
        .parts
        .iter()
        .map(|c| c.mul(&lifted))
        .collect::<Result<Vec<_>>>()?;
    Ok(Ciphertext {
        parts,
        params: params.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{noise_budget, ParamSet};
    use num_traits::ToPrimitive;

    pub(crate) fn toy_params() -> Arc<ParamSet> {
        Arc::new(
            ParamSet::builder()
                .d(4)
                .q(BigInt::one() << 40)
                .t(BigInt::from(16))
                .sigma(4.0)
                .relin_base_log2(8)
                .build()
                .unwrap(),
        )
    }

    fn rng(tag: &[u8]) -> RandomSource {
        RandomSource::seeded(tag)
    }

    /// Uniform random message in R_t.
    fn random_plaintext(params: &Arc<ParamSet>, rng: &mut RandomSource) -> Plaintext {
        Plaintext::new(sample_uniform_rq(params.plain_ring(), rng))
    }

    fn const_plaintext(params: &Arc<ParamSet>, v: i64) -> Plaintext {
        Plaintext::new(
            RingElement::from_coeffs(params.plain_ring(), vec![BigInt::from(v)]).unwrap(),
        )
    }

    fn plain_value(pt: &Plaintext) -> i64 {
        // for constant-polynomial messages
        pt.poly().coeffs()[0].to_i64().unwrap()
    }

    #[test]
    fn keygen_contracts() {
        let params = toy_params();
        let mut rng = rng(b"keygen");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        // secret key is binary
        for c in sk.poly().coeffs() {
            assert!(c.is_zero() || c.is_one());
        }
        // public key hides the secret behind chi-bounded noise
        let relation = pk.kp1().add(&pk.kp2().mul(sk.poly()).unwrap()).unwrap();
        let b = BigInt::from(params.gauss().tail_bound());
        assert!(relation.inf_norm() <= b);
        // relin pairs satisfy r0 + r1·s = (2^w)^i·s² - e_i with small e_i
        let s_sq = sk.poly().mul(sk.poly()).unwrap();
        for (i, (r0, r1)) in rk.pairs().iter().enumerate() {
            let base_pow = BigInt::one() << (8 * i);
            let lhs = r0
                .add(&r1.mul(sk.poly()).unwrap())
                .unwrap()
                .sub(&s_sq.scale(&base_pow))
                .unwrap();
            assert!(lhs.inf_norm() <= b, "relin pair {i} out of bound");
        }
        assert_eq!(rk.pairs().len(), params.relin_ell() + 1);
    }

    #[test]
    fn distinct_keys_from_crypto_rng() {
        let params = toy_params();
        let mut rng = RandomSource::crypto().unwrap();
        let (_, pk1, _) = keygen(&params, &mut rng).unwrap();
        let (_, pk2, _) = keygen(&params, &mut rng).unwrap();
        assert_ne!(pk1, pk2);
    }

    #[test]
    fn encrypt_decrypt_identity() {
        let params = toy_params();
        let mut rng = rng(b"roundtrip");
        let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
        // zero message
        let zero = Plaintext::zero(&params);
        assert_eq!(decrypt(&sk, &encrypt(&pk, &zero, &mut rng).unwrap()).unwrap(), zero);
        // 500 random messages
        for _ in 0..500 {
            let pt = random_plaintext(&params, &mut rng);
            let ct = encrypt(&pk, &pt, &mut rng).unwrap();
            assert_eq!(decrypt(&sk, &ct).unwrap(), pt);
        }
    }

    #[test]
    fn encryption_is_randomized() {
        let params = toy_params();
        let mut rng = rng(b"nondeterminism");
        let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
        let pt = const_plaintext(&params, 7);
        let ct1 = encrypt(&pk, &pt, &mut rng).unwrap();
        let ct2 = encrypt(&pk, &pt, &mut rng).unwrap();
        assert_ne!(ct1, ct2, "semantic security: repeat encryptions must differ");
        assert_eq!(decrypt(&sk, &ct1).unwrap(), decrypt(&sk, &ct2).unwrap());
    }

    #[test]
    fn wrong_secret_fails_lwe_relation() {
        // Appendix-style check: with the right s the public-key relation is
        // chi-bounded; with an independent s' it exceeds B essentially always.
        let params = toy_params();
        let mut rng = rng(b"ring-lwe");
        let b = BigInt::from(params.gauss().tail_bound());
        let mut breaches = 0;
        for _ in 0..100 {
            let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
            let wrong = sample_uniform_r2(params.ring(), &mut rng);
            if wrong == *sk.poly() {
                continue; // 2^-8 chance per trial at n=8
            }
            let relation = pk.kp1().add(&pk.kp2().mul(&wrong).unwrap()).unwrap();
            if relation.inf_norm() > b {
                breaches += 1;
            }
        }
        assert!(breaches >= 95, "only {breaches}/100 wrong secrets detected");
    }

    #[test]
    fn addition_and_subtraction() {
        let params = toy_params();
        let mut rng = rng(b"add");
        let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
        let enc = |v: i64, rng: &mut RandomSource| {
            encrypt(&pk, &const_plaintext(&params, v), rng).unwrap()
        };
        let c42 = enc(4, &mut rng);
        let c7 = enc(3, &mut rng);
        assert_eq!(
            plain_value(&decrypt(&sk, &he_add(&c42, &c7).unwrap()).unwrap()),
            7
        );
        assert_eq!(
            plain_value(&decrypt(&sk, &he_sub(&c42, &c7).unwrap()).unwrap()),
            1
        );
        // c - c = 0
        assert!(decrypt(&sk, &he_sub(&c42, &c42).unwrap()).unwrap().poly().is_zero());
        // negative results round-trip
        let c5 = enc(5, &mut rng);
        let c9 = enc(-2, &mut rng);
        assert_eq!(
            plain_value(&decrypt(&sk, &he_sub(&c9, &c5).unwrap()).unwrap()),
            -7
        );
        // additive identity
        let czero = encrypt(&pk, &Plaintext::zero(&params), &mut rng).unwrap();
        assert_eq!(
            decrypt(&sk, &he_add(&c42, &czero).unwrap()).unwrap(),
            decrypt(&sk, &c42).unwrap()
        );
    }

    #[test]
    fn multiplication_and_relinearisation() {
        let params = toy_params();
        let mut rng = rng(b"mul");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        let enc = |v: i64, rng: &mut RandomSource| {
            encrypt(&pk, &const_plaintext(&params, v), rng).unwrap()
        };
        // 6·7 = 42: raw 3-part decryption and relinearised decryption agree
        let c6 = enc(6, &mut rng);
        let c7 = enc(7, &mut rng);
        let raw = he_mul_raw(&c6, &c7).unwrap();
        assert_eq!(raw.len(), 3);
        assert_eq!(plain_value(&decrypt(&sk, &raw).unwrap()), 42 - 16 * 3); // 42 ≡ -6 mod 16
        let lin = relinearise(&raw, &rk).unwrap();
        assert_eq!(lin.len(), 2);
        assert_eq!(decrypt(&sk, &lin).unwrap(), decrypt(&sk, &raw).unwrap());
        // identities
        let m = enc(5, &mut rng);
        let one = enc(1, &mut rng);
        let zero = enc(0, &mut rng);
        assert_eq!(
            decrypt(&sk, &he_mul(&m, &one, &rk).unwrap()).unwrap(),
            decrypt(&sk, &m).unwrap()
        );
        assert!(decrypt(&sk, &he_mul(&m, &zero, &rk).unwrap())
            .unwrap()
            .poly()
            .is_zero());
    }

    #[test]
    fn relinearisation_preserves_decryption_100_products() {
        let params = toy_params();
        let mut rng = rng(b"relin100");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        for _ in 0..100 {
            let p1 = random_plaintext(&params, &mut rng);
            let p2 = random_plaintext(&params, &mut rng);
            let raw = he_mul_raw(
                &encrypt(&pk, &p1, &mut rng).unwrap(),
                &encrypt(&pk, &p2, &mut rng).unwrap(),
            )
            .unwrap();
            let want = decrypt(&sk, &raw).unwrap();
            let got = decrypt(&sk, &relinearise(&raw, &rk).unwrap()).unwrap();
            assert_eq!(got, want);
            // and both equal the plaintext ring product
            assert_eq!(want.poly(), &p1.poly().mul(p2.poly()).unwrap());
        }
    }

    #[test]
    fn relinearisation_budget_drop_is_bounded() {
        let params = toy_params();
        let mut rng = rng(b"relinbudget");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        let n = params.n() as f64;
        let ell = params.relin_ell() as f64;
        let w = params.relin_base_log2() as f64;
        let b = params.gauss().tail_bound() as f64;
        let max_drop = (n * (ell + 1.0) * 2f64.powf(w) * b).log2() + 1.0;
        for _ in 0..20 {
            let p1 = random_plaintext(&params, &mut rng);
            let p2 = random_plaintext(&params, &mut rng);
            let raw = he_mul_raw(
                &encrypt(&pk, &p1, &mut rng).unwrap(),
                &encrypt(&pk, &p2, &mut rng).unwrap(),
            )
            .unwrap();
            let pt = decrypt(&sk, &raw).unwrap();
            let before = noise_budget(&raw, &sk, &pt).unwrap();
            let after = noise_budget(&relinearise(&raw, &rk).unwrap(), &sk, &pt).unwrap();
            assert!(
                after >= before - max_drop,
                "budget fell {before} -> {after}, allowed drop {max_drop}"
            );
        }
    }

    #[test]
    fn products_decrypt_to_plaintext_products() {
        let params = toy_params();
        let mut rng = rng(b"mul oracle");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        for _ in 0..100 {
            let p1 = random_plaintext(&params, &mut rng);
            let p2 = random_plaintext(&params, &mut rng);
            let prod = he_mul(
                &encrypt(&pk, &p1, &mut rng).unwrap(),
                &encrypt(&pk, &p2, &mut rng).unwrap(),
                &rk,
            )
            .unwrap();
            assert_eq!(
                decrypt(&sk, &prod).unwrap().poly(),
                &p1.poly().mul(p2.poly()).unwrap()
            );
        }
    }

    #[test]
    fn decryption_associativity_within_depth() {
        let params = toy_params();
        let mut rng = rng(b"assoc");
        let (sk, pk, rk) = keygen(&params, &mut rng).unwrap();
        let enc = |v: i64, rng: &mut RandomSource| {
            encrypt(&pk, &const_plaintext(&params, v), rng).unwrap()
        };
        let (a, b, c) = (enc(2, &mut rng), enc(3, &mut rng), enc(-1, &mut rng));
        let left = he_mul(&he_mul(&a, &b, &rk).unwrap(), &c, &rk).unwrap();
        let right = he_mul(&a, &he_mul(&b, &c, &rk).unwrap(), &rk).unwrap();
        assert_eq!(
            decrypt(&sk, &left).unwrap(),
            decrypt(&sk, &right).unwrap()
        );
        assert_eq!(plain_value(&decrypt(&sk, &left).unwrap()), -6);
    }

    #[test]
    fn all_zero_ciphertext_decrypts_to_zero() {
        let params = toy_params();
        let mut rng = rng(b"zero");
        let (sk, _, _) = keygen(&params, &mut rng).unwrap();
        let z2 = Ciphertext::trivial_zero(&params);
        assert!(decrypt(&sk, &z2).unwrap().poly().is_zero());
        let z3 = Ciphertext::from_parts(
            vec![
                RingElement::zero(params.ring()),
                RingElement::zero(params.ring()),
                RingElement::zero(params.ring()),
            ],
            params.clone(),
        )
        .unwrap();
        assert!(decrypt(&sk, &z3).unwrap().poly().is_zero());
    }

    #[test]
    fn length_and_param_errors() {
        let params = toy_params();
        let mut rng = rng(b"errors");
        let (_, pk, rk) = keygen(&params, &mut rng).unwrap();
        let pt = const_plaintext(&params, 1);
        let c = encrypt(&pk, &pt, &mut rng).unwrap();
        let raw = he_mul_raw(&c, &c).unwrap();
        assert_eq!(he_add(&raw, &c), Err(Error::UnrelinearisedOperand));
        assert_eq!(he_mul_raw(&raw, &c), Err(Error::UnrelinearisedOperand));
        assert_eq!(relinearise(&c, &rk), Err(Error::NothingToRelinearise(2)));
        assert!(matches!(
            Ciphertext::from_parts(vec![RingElement::zero(params.ring())], params.clone()),
            Err(Error::BadCiphertextLength(1))
        ));

        let other = Arc::new(
            ParamSet::builder()
                .d(4)
                .q(BigInt::one() << 40)
                .t(BigInt::from(32))
                .sigma(4.0)
                .relin_base_log2(8)
                .build()
                .unwrap(),
        );
        let mut rng2 = rng_for_other();
        let (_, pk2, _) = keygen(&other, &mut rng2).unwrap();
        let c2 = encrypt(&pk2, &Plaintext::zero(&other), &mut rng2).unwrap();
        assert_eq!(he_add(&c, &c2), Err(Error::ParamMismatch));
    }

    fn rng_for_other() -> RandomSource {
        RandomSource::seeded(b"other params")
    }

    #[test]
    fn mul_plain_scales_message() {
        let params = toy_params();
        let mut rng = rng(b"mulplain");
        let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
        let c3 = encrypt(&pk, &const_plaintext(&params, 3), &mut rng).unwrap();
        let by2 = const_plaintext(&params, 2);
        let scaled = mul_plain(&c3, &by2).unwrap();
        assert_eq!(plain_value(&decrypt(&sk, &scaled).unwrap()), 6);
    }

    /// The guard for the known implementation trap: computing the tensor
    /// products mod q (instead of exactly over R) must break depth-1
    /// correctness.
    #[test]
    fn mod_q_inside_multiplication_mutation_breaks_depth_one() {
        let params = toy_params();
        let mut rng = rng(b"mutation");
        let (sk, pk, _) = keygen(&params, &mut rng).unwrap();
        let t = params.t();
        let q = params.q();
        let mutant_mul = |c1: &Ciphertext, c2: &Ciphertext| -> Ciphertext {
            // deliberately wrong: reduces each product mod q before scaling
            let d1 = c1.parts()[0].mul(&c2.parts()[0]).unwrap();
            let mid = c1.parts()[0]
                .mul(&c2.parts()[1])
                .unwrap()
                .add(&c1.parts()[1].mul(&c2.parts()[0]).unwrap())
                .unwrap();
            let d3 = c1.parts()[1].mul(&c2.parts()[1]).unwrap();
            Ciphertext::from_parts(
                vec![
                    d1.scale_round(t, q).reduce(),
                    mid.scale_round(t, q).reduce(),
                    d3.scale_round(t, q).reduce(),
                ],
                params.clone(),
            )
            .unwrap()
        };
        let mut failures = 0;
        for _ in 0..16 {
            let p1 = random_plaintext(&params, &mut rng);
            let p2 = random_plaintext(&params, &mut rng);
            let c1 = encrypt(&pk, &p1, &mut rng).unwrap();
            let c2 = encrypt(&pk, &p2, &mut rng).unwrap();
            let want = p1.poly().mul(p2.poly()).unwrap();
            // sanity: the real path is correct
            assert_eq!(decrypt(&sk, &he_mul_raw(&c1, &c2).unwrap()).unwrap().poly(), &want);
            if decrypt(&sk, &mutant_mul(&c1, &c2)).unwrap().poly() != &want {
                failures += 1;
            }
        }
        assert!(
            failures > 0,
            "mod-q mutation decrypted correctly on all trials; the guard is dead"
        );
    }
}
