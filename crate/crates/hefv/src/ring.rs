//! Exact arithmetic in Z, Z_q and the negacyclic rings R = Z[x]/(x^n + 1)
//! and R_q, with the scale-and-round primitive used by decryption and
//! multiplication.
//!
//! Elements carry a `reduced` tag: reduced elements have every coefficient
//! in the centered range (-q/2, q/2]; lifted elements hold exact integer
//! coefficients and appear between [`RingElement::mul_lifted`] and
//! [`RingElement::scale_round`].

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ntt;

/// Degree parameters of the rings R and R_q: the modulus polynomial is the
/// 2^d-th cyclotomic x^n + 1 with n = 2^(d-1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingParams {
    d: u32,
    n: usize,
    q: BigInt,
}

impl RingParams {
    pub fn new(d: u32, q: BigInt) -> Result<Self> {
        if d < 1 || d > 24 {
            return Err(Error::InvalidParameter {
                field: "d",
                reason: format!("must be in 1..=24, got {d}"),
            });
        }
        if q < BigInt::from(2) {
            return Err(Error::InvalidModulus);
        }
        Ok(RingParams {
            d,
            n: 1usize << (d - 1),
            q,
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Polynomial length n = 2^(d-1).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    fn log_n(&self) -> u32 {
        self.d - 1
    }
}

pub(crate) fn same_ring(a: &Arc<RingParams>, b: &Arc<RingParams>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// The unique representative of `a` mod q in (-q/2, q/2].
pub fn centered_reduce(a: &BigInt, q: &BigInt) -> Result<BigInt> {
    if *q < BigInt::from(2) {
        return Err(Error::InvalidModulus);
    }
    Ok(centered(a, q))
}

#[inline]
fn centered(a: &BigInt, q: &BigInt) -> BigInt {
    let mut r = a.mod_floor(q);
    if &r * 2 > *q {
        r -= q;
    }
    r
}

/// A polynomial of degree < n over Z (lifted) or Z_q (reduced); the
/// coefficient of x^i sits at index i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingElement {
    params: Arc<RingParams>,
    coeffs: Vec<BigInt>,
    reduced: bool,
}

impl RingElement {
    pub fn zero(params: &Arc<RingParams>) -> Self {
        RingElement {
            params: params.clone(),
            coeffs: vec![BigInt::zero(); params.n],
            reduced: true,
        }
    }

    pub fn one(params: &Arc<RingParams>) -> Self {
        Self::monomial(params, 0)
    }

    /// x^k for k < n.
    pub fn monomial(params: &Arc<RingParams>, k: usize) -> Self {
        assert!(k < params.n, "monomial degree out of range");
        let mut coeffs = vec![BigInt::zero(); params.n];
        coeffs[k] = BigInt::one();
        RingElement {
            params: params.clone(),
            coeffs,
            reduced: true,
        }
    }

    /// Builds an element from raw integer coefficients (low degree first).
    /// Shorter vectors are zero-padded; the element is tagged lifted.
    pub fn from_coeffs(params: &Arc<RingParams>, mut coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() > params.n {
            return Err(Error::InvalidParameter {
                field: "coeffs",
                reason: format!("length {} exceeds ring degree {}", coeffs.len(), params.n),
            });
        }
        coeffs.resize(params.n, BigInt::zero());
        Ok(RingElement {
            params: params.clone(),
            coeffs,
            reduced: false,
        })
    }

    pub(crate) fn from_parts_unchecked(
        params: Arc<RingParams>,
        coeffs: Vec<BigInt>,
        reduced: bool,
    ) -> Self {
        debug_assert_eq!(coeffs.len(), params.n);
        RingElement {
            params,
            coeffs,
            reduced,
        }
    }

    pub fn params(&self) -> &Arc<RingParams> {
        &self.params
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coefficient-wise centered reduction mod q; idempotent.
    pub fn reduce(&self) -> Self {
        if self.reduced {
            return self.clone();
        }
        let q = &self.params.q;
        let coeffs = self.coeffs.iter().map(|c| centered(c, q)).collect();
        RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: true,
        }
    }

    /// Coefficient-wise sum, centered-reduced mod q.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let q = &self.params.q;
        let fast = self.reduced && other.reduced;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let s = a + b;
                if fast {
                    correct_centered(s, q)
                } else {
                    centered(&s, q)
                }
            })
            .collect();
        Ok(RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: true,
        })
    }

    /// Coefficient-wise difference, centered-reduced mod q.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let q = &self.params.q;
        let fast = self.reduced && other.reduced;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                let s = a - b;
                if fast {
                    correct_centered(s, q)
                } else {
                    centered(&s, q)
                }
            })
            .collect();
        Ok(RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: true,
        })
    }

    /// Coefficient-wise negation, centered-reduced mod q.
    pub fn neg(&self) -> Self {
        let q = &self.params.q;
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let s = -a;
                if self.reduced {
                    correct_centered(s, q)
                } else {
                    centered(&s, q)
                }
            })
            .collect();
        RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: true,
        }
    }

    /// Negacyclic product reduced by x^n ≡ -1, then centered mod q.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_lifted(other)?.reduce())
    }

    /// Exact product over Z[x]/(x^n + 1) with no mod-q reduction.
    pub fn mul_lifted(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let coeffs = negacyclic_mul_exact(&self.coeffs, &other.coeffs, self.params.log_n());
        Ok(RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: false,
        })
    }

    /// Coefficient-wise ⌊t·c/q⌉ with ties rounded toward +∞, in exact
    /// rational arithmetic. The result is tagged lifted.
    pub fn scale_round(&self, t: &BigInt, q: &BigInt) -> Self {
        assert!(*t >= BigInt::from(2), "scale_round requires t >= 2");
        assert!(*q >= BigInt::from(2), "scale_round requires q >= 2");
        let two_q = q * 2;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let num: BigInt = c * t * 2 + q;
                num.div_floor(&two_q)
            })
            .collect();
        RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: false,
        }
    }

    /// Coefficient-wise product with a scalar; the result is tagged lifted.
    pub fn scale(&self, k: &BigInt) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * k).collect();
        RingElement {
            params: self.params.clone(),
            coeffs,
            reduced: false,
        }
    }

    /// Max over coefficients of the absolute value.
    pub fn inf_norm(&self) -> BigInt {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if same_ring(&self.params, &other.params) {
            Ok(())
        } else {
            Err(Error::ParamMismatch)
        }
    }
}

/// Single-step correction for values in (-q, q] coming out of a sum or
/// negation of centered operands; avoids a full division.
#[inline]
fn correct_centered(mut s: BigInt, q: &BigInt) -> BigInt {
    let twice = &s * 2;
    if twice > *q {
        s -= q;
    } else if twice <= -q.clone() {
        s += q;
    }
    s
}

const SCHOOLBOOK_MAX_N: usize = 16;

fn inf_norm_slice(a: &[BigInt]) -> BigUint {
    a.iter()
        .map(|c| c.magnitude())
        .max()
        .cloned()
        .unwrap_or_else(BigUint::zero)
}

/// Exact negacyclic convolution of two coefficient slices of length n.
pub(crate) fn negacyclic_mul_exact(a: &[BigInt], b: &[BigInt], log_n: u32) -> Vec<BigInt> {
    let n = a.len();
    if n <= SCHOOLBOOK_MAX_N {
        return schoolbook_negacyclic(a, b);
    }
    let bound = inf_norm_slice(a) * inf_norm_slice(b) * (2 * n as u64) + 1u32;
    match ntt::primes_needed(&bound) {
        Some(k) if log_n <= 16 => {
            let cols: Vec<Vec<u64>> = (0..k)
                .into_par_iter()
                .map(|pi| {
                    let fa = ntt::to_ntt(a, pi, log_n);
                    let fb = ntt::to_ntt(b, pi, log_n);
                    ntt::from_ntt(ntt::pointwise_mul(&fa, &fb, pi), pi, log_n)
                })
                .collect();
            ntt::reconstruct_centered(&cols, n)
        }
        _ => schoolbook_negacyclic(a, b),
    }
}

fn schoolbook_negacyclic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    let mut out = vec![BigInt::zero(); n];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            let p = ai * bj;
            let k = i + j;
            if k < n {
                out[k] += p;
            } else {
                out[k - n] -= p;
            }
        }
    }
    out
}

/// The three exact lifted products of a ciphertext tensor:
/// (c11·c21, c11·c22 + c12·c21, c12·c22), sharing forward transforms.
pub(crate) fn tensor_lifted(
    c11: &RingElement,
    c12: &RingElement,
    c21: &RingElement,
    c22: &RingElement,
) -> (RingElement, RingElement, RingElement) {
    let params = c11.params.clone();
    let n = params.n;
    let log_n = params.log_n();
    let na = inf_norm_slice(&c11.coeffs).max(inf_norm_slice(&c12.coeffs));
    let nb = inf_norm_slice(&c21.coeffs).max(inf_norm_slice(&c22.coeffs));
    let bound = na * nb * (4 * n as u64) + 1u32;

    let (d1, d2, d3) = match ntt::primes_needed(&bound) {
        Some(k) if n > SCHOOLBOOK_MAX_N && log_n <= 16 => {
            let cols: Vec<[Vec<u64>; 3]> = (0..k)
                .into_par_iter()
                .map(|pi| {
                    let f11 = ntt::to_ntt(&c11.coeffs, pi, log_n);
                    let f12 = ntt::to_ntt(&c12.coeffs, pi, log_n);
                    let f21 = ntt::to_ntt(&c21.coeffs, pi, log_n);
                    let f22 = ntt::to_ntt(&c22.coeffs, pi, log_n);
                    let z0 = ntt::pointwise_mul(&f11, &f21, pi);
                    let mut mid = ntt::pointwise_mul(&f11, &f22, pi);
                    ntt::pointwise_add(&mut mid, &ntt::pointwise_mul(&f12, &f21, pi), pi);
                    let z2 = ntt::pointwise_mul(&f12, &f22, pi);
                    [
                        ntt::from_ntt(z0, pi, log_n),
                        ntt::from_ntt(mid, pi, log_n),
                        ntt::from_ntt(z2, pi, log_n),
                    ]
                })
                .collect();
            let split = |idx: usize| -> Vec<Vec<u64>> {
                cols.iter().map(|c| c[idx].clone()).collect()
            };
            let mut three: Vec<Vec<BigInt>> = (0..3usize)
                .into_par_iter()
                .map(|idx| ntt::reconstruct_centered(&split(idx), n))
                .collect();
            let d3 = three.pop().unwrap();
            let d2 = three.pop().unwrap();
            let d1 = three.pop().unwrap();
            (d1, d2, d3)
        }
        _ => {
            let d1 = schoolbook_negacyclic(&c11.coeffs, &c21.coeffs);
            let mut d2 = schoolbook_negacyclic(&c11.coeffs, &c22.coeffs);
            for (x, y) in d2
                .iter_mut()
                .zip(schoolbook_negacyclic(&c12.coeffs, &c21.coeffs))
            {
                *x += y;
            }
            let d3 = schoolbook_negacyclic(&c12.coeffs, &c22.coeffs);
            (d1, d2, d3)
        }
    };
    (
        RingElement::from_parts_unchecked(params.clone(), d1, false),
        RingElement::from_parts_unchecked(params.clone(), d2, false),
        RingElement::from_parts_unchecked(params, d3, false),
    )
}

/// (Σ xs[i]·y0s[i], Σ xs[i]·y1s[i]) as exact lifted elements, sharing the
/// forward transforms of `xs`. Used by relinearisation.
pub(crate) fn dot2_lifted(
    xs: &[RingElement],
    y0s: &[RingElement],
    y1s: &[RingElement],
) -> (RingElement, RingElement) {
    assert_eq!(xs.len(), y0s.len());
    assert_eq!(xs.len(), y1s.len());
    assert!(!xs.is_empty());
    let params = xs[0].params.clone();
    let n = params.n;
    let log_n = params.log_n();

    let nx = xs
        .iter()
        .map(|x| inf_norm_slice(&x.coeffs))
        .max()
        .unwrap();
    let ny = y0s
        .iter()
        .chain(y1s.iter())
        .map(|y| inf_norm_slice(&y.coeffs))
        .max()
        .unwrap();
    let bound = nx * ny * (2 * n as u64) * (xs.len() as u64) + 1u32;

    let (s0, s1) = match ntt::primes_needed(&bound) {
        Some(k) if n > SCHOOLBOOK_MAX_N && log_n <= 16 => {
            let cols: Vec<[Vec<u64>; 2]> = (0..k)
                .into_par_iter()
                .map(|pi| {
                    let mut acc0 = vec![0u64; n];
                    let mut acc1 = vec![0u64; n];
                    for ((x, y0), y1) in xs.iter().zip(y0s).zip(y1s) {
                        let fx = ntt::to_ntt(&x.coeffs, pi, log_n);
                        let f0 = ntt::to_ntt(&y0.coeffs, pi, log_n);
                        let f1 = ntt::to_ntt(&y1.coeffs, pi, log_n);
                        ntt::pointwise_mul_acc(&mut acc0, &fx, &f0, pi);
                        ntt::pointwise_mul_acc(&mut acc1, &fx, &f1, pi);
                    }
                    [
                        ntt::from_ntt(acc0, pi, log_n),
                        ntt::from_ntt(acc1, pi, log_n),
                    ]
                })
                .collect();
            let c0: Vec<Vec<u64>> = cols.iter().map(|c| c[0].clone()).collect();
            let c1: Vec<Vec<u64>> = cols.iter().map(|c| c[1].clone()).collect();
            let (s0, s1) = rayon::join(
                || ntt::reconstruct_centered(&c0, n),
                || ntt::reconstruct_centered(&c1, n),
            );
            (s0, s1)
        }
        _ => {
            let mut s0 = vec![BigInt::zero(); n];
            let mut s1 = vec![BigInt::zero(); n];
            for ((x, y0), y1) in xs.iter().zip(y0s).zip(y1s) {
                for (acc, y) in [(&mut s0, y0), (&mut s1, y1)] {
                    for (a, p) in acc
                        .iter_mut()
                        .zip(schoolbook_negacyclic(&x.coeffs, &y.coeffs))
                    {
                        *a += p;
                    }
                }
            }
            (s0, s1)
        }
    };
    (
        RingElement::from_parts_unchecked(params.clone(), s0, false),
        RingElement::from_parts_unchecked(params, s1, false),
    )
}
