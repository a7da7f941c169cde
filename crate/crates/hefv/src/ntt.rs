//! Negacyclic number-theoretic transforms over a fixed family of word-sized
//! primes.
//!
//! Exact products in Z[x]/(x^n + 1) are computed by transforming modulo
//! enough primes to cover the coefficient bound of the result and
//! reconstructing with the Chinese remainder theorem. Nothing here is
//! exposed outside the crate; the ring module picks between this path and
//! the schoolbook one behind a single contract.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};

/// (p, ω): p prime with p ≡ 1 (mod 2^17) and p < 2^62, ω a primitive
/// 2^17-th root of unity mod p. Supports every ring degree up to 2^16,
/// i.e. the whole d ≤ 17 grid.
const PRIMES: [(u64, u64); 12] = [
    (4611686018425815041, 2824515048472102463),
    (4611686018423062529, 450474876615542725),
    (4611686018422669313, 600165866536532025),
    (4611686018416115713, 642753124020339560),
    (4611686018408120321, 1328956234491052604),
    (4611686018406940673, 404981700817466569),
    (4611686018406678529, 1542971481350620319),
    (4611686018405498881, 1632268714140493586),
    (4611686018405367809, 585053170294407377),
    (4611686018401566721, 2554721157321530130),
    (4611686018399993857, 1040962217829917860),
    (4611686018398420993, 4604112073781977589),
];

const MAX_ROOT_LOG2: u32 = 17;

/// Smallest prefix of `PRIMES` whose product exceeds `bound`, or None if
/// even the full family is too small.
pub(crate) fn primes_needed(bound: &BigUint) -> Option<usize> {
    let mut product = BigUint::from(1u32);
    for (k, (p, _)) in PRIMES.iter().enumerate() {
        product *= BigUint::from(*p);
        if product > *bound {
            return Some(k + 1);
        }
    }
    None
}

#[inline(always)]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline(always)]
fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline(always)]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Shoup multiplication by a fixed operand `w` with precomputed
/// `w_shoup = ⌊w·2^64/p⌋`. Requires p < 2^63 and x < p.
#[inline(always)]
fn mul_mod_shoup(x: u64, w: u64, w_shoup: u64, p: u64) -> u64 {
    let q = ((x as u128 * w_shoup as u128) >> 64) as u64;
    let r = x.wrapping_mul(w).wrapping_sub(q.wrapping_mul(p));
    if r >= p {
        r - p
    } else {
        r
    }
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn shoup(w: u64, p: u64) -> u64 {
    (((w as u128) << 64) / p as u128) as u64
}

/// Twiddle tables for one (prime, ring degree) pair: powers of the
/// primitive 2n-th root ψ in bit-reversed order, with Shoup companions.
pub(crate) struct NttTable {
    pub p: u64,
    log_n: u32,
    psi_rev: Vec<(u64, u64)>,
    psi_inv_rev: Vec<(u64, u64)>,
    n_inv: (u64, u64),
}

fn bit_reverse(x: usize, bits: u32) -> usize {
    x.reverse_bits() >> (usize::BITS - bits)
}

impl NttTable {
    fn new(prime_idx: usize, log_n: u32) -> Self {
        let (p, root) = PRIMES[prime_idx];
        let n = 1usize << log_n;
        // ψ = primitive 2n-th root of unity
        let psi = pow_mod(root, 1u64 << (MAX_ROOT_LOG2 - log_n - 1), p);
        debug_assert_eq!(pow_mod(psi, n as u64, p), p - 1);
        let psi_inv = pow_mod(psi, 2 * n as u64 - 1, p);

        let mut psi_rev = vec![(0u64, 0u64); n];
        let mut psi_inv_rev = vec![(0u64, 0u64); n];
        let mut fwd = 1u64;
        let mut inv = 1u64;
        for i in 0..n {
            let r = bit_reverse(i, log_n);
            psi_rev[r] = (fwd, shoup(fwd, p));
            psi_inv_rev[r] = (inv, shoup(inv, p));
            fwd = mul_mod(fwd, psi, p);
            inv = mul_mod(inv, psi_inv, p);
        }
        let n_inv = pow_mod(n as u64, p - 2, p);
        NttTable {
            p,
            log_n,
            psi_rev,
            psi_inv_rev,
            n_inv: (n_inv, shoup(n_inv, p)),
        }
    }

    /// In-place forward negacyclic transform; natural input order,
    /// bit-reversed output order.
    pub(crate) fn forward(&self, a: &mut [u64]) {
        let n = 1usize << self.log_n;
        debug_assert_eq!(a.len(), n);
        let p = self.p;
        let mut t = n;
        let mut m = 1;
        while m < n {
            t >>= 1;
            for i in 0..m {
                let (w, ws) = self.psi_rev[m + i];
                let j1 = 2 * i * t;
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = mul_mod_shoup(a[j + t], w, ws, p);
                    a[j] = add_mod(u, v, p);
                    a[j + t] = sub_mod(u, v, p);
                }
            }
            m <<= 1;
        }
    }

    /// In-place inverse negacyclic transform; bit-reversed input order,
    /// natural output order.
    pub(crate) fn inverse(&self, a: &mut [u64]) {
        let n = 1usize << self.log_n;
        debug_assert_eq!(a.len(), n);
        let p = self.p;
        let mut t = 1;
        let mut m = n;
        while m > 1 {
            let h = m >> 1;
            let mut j1 = 0;
            for i in 0..h {
                let (w, ws) = self.psi_inv_rev[h + i];
                for j in j1..j1 + t {
                    let u = a[j];
                    let v = a[j + t];
                    a[j] = add_mod(u, v, p);
                    a[j + t] = mul_mod_shoup(sub_mod(u, v, p), w, ws, p);
                }
                j1 += 2 * t;
            }
            t <<= 1;
            m = h;
        }
        let (ni, nis) = self.n_inv;
        for x in a.iter_mut() {
            *x = mul_mod_shoup(*x, ni, nis, p);
        }
    }
}

fn table(prime_idx: usize, log_n: u32) -> Arc<NttTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<NttTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((prime_idx, log_n))
        .or_insert_with(|| Arc::new(NttTable::new(prime_idx, log_n)))
        .clone()
}

/// Residues of a (possibly negative) big integer modulo p.
fn reduce_mod(c: &BigInt, p: u64, two_pow_64_mod_p: u64) -> u64 {
    let mut acc = 0u64;
    for d in c.magnitude().iter_u64_digits().rev() {
        // acc·2^64 + d (mod p)
        acc = ((acc as u128 * two_pow_64_mod_p as u128 + d as u128) % p as u128) as u64;
    }
    if c.sign() == Sign::Minus && acc != 0 {
        p - acc
    } else {
        acc
    }
}

/// Per-prime NTT-domain residues of one polynomial.
pub(crate) fn to_ntt(coeffs: &[BigInt], prime_idx: usize, log_n: u32) -> Vec<u64> {
    let tbl = table(prime_idx, log_n);
    let p = tbl.p;
    let r64 = ((1u128 << 64) % p as u128) as u64;
    let mut a: Vec<u64> = coeffs.iter().map(|c| reduce_mod(c, p, r64)).collect();
    tbl.forward(&mut a);
    a
}

pub(crate) fn from_ntt(mut a: Vec<u64>, prime_idx: usize, log_n: u32) -> Vec<u64> {
    let tbl = table(prime_idx, log_n);
    tbl.inverse(&mut a);
    a
}

#[inline]
pub(crate) fn pointwise_mul(a: &[u64], b: &[u64], prime_idx: usize) -> Vec<u64> {
    let p = PRIMES[prime_idx].0;
    a.iter().zip(b).map(|(&x, &y)| mul_mod(x, y, p)).collect()
}

#[inline]
pub(crate) fn pointwise_mul_acc(acc: &mut [u64], a: &[u64], b: &[u64], prime_idx: usize) {
    let p = PRIMES[prime_idx].0;
    for ((t, &x), &y) in acc.iter_mut().zip(a).zip(b) {
        *t = add_mod(*t, mul_mod(x, y, p), p);
    }
}

#[inline]
pub(crate) fn pointwise_add(a: &mut [u64], b: &[u64], prime_idx: usize) {
    let p = PRIMES[prime_idx].0;
    for (x, &y) in a.iter_mut().zip(b) {
        *x = add_mod(*x, y, p);
    }
}

/// Mixed-radix CRT reconstruction of centered big integers from residue
/// columns `cols[j][i]` = coefficient i mod PRIMES[j].
pub(crate) fn reconstruct_centered(cols: &[Vec<u64>], n: usize) -> Vec<BigInt> {
    let k = cols.len();
    let primes: Vec<u64> = PRIMES[..k].iter().map(|(p, _)| *p).collect();
    // inv[j][l] = p_l^{-1} mod p_j for l < j
    let mut inv = vec![vec![0u64; k]; k];
    for j in 1..k {
        for l in 0..j {
            inv[j][l] = pow_mod(primes[l] % primes[j], primes[j] - 2, primes[j]);
        }
    }
    let modulus: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();

    let mut digits = vec![0u64; k];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Garner: x = t_0 + p_0·(t_1 + p_1·(t_2 + …)) with 0 ≤ t_j < p_j
        for j in 0..k {
            let pj = primes[j];
            let mut t = cols[j][i] % pj;
            for l in 0..j {
                t = sub_mod(t, digits[l] % pj, pj);
                t = mul_mod(t, inv[j][l], pj);
            }
            digits[j] = t;
        }
        let mut v = BigUint::from(digits[k - 1]);
        for j in (0..k - 1).rev() {
            v = v * primes[j] + digits[j];
        }
        let centered = if &v * 2u32 > modulus {
            BigInt::from(v) - BigInt::from(modulus.clone())
        } else {
            BigInt::from(v)
        };
        out.push(centered);
    }
    out
}
