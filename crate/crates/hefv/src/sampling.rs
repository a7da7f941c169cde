//! Randomness: uniform draws from R_q and R_2 and the bounded discrete
//! Gaussian χ over R, all from a seedable ChaCha20 stream.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_traits::One;
use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::ring::{RingElement, RingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fresh OS entropy; never reuses state across processes.
    Cryptographic,
    /// Deterministic stream: identical seeds reproduce identical output.
    SeededDeterministic,
}

/// Single-owner randomness source. Concurrent use requires one source per
/// worker; [`RandomSource::fork`] derives independent child streams for
/// that purpose (deterministically, in seeded mode).
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha20Rng,
    mode: Mode,
}

impl RandomSource {
    /// A source keyed from the operating system entropy pool.
    pub fn crypto() -> Result<Self> {
        let rng = ChaCha20Rng::from_rng(OsRng).map_err(|_| Error::Randomness)?;
        Ok(RandomSource {
            rng,
            mode: Mode::Cryptographic,
        })
    }

    /// A deterministic source keyed from an arbitrary byte string. Seeds
    /// longer than 32 bytes are folded into the key with a rotating XOR,
    /// and the length is mixed in so zero-extended seeds differ.
    pub fn seeded(seed: &[u8]) -> Self {
        let mut key = [0u8; 32];
        for (i, b) in seed.iter().enumerate() {
            key[i % 32] ^= b.rotate_left(((i / 32) % 8) as u32);
        }
        for (k, b) in key[24..].iter_mut().zip((seed.len() as u64).to_le_bytes()) {
            *k ^= b;
        }
        RandomSource {
            rng: ChaCha20Rng::from_seed(key),
            mode: Mode::SeededDeterministic,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Derives an independent child stream by drawing a fresh key from this
    /// source. Children of a seeded source are themselves deterministic.
    pub fn fork(&mut self) -> Self {
        let mut key = [0u8; 32];
        self.rng.fill_bytes(&mut key);
        RandomSource {
            rng: ChaCha20Rng::from_seed(key),
            mode: self.mode,
        }
    }

    fn gen_biguint(&mut self, bits: u64) -> BigUint {
        self.rng.gen_biguint(bits)
    }

    fn gen_u128(&mut self) -> u128 {
        let lo = self.rng.next_u64() as u128;
        let hi = self.rng.next_u64() as u128;
        hi << 64 | lo
    }

    fn gen_bit_block(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

/// Bounded discrete Gaussian: pmf proportional to exp(-x²/(2σ²)) on the
/// integer support {-B, …, B}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSpec {
    sigma: f64,
    tail_bound: u64,
}

impl GaussianSpec {
    pub fn new(sigma: f64, tail_bound: u64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                field: "sigma",
                reason: format!("must be a positive finite real, got {sigma}"),
            });
        }
        if tail_bound < 1 || tail_bound > 1 << 20 {
            return Err(Error::InvalidParameter {
                field: "tail_bound",
                reason: format!("must be in 1..=2^20, got {tail_bound}"),
            });
        }
        Ok(GaussianSpec { sigma, tail_bound })
    }

    /// The conventional truncation B = ⌈10σ⌉.
    pub fn with_default_bound(sigma: f64) -> Result<Self> {
        Self::new(sigma, sigma.ceil() as u64 * 10)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Tail bound B; no draw ever falls outside [-B, B].
    pub fn tail_bound(&self) -> u64 {
        self.tail_bound
    }

    fn table(&self) -> GaussianTable {
        GaussianTable::new(self)
    }
}

/// Inverse-CDF table: integer weights W(x) = round(2^64·exp(-x²/(2σ²)))
/// over the support, sampled with an unbiased uniform draw from [0, ΣW).
/// Weights depend on |x| only, so the table is exactly symmetric.
struct GaussianTable {
    bound: i64,
    cumulative: Vec<u128>,
    total: u128,
}

const WEIGHT_SCALE: f64 = 18446744073709551616.0; // 2^64

impl GaussianTable {
    fn new(spec: &GaussianSpec) -> Self {
        let b = spec.tail_bound as i64;
        let inv_two_sigma_sq = 1.0 / (2.0 * spec.sigma * spec.sigma);
        let mut cumulative = Vec::with_capacity((2 * b + 1) as usize);
        let mut total: u128 = 0;
        for x in -b..=b {
            let w = ((-((x * x) as f64) * inv_two_sigma_sq).exp() * WEIGHT_SCALE).round() as u128;
            total += w;
            cumulative.push(total);
        }
        assert!(total > 0, "gaussian weights all rounded to zero");
        GaussianTable {
            bound: b,
            cumulative,
            total,
        }
    }

    #[cfg(test)]
    fn weight(&self, x: i64) -> u128 {
        let idx = (x + self.bound) as usize;
        let prev = if idx == 0 { 0 } else { self.cumulative[idx - 1] };
        self.cumulative[idx] - prev
    }

    fn draw(&self, rng: &mut RandomSource) -> i64 {
        // largest multiple of `total` that fits in 2^128, for unbiased rejection
        let limit = u128::MAX - (u128::MAX % self.total + 1) % self.total;
        let u = loop {
            let r = rng.gen_u128();
            if r <= limit {
                break r % self.total;
            }
        };
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx as i64 - self.bound
    }
}

/// Uniform draw from R_q: each coefficient independently uniform on Z_q,
/// by rejection on ⌈log₂ q⌉-bit draws to avoid modulo bias.
pub fn sample_uniform_rq(params: &Arc<RingParams>, rng: &mut RandomSource) -> RingElement {
    let q = params.q();
    let qu = q.magnitude();
    let bits = (qu - BigUint::one()).bits().max(1);
    let coeffs = (0..params.n())
        .map(|_| {
            let v = loop {
                let r = rng.gen_biguint(bits);
                if r < *qu {
                    break BigInt::from(r);
                }
            };
            if &v * 2 > *q {
                v - q
            } else {
                v
            }
        })
        .collect();
    RingElement::from_parts_unchecked(params.clone(), coeffs, true)
}

/// Uniform draw from R_2: each coefficient independently uniform on {0, 1}.
pub fn sample_uniform_r2(params: &Arc<RingParams>, rng: &mut RandomSource) -> RingElement {
    let n = params.n();
    let mut coeffs = Vec::with_capacity(n);
    let mut block = 0u64;
    let mut left = 0u32;
    for _ in 0..n {
        if left == 0 {
            block = rng.gen_bit_block();
            left = 64;
        }
        coeffs.push(BigInt::from(block & 1));
        block >>= 1;
        left -= 1;
    }
    RingElement::from_parts_unchecked(params.clone(), coeffs, true)
}

/// Draw from χ: n independent bounded discrete Gaussian coefficients.
pub fn sample_gaussian(
    params: &Arc<RingParams>,
    spec: &GaussianSpec,
    rng: &mut RandomSource,
) -> RingElement {
    let table = spec.table();
    let coeffs = (0..params.n())
        .map(|_| BigInt::from(table.draw(rng)))
        .collect();
    // χ values are tiny next to any practical q, but reduce defensively so
    // the centered tag stays truthful even for toy moduli.
    RingElement::from_parts_unchecked(params.clone(), coeffs, false).reduce()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{ToPrimitive, Zero};

    fn ring(d: u32, q: i64) -> Arc<RingParams> {
        Arc::new(RingParams::new(d, BigInt::from(q)).unwrap())
    }

    /// χ²(df) 99.9% quantile via the Wilson–Hilferty approximation.
    fn chi2_crit_999(df: f64) -> f64 {
        let z = 3.0902; // Φ^{-1}(0.999)
        let a = 2.0 / (9.0 * df);
        df * (1.0 - a + z * a.sqrt()).powi(3)
    }

    #[test]
    fn seeded_determinism() {
        let p = ring(4, 97);
        let spec = GaussianSpec::new(4.0, 40).unwrap();
        let mut r1 = RandomSource::seeded(b"fixed seed");
        let mut r2 = RandomSource::seeded(b"fixed seed");
        for _ in 0..5 {
            assert_eq!(sample_uniform_rq(&p, &mut r1), sample_uniform_rq(&p, &mut r2));
            assert_eq!(sample_uniform_r2(&p, &mut r1), sample_uniform_r2(&p, &mut r2));
            assert_eq!(
                sample_gaussian(&p, &spec, &mut r1),
                sample_gaussian(&p, &spec, &mut r2)
            );
        }
        // forks of identical parents agree too
        assert_eq!(
            sample_uniform_rq(&p, &mut r1.fork()),
            sample_uniform_rq(&p, &mut r2.fork())
        );
    }

    #[test]
    fn uniform_rq_range_contract() {
        let p = ring(4, 97);
        let mut rng = RandomSource::seeded(b"range");
        for _ in 0..200 {
            let e = sample_uniform_rq(&p, &mut rng);
            for c in e.coeffs() {
                assert!(c * 2 > BigInt::from(-97) && c * 2 <= BigInt::from(97));
            }
        }
    }

    #[test]
    fn uniform_rq_chi_square() {
        let p = ring(3, 17);
        let mut rng = RandomSource::seeded(b"chi2 uniform");
        let draws = 10_000;
        let mut counts = [0u64; 17];
        for _ in 0..draws {
            let e = sample_uniform_rq(&p, &mut rng);
            for c in e.coeffs() {
                let v = c.to_i64().unwrap().rem_euclid(17) as usize;
                counts[v] += 1;
            }
        }
        let total = (draws * p.n()) as f64;
        let expected = total / 17.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(
            chi2 < chi2_crit_999(16.0),
            "chi2 {chi2} exceeds 99.9% band {}",
            chi2_crit_999(16.0)
        );
    }

    #[test]
    fn uniform_r2_contract_and_mean() {
        let p = ring(3, 17);
        let mut rng = RandomSource::seeded(b"r2");
        let mut ones = 0u64;
        let mut total = 0u64;
        for _ in 0..10_000 {
            let e = sample_uniform_r2(&p, &mut rng);
            for c in e.coeffs() {
                assert!(c.is_zero() || c.is_one());
                if c.is_one() {
                    ones += 1;
                }
                total += 1;
            }
        }
        let mean = ones as f64 / total as f64;
        assert!((0.48..=0.52).contains(&mean), "mean {mean} out of band");
    }

    #[test]
    fn gaussian_support_contract() {
        let p = ring(4, 1 << 40);
        let spec = GaussianSpec::new(4.0, 40).unwrap();
        let mut rng = RandomSource::seeded(b"support");
        for _ in 0..100 {
            let e = sample_gaussian(&p, &spec, &mut rng);
            assert!(e.inf_norm() <= BigInt::from(40));
        }
    }

    #[test]
    fn gaussian_table_exactly_symmetric() {
        let spec = GaussianSpec::new(16.0, 160).unwrap();
        let table = spec.table();
        for x in 0..=160i64 {
            assert_eq!(table.weight(x), table.weight(-x), "asymmetry at {x}");
        }
    }

    #[test]
    fn gaussian_mean_band() {
        let p = ring(4, 1 << 50);
        let spec = GaussianSpec::new(16.0, 160).unwrap();
        let mut rng = RandomSource::seeded(b"mean");
        let mut sum = 0i64;
        let mut count = 0u64;
        while count < 100_000 {
            let e = sample_gaussian(&p, &spec, &mut rng);
            for c in e.coeffs() {
                sum += c.to_i64().unwrap();
                count += 1;
            }
        }
        let mean = sum as f64 / count as f64;
        assert!((-0.2..=0.2).contains(&mean), "mean {mean} out of band");
    }

    #[test]
    fn gaussian_chi_square_against_exact_pmf() {
        let spec = GaussianSpec::new(16.0, 160).unwrap();
        let table = spec.table();
        let p = ring(4, 1 << 50);
        let mut rng = RandomSource::seeded(b"chi2 gauss");
        let mut counts = vec![0u64; 321];
        let mut total = 0u64;
        while total < 100_000 {
            let e = sample_gaussian(&p, &spec, &mut rng);
            for c in e.coeffs() {
                counts[(c.to_i64().unwrap() + 160) as usize] += 1;
                total += 1;
            }
        }
        // exact pmf of the sampler itself, by direct summation of the table
        let probs: Vec<f64> = (-160..=160)
            .map(|x| table.weight(x) as f64 / table.total as f64)
            .collect();
        // merge bins until every expected count is at least 5
        let mut chi2 = 0.0;
        let mut df: f64 = -1.0;
        let mut acc_obs = 0.0;
        let mut acc_exp = 0.0;
        for i in 0..probs.len() {
            acc_obs += counts[i] as f64;
            acc_exp += probs[i] * total as f64;
            let tail_exp: f64 = probs[i + 1..].iter().sum::<f64>() * total as f64;
            if acc_exp >= 5.0 && (tail_exp >= 5.0 || i == probs.len() - 1) {
                let d = acc_obs - acc_exp;
                chi2 += d * d / acc_exp;
                df += 1.0;
                acc_obs = 0.0;
                acc_exp = 0.0;
            }
        }
        if acc_exp > 0.0 {
            let d = acc_obs - acc_exp;
            chi2 += d * d / acc_exp;
            df += 1.0;
        }
        let crit = chi2_crit_999(df);
        assert!(chi2 < crit, "chi2 {chi2} exceeds 99.9% band {crit} (df {df})");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GaussianSpec::new(0.0, 10).is_err());
        assert!(GaussianSpec::new(-1.0, 10).is_err());
        assert!(GaussianSpec::new(4.0, 0).is_err());
        assert_eq!(GaussianSpec::with_default_bound(16.0).unwrap().tail_bound(), 160);
    }
}
