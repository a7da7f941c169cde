//! Parameter sets, their defaults, requirement-driven construction, and the
//! noise-budget/depth estimators used to predict how many multiplications a
//! ciphertext survives.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::ring::{RingElement, RingParams};
use crate::sampling::GaussianSpec;
use crate::scheme::{Ciphertext, Plaintext, SecretKey};

/// Full scheme parameters: ring degree d (n = 2^(d-1)), ciphertext modulus
/// q, plaintext modulus t, noise distribution (σ, B), relinearisation
/// decomposition base 2^w, and the derived scale Δ = ⌊q/t⌋.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet {
    ring: Arc<RingParams>,
    plain_ring: Arc<RingParams>,
    t: BigInt,
    gauss: GaussianSpec,
    relin_base_log2: u32,
    delta: BigInt,
}

impl ParamSet {
    pub fn builder() -> ParamSetBuilder {
        ParamSetBuilder::new()
    }

    pub fn d(&self) -> u32 {
        self.ring.d()
    }

    pub fn n(&self) -> usize {
        self.ring.n()
    }

    pub fn q(&self) -> &BigInt {
        self.ring.q()
    }

    pub fn t(&self) -> &BigInt {
        &self.t
    }

    /// Δ = ⌊q/t⌋, the factor that lifts a plaintext into the high-order
    /// bits of a ciphertext.
    pub fn delta(&self) -> &BigInt {
        &self.delta
    }

    pub fn gauss(&self) -> &GaussianSpec {
        &self.gauss
    }

    pub fn relin_base_log2(&self) -> u32 {
        self.relin_base_log2
    }

    /// ℓ = ⌊log₂(q) / w⌋: relinearisation keys hold ℓ+1 pairs.
    pub fn relin_ell(&self) -> usize {
        ((self.q().bits() - 1) / self.relin_base_log2 as u64) as usize
    }

    /// The ciphertext ring R_q.
    pub fn ring(&self) -> &Arc<RingParams> {
        &self.ring
    }

    /// The message ring R_t (same degree, modulus t).
    pub fn plain_ring(&self) -> &Arc<RingParams> {
        &self.plain_ring
    }
}

pub(crate) fn same_params(a: &Arc<ParamSet>, b: &Arc<ParamSet>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Builder holding the §-defaults; any field may be overridden before
/// `build`, and derived quantities (n, Δ, B) are recomputed.
#[derive(Debug, Clone)]
pub struct ParamSetBuilder {
    d: u32,
    q: BigInt,
    t: BigInt,
    sigma: f64,
    tail_bound: Option<u64>,
    relin_base_log2: u32,
}

impl ParamSetBuilder {
    fn new() -> Self {
        ParamSetBuilder {
            d: 13,
            q: BigInt::one() << 128,
            t: BigInt::one() << 15,
            sigma: 16.0,
            tail_bound: None,
            relin_base_log2: 32,
        }
    }

    pub fn d(mut self, d: u32) -> Self {
        self.d = d;
        self
    }

    pub fn q(mut self, q: BigInt) -> Self {
        self.q = q;
        self
    }

    pub fn t(mut self, t: BigInt) -> Self {
        self.t = t;
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Overrides the Gaussian tail bound B (default ⌈10σ⌉).
    pub fn tail_bound(mut self, b: u64) -> Self {
        self.tail_bound = Some(b);
        self
    }

    pub fn relin_base_log2(mut self, w: u32) -> Self {
        self.relin_base_log2 = w;
        self
    }

    pub fn build(self) -> Result<ParamSet> {
        if self.d < 2 || self.d > 17 {
            return Err(Error::InvalidParameter {
                field: "d",
                reason: format!("must be in 2..=17, got {}", self.d),
            });
        }
        if self.t < BigInt::from(2) {
            return Err(Error::InvalidParameter {
                field: "t",
                reason: "must be at least 2".into(),
            });
        }
        if self.t >= self.q {
            return Err(Error::InvalidParameter {
                field: "t",
                reason: "must be strictly smaller than q".into(),
            });
        }
        let delta = &self.q / &self.t;
        if delta < BigInt::from(2) {
            return Err(Error::InvalidParameter {
                field: "delta",
                reason: "floor(q/t) must be at least 2; widen q or shrink t".into(),
            });
        }
        if self.relin_base_log2 < 1 || self.relin_base_log2 > 62 {
            return Err(Error::InvalidParameter {
                field: "relin_base_log2",
                reason: format!("must be in 1..=62, got {}", self.relin_base_log2),
            });
        }
        let gauss = match self.tail_bound {
            Some(b) => GaussianSpec::new(self.sigma, b)?,
            None => GaussianSpec::with_default_bound(self.sigma)?,
        };
        let ring = Arc::new(RingParams::new(self.d, self.q)?);
        let plain_ring = Arc::new(RingParams::new(self.d, self.t.clone())?);
        Ok(ParamSet {
            ring,
            plain_ring,
            t: self.t,
            gauss,
            relin_base_log2: self.relin_base_log2,
            delta,
        })
    }
}

/// The reference parameters: d = 13 (n = 4096), q = 2^128, t = 2^15, σ = 16.
pub fn default_params() -> ParamSet {
    ParamSet::builder().build().expect("defaults are valid")
}

/// A target security level and required multiplicative depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecurityRequest {
    /// Bits of security.
    pub lambda: u32,
    /// Multiplicative depth the parameters must support.
    pub depth: u32,
}

/// Estimated security in bits under the distinguishing-attack cost model
/// λ̂ = 7.2·n/log₂(q/σ) − 110, floored at zero. A heuristic, not a proof.
pub fn security_estimate(p: &ParamSet) -> f64 {
    let log_q_over_sigma = log2_bigint(p.q()) - p.gauss().sigma().log2();
    if log_q_over_sigma <= 0.0 {
        return 0.0;
    }
    (7.2 * p.n() as f64 / log_q_over_sigma - 110.0).max(0.0)
}

/// Largest L such that the worst-case noise recurrence stays below Δ/2
/// after L multiplications:
///   V_0 = B·(2n+1)
///   V_{k+1} = 2·n·t·V_k + n·t·B·(n+1) + n·(ℓ+1)·2^(w-1)·B
/// The bound is conservative: circuits of depth ≤ L decrypt correctly, but
/// deeper circuits may still happen to.
pub fn estimate_depth(p: &ParamSet) -> u32 {
    let n = BigInt::from(p.n() as u64);
    let t = p.t().clone();
    let b = BigInt::from(p.gauss().tail_bound());
    let ell = BigInt::from(p.relin_ell() as u64);
    let w = p.relin_base_log2();
    let delta = p.delta().clone();

    let fresh: BigInt = &b * (&n * 2 + 1);
    let relin_term: BigInt = &n * (&ell + 1) * (BigInt::one() << (w - 1)) * &b;
    let mul_const: BigInt = &n * &t * &b * (&n + 1) + relin_term;

    let below = |v: &BigInt| v * 2 < delta;
    if !below(&fresh) {
        return 0;
    }
    let mut v = fresh;
    let mut depth = 0u32;
    while depth < 256 {
        v = BigInt::from(2) * &n * &t * &v + &mul_const;
        if below(&v) {
            depth += 1;
        } else {
            break;
        }
    }
    depth
}

/// `pars_help`: the smallest (d, q) on the search grid d ∈ {10..17},
/// q ∈ {2^60, 2^128, 2^186, 2^250} whose security estimate reaches
/// `lambda` and whose depth estimate reaches `depth`; σ = 16 and t = 2^15
/// throughout.
pub fn params_help(req: &SecurityRequest) -> Result<ParamSet> {
    if req.lambda < 1 {
        return Err(Error::InvalidParameter {
            field: "lambda",
            reason: "must be at least 1".into(),
        });
    }
    for d in 10u32..=17 {
        for q_bits in [60u32, 128, 186, 250] {
            let candidate = ParamSet::builder()
                .d(d)
                .q(BigInt::one() << q_bits)
                .build()?;
            if security_estimate(&candidate) >= req.lambda as f64
                && estimate_depth(&candidate) >= req.depth
            {
                return Ok(candidate);
            }
        }
    }
    Err(Error::InfeasibleRequest {
        lambda: req.lambda,
        depth: req.depth,
    })
}

/// Bits of headroom before the noise in `ct` reaches the decryption
/// threshold: log₂(Δ / (2·‖e‖∞)) where e = [c₁ + c₂·s (+ c₃·s²)]_q − Δ·m̊.
/// Negative means decryption failure is imminent; +∞ means the ciphertext
/// is exactly noiseless.
///
/// `pt` must be the plaintext the ciphertext decrypts to.
pub fn noise_budget(ct: &Ciphertext, sk: &SecretKey, pt: &Plaintext) -> Result<f64> {
    if !same_params(ct.params(), sk.params()) {
        return Err(Error::ParamMismatch);
    }
    let params = ct.params();
    if pt.poly().params() != params.plain_ring() {
        return Err(Error::ParamMismatch);
    }
    let s = sk.poly();
    let parts = ct.parts();
    let mut v = parts[0].add(&parts[1].mul(s)?)?;
    if parts.len() == 3 {
        let s_sq = s.mul(s)?;
        v = v.add(&parts[2].mul(&s_sq)?)?;
    }
    let scaled_msg = RingElement::from_coeffs(params.ring(), pt.poly().coeffs().to_vec())?
        .scale(params.delta());
    let noise = v.sub(&scaled_msg)?;
    let norm = noise.inf_norm();
    if norm.is_zero() {
        return Ok(f64::INFINITY);
    }
    Ok(log2_bigint(params.delta()) - 1.0 - log2_bigint(&norm))
}

fn log2_bigint(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 1020 {
        x.to_f64().expect("positive bigint converts").log2()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().expect("64-bit head converts").log2() + shift as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_values() {
        let p = default_params();
        assert_eq!(p.d(), 13);
        assert_eq!(p.n(), 4096);
        assert_eq!(*p.q(), BigInt::one() << 128);
        assert_eq!(*p.t(), BigInt::one() << 15);
        assert_eq!(p.gauss().sigma(), 16.0);
        assert_eq!(p.gauss().tail_bound(), 160);
        assert_eq!(*p.delta(), BigInt::one() << 113);
        assert_eq!(p.relin_base_log2(), 32);
        assert_eq!(p.relin_ell(), 4);
    }

    #[test]
    fn builder_recomputes_derived_fields() {
        let p = ParamSet::builder().t(BigInt::one() << 10).build().unwrap();
        assert_eq!(*p.delta(), BigInt::one() << 118);
        let p = ParamSet::builder().sigma(4.0).build().unwrap();
        assert_eq!(p.gauss().tail_bound(), 40);
    }

    #[test]
    fn builder_rejects_invariant_violations() {
        let err = ParamSet::builder().t(BigInt::one() << 128).build();
        assert!(matches!(err, Err(Error::InvalidParameter { field: "t", .. })));
        let err = ParamSet::builder().d(1).build();
        assert!(matches!(err, Err(Error::InvalidParameter { field: "d", .. })));
        let err = ParamSet::builder()
            .q(BigInt::from(97))
            .t(BigInt::from(50))
            .d(4)
            .build();
        assert!(matches!(
            err,
            Err(Error::InvalidParameter { field: "delta", .. })
        ));
    }

    #[test]
    fn toy_parameter_set_is_valid() {
        let p = ParamSet::builder()
            .d(4)
            .q(BigInt::from(97))
            .t(BigInt::from(5))
            .sigma(1.0)
            .build()
            .unwrap();
        assert_eq!(p.n(), 8);
        assert_eq!(*p.delta(), BigInt::from(19));
    }

    #[test]
    fn security_estimate_matches_formula() {
        let p = default_params();
        let expected = 7.2 * 4096.0 / (128.0 - 4.0) - 110.0;
        assert!((security_estimate(&p) - expected).abs() < 1e-9);
    }

    #[test]
    fn security_estimate_monotonicity() {
        let base = default_params();
        let bigger_n = ParamSet::builder().d(14).build().unwrap();
        assert!(security_estimate(&bigger_n) > security_estimate(&base));
        let bigger_q = ParamSet::builder().q(BigInt::one() << 250).build().unwrap();
        assert!(security_estimate(&bigger_q) < security_estimate(&base));
    }

    #[test]
    fn depth_default_at_least_two() {
        assert!(estimate_depth(&default_params()) >= 2);
    }

    #[test]
    fn depth_non_increasing_in_t() {
        let small_t = default_params();
        let big_t = ParamSet::builder().t(BigInt::one() << 24).build().unwrap();
        assert!(estimate_depth(&big_t) <= estimate_depth(&small_t));
    }

    #[test]
    fn depth_zero_when_fresh_noise_too_large() {
        let p = ParamSet::builder()
            .d(4)
            .q(BigInt::from(97))
            .t(BigInt::from(48))
            .sigma(4.0)
            .build()
            .unwrap();
        assert_eq!(*p.delta(), BigInt::from(2));
        assert_eq!(estimate_depth(&p), 0);
    }

    #[test]
    fn params_help_satisfies_both_requirements() {
        for req in [
            SecurityRequest { lambda: 80, depth: 0 },
            SecurityRequest { lambda: 80, depth: 2 },
            SecurityRequest { lambda: 120, depth: 1 },
        ] {
            let p = params_help(&req).unwrap();
            assert!(security_estimate(&p) >= req.lambda as f64);
            assert!(estimate_depth(&p) >= req.depth);
        }
    }

    #[test]
    fn params_help_infeasible_request() {
        let err = params_help(&SecurityRequest {
            lambda: 1_000_000,
            depth: 50,
        });
        assert!(matches!(err, Err(Error::InfeasibleRequest { .. })));
    }

    #[test]
    fn log2_bigint_accuracy() {
        assert!((log2_bigint(&(BigInt::one() << 113)) - 113.0).abs() < 1e-9);
        assert!((log2_bigint(&BigInt::from(3)) - 1.584962500721156).abs() < 1e-9);
        let huge = BigInt::one() << 1500;
        assert!((log2_bigint(&huge) - 1500.0).abs() < 1e-6);
    }
}
