//! The bit-exact serialization format shared by the library and the CLI.
//!
//! Every file is `"HEFV" | version(=1) | kind | params block | payload`.
//! Polynomial coefficients are stored as canonical representatives in
//! [0, modulus), little-endian, at a fixed width of ⌈log₂(modulus)/8⌉
//! bytes per coefficient, n coefficients per polynomial; the centered form
//! is reconstructed on load. Encoding a decoded file reproduces it byte
//! for byte.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::One;
use thiserror::Error;

use crate::collections::CipherVector;
use crate::params::ParamSet;
use crate::ring::{RingElement, RingParams};
use crate::scheme::{Ciphertext, Plaintext, PublicKey, RelinKey, SecretKey};

pub const MAGIC: [u8; 4] = *b"HEFV";
pub const VERSION: u8 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WireError {
    #[error("bad magic bytes: not a HEFV file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u8),
    #[error("unknown object kind {0}")]
    UnknownKind(u8),
    #[error("expected a {expected} object, found {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },
    #[error("file truncated")]
    Truncated,
    #[error("trailing bytes after payload")]
    TrailingBytes,
    #[error("malformed content: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ObjectKind {
    Params = 0,
    PublicKey = 1,
    SecretKey = 2,
    RelinKey = 3,
    CipherVec = 4,
    PlainVec = 5,
}

impl ObjectKind {
    fn from_byte(b: u8) -> Result<Self, WireError> {
        Ok(match b {
            0 => ObjectKind::Params,
            1 => ObjectKind::PublicKey,
            2 => ObjectKind::SecretKey,
            3 => ObjectKind::RelinKey,
            4 => ObjectKind::CipherVec,
            5 => ObjectKind::PlainVec,
            other => return Err(WireError::UnknownKind(other)),
        })
    }

    fn name(self) -> &'static str {
        match self {
            ObjectKind::Params => "params",
            ObjectKind::PublicKey => "public-key",
            ObjectKind::SecretKey => "secret-key",
            ObjectKind::RelinKey => "relin-key",
            ObjectKind::CipherVec => "ciphertext-vector",
            ObjectKind::PlainVec => "plaintext-vector",
        }
    }
}

/// An unencrypted vector of messages tagged with its parameter set, so a
/// plaintext file is self-describing like every other kind.
#[derive(Debug, Clone, PartialEq)]
pub struct PlainVec {
    params: Arc<ParamSet>,
    elems: Vec<Plaintext>,
}

impl PlainVec {
    pub fn new(params: Arc<ParamSet>, elems: Vec<Plaintext>) -> Result<Self, WireError> {
        for pt in &elems {
            if pt.poly().params() != params.plain_ring() {
                return Err(WireError::Malformed(
                    "plaintext ring does not match parameter set".into(),
                ));
            }
        }
        Ok(PlainVec { params, elems })
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub fn elems(&self) -> &[Plaintext] {
        &self.elems
    }
}

/// Any object the format can carry.
#[derive(Debug, Clone)]
pub enum WireObject {
    Params(ParamSet),
    PublicKey(PublicKey),
    SecretKey(SecretKey),
    RelinKey(RelinKey),
    CipherVec(CipherVector),
    PlainVec(PlainVec),
}

impl WireObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            WireObject::Params(_) => ObjectKind::Params,
            WireObject::PublicKey(_) => ObjectKind::PublicKey,
            WireObject::SecretKey(_) => ObjectKind::SecretKey,
            WireObject::RelinKey(_) => ObjectKind::RelinKey,
            WireObject::CipherVec(_) => ObjectKind::CipherVec,
            WireObject::PlainVec(_) => ObjectKind::PlainVec,
        }
    }
}

/// Bytes per coefficient for a given modulus: ⌈log₂(modulus)/8⌉.
fn coeff_width(modulus: &BigInt) -> usize {
    let max = modulus - BigInt::one();
    ((max.bits() + 7) / 8).max(1) as usize
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(kind: ObjectKind) -> Self {
        let mut buf = Vec::with_capacity(64);
        buf.extend_from_slice(&MAGIC);
        buf.push(VERSION);
        buf.push(kind as u8);
        Writer { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn bigint(&mut self, v: &BigInt) {
        let bytes = v.magnitude().to_bytes_le();
        self.u32(bytes.len() as u32);
        self.buf.extend_from_slice(&bytes);
    }

    fn params(&mut self, p: &ParamSet) {
        self.u32(p.d());
        self.bigint(p.q());
        self.bigint(p.t());
        self.f64(p.gauss().sigma());
        self.u64(p.gauss().tail_bound());
        self.u32(p.relin_base_log2());
    }

    fn poly(&mut self, e: &RingElement, modulus: &BigInt) {
        let width = coeff_width(modulus);
        for c in e.coeffs() {
            let canonical = c.mod_floor(modulus);
            let bytes = canonical.magnitude().to_bytes_le();
            debug_assert!(bytes.len() <= width);
            self.buf.extend_from_slice(&bytes);
            self.buf.resize(self.buf.len() + width - bytes.len(), 0);
        }
    }

    fn ciphertext(&mut self, ct: &Ciphertext, q: &BigInt) {
        self.u8(ct.len() as u8);
        for part in ct.parts() {
            self.poly(part, q);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.pos + n > self.bytes.len() {
            return Err(WireError::Truncated);
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, WireError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bigint(&mut self) -> Result<BigInt, WireError> {
        let len = self.u32()? as usize;
        Ok(BigInt::from(BigUint::from_bytes_le(self.take(len)?)))
    }

    fn params(&mut self) -> Result<Arc<ParamSet>, WireError> {
        let d = self.u32()?;
        let q = self.bigint()?;
        let t = self.bigint()?;
        let sigma = self.f64()?;
        let tail = self.u64()?;
        let w = self.u32()?;
        let params = ParamSet::builder()
            .d(d)
            .q(q)
            .t(t)
            .sigma(sigma)
            .tail_bound(tail)
            .relin_base_log2(w)
            .build()
            .map_err(|e| WireError::Malformed(e.to_string()))?;
        Ok(Arc::new(params))
    }

    fn poly(
        &mut self,
        ring: &Arc<RingParams>,
        modulus: &BigInt,
    ) -> Result<RingElement, WireError> {
        let width = coeff_width(modulus);
        let mut coeffs = Vec::with_capacity(ring.n());
        for _ in 0..ring.n() {
            let raw = BigInt::from(BigUint::from_bytes_le(self.take(width)?));
            if raw >= *modulus {
                return Err(WireError::Malformed(format!(
                    "coefficient {raw} outside [0, modulus)"
                )));
            }
            coeffs.push(raw);
        }
        Ok(RingElement::from_coeffs(ring, coeffs)
            .map_err(|e| WireError::Malformed(e.to_string()))?
            .reduce())
    }

    fn ciphertext(&mut self, params: &Arc<ParamSet>) -> Result<Ciphertext, WireError> {
        let count = self.u8()?;
        if !(2..=3).contains(&count) {
            return Err(WireError::Malformed(format!(
                "ciphertext part count {count} not in 2..=3"
            )));
        }
        let q = params.q().clone();
        let parts = (0..count)
            .map(|_| self.poly(params.ring(), &q))
            .collect::<Result<Vec<_>, _>>()?;
        Ciphertext::from_parts(parts, params.clone())
            .map_err(|e| WireError::Malformed(e.to_string()))
    }

    fn finish(&self) -> Result<(), WireError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(WireError::TrailingBytes)
        }
    }
}

/// Serializes any object to the wire format.
pub fn encode(obj: &WireObject) -> Vec<u8> {
    let mut w = Writer::new(obj.kind());
    match obj {
        WireObject::Params(p) => w.params(p),
        WireObject::PublicKey(pk) => {
            w.params(pk.params());
            let q = pk.params().q().clone();
            w.poly(pk.kp1(), &q);
            w.poly(pk.kp2(), &q);
        }
        WireObject::SecretKey(sk) => {
            w.params(sk.params());
            let q = sk.params().q().clone();
            w.poly(sk.poly(), &q);
        }
        WireObject::RelinKey(rk) => {
            w.params(rk.params());
            let q = rk.params().q().clone();
            w.u32(rk.pairs().len() as u32);
            for (r0, r1) in rk.pairs() {
                w.poly(r0, &q);
                w.poly(r1, &q);
            }
        }
        WireObject::CipherVec(v) => {
            w.params(v.params());
            let q = v.params().q().clone();
            w.u32(v.len() as u32);
            for ct in v.elems() {
                w.ciphertext(ct, &q);
            }
        }
        WireObject::PlainVec(v) => {
            w.params(v.params());
            let t = v.params().t().clone();
            w.u32(v.elems().len() as u32);
            for pt in v.elems() {
                w.poly(pt.poly(), &t);
            }
        }
    }
    w.buf
}

/// Parses any object from the wire format, verifying magic, version, and
/// exact payload length.
pub fn decode(bytes: &[u8]) -> Result<WireObject, WireError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(WireError::BadMagic);
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(WireError::BadVersion(version));
    }
    let kind = ObjectKind::from_byte(r.u8()?)?;
    let params = r.params()?;
    let q = params.q().clone();
    let obj = match kind {
        ObjectKind::Params => WireObject::Params((*params).clone()),
        ObjectKind::PublicKey => {
            let kp1 = r.poly(params.ring(), &q)?;
            let kp2 = r.poly(params.ring(), &q)?;
            WireObject::PublicKey(PublicKey::from_parts(kp1, kp2, params))
        }
        ObjectKind::SecretKey => {
            let s = r.poly(params.ring(), &q)?;
            WireObject::SecretKey(SecretKey::from_parts(s, params))
        }
        ObjectKind::RelinKey => {
            let count = r.u32()? as usize;
            if count != params.relin_ell() + 1 {
                return Err(WireError::Malformed(format!(
                    "relin key holds {count} pairs, parameters require {}",
                    params.relin_ell() + 1
                )));
            }
            let mut pairs = Vec::with_capacity(count);
            for _ in 0..count {
                let r0 = r.poly(params.ring(), &q)?;
                let r1 = r.poly(params.ring(), &q)?;
                pairs.push((r0, r1));
            }
            WireObject::RelinKey(RelinKey::from_parts(pairs, params))
        }
        ObjectKind::CipherVec => {
            let count = r.u32()? as usize;
            let elems = (0..count)
                .map(|_| r.ciphertext(&params))
                .collect::<Result<Vec<_>, _>>()?;
            WireObject::CipherVec(
                CipherVector::new(params, elems)
                    .map_err(|e| WireError::Malformed(e.to_string()))?,
            )
        }
        ObjectKind::PlainVec => {
            let count = r.u32()? as usize;
            let t = params.t().clone();
            let polys = (0..count)
                .map(|_| r.poly(params.plain_ring(), &t).map(Plaintext::new))
                .collect::<Result<Vec<_>, _>>()?;
            WireObject::PlainVec(PlainVec::new(params, polys)?)
        }
    };
    r.finish()?;
    Ok(obj)
}

macro_rules! typed_codec {
    ($enc:ident, $dec:ident, $variant:ident, $ty:ty) => {
        pub fn $enc(v: &$ty) -> Vec<u8> {
            encode(&WireObject::$variant(v.clone()))
        }

        pub fn $dec(bytes: &[u8]) -> Result<$ty, WireError> {
            match decode(bytes)? {
                WireObject::$variant(v) => Ok(v),
                other => Err(WireError::WrongKind {
                    expected: ObjectKind::$variant.name(),
                    found: other.kind().name(),
                }),
            }
        }
    };
}

typed_codec!(encode_params, decode_params, Params, ParamSet);
typed_codec!(encode_public_key, decode_public_key, PublicKey, PublicKey);
typed_codec!(encode_secret_key, decode_secret_key, SecretKey, SecretKey);
typed_codec!(encode_relin_key, decode_relin_key, RelinKey, RelinKey);
typed_codec!(encode_cipher_vec, decode_cipher_vec, CipherVec, CipherVector);
typed_codec!(encode_plain_vec, decode_plain_vec, PlainVec, PlainVec);
