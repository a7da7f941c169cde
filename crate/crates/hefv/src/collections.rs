//! Ciphertext vectors and matrices with elementwise arithmetic, inner
//! products, matrix multiplication and the structural operations of an
//! ordinary linear-algebra surface.
//!
//! Elements of a collection are independent, and every operation here is
//! deterministic after encryption, so the runtime is free to evaluate
//! cells concurrently: parallel and serial execution produce bit-identical
//! ciphertexts.

use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::encoding::{decode_int, encode_int};
use crate::error::{Error, Result};
use crate::params::{same_params, ParamSet};
use crate::sampling::RandomSource;
use crate::scheme::{
    add_parts, decrypt, encrypt, he_add, he_mul, he_mul_raw, he_sub, relinearise, Ciphertext,
    PublicKey, RelinKey, SecretKey,
};

/// An ordered list of ciphertexts over one parameter set. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct CipherVector {
    params: Arc<ParamSet>,
    elems: Vec<Ciphertext>,
}

impl CipherVector {
    pub fn new(params: Arc<ParamSet>, elems: Vec<Ciphertext>) -> Result<Self> {
        for e in &elems {
            if !same_params(e.params(), &params) {
                return Err(Error::ParamMismatch);
            }
        }
        Ok(CipherVector { params, elems })
    }

    /// Encrypts a list of integers elementwise, in parallel. Each element
    /// draws from its own forked stream, so the result does not depend on
    /// the number of workers.
    pub fn encrypt_ints(
        pk: &PublicKey,
        values: &[BigInt],
        rng: &mut RandomSource,
    ) -> Result<Self> {
        let plaintexts = values
            .iter()
            .map(|v| encode_int(v, pk.params()))
            .collect::<Result<Vec<_>>>()?;
        let mut streams: Vec<RandomSource> = (0..plaintexts.len()).map(|_| rng.fork()).collect();
        let elems = plaintexts
            .par_iter()
            .zip(streams.par_iter_mut())
            .map(|(pt, stream)| encrypt(pk, pt, stream))
            .collect::<Result<Vec<_>>>()?;
        Ok(CipherVector {
            params: pk.params().clone(),
            elems,
        })
    }

    /// Decrypts and decodes every element.
    pub fn decrypt_ints(&self, sk: &SecretKey) -> Result<Vec<BigInt>> {
        self.elems
            .par_iter()
            .map(|ct| decrypt(sk, ct).map(|pt| decode_int(&pt)))
            .collect()
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub fn elems(&self) -> &[Ciphertext] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Ciphertext> {
        self.elems.get(index).ok_or(Error::IndexOutOfBounds {
            index,
            len: self.elems.len(),
        })
    }

    pub fn set(&mut self, index: usize, value: Ciphertext) -> Result<()> {
        if !same_params(value.params(), &self.params) {
            return Err(Error::ParamMismatch);
        }
        if index >= self.elems.len() {
            return Err(Error::IndexOutOfBounds {
                index,
                len: self.elems.len(),
            });
        }
        self.elems[index] = value;
        Ok(())
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamMismatch);
        }
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        Ok(CipherVector {
            params: self.params.clone(),
            elems,
        })
    }

    fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(&Ciphertext, &Ciphertext) -> Result<Ciphertext> + Sync,
    {
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamMismatch);
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        let elems = self
            .elems
            .par_iter()
            .zip(other.elems.par_iter())
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(CipherVector {
            params: self.params.clone(),
            elems,
        })
    }

    /// Elementwise homomorphic addition.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, he_add)
    }

    /// Elementwise homomorphic subtraction.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, he_sub)
    }

    /// Elementwise homomorphic multiplication (relinearised).
    pub fn mul(&self, other: &Self, rk: &RelinKey) -> Result<Self> {
        self.zip_with(other, |a, b| he_mul(a, b, rk))
    }

    /// Σᵢ aᵢ·bᵢ. The raw 3-part products are summed and relinearised once,
    /// so the multiplicative depth is exactly 1 regardless of length.
    pub fn inner_product(&self, other: &Self, rk: &RelinKey) -> Result<Ciphertext> {
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamMismatch);
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        let raws = self
            .elems
            .par_iter()
            .zip(other.elems.par_iter())
            .map(|(a, b)| he_mul_raw(a, b))
            .collect::<Result<Vec<_>>>()?;
        let total = tree_reduce(&raws, &|a, b| add_parts(a, b))?;
        relinearise(&total, rk)
    }

    /// Balanced-tree sum. An empty vector sums to the trivial noiseless
    /// encryption of zero, (0, 0).
    pub fn sum(&self) -> Result<Ciphertext> {
        if self.is_empty() {
            return Ok(Ciphertext::trivial_zero(&self.params));
        }
        tree_reduce(&self.elems, &he_add)
    }

    /// Balanced-tree product: depth ⌈log₂ k⌉ instead of the k−1 of a
    /// sequential fold. An empty product is an error — there is no cheap
    /// encrypted 1 without the public key.
    pub fn prod(&self, rk: &RelinKey) -> Result<Ciphertext> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        tree_reduce(&self.elems, &|a, b| he_mul(a, b, rk))
    }
}

/// Balanced binary reduction, combining adjacent pairs level by level.
fn tree_reduce<F>(items: &[Ciphertext], combine: &F) -> Result<Ciphertext>
where
    F: Fn(&Ciphertext, &Ciphertext) -> Result<Ciphertext> + Sync,
{
    debug_assert!(!items.is_empty());
    let mut level: Vec<Ciphertext> = items.to_vec();
    while level.len() > 1 {
        level = level
            .par_chunks(2)
            .map(|pair| {
                if pair.len() == 2 {
                    combine(&pair[0], &pair[1])
                } else {
                    Ok(pair[0].clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
    }
    Ok(level.pop().unwrap())
}

/// A rows × cols matrix of ciphertexts in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CipherMatrix {
    params: Arc<ParamSet>,
    rows: usize,
    cols: usize,
    elems: Vec<Ciphertext>,
}

impl CipherMatrix {
    pub fn new(
        params: Arc<ParamSet>,
        rows: usize,
        cols: usize,
        elems: Vec<Ciphertext>,
    ) -> Result<Self> {
        if elems.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: elems.len(),
                right: rows * cols,
            });
        }
        for e in &elems {
            if !same_params(e.params(), &params) {
                return Err(Error::ParamMismatch);
            }
        }
        Ok(CipherMatrix {
            params,
            rows,
            cols,
            elems,
        })
    }

    /// Encrypts a row-major list of integers as a rows × cols matrix.
    pub fn encrypt_ints(
        pk: &PublicKey,
        rows: usize,
        cols: usize,
        values: &[BigInt],
        rng: &mut RandomSource,
    ) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: rows * cols,
            });
        }
        let v = CipherVector::encrypt_ints(pk, values, rng)?;
        CipherMatrix::new(pk.params().clone(), rows, cols, v.elems)
    }

    pub fn decrypt_ints(&self, sk: &SecretKey) -> Result<Vec<BigInt>> {
        self.as_vector().decrypt_ints(sk)
    }

    /// (rows, cols).
    pub fn dim(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn params(&self) -> &Arc<ParamSet> {
        &self.params
    }

    pub fn get(&self, row: usize, col: usize) -> Result<&Ciphertext> {
        self.index_of(row, col).map(|i| &self.elems[i])
    }

    pub fn set(&mut self, row: usize, col: usize, value: Ciphertext) -> Result<()> {
        if !same_params(value.params(), &self.params) {
            return Err(Error::ParamMismatch);
        }
        let i = self.index_of(row, col)?;
        self.elems[i] = value;
        Ok(())
    }

    fn index_of(&self, row: usize, col: usize) -> Result<usize> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::IndexOutOfBounds {
                index: row * self.cols + col,
                len: self.elems.len(),
            });
        }
        Ok(row * self.cols + col)
    }

    fn as_vector(&self) -> CipherVector {
        CipherVector {
            params: self.params.clone(),
            elems: self.elems.clone(),
        }
    }

    fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(&Ciphertext, &Ciphertext) -> Result<Ciphertext> + Sync,
    {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let v = self.as_vector().zip_with(&other.as_vector(), f)?;
        CipherMatrix::new(self.params.clone(), self.rows, self.cols, v.elems)
    }

    /// Elementwise homomorphic addition.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, he_add)
    }

    /// Elementwise homomorphic subtraction.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, he_sub)
    }

    /// Elementwise (Hadamard) homomorphic multiplication.
    pub fn mul(&self, other: &Self, rk: &RelinKey) -> Result<Self> {
        self.zip_with(other, |a, b| he_mul(a, b, rk))
    }

    /// Standard matrix product; every output cell is an independent inner
    /// product, evaluated concurrently.
    pub fn mat_mul(&self, other: &Self, rk: &RelinKey) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        if !same_params(&self.params, &other.params) {
            return Err(Error::ParamMismatch);
        }
        let out_rows = self.rows;
        let out_cols = other.cols;
        let elems = (0..out_rows * out_cols)
            .into_par_iter()
            .map(|idx| {
                let (r, c) = (idx / out_cols, idx % out_cols);
                let row: Vec<Ciphertext> = (0..self.cols)
                    .map(|k| self.elems[r * self.cols + k].clone())
                    .collect();
                let col: Vec<Ciphertext> = (0..other.rows)
                    .map(|k| other.elems[k * other.cols + c].clone())
                    .collect();
                let rv = CipherVector {
                    params: self.params.clone(),
                    elems: row,
                };
                let cv = CipherVector {
                    params: self.params.clone(),
                    elems: col,
                };
                rv.inner_product(&cv, rk)
            })
            .collect::<Result<Vec<_>>>()?;
        CipherMatrix::new(self.params.clone(), out_rows, out_cols, elems)
    }

    /// The main diagonal, as a vector of length min(rows, cols).
    pub fn diag_extract(&self) -> CipherVector {
        let k = self.rows.min(self.cols);
        let elems = (0..k)
            .map(|i| self.elems[i * self.cols + i].clone())
            .collect();
        CipherVector {
            params: self.params.clone(),
            elems,
        }
    }

    /// A k × k matrix with `v` on the diagonal and trivial zero
    /// ciphertexts elsewhere.
    pub fn diag_make(v: &CipherVector) -> Self {
        let k = v.len();
        let zero = Ciphertext::trivial_zero(&v.params);
        let mut elems = vec![zero; k * k];
        for (i, e) in v.elems.iter().enumerate() {
            elems[i * k + i] = e.clone();
        }
        CipherMatrix {
            params: v.params.clone(),
            rows: k,
            cols: k,
            elems,
        }
    }

    /// Structural transpose; no homomorphic cost.
    pub fn transpose(&self) -> Self {
        let mut elems = Vec::with_capacity(self.elems.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                elems.push(self.elems[r * self.cols + c].clone());
            }
        }
        CipherMatrix {
            params: self.params.clone(),
            rows: self.cols,
            cols: self.rows,
            elems,
        }
    }
}
