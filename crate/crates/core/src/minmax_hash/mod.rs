//! Blocked Min-Max hash signatures.
//!
//! For every table `i` and function `j < k_half`, the signature keeps both the minimum and
//! the maximum of `values[x][i * k_half + j]` over the set bits `x` of a fingerprint. The
//! first `k` of the interleaved `min_0, max_0, min_1, ...` words of a table are folded into
//! one 64-bit signature with [`combine`]; odd `k` drops the last maximum.
//! The outer loop runs over set bits so each bit touches one contiguous row of the mapping.

mod io;
mod murmur;

pub use io::{decode_signatures, encode_signatures, read_signatures, write_signatures, SignatureHeader, SIGNATURE_MAGIC};
pub use murmur::{combine, fmix64, murmur64a, GOLDEN};

use rayon::prelude::*;

use crate::error::{param, Error, Result};
use crate::fingerprint::Fingerprint;

/// Dense `dim x (tables * k_half)` matrix of seeded hash words, row-major by fingerprint bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashMapping {
    pub seed: u64,
    pub dim: usize,
    pub tables: usize,
    pub k: usize,
    pub k_half: usize,
    values: Vec<u64>,
}

impl HashMapping {
    pub fn row_len(&self) -> usize {
        self.tables * self.k_half
    }

    pub fn row(&self, x: usize) -> &[u64] {
        let w = self.row_len();
        &self.values[x * w..(x + 1) * w]
    }

    pub fn value(&self, x: usize, table: usize, j: usize) -> u64 {
        self.values[x * self.row_len() + table * self.k_half + j]
    }
}

/// Functions per table for an effective signature width of `k` (`ceil(k / 2)`).
pub fn k_half_for(k: usize) -> usize {
    k.div_ceil(2)
}

/// Mapping for `tables` signatures of width `k` over `dim` fingerprint bits.
pub fn gen_hash_mappings(dim: usize, tables: usize, k: usize, seed: u64) -> Result<HashMapping> {
    if dim == 0 || tables == 0 || k == 0 {
        return param(format!("hash mapping needs d, t, k >= 1, got {dim}, {tables}, {k}"));
    }
    let k_half = k_half_for(k);
    let w = tables * k_half;
    let mut values = vec![0u64; dim * w];
    values.par_chunks_mut(w).enumerate().for_each(|(x, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            *v = murmur64a(x as u64, seed.wrapping_add(j as u64));
        }
    });
    Ok(HashMapping { seed, dim, tables, k, k_half, values })
}

/// One 64-bit signature per table for every fingerprint, stored fingerprint-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureSet {
    pub tables: usize,
    words: Vec<u64>,
}

impl SignatureSet {
    pub fn from_words(tables: usize, words: Vec<u64>) -> Result<Self> {
        if tables == 0 || words.len() % tables != 0 {
            return param(format!("{} signature words do not divide into {tables} tables", words.len()));
        }
        Ok(Self { tables, words })
    }

    pub fn len(&self) -> usize {
        self.words.len() / self.tables
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, fp: usize) -> &[u64] {
        &self.words[fp * self.tables..(fp + 1) * self.tables]
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Scratch buffers for one worker.
struct MinMaxScratch {
    min: Vec<u64>,
    max: Vec<u64>,
}

impl MinMaxScratch {
    fn new(w: usize) -> Self {
        Self { min: vec![u64::MAX; w], max: vec![0; w] }
    }
}

fn signature_into(fp: &Fingerprint, mapping: &HashMapping, scratch: &mut MinMaxScratch, out: &mut [u64]) -> Result<()> {
    if fp.bits.is_empty() {
        return param(format!("fingerprint {} has no set bits to hash", fp.index));
    }
    if fp.dim as usize != mapping.dim {
        return param(format!("fingerprint dim {} does not match hash mapping dim {}", fp.dim, mapping.dim));
    }
    let MinMaxScratch { min, max } = scratch;
    min.fill(u64::MAX);
    max.fill(0);
    for &x in &fp.bits {
        let row = mapping
            .values
            .get(x as usize * mapping.row_len()..(x as usize + 1) * mapping.row_len())
            .ok_or_else(|| Error::Parameter(format!("bit {x} outside mapping dimension {}", mapping.dim)))?;
        for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
            *lo = (*lo).min(v);
            *hi = (*hi).max(v);
        }
    }
    let kh = mapping.k_half;
    for (t, sig) in out.iter_mut().enumerate() {
        let mins = &min[t * kh..(t + 1) * kh];
        let maxs = &max[t * kh..(t + 1) * kh];
        *sig = combine(mins.iter().zip(maxs).flat_map(|(&a, &b)| [a, b]).take(mapping.k));
    }
    Ok(())
}

/// Signatures for a batch on the current rayon pool; output order matches `fps`.
pub fn minmax_signatures(fps: &[Fingerprint], mapping: &HashMapping) -> Result<SignatureSet> {
    let t = mapping.tables;
    let mut words = vec![0u64; fps.len() * t];
    words
        .par_chunks_mut(t)
        .zip(fps.par_iter())
        .try_for_each_init(|| MinMaxScratch::new(mapping.row_len()), |s, (out, fp)| signature_into(fp, mapping, s, out))?;
    Ok(SignatureSet { tables: t, words })
}

/// Same as [`minmax_signatures`] on a dedicated pool of `workers` threads.
pub fn minmax_signatures_with_workers(fps: &[Fingerprint], mapping: &HashMapping, workers: usize) -> Result<SignatureSet> {
    crate::pool::with_workers(Some(workers), || minmax_signatures(fps, mapping))?
}

/// Per-function `(min, max)` words of one fingerprint, `tables * k_half` of each, before combining.
pub fn minmax_words(fp: &Fingerprint, mapping: &HashMapping) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut scratch = MinMaxScratch::new(mapping.row_len());
    let mut sink = vec![0u64; mapping.tables];
    signature_into(fp, mapping, &mut scratch, &mut sink)?;
    Ok((scratch.min, scratch.max))
}

/// Single-fingerprint convenience wrapper.
pub fn signature_of(fp: &Fingerprint, mapping: &HashMapping) -> Result<Vec<u64>> {
    let mut out = vec![0u64; mapping.tables];
    signature_into(fp, mapping, &mut MinMaxScratch::new(mapping.row_len()), &mut out)?;
    Ok(out)
}
