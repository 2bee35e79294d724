//! Signature file, all little-endian:
//!
//! ```text
//! magic        8 bytes  "QSSIGNT1"
//! tables       u32
//! k            u32
//! k_half       u32
//! mapping_seed u64
//! config_hash  u64
//! count        u64
//! first_index  u64      fingerprint index of row 0
//! count x tables x u64
//! ```

use std::fs;
use std::path::Path;

use super::{k_half_for, SignatureSet};
use crate::codec::{put_u32, put_u64, Reader};
use crate::error::{Error, Result};

pub const SIGNATURE_MAGIC: &[u8; 8] = b"QSSIGNT1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureHeader {
    pub tables: u32,
    pub k: u32,
    pub k_half: u32,
    pub mapping_seed: u64,
    pub config_hash: u64,
    pub first_index: u64,
}

pub fn encode_signatures(header: &SignatureHeader, sigs: &SignatureSet) -> Result<Vec<u8>> {
    if header.tables as usize != sigs.tables {
        return Err(Error::Invariant(format!(
            "signature header declares {} tables, set has {}",
            header.tables, sigs.tables
        )));
    }
    let mut out = Vec::with_capacity(52 + sigs.words().len() * 8);
    out.extend_from_slice(SIGNATURE_MAGIC);
    put_u32(&mut out, header.tables);
    put_u32(&mut out, header.k);
    put_u32(&mut out, header.k_half);
    put_u64(&mut out, header.mapping_seed);
    put_u64(&mut out, header.config_hash);
    put_u64(&mut out, sigs.len() as u64);
    put_u64(&mut out, header.first_index);
    for &w in sigs.words() {
        put_u64(&mut out, w);
    }
    Ok(out)
}

pub fn decode_signatures(bytes: &[u8]) -> Result<(SignatureHeader, SignatureSet)> {
    let mut r = Reader::new(bytes, "signature file");
    r.magic(SIGNATURE_MAGIC)?;
    let tables = r.u32()?;
    let k = r.u32()?;
    let k_half = r.u32()?;
    let mapping_seed = r.u64()?;
    let config_hash = r.u64()?;
    let count = r.u64()?;
    let first_index = r.u64()?;
    if tables == 0 || k == 0 || k_half as usize != k_half_for(k as usize) {
        return Err(Error::Format(format!("signature file: inconsistent t={tables} k={k} k_half={k_half}")));
    }
    let expected = count.checked_mul(tables as u64).and_then(|w| w.checked_mul(8));
    if expected != Some(r.remaining() as u64) {
        return Err(Error::CorruptInput(format!(
            "signature file: {count} x {tables} words do not match {} remaining bytes",
            r.remaining()
        )));
    }
    let words = (0..count * tables as u64).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    let header = SignatureHeader { tables, k, k_half, mapping_seed, config_hash, first_index };
    Ok((header, SignatureSet::from_words(tables as usize, words)?))
}

pub fn write_signatures(path: &Path, header: &SignatureHeader, sigs: &SignatureSet) -> Result<()> {
    fs::write(path, encode_signatures(header, sigs)?)?;
    Ok(())
}

pub fn read_signatures(path: &Path) -> Result<(SignatureHeader, SignatureSet)> {
    decode_signatures(&fs::read(path)?)
}
