//! Fingerprint and MAD statistics files.
//!
//! Fingerprint file, all little-endian:
//!
//! ```text
//! magic        8 bytes  "QSFPRNT1"
//! dim          u32
//! top_k        u32
//! window_len_s f64
//! window_lag_s f64
//! config_hash  u64
//! station      u16 length + UTF-8
//! channel      u16 length + UTF-8
//! count        u64
//! count x { index u64, start_epoch_s f64, top_k x u32 bit positions, ascending }
//! ```
//!
//! MAD statistics file: one line of JSON ([`MadHeader`]) terminated by `\n`, followed by
//! `len` little-endian `f64` medians and then `len` MADs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Fingerprint, MadStats};
use crate::codec::{put_f64, put_string, put_u32, put_u64, Reader};
use crate::error::{Error, Result};

pub const FINGERPRINT_MAGIC: &[u8; 8] = b"QSFPRNT1";

#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintHeader {
    pub dim: u32,
    pub top_k: u32,
    pub window_len_s: f64,
    pub window_lag_s: f64,
    pub config_hash: u64,
    pub station: String,
    pub channel: String,
}

pub fn encode_fingerprints(header: &FingerprintHeader, fps: &[Fingerprint]) -> Result<Vec<u8>> {
    let k = header.top_k as usize;
    let mut out = Vec::with_capacity(64 + fps.len() * (16 + 4 * k));
    out.extend_from_slice(FINGERPRINT_MAGIC);
    put_u32(&mut out, header.dim);
    put_u32(&mut out, header.top_k);
    put_f64(&mut out, header.window_len_s);
    put_f64(&mut out, header.window_lag_s);
    put_u64(&mut out, header.config_hash);
    put_string(&mut out, &header.station)?;
    put_string(&mut out, &header.channel)?;
    put_u64(&mut out, fps.len() as u64);
    for fp in fps {
        if fp.bits.len() != k || fp.dim != header.dim {
            return Err(Error::Invariant(format!(
                "fingerprint {} has {} bits in dim {}, header says {k} in {}",
                fp.index,
                fp.bits.len(),
                fp.dim,
                header.dim
            )));
        }
        put_u64(&mut out, fp.index);
        put_f64(&mut out, fp.start_epoch_s);
        for &b in &fp.bits {
            put_u32(&mut out, b);
        }
    }
    Ok(out)
}

pub fn decode_fingerprints(bytes: &[u8]) -> Result<(FingerprintHeader, Vec<Fingerprint>)> {
    let mut r = Reader::new(bytes, "fingerprint file");
    r.magic(FINGERPRINT_MAGIC)?;
    let header = FingerprintHeader {
        dim: r.u32()?,
        top_k: r.u32()?,
        window_len_s: r.f64()?,
        window_lag_s: r.f64()?,
        config_hash: r.u64()?,
        station: r.string()?,
        channel: r.string()?,
    };
    if header.dim == 0 || header.dim % 2 != 0 || header.top_k as u64 * 2 > header.dim as u64 {
        return Err(Error::Format(format!(
            "fingerprint file: inconsistent dim {} / top_k {}",
            header.dim, header.top_k
        )));
    }
    let count = r.u64()?;
    let record = 16 + 4 * header.top_k as u64;
    if count.checked_mul(record) != Some(r.remaining() as u64) {
        return Err(Error::CorruptInput(format!(
            "fingerprint file: {count} records of {record} bytes do not match {} remaining bytes",
            r.remaining()
        )));
    }
    let mut fps = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let index = r.u64()?;
        let start_epoch_s = r.f64()?;
        let bits = (0..header.top_k).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let fp = Fingerprint { index, start_epoch_s, dim: header.dim, bits };
        fp.validate().map_err(|e| Error::CorruptInput(e.to_string()))?;
        fps.push(fp);
    }
    r.finish()?;
    Ok((header, fps))
}

pub fn write_fingerprints(path: &Path, header: &FingerprintHeader, fps: &[Fingerprint]) -> Result<()> {
    fs::write(path, encode_fingerprints(header, fps)?)?;
    Ok(())
}

pub fn read_fingerprints(path: &Path) -> Result<(FingerprintHeader, Vec<Fingerprint>)> {
    decode_fingerprints(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadHeader {
    pub seed: u64,
    pub rate: f64,
    pub n: u64,
    pub len: u64,
    pub config_hash: u64,
}

pub fn encode_mad_stats(stats: &MadStats, config_hash: u64) -> Vec<u8> {
    let header = MadHeader {
        seed: stats.rng_seed,
        rate: stats.sampling_rate,
        n: stats.sample_count,
        len: stats.len() as u64,
        config_hash,
    };
    let mut out = serde_json::to_vec(&header).expect("header serialises");
    out.push(b'\n');
    for &v in stats.median.iter().chain(&stats.mad) {
        put_f64(&mut out, v);
    }
    out
}

pub fn decode_mad_stats(bytes: &[u8]) -> Result<(MadHeader, MadStats)> {
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("MAD file: missing JSON header line".into()))?;
    let header: MadHeader =
        serde_json::from_slice(&bytes[..nl]).map_err(|e| Error::Format(format!("MAD file header: {e}")))?;
    let mut r = Reader::new(&bytes[nl + 1..], "MAD file");
    if header.len.checked_mul(16) != Some(r.remaining() as u64) {
        return Err(Error::CorruptInput(format!(
            "MAD file: header declares {} coefficients, body holds {} bytes",
            header.len,
            r.remaining()
        )));
    }
    let len = header.len as usize;
    let median = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    let mad = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    if mad.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::CorruptInput("MAD file: negative or NaN MAD".into()));
    }
    let stats = MadStats { median, mad, sample_count: header.n, sampling_rate: header.rate, rng_seed: header.seed };
    Ok((header, stats))
}

pub fn write_mad_stats(path: &Path, stats: &MadStats, config_hash: u64) -> Result<()> {
    fs::write(path, encode_mad_stats(stats, config_hash))?;
    Ok(())
}

pub fn read_mad_stats(path: &Path) -> Result<(MadHeader, MadStats)> {
    decode_mad_stats(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(k: u32) -> FingerprintHeader {
        FingerprintHeader {
            dim: 64,
            top_k: k,
            window_len_s: 30.0,
            window_lag_s: 2.0,
            config_hash: 0xdead_beef,
            station: "ST00".into(),
            channel: "HHZ".into(),
        }
    }

    proptest! {
        #[test]
        fn fingerprint_file_roundtrip(sets in prop::collection::vec(prop::collection::btree_set(0u32..32, 3), 0..20)) {
            let fps: Vec<Fingerprint> = sets
                .iter()
                .enumerate()
                .map(|(i, s)| Fingerprint {
                    index: i as u64,
                    start_epoch_s: i as f64 * 2.0,
                    dim: 64,
                    bits: s.iter().map(|&j| 2 * j + (j % 2)).collect(),
                })
                .collect();
            let bytes = encode_fingerprints(&header(3), &fps).unwrap();
            let (h, back) = decode_fingerprints(&bytes).unwrap();
            prop_assert_eq!(&h, &header(3));
            prop_assert_eq!(&back, &fps);
            prop_assert_eq!(encode_fingerprints(&h, &back).unwrap(), bytes);
        }
    }

    #[test]
    fn truncated_and_bad_magic() {
        let fp = Fingerprint { index: 0, start_epoch_s: 0.0, dim: 64, bits: vec![0, 2] };
        let bytes = encode_fingerprints(&header(2), &[fp]).unwrap();
        assert!(matches!(decode_fingerprints(&bytes[..bytes.len() - 1]), Err(Error::CorruptInput(_))));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_fingerprints(&bad), Err(Error::Format(_))));
        // both sign bits of coefficient 0
        let mut both = bytes;
        let n = both.len();
        both[n - 4..].copy_from_slice(&1u32.to_le_bytes());
        assert!(decode_fingerprints(&both).is_err());
    }

    #[test]
    fn mad_file_roundtrip() {
        let stats = MadStats {
            median: vec![1.0, -2.5, 3.0],
            mad: vec![0.5, 0.0, 1.0],
            sample_count: 42,
            sampling_rate: 0.1,
            rng_seed: 7,
        };
        let bytes = encode_mad_stats(&stats, 99);
        let (h, back) = decode_mad_stats(&bytes).unwrap();
        assert_eq!(back, stats);
        assert_eq!((h.seed, h.n, h.config_hash), (7, 42, 99));
        assert!(decode_mad_stats(&bytes[..bytes.len() - 3]).is_err());
    }
}
