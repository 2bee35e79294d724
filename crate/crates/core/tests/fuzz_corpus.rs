//! Replays the checked-in fuzz seeds through the properties the fuzz targets assert.

use std::fs;
use std::path::PathBuf;

use quakescan::align::parse_report_csv;
use quakescan::fingerprint::{decode_fingerprints, decode_mad_stats, encode_fingerprints};
use quakescan::ingest::{decode_samples, parse_sidecar};
use quakescan::lsh_search::{decode_triplets, encode_triplets, TripletFormat};
use quakescan::minmax_hash::{decode_signatures, encode_signatures};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn sidecar_seeds() {
    let accepted: Vec<bool> = seeds("sidecar").iter().map(|(_, b)| parse_sidecar(b).is_ok()).collect();
    // extra_key, valid, zero_rate
    assert_eq!(accepted, [false, true, false]);
}

#[test]
fn sample_seeds() {
    for (name, data) in seeds("samples") {
        let expected = u64::from_le_bytes(data[..8].try_into().unwrap());
        let decoded = decode_samples(&data[8..], expected);
        assert_eq!(decoded.is_ok(), name == "four.bin", "{name}");
        if let Ok(s) = decoded {
            assert_eq!(s.len() as u64, expected);
        }
    }
}

#[test]
fn fingerprint_seeds_roundtrip() {
    for (name, data) in seeds("fingerprint_file") {
        match decode_fingerprints(&data) {
            Ok((h, fps)) => assert_eq!(encode_fingerprints(&h, &fps).unwrap(), data, "{name}"),
            Err(_) => assert_eq!(name, "truncated.fp"),
        }
    }
}

#[test]
fn mad_seeds() {
    for (_, data) in seeds("mad_file") {
        let (h, stats) = decode_mad_stats(&data).unwrap();
        assert_eq!(h.len as usize, stats.len());
    }
}

#[test]
fn signature_seeds_roundtrip() {
    for (_, data) in seeds("signature_file") {
        let (h, sigs) = decode_signatures(&data).unwrap();
        assert_eq!(encode_signatures(&h, &sigs).unwrap(), data);
    }
}

#[test]
fn triplet_seeds_roundtrip_across_formats() {
    for (name, data) in seeds("triplet_file") {
        let Ok((h, t)) = decode_triplets(&data) else {
            assert_eq!(name, "partial_record.bin");
            continue;
        };
        for format in [TripletFormat::Binary, TripletFormat::Csv] {
            let again = encode_triplets(&h, &t, format).unwrap();
            assert_eq!(decode_triplets(&again).unwrap(), (h.clone(), t.clone()), "{name}");
        }
    }
}

#[test]
fn report_seeds() {
    for (name, data) in seeds("detection_report") {
        match parse_report_csv(&data) {
            Ok(rows) => assert!(rows.iter().all(|r| r.arrivals.len() == r.station_count), "{name}"),
            Err(_) => assert_eq!(name, "bad_count.csv"),
        }
    }
}
