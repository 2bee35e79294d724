#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::ingest::decode_samples;

// first 8 bytes: the sample count a sidecar would declare
fuzz_target!(|data: &[u8]| {
    if data.len() < 8 {
        return;
    }
    let expected = u64::from_le_bytes(data[..8].try_into().unwrap());
    if let Ok(samples) = decode_samples(&data[8..], expected) {
        assert_eq!(samples.len() as u64, expected);
    }
});
