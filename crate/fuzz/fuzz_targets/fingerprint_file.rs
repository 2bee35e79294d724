#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::fingerprint::{decode_fingerprints, encode_fingerprints};

fuzz_target!(|data: &[u8]| {
    if let Ok((header, fps)) = decode_fingerprints(data) {
        let again = encode_fingerprints(&header, &fps).expect("decoded fingerprints re-encode");
        assert_eq!(again, data);
    }
});
