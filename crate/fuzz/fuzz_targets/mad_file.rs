#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::fingerprint::decode_mad_stats;

fuzz_target!(|data: &[u8]| {
    if let Ok((header, stats)) = decode_mad_stats(data) {
        assert_eq!(header.len as usize, stats.len());
    }
});
