#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::ingest::parse_sidecar;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = parse_sidecar(data) {
        assert!(s.sample_rate_hz > 0.0 && s.start_epoch_s.is_finite());
    }
});
