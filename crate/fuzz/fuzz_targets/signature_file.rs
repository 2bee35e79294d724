#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::minmax_hash::{decode_signatures, encode_signatures};

fuzz_target!(|data: &[u8]| {
    if let Ok((header, sigs)) = decode_signatures(data) {
        let again = encode_signatures(&header, &sigs).expect("decoded signatures re-encode");
        assert_eq!(again, data);
    }
});
