#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::lsh_search::{decode_triplets, encode_triplets, TripletFormat};

// binary and CSV share one entry point; the format is sniffed
fuzz_target!(|data: &[u8]| {
    if let Ok((header, triplets)) = decode_triplets(data) {
        let bin = encode_triplets(&header, &triplets, TripletFormat::Binary).expect("binary re-encode");
        assert_eq!(decode_triplets(&bin).unwrap(), (header.clone(), triplets.clone()));
        // CSV headers cannot carry every identifier the binary header can
        if let Ok(csv) = encode_triplets(&header, &triplets, TripletFormat::Csv) {
            assert_eq!(decode_triplets(&csv).unwrap(), (header, triplets));
        }
    }
});
