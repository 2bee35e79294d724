#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan::align::parse_report_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_report_csv(data) {
        for r in rows {
            assert_eq!(r.arrivals.len(), r.station_count);
        }
    }
});
