#![no_main]

use libfuzzer_sys::fuzz_target;
use quakescan_cli::config::{finish, parse};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse(text) {
        let _ = finish(cfg, ".".into(), None, None);
    }
});
