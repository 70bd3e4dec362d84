#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(p) = dimac::cli::parse_pmf(text) {
            assert!(p.probs().iter().all(|&v| v >= 0.0));
        }
    }
});
