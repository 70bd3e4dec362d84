#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = dimac::cli::parse_counts(text);
        let _ = dimac::cli::parse_type(text);
    }
});
