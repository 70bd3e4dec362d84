#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = dimac::cli::parse_spec(text) {
            // Anything accepted must survive a round trip unchanged.
            let again = dimac::cli::parse_spec(&spec.to_json()).expect("emitted spec reparses");
            assert_eq!(again.mac, spec.mac);
            assert_eq!(again.costs, spec.costs);
        }
    }
});
