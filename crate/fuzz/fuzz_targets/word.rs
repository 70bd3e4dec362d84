#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&alphabet, rest)) = data.split_first() else { return };
    if let Ok(text) = std::str::from_utf8(rest) {
        if let Ok(word) = dimac::cli::parse_word(text, usize::from(alphabet)) {
            assert!(word.iter().all(|&x| x < usize::from(alphabet)));
        }
    }
});
