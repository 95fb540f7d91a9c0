#![no_main]

use libfuzzer_sys::fuzz_target;
use ssa_core::input::parse_index_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(indices) = parse_index_spec(text) {
            assert!(!indices.is_empty());
            assert!(indices.iter().all(|&i| i >= 1));
        }
    }
});
