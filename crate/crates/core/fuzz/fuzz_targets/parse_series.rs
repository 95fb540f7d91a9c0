#![no_main]

use libfuzzer_sys::fuzz_target;
use ssa_core::input::parse_series;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(values) = parse_series(text) {
            assert!(values.iter().all(|v| v.is_finite()));
        }
    }
});
