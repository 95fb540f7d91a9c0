#![no_main]

use libfuzzer_sys::fuzz_target;
use ssa_core::input::parse_size_list;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_size_list(text);
    }
});
