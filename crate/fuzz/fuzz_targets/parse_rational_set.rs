#![no_main]

use libfuzzer_sys::fuzz_target;
use productset::text::{format_rational_set, parse_rational_set};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(set) = parse_rational_set(text) {
        let again = parse_rational_set(&format_rational_set(&set)).expect("formatted sets parse");
        assert_eq!(again, set);
    }
});
