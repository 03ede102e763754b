#![no_main]

use libfuzzer_sys::fuzz_target;
use productset::rational::gcd;
use productset::text::parse_fraction;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(f) = parse_fraction(text) {
        assert!(f.num() >= 1 && f.den() >= 1);
        assert_eq!(gcd(f.num(), f.den()), 1);
        assert_eq!(parse_fraction(&f.to_string()).unwrap(), f);
    }
});
