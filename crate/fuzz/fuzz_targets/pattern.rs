#![no_main]

use libfuzzer_sys::fuzz_target;
use riskx::contraction::{enumerate_pattern, parse_pattern};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(pattern) = parse_pattern(text) else { return };
    pattern.validate().expect("parsed patterns are valid");
    // Keep each run cheap.
    if pattern.generators.len() > 12 || pattern.upper.len() > 64 {
        return;
    }
    let poly = enumerate_pattern(&pattern).expect("valid pattern enumerates");
    assert_eq!(poly.total(), 1u64 << pattern.generators.len());
    let k = pattern.upper.len() / 2;
    assert!(poly.histogram.keys().all(|&d| (1..=k).contains(&d)));
});
