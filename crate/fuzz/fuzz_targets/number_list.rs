#![no_main]

use libfuzzer_sys::fuzz_target;
use riskx::cli::{format_sig, parse_count_list, parse_grid};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_grid(text) {
        assert!(!values.is_empty());
        for v in values {
            assert!(v.is_finite());
            for digits in [1, 6, 15] {
                let shown = format_sig(v, digits);
                let back: f64 = shown.parse().unwrap();
                assert_eq!(format_sig(back, digits), shown);
            }
        }
    }
    if let Ok(counts) = parse_count_list(text) {
        assert!(counts.iter().all(|&n| n >= 1));
    }
});
