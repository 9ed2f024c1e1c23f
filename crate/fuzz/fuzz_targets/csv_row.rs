#![no_main]

use libfuzzer_sys::fuzz_target;
use riskx::cli::{format_sig, parse_csv_row, ParsedCell};

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    let Ok(cells) = parse_csv_row(line) else { return };
    for cell in cells {
        if let ParsedCell::Number(v) = cell {
            // A printed number re-parses to itself.
            let shown = format_sig(v, 15);
            if v.is_finite() {
                let back: f64 = shown.parse().unwrap();
                assert_eq!(format_sig(back, 15), shown);
            }
        }
    }
});
