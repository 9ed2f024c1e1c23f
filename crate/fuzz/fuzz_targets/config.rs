#![no_main]

use libfuzzer_sys::fuzz_target;
use riskx::cli::{config_to_args, parse_config};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(entries) = parse_config(text) else { return };
    for e in &entries {
        assert!(!e.key.is_empty());
        assert!(e.line >= 1);
    }
    // Pretend every key with an even length is a switch.
    if let Ok(args) = config_to_args(&entries, |k| Some(k.len() % 2 == 0)) {
        assert!(args.len() <= 2 * entries.len());
    }
});
