#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::taxonomy::parse_soc;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(code) = parse_soc(s) {
            // A parsed code must round-trip through its display form.
            let redisplayed = code.to_string();
            assert_eq!(parse_soc(&redisplayed).unwrap(), code);
        }
    }
});
