#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::time::MonthIndex;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(month) = s.parse::<MonthIndex>() {
            assert_eq!(month.to_string().parse::<MonthIndex>().unwrap(), month);
        }
    }
});
