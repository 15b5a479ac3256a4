#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::ingest::load_annual_stats;
use taskshare::taxonomy::load_wage_base;

fuzz_target!(|data: &[u8]| {
    let _ = load_annual_stats(data);
    let _ = load_wage_base(data, 2010);
});
