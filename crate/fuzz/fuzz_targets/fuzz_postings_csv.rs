#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::ingest::parse_postings_csv;

fuzz_target!(|data: &[u8]| {
    let _ = parse_postings_csv(data);
});
