#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::ingest::parse_postings_jsonl;

fuzz_target!(|data: &[u8]| {
    for item in parse_postings_jsonl(data) {
        let _ = item;
    }
});
