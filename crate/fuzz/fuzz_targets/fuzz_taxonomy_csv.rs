#![no_main]

use libfuzzer_sys::fuzz_target;
use taskshare::taxonomy::load_taxonomy;

// First NUL byte splits the input into the task file and the SOC family file.
fuzz_target!(|data: &[u8]| {
    let (tasks, socs) = match data.iter().position(|b| *b == 0) {
        Some(i) => (&data[..i], &data[i + 1..]),
        None => (data, &[][..]),
    };
    let _ = load_taxonomy(tasks, socs);
});
