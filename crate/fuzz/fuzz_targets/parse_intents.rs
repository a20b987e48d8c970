#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::dialog::parse_intents;

fuzz_target!(|text: &str| {
    let _ = parse_intents(text);
});
