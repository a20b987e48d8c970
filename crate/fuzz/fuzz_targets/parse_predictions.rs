#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::metrics::parse_predictions;

fuzz_target!(|data: &[u8]| {
    let _ = parse_predictions(data);
});
