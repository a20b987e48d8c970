#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::extractor::protocol::decode_request;

fuzz_target!(|data: &[u8]| {
    let _ = decode_request(data);
});
