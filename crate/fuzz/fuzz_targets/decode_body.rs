#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::ingest::fetch::decode_body;

fuzz_target!(|data: &[u8]| {
    let (ct, body) = match data.iter().position(|&b| b == b'\n') {
        Some(i) => (std::str::from_utf8(&data[..i]).ok(), &data[i + 1..]),
        None => (None, data),
    };
    let _ = decode_body(body, ct);
});
