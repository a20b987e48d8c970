#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::extractor::protocol::decode_response;
use polyqa_core::extractor::ExtractionRequest;
use polyqa_core::text::CharIndex;

fuzz_target!(|data: &[u8]| {
    let req = ExtractionRequest::new("Where is it?", "La tour Eiffel est à Paris. 東京タワー");
    let Ok(spans) = decode_response(data, &req) else { return };
    let index = CharIndex::new(&req.context);
    for s in spans {
        assert_eq!(index.slice(s.start_char, s.end_char), Some(s.text.as_str()));
    }
});
