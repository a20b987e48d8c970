#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::ingest::html_to_text;

fuzz_target!(|html: &str| {
    let text = html_to_text(html);
    assert_eq!(html_to_text(&text), text);
    let residue = text
        .as_bytes()
        .windows(2)
        .any(|w| w[0] == b'<' && (w[1].is_ascii_alphabetic() || matches!(w[1], b'/' | b'!' | b'?')));
    assert!(!residue, "tag residue in {text:?}");
});
