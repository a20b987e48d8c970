#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_core::{parse_dataset, serialize_dataset, LanguageTag};

fuzz_target!(|data: &[u8]| {
    let Ok(ds) = parse_dataset(data, &LanguageTag::en()) else { return };
    let out = serialize_dataset(&ds).expect("parsed datasets serialize");
    let again = parse_dataset(&out, &LanguageTag::en()).expect("serialized datasets parse");
    assert_eq!(ds, again);
});
