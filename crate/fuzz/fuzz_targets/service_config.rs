#![no_main]

use libfuzzer_sys::fuzz_target;
use polyqa_server::config::ServiceConfig;

fuzz_target!(|text: &str| {
    let Ok(config) = ServiceConfig::parse(text) else { return };
    let again = ServiceConfig::parse(&config.to_toml()).expect("rendered config parses");
    assert_eq!(config.to_toml(), again.to_toml());
});
