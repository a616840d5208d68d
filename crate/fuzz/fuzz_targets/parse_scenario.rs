#![no_main]

use libfuzzer_sys::fuzz_target;
use pac_core::scenario::parse_scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = parse_scenario(text) {
        s.validate().expect("parsed scenarios are valid");
        let again = parse_scenario(&s.to_toml()).expect("serialized scenario parses");
        assert_eq!(again, s);
    }
});
