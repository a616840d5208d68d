#![no_main]

use libfuzzer_sys::fuzz_target;
use pac_core::scenario::ControllerSelection;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(c) = text.parse::<ControllerSelection>() {
            assert!(c.includes_pac() || c.includes_pid());
        }
    }
});
