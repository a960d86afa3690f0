#![no_main]

use handsmith_core::kinematics::DesignSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = DesignSet::from_json(text);
    }
});
