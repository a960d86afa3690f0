#![no_main]

use handsmith_core::landmarks::BoneTopology;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(t) = BoneTopology::from_json(text) {
            assert_eq!(BoneTopology::from_json(&t.to_json()).expect("own output parses"), t);
        }
    }
});
