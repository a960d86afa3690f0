#![no_main]

use handsmith_core::landmarks::{load_landmarks, LandmarkSource};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(set) = load_landmarks(text, LandmarkSource::Target) {
            let again = load_landmarks(&set.to_json(), LandmarkSource::Target).expect("own output parses");
            assert_eq!(again, set);
        }
    }
});
