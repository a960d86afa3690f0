#![no_main]

use handsmith_core::deformation::{load_curves, write_curves};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(curves) = load_curves(text) {
            let again = load_curves(&write_curves(&curves)).expect("own output parses");
            assert_eq!(again.len(), curves.len());
        }
    }
});
