#![no_main]

use handsmith_core::mesh::{analyze_mesh, detect_format, parse_mesh, MeshFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = detect_format(data);
    if let Ok(mesh) = parse_mesh(data, MeshFormat::Auto) {
        let _ = analyze_mesh(&mesh);
        let _ = mesh.components();
    }
});
