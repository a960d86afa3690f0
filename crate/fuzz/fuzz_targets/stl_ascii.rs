#![no_main]

use handsmith_core::mesh::{parse_mesh, write_mesh, MeshFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(mesh) = parse_mesh(data, MeshFormat::StlAscii) {
        let text = write_mesh(&mesh, MeshFormat::StlAscii);
        let again = parse_mesh(&text, MeshFormat::StlAscii).expect("own output parses");
        assert_eq!(again.face_count(), mesh.face_count());
    }
});
