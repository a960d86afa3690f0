#![no_main]

use handsmith_core::mesh::{parse_mesh, write_mesh, MeshFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(mesh) = parse_mesh(data, MeshFormat::StlBinary) {
        let bytes = write_mesh(&mesh, MeshFormat::StlBinary);
        let again = parse_mesh(&bytes, MeshFormat::StlBinary).expect("own output parses");
        assert_eq!(again.face_count(), mesh.face_count());
    }
});
