#![no_main]

use handsmith_core::mesh::{parse_mesh, write_mesh, MeshFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(mesh) = parse_mesh(data, MeshFormat::Obj) {
        let text = write_mesh(&mesh, MeshFormat::Obj);
        let again = parse_mesh(&text, MeshFormat::Obj).expect("own output parses");
        assert_eq!(again.vertices(), mesh.vertices());
        assert_eq!(again.faces(), mesh.faces());
    }
});
