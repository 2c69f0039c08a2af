use super::SimplicialMesh;
use std::fmt::Write;

/// Plain-text dump: `DIM`, `VERTICES` + coordinates, `CELLS` + 0-based
/// vertex tuples, and optional `CELLDATA` blocks. Floats carry 17
/// significant digits so that the dump round-trips bit-exactly.
pub fn write_dump(mesh: &SimplicialMesh, cell_data: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    let d = mesh.dim();
    writeln!(s, "DIM {d}").unwrap();
    writeln!(s, "VERTICES {}", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        let coords: Vec<String> = p[..d].iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(s, "{}", coords.join(" ")).unwrap();
    }
    writeln!(s, "CELLS {}", mesh.num_cells()).unwrap();
    for k in 0..mesh.num_cells() {
        let ids: Vec<String> = mesh.cell_vertex_ids(k).iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", ids.join(" ")).unwrap();
    }
    for (name, values) in cell_data {
        assert_eq!(values.len(), mesh.num_cells(), "cell data length");
        writeln!(s, "CELLDATA {name}").unwrap();
        for v in values.iter() {
            writeln!(s, "{v:.16e}").unwrap();
        }
    }
    s
}
