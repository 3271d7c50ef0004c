//! Output formats: legacy ASCII VTK for meshes and fields, Matrix Market for
//! assembled systems, and RFC 4180-style CSV.

use crate::assembly::LsSystem;
use crate::fespace::Field;
use crate::mesh::Triangulation;
use crate::Result;
use std::fmt::Write as _;
use std::path::Path;

fn vtk_header(mesh: &Triangulation, title: &str) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.num_vertices());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.17e} {:.17e} 0.0", v[0], v[1]);
    }
    let nt = mesh.num_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in &mesh.triangles {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    s
}

/// Write the mesh alone.
pub fn write_vtk_mesh(path: &Path, mesh: &Triangulation) -> Result<()> {
    std::fs::write(path, vtk_header(mesh, "mesh"))?;
    Ok(())
}

/// Write a mesh with fields. Scalar fields (CR, P1, P2) are exported as
/// point data, averaged over adjacent cells where multivalued; vector fields
/// (RT0, N0, vector P1) as cell-centered vectors. Per-element indicator
/// vectors are exported as cell data.
pub fn write_vtk_fields(
    path: &Path,
    mesh: &Triangulation,
    fields: &[(&str, &Field)],
    cell_scalars: &[(&str, &[f64])],
) -> Result<()> {
    let mut s = vtk_header(mesh, "solution");
    let scalar_fields: Vec<_> = fields
        .iter()
        .filter(|(_, f)| !f.space.kind.is_vector_valued())
        .collect();
    if !scalar_fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.num_vertices());
        for (name, f) in &scalar_fields {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            let mut sum = vec![0.0; mesh.num_vertices()];
            let mut cnt = vec![0usize; mesh.num_vertices()];
            for k in 0..mesh.num_triangles() {
                for i in 0..3 {
                    let mut l = [0.0; 3];
                    l[i] = 1.0;
                    sum[mesh.triangles[k][i]] += f.eval_scalar(k, l)?;
                    cnt[mesh.triangles[k][i]] += 1;
                }
            }
            for v in 0..mesh.num_vertices() {
                let _ = writeln!(s, "{:.12e}", sum[v] / cnt[v].max(1) as f64);
            }
        }
    }
    let vector_fields: Vec<_> = fields
        .iter()
        .filter(|(_, f)| f.space.kind.is_vector_valued())
        .collect();
    if !vector_fields.is_empty() || !cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", mesh.num_triangles());
        for (name, f) in &vector_fields {
            let _ = writeln!(s, "VECTORS {name} double");
            let c = [1.0 / 3.0; 3];
            for k in 0..mesh.num_triangles() {
                let v = f.eval_vector(k, c)?;
                let _ = writeln!(s, "{:.12e} {:.12e} 0.0", v[0], v[1]);
            }
        }
        for (name, vals) in cell_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in *vals {
                let _ = writeln!(s, "{v:.12e}");
            }
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Export an assembled system in Matrix Market coordinate format (1-based,
/// general symmetry so nonsymmetric baselines export unchanged).
pub fn write_matrix_market(path: &Path, sys: &LsSystem) -> Result<()> {
    let a = &sys.matrix;
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "% method: {}", sys.method);
    for (name, range) in &sys.blocks {
        let _ = writeln!(s, "% block {}: rows {}..{}", name, range.start + 1, range.end);
    }
    let _ = writeln!(s, "{} {} {}", a.n, a.n, a.nnz());
    for i in 0..a.n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let _ = writeln!(s, "{} {} {:.17e}", i + 1, a.col_idx[k] + 1, a.values[k]);
        }
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// RFC 4180-style CSV: fields containing commas, quotes, or newlines are
/// quoted, embedded quotes doubled.
pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = String::new();
    s.push_str(
        &header
            .iter()
            .map(|h| csv_escape(h))
            .collect::<Vec<_>>()
            .join(","),
    );
    s.push('\n');
    for row in rows {
        s.push_str(
            &row.iter()
                .map(|f| csv_escape(f))
                .collect::<Vec<_>>()
                .join(","),
        );
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Fixed float formatting used in CSV output (deterministic across runs).
pub fn fmt_sci(v: f64) -> String {
    if v.is_nan() {
        "".to_string()
    } else {
        format!("{v:.10e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::{build_space, interpolate_scalar, SpaceKind};
    use crate::mesh::{make_structured_square, Side};
    use std::sync::Arc;

    #[test]
    fn vtk_mesh_layout() {
        let mesh = make_structured_square(1, &Side::ALL).unwrap();
        let dir = std::env::temp_dir().join("lsfem2d_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mesh.vtk");
        write_vtk_mesh(&path, &mesh).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("POINTS 4 double"));
        assert!(text.contains("CELLS 2 8"));
        assert!(text.contains("CELL_TYPES 2"));
        assert!(text.lines().filter(|l| *l == "5").count() == 2);
    }

    #[test]
    fn vtk_fields_written() {
        let mesh = Arc::new(make_structured_square(2, &Side::ALL).unwrap());
        let cr = Arc::new(build_space(&mesh, SpaceKind::CrD).unwrap());
        let f = interpolate_scalar(&cr, |x, y| x + y).unwrap();
        let dir = std::env::temp_dir().join("lsfem2d_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("fields.vtk");
        let ind = vec![1.0; mesh.num_triangles()];
        write_vtk_fields(&path, &mesh, &[("u", &f)], &[("indicator", &ind)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("POINT_DATA 9"));
        assert!(text.contains("SCALARS u double 1"));
        assert!(text.contains("CELL_DATA 8"));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
