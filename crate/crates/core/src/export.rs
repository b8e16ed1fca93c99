//! Exporters: CSV tables with `#` metadata lines, and VTK legacy ASCII
//! unstructured grids. P and the stresses are written as cell data at
//! the centroid (no nodal averaging) so inter-element jumps survive in
//! the output.

use std::fmt::Write as _;
use std::path::Path;

use crate::assembly::{MaterialModel, RegionMaterials};
use crate::error::Result;
use crate::fields::{elastic_stress, stresses_at, SolutionFields};
use crate::la::{Mat2, Vec2};
use crate::mesh::CellKind;
use crate::sample::Table;

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip formatting; deterministic for identical inputs.
    format!("{v}")
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (k, v) in &table.meta {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn centroid_xi(kind: CellKind) -> Vec2 {
    match kind {
        CellKind::Tri => Vec2::new(1.0 / 3.0, 1.0 / 3.0),
        CellKind::Quad => Vec2::ZERO,
    }
}

fn write_tensor_block(out: &mut String, name: &str, values: &[Mat2]) {
    let _ = writeln!(out, "TENSORS {name} double");
    for t in values {
        let _ = writeln!(out, "{} {} 0", fmt_f64(t.a[0][0]), fmt_f64(t.a[0][1]));
        let _ = writeln!(out, "{} {} 0", fmt_f64(t.a[1][0]), fmt_f64(t.a[1][1]));
        let _ = writeln!(out, "0 0 0");
    }
}

/// Writes the solution as a VTK legacy ASCII unstructured grid:
/// displacement as point vectors, element-wise P / stresses / energy
/// density as cell data.
pub fn write_vtk(
    fields: &SolutionFields,
    materials: &RegionMaterials,
    path: &Path,
) -> Result<()> {
    let mesh = fields.mesh;
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("relaxed micromorphic solution\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(out, "{} {} 0", fmt_f64(p.x), fmt_f64(p.y));
    }
    let total: usize = mesh.cells.iter().map(|c| c.nodes.len() + 1).sum();
    let _ = writeln!(out, "CELLS {} {}", mesh.cells.len(), total);
    for c in &mesh.cells {
        let ids: Vec<String> = c.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{} {}", c.nodes.len(), ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {}", mesh.cells.len());
    for c in &mesh.cells {
        let vtk_type = match c.kind {
            CellKind::Tri => 5,
            CellKind::Quad => 9,
        };
        let _ = writeln!(out, "{vtk_type}");
    }

    // Point data: displacement at the corner nodes.
    let _ = writeln!(out, "POINT_DATA {}", mesh.nodes.len());
    out.push_str("VECTORS u double\n");
    for n in 0..mesh.nodes.len() {
        let ux = fields.dofs[fields.dofmap.u_dof(n, 0)];
        let uy = fields.dofs[fields.dofmap.u_dof(n, 1)];
        let _ = writeln!(out, "{} {} 0", fmt_f64(ux), fmt_f64(uy));
    }

    // Cell data at centroids.
    let n_cells = mesh.cells.len();
    let mut regions = Vec::with_capacity(n_cells);
    let mut w_values = Vec::with_capacity(n_cells);
    let mut p_values = Vec::new();
    let mut sigma_values = Vec::with_capacity(n_cells);
    let mut sigma_micro_values = Vec::new();
    let mut m_values = Vec::new();
    let mut is_micromorphic = true;
    for cell in 0..n_cells {
        let region = mesh.cells[cell].region;
        regions.push(region);
        let state = fields.eval(cell, centroid_xi(mesh.cells[cell].kind))?;
        match materials.get(region)? {
            MaterialModel::Micromorphic(params) => {
                let s = stresses_at(&state, params)?;
                p_values.push(state.p.unwrap());
                sigma_values.push(s.sigma);
                sigma_micro_values.push(s.sigma_micro);
                m_values.push(s.m);
                w_values.push(s.w);
            }
            MaterialModel::Elastic(tensor) => {
                is_micromorphic = false;
                let (sigma, w) = elastic_stress(&state, tensor);
                sigma_values.push(sigma);
                w_values.push(w);
            }
        }
    }
    let _ = writeln!(out, "CELL_DATA {n_cells}");
    out.push_str("SCALARS region int 1\nLOOKUP_TABLE default\n");
    for r in &regions {
        let _ = writeln!(out, "{r}");
    }
    out.push_str("SCALARS W double 1\nLOOKUP_TABLE default\n");
    for w in &w_values {
        let _ = writeln!(out, "{}", fmt_f64(*w));
    }
    write_tensor_block(&mut out, "sigma", &sigma_values);
    if is_micromorphic {
        write_tensor_block(&mut out, "P", &p_values);
        write_tensor_block(&mut out, "sigma_micro", &sigma_micro_values);
        out.push_str("VECTORS m double\n");
        for m in &m_values {
            let _ = writeln!(out, "{} {} 0", fmt_f64(m.x), fmt_f64(m.y));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Structural check of a VTK legacy unstructured-grid file, used by the
/// format round-trip tests.
pub fn validate_vtk(content: &str) -> std::result::Result<(), String> {
    let mut lines = content.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("# vtk DataFile Version") {
        return Err(format!("bad header: {header}"));
    }
    let _title = lines.next().ok_or("missing title")?;
    if lines.next() != Some("ASCII") {
        return Err("expected ASCII format".into());
    }
    if lines.next() != Some("DATASET UNSTRUCTURED_GRID") {
        return Err("expected unstructured grid".into());
    }
    let points_line = lines.next().ok_or("missing POINTS")?;
    let n_points: usize = points_line
        .strip_prefix("POINTS ")
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .ok_or("bad POINTS line")?;
    for i in 0..n_points {
        let line = lines.next().ok_or_else(|| format!("missing point {i}"))?;
        if line.split_whitespace().count() != 3 {
            return Err(format!("point {i} is not a 3-vector"));
        }
    }
    let cells_line = lines.next().ok_or("missing CELLS")?;
    let mut it = cells_line
        .strip_prefix("CELLS ")
        .ok_or("bad CELLS line")?
        .split_whitespace();
    let n_cells: usize = it.next().and_then(|s| s.parse().ok()).ok_or("bad CELLS")?;
    let n_ints: usize = it.next().and_then(|s| s.parse().ok()).ok_or("bad CELLS")?;
    let mut seen = 0;
    for i in 0..n_cells {
        let line = lines.next().ok_or_else(|| format!("missing cell {i}"))?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| format!("bad id in cell {i}")))
            .collect::<std::result::Result<_, _>>()?;
        if ids.is_empty() || ids[0] + 1 != ids.len() {
            return Err(format!("cell {i} length mismatch"));
        }
        if ids[1..].iter().any(|&n| n >= n_points) {
            return Err(format!("cell {i} references a missing point"));
        }
        seen += ids.len();
    }
    if seen != n_ints {
        return Err("CELLS int count mismatch".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_writes_header_only() {
        let mut table = Table::default();
        table.columns = vec!["a".into(), "b".into()];
        let dir = std::env::temp_dir().join("mmfem-export-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        write_csv(&table, &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(content, "a,b\n");
    }

    #[test]
    fn csv_meta_lines_are_prefixed() {
        let mut table = Table::default();
        table.push_meta("Lc", 5.0);
        table.columns = vec!["x".into()];
        table.rows.push(vec![1.5]);
        let dir = std::env::temp_dir().join("mmfem-export-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("meta.csv");
        write_csv(&table, &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.starts_with("# Lc = 5\nx\n1.5\n"));
    }
}
