//! Line-oriented text format for mesh exchange.
//!
//! ```text
//! mm-mesh v1
//! nodes N
//! x y
//! ...
//! cells M
//! kind region n0 n1 ...
//! ...
//! tags K
//! edge_node_a edge_node_b tagname
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{Cell, CellKind, Mesh2D};
use crate::error::{Error, Result};
use crate::la::Vec2;

pub fn write_text(mesh: &Mesh2D, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("mm-mesh v1\n");
    let _ = writeln!(out, "nodes {}", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(out, "{} {}", p.x, p.y);
    }
    let _ = writeln!(out, "cells {}", mesh.cells.len());
    for c in &mesh.cells {
        let kind = match c.kind {
            CellKind::Tri => "tri",
            CellKind::Quad => "quad",
        };
        let ids: Vec<String> = c.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(out, "{kind} {} {}", c.region, ids.join(" "));
    }
    let _ = writeln!(out, "tags {}", mesh.boundary_tags.len());
    for (&edge, tag) in &mesh.boundary_tags {
        let e = &mesh.edges[edge];
        let _ = writeln!(out, "{} {} {tag}", e.nodes[0], e.nodes[1]);
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<Mesh2D> {
    let content = std::fs::read_to_string(path)?;
    parse_text(&content)
}

pub fn parse_text(content: &str) -> Result<Mesh2D> {
    let mut lines = content.lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, &str)> {
        for (no, line) in lines.by_ref() {
            let t = line.trim();
            if !t.is_empty() {
                return Ok((no + 1, t));
            }
        }
        Err(Error::Format(format!("unexpected end of file, expected {what}")))
    };

    let (no, header) = next_line("header")?;
    if header != "mm-mesh v1" {
        return Err(Error::Format(format!(
            "line {no}: expected 'mm-mesh v1', got '{header}'"
        )));
    }

    let count_after = |line: &str, keyword: &str, no: usize| -> Result<usize> {
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(k), Some(n)) if k == keyword => n
                .parse()
                .map_err(|_| Error::Format(format!("line {no}: bad {keyword} count '{n}'"))),
            _ => Err(Error::Format(format!(
                "line {no}: expected '{keyword} N', got '{line}'"
            ))),
        }
    };

    let (no, line) = next_line("nodes section")?;
    let n_nodes = count_after(line, "nodes", no)?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (no, line) = next_line("node coordinates")?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Format(format!("line {no}: bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if vals.len() != 2 {
            return Err(Error::Format(format!("line {no}: expected 'x y'")));
        }
        nodes.push(Vec2::new(vals[0], vals[1]));
    }

    let (no, line) = next_line("cells section")?;
    let n_cells = count_after(line, "cells", no)?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let (no, line) = next_line("cell definition")?;
        let mut it = line.split_whitespace();
        let kind = match it.next() {
            Some("tri") => CellKind::Tri,
            Some("quad") => CellKind::Quad,
            other => {
                return Err(Error::Format(format!(
                    "line {no}: unknown cell kind {other:?}"
                )))
            }
        };
        let region: u32 = it
            .next()
            .ok_or_else(|| Error::Format(format!("line {no}: missing region")))?
            .parse()
            .map_err(|_| Error::Format(format!("line {no}: bad region id")))?;
        let ids: Vec<usize> = it
            .map(|t| t.parse().map_err(|_| Error::Format(format!("line {no}: bad node id '{t}'"))))
            .collect::<Result<_>>()?;
        if ids.len() != kind.corner_count() {
            return Err(Error::Format(format!(
                "line {no}: cell needs {} nodes, got {}",
                kind.corner_count(),
                ids.len()
            )));
        }
        cells.push(Cell {
            kind,
            nodes: ids,
            region,
        });
    }

    let mut mesh = Mesh2D::from_parts(nodes, cells)?;

    let (no, line) = next_line("tags section")?;
    let n_tags = count_after(line, "tags", no)?;
    for _ in 0..n_tags {
        let (no, line) = next_line("tag line")?;
        let mut it = line.split_whitespace();
        let a: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("line {no}: bad tag line")))?;
        let b: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("line {no}: bad tag line")))?;
        let tag = it
            .next()
            .ok_or_else(|| Error::Format(format!("line {no}: missing tag name")))?;
        let edge = mesh
            .edge_id(a, b)
            .ok_or_else(|| Error::Format(format!("line {no}: no edge between nodes {a} and {b}")))?;
        mesh.tag_edge(edge, tag);
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_rectangle;

    #[test]
    fn roundtrip_preserves_mesh() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Tri, Some(1.0)).unwrap();
        let dir = std::env::temp_dir().join("mmfem-mesh-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mesh.txt");
        write_text(&mesh, &path).unwrap();
        let back = read_text(&path).unwrap();
        assert_eq!(back.nodes.len(), mesh.nodes.len());
        assert_eq!(back.cells.len(), mesh.cells.len());
        assert_eq!(back.boundary_tags, mesh.boundary_tags);
        for (a, b) in mesh.nodes.iter().zip(&back.nodes) {
            assert!((*a - *b).norm() < 1e-15);
        }
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_text("mesh v2\nnodes 0\ncells 0\ntags 0\n").is_err());
    }
}
