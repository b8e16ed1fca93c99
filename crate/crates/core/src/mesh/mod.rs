//! Mesh representation with a globally consistent edge orientation.
//!
//! Every edge stores the direction singled out by the positive-x rule
//! (fallback positive-y for vertical edges) together with its physical
//! length and the adjacent cells. Orientation data is computed once at
//! construction; per-cell senses are derived from it so that edge degrees
//! of freedom shared between neighboring cells agree by construction.

mod generators;
mod io;

pub use generators::{gen_annulus, gen_mixed_rectangle, gen_rectangle};
pub use io::{read_text, write_text};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::la::Vec2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Tri,
    Quad,
}

impl CellKind {
    pub fn corner_count(self) -> usize {
        match self {
            CellKind::Tri => 3,
            CellKind::Quad => 4,
        }
    }

    pub fn edge_count(self) -> usize {
        self.corner_count()
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub kind: CellKind,
    /// Corner node ids in counterclockwise order.
    pub nodes: Vec<usize>,
    /// Material region id (1-based).
    pub region: u32,
}

#[derive(Clone, Copy, Debug)]
pub struct EdgeAdjacency {
    pub cell: usize,
    /// Local edge slot in the cell's counterclockwise traversal:
    /// slot `s` runs from corner `s` to corner `(s+1) % n`.
    pub slot: usize,
    /// +1 when the cell's counterclockwise traversal of this edge agrees
    /// with the stored global tangent, -1 otherwise.
    pub sense: i8,
}

#[derive(Clone, Debug)]
pub struct EdgeRecord {
    /// Endpoint node ids ordered along the global tangent: `nodes[0]` is
    /// the tail, `nodes[1]` the head.
    pub nodes: [usize; 2],
    /// Unit tangent with positive x-component (positive y when vertical).
    pub tangent: Vec2,
    /// Physical endpoint distance.
    pub length: f64,
    pub adj: Vec<EdgeAdjacency>,
}

impl EdgeRecord {
    pub fn is_boundary(&self) -> bool {
        self.adj.len() == 1
    }

    /// Sorted endpoint pair, the lookup key for this edge.
    pub fn key(&self) -> (usize, usize) {
        sorted_pair(self.nodes[0], self.nodes[1])
    }
}

#[derive(Clone, Debug)]
pub struct Mesh2D {
    pub nodes: Vec<Vec2>,
    pub cells: Vec<Cell>,
    pub edges: Vec<EdgeRecord>,
    /// Per cell, the edge id of each counterclockwise slot.
    pub cell_edges: Vec<Vec<usize>>,
    /// Edge id -> boundary tag.
    pub boundary_tags: BTreeMap<usize, String>,
}

fn sorted_pair(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Picks the globally consistent direction between two endpoints: the
/// returned flag is true when `a -> b` already points along positive x
/// (positive y when the edge is vertical).
fn forward_is_global(a: Vec2, b: Vec2) -> bool {
    let d = b - a;
    if d.x.abs() > 1e-12 {
        d.x > 0.0
    } else {
        d.y > 0.0
    }
}

/// Builds the oriented edge table for a cell list.
///
/// Edge ids are assigned by lexicographic order of the sorted endpoint
/// pair, so they are independent of cell ordering. Fails on non-manifold
/// configurations (an edge referenced by three or more cells).
pub fn build_edge_topology(
    cells: &[Cell],
    nodes: &[Vec2],
) -> Result<(Vec<EdgeRecord>, Vec<Vec<usize>>)> {
    let mut table: BTreeMap<(usize, usize), Vec<EdgeAdjacency>> = BTreeMap::new();
    for (cell_id, cell) in cells.iter().enumerate() {
        let n = cell.kind.corner_count();
        if cell.nodes.len() != n {
            return Err(Error::Topology(format!(
                "cell {cell_id} has {} nodes, expected {n}",
                cell.nodes.len()
            )));
        }
        for slot in 0..n {
            let a = cell.nodes[slot];
            let b = cell.nodes[(slot + 1) % n];
            if a == b {
                return Err(Error::Topology(format!(
                    "cell {cell_id} has a degenerate edge at slot {slot}"
                )));
            }
            table.entry(sorted_pair(a, b)).or_default().push(EdgeAdjacency {
                cell: cell_id,
                slot,
                sense: 0,
            });
        }
    }

    let mut edges = Vec::with_capacity(table.len());
    let mut cell_edges: Vec<Vec<usize>> =
        cells.iter().map(|c| vec![usize::MAX; c.kind.edge_count()]).collect();

    for (edge_id, (key, mut adj)) in table.into_iter().enumerate() {
        if adj.len() > 2 {
            return Err(Error::Topology(format!(
                "edge ({}, {}) is shared by {} cells (non-manifold)",
                key.0,
                key.1,
                adj.len()
            )));
        }
        let (a, b) = key;
        let (tail, head) = if forward_is_global(nodes[a], nodes[b]) {
            (a, b)
        } else {
            (b, a)
        };
        let d = nodes[head] - nodes[tail];
        let length = d.norm();
        if length <= 0.0 {
            return Err(Error::Topology(format!(
                "edge ({a}, {b}) has zero length"
            )));
        }
        for entry in &mut adj {
            let cell = &cells[entry.cell];
            let n = cell.kind.corner_count();
            let ccw_tail = cell.nodes[entry.slot];
            entry.sense = if ccw_tail == tail { 1 } else { -1 };
            debug_assert_eq!(
                cell.nodes[(entry.slot + 1) % n],
                if entry.sense == 1 { head } else { tail }
            );
            cell_edges[entry.cell][entry.slot] = edge_id;
        }
        edges.push(EdgeRecord {
            nodes: [tail, head],
            tangent: d * (1.0 / length),
            length,
            adj,
        });
    }
    Ok((edges, cell_edges))
}

impl Mesh2D {
    /// Assembles a mesh from node coordinates and counterclockwise cells,
    /// validating orientation and building the oriented edge table.
    pub fn from_parts(nodes: Vec<Vec2>, cells: Vec<Cell>) -> Result<Self> {
        for (id, cell) in cells.iter().enumerate() {
            for &n in &cell.nodes {
                if n >= nodes.len() {
                    return Err(Error::Topology(format!(
                        "cell {id} references missing node {n}"
                    )));
                }
            }
            check_orientation(id, cell, &nodes)?;
        }
        let (edges, cell_edges) = build_edge_topology(&cells, &nodes)?;
        Ok(Mesh2D {
            nodes,
            cells,
            edges,
            cell_edges,
            boundary_tags: BTreeMap::new(),
        })
    }

    pub fn corner_coords(&self, cell: usize) -> Vec<Vec2> {
        self.cells[cell].nodes.iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn centroid(&self, cell: usize) -> Vec2 {
        let coords = self.corner_coords(cell);
        let inv = 1.0 / coords.len() as f64;
        coords.into_iter().fold(Vec2::ZERO, |acc, p| acc + p) * inv
    }

    /// Signed polygon area of a cell's corner loop.
    pub fn signed_area(&self, cell: usize) -> f64 {
        let coords = self.corner_coords(cell);
        let n = coords.len();
        let mut twice = 0.0;
        for i in 0..n {
            let a = coords[i];
            let b = coords[(i + 1) % n];
            twice += a.cross(b);
        }
        0.5 * twice
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.signed_area(c)).sum()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = sorted_pair(a, b);
        self.edges.iter().position(|e| e.key() == key)
    }

    pub fn tag_edge(&mut self, edge: usize, tag: &str) {
        self.boundary_tags.insert(edge, tag.to_string());
    }

    pub fn tagged_edges(&self, tag: &str) -> Vec<usize> {
        self.boundary_tags
            .iter()
            .filter(|(_, t)| t.as_str() == tag)
            .map(|(&e, _)| e)
            .collect()
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.boundary_tags.values().any(|t| t == tag)
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.adj.len() == 2)
            .map(|(i, _)| i)
    }

    /// The midpoint of an edge, used for midside node placement.
    pub fn edge_midpoint(&self, edge: usize) -> Vec2 {
        let e = &self.edges[edge];
        (self.nodes[e.nodes[0]] + self.nodes[e.nodes[1]]) * 0.5
    }

    /// Returns a copy with interior nodes displaced by up to `amplitude`
    /// in each coordinate; orientations and edge data are rebuilt.
    pub fn perturbed(&self, rng: &mut impl rand::Rng, amplitude: f64) -> Result<Mesh2D> {
        let mut boundary_nodes = vec![false; self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.is_boundary()) {
            boundary_nodes[e.nodes[0]] = true;
            boundary_nodes[e.nodes[1]] = true;
        }
        let mut nodes = self.nodes.clone();
        for (i, p) in nodes.iter_mut().enumerate() {
            if !boundary_nodes[i] {
                p.x += rng.gen_range(-amplitude..=amplitude);
                p.y += rng.gen_range(-amplitude..=amplitude);
            }
        }
        let mut mesh = Mesh2D::from_parts(nodes, self.cells.clone())?;
        mesh.boundary_tags = self.boundary_tags.clone();
        Ok(mesh)
    }
}

fn check_orientation(id: usize, cell: &Cell, nodes: &[Vec2]) -> Result<()> {
    let coords: Vec<Vec2> = cell.nodes.iter().map(|&n| nodes[n]).collect();
    match cell.kind {
        CellKind::Tri => {
            let area = 0.5 * (coords[1] - coords[0]).cross(coords[2] - coords[0]);
            if area <= 0.0 {
                return Err(Error::Topology(format!(
                    "cell {id} is not counterclockwise (signed area {area})"
                )));
            }
        }
        CellKind::Quad => {
            // The bilinear Jacobian determinant is linear in each reference
            // coordinate, so positivity at the four corners implies
            // positivity everywhere.
            for k in 0..4 {
                let prev = coords[(k + 3) % 4];
                let here = coords[k];
                let next = coords[(k + 1) % 4];
                let cross = (next - here).cross(prev - here);
                if cross <= 0.0 {
                    return Err(Error::Topology(format!(
                        "cell {id} has non-positive Jacobian at corner {k}"
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(nodes: [usize; 3], region: u32) -> Cell {
        Cell {
            kind: CellKind::Tri,
            nodes: nodes.to_vec(),
            region,
        }
    }

    #[test]
    fn two_triangles_share_one_interior_edge() {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let cells = vec![tri([0, 1, 2], 1), tri([0, 2, 3], 1)];
        let mesh = Mesh2D::from_parts(nodes, cells).unwrap();
        assert_eq!(mesh.edges.len(), 5);
        assert_eq!(mesh.interior_edges().count(), 1);
        let diag = mesh.edge_id(0, 2).unwrap();
        assert_eq!(mesh.edges[diag].adj.len(), 2);
    }

    #[test]
    fn single_quad_all_boundary() {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let cells = vec![Cell {
            kind: CellKind::Quad,
            nodes: vec![0, 1, 2, 3],
            region: 1,
        }];
        let mesh = Mesh2D::from_parts(nodes, cells).unwrap();
        assert_eq!(mesh.edges.len(), 4);
        assert!(mesh.edges.iter().all(|e| e.is_boundary()));
    }

    #[test]
    fn grid_2x2_edge_count() {
        let mesh = gen_rectangle(2.0, 2.0, 2, 2, CellKind::Quad, None).unwrap();
        assert_eq!(mesh.edges.len(), 12);
        assert_eq!(mesh.interior_edges().count(), 4);
    }

    #[test]
    fn nonmanifold_rejected() {
        let nodes = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 1.0),
            Vec2::new(0.5, -1.0),
            Vec2::new(1.5, 1.0),
        ];
        // Three triangles all using edge (0, 1).
        let cells = vec![tri([0, 1, 2], 1), tri([1, 0, 3], 1), tri([0, 1, 4], 1)];
        let err = build_edge_topology(&cells, &nodes).unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn clockwise_cell_rejected() {
        let nodes = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let cells = vec![tri([0, 2, 1], 1)];
        assert!(Mesh2D::from_parts(nodes, cells).is_err());
    }

    #[test]
    fn tangent_follows_positive_x_rule() {
        let mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::Quad, None).unwrap();
        for e in &mesh.edges {
            if e.tangent.x.abs() > 1e-12 {
                assert!(e.tangent.x > 0.0);
            } else {
                assert!(e.tangent.y > 0.0);
            }
        }
    }

    #[test]
    fn sense_times_ccw_direction_is_global_tangent() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Tri, Some(1.0)).unwrap();
        for (eid, e) in mesh.edges.iter().enumerate() {
            for adj in &e.adj {
                let cell = &mesh.cells[adj.cell];
                let n = cell.kind.corner_count();
                let a = mesh.nodes[cell.nodes[adj.slot]];
                let b = mesh.nodes[cell.nodes[(adj.slot + 1) % n]];
                let ccw = (b - a) * (1.0 / (b - a).norm());
                let signed = ccw * adj.sense as f64;
                assert!(
                    (signed - e.tangent).norm() < 1e-14,
                    "edge {eid} cell {} slot {}",
                    adj.cell,
                    adj.slot
                );
            }
        }
    }

    #[test]
    fn orientation_recompute_is_idempotent() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Quad, Some(1.0)).unwrap();
        let (edges2, cell_edges2) = build_edge_topology(&mesh.cells, &mesh.nodes).unwrap();
        assert_eq!(mesh.cell_edges, cell_edges2);
        for (a, b) in mesh.edges.iter().zip(&edges2) {
            assert_eq!(a.nodes, b.nodes);
            assert_eq!(a.length, b.length);
        }
    }
}
