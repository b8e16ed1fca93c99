//! Global dof numbering for the coupled displacement / micro-distortion
//! problem.
//!
//! Displacement uses quadratic Lagrange on every cell (T2 on triangles,
//! Q2 on quadrilaterals). The micro-distortion field is either nodal
//! (tensorial, 4 dofs per P-node) or Nedelec (one 2-vector dof per edge
//! moment and per inner functional).
//!
//! Nedelec edge dofs are shared between neighboring cells through the
//! mesh edge table. For second order, the two moments of an edge are
//! anchored at the tail/head of the global tangent; a cell whose
//! counterclockwise traversal runs against the global tangent addresses
//! them in swapped order, which keeps the tangential trace of each global
//! dof identical from both sides.

use crate::elements::{edge_of_slot, ccw_sign, DofKind, ReferenceElement};
use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mapping::{beta_normalization, orientation_alpha};
use crate::mesh::{CellKind, Mesh2D};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PSpace {
    /// Scalar Lagrange interpolation of each tensor entry.
    Nodal { order: u8 },
    /// First-kind Nedelec interpolation of each tensor row.
    Nedelec { order: u8 },
    /// Displacement-only (classical elasticity).
    None,
}

#[derive(Clone, Debug)]
pub struct CellDofs {
    pub u_elem: ReferenceElement,
    pub p_elem: Option<ReferenceElement>,
    /// Global dof per local u dof (2 per u node, node-major).
    pub u_dofs: Vec<usize>,
    /// Global dof per local P dof. Nodal: 4 per P node (P11, P12, P21,
    /// P22). Nedelec: 2 per basis (row 1, row 2).
    pub p_dofs: Vec<usize>,
    /// Orientation sign per Nedelec basis.
    pub alpha: Vec<f64>,
    /// Length normalization per Nedelec basis.
    pub beta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub p_space: PSpace,
    pub n_dofs: usize,
    pub n_u_dofs: usize,
    pub n_p_dofs: usize,
    pub cells: Vec<CellDofs>,
    /// Coordinates of every u node (corners, edge midpoints, quad centers).
    pub u_node_coords: Vec<Vec2>,
    n_nodes: usize,
    n_edges: usize,
    p_offset: usize,
    /// Nedelec: first inner dof of each cell.
    cell_inner_offset: Vec<usize>,
}

impl DofMap {
    pub fn build(mesh: &Mesh2D, p_space: PSpace) -> Result<DofMap> {
        let n_nodes = mesh.nodes.len();
        let n_edges = mesh.edges.len();

        // Displacement nodes: corners, midside nodes, quad centers.
        let mut u_node_coords: Vec<Vec2> = mesh.nodes.clone();
        u_node_coords.extend((0..n_edges).map(|e| mesh.edge_midpoint(e)));
        let mut center_node = vec![usize::MAX; mesh.cells.len()];
        for (c, cell) in mesh.cells.iter().enumerate() {
            if cell.kind == CellKind::Quad {
                center_node[c] = u_node_coords.len();
                u_node_coords.push(mesh.centroid(c));
            }
        }
        let n_u_dofs = 2 * u_node_coords.len();

        if let PSpace::Nodal { order } = p_space {
            if !(order == 1 || order == 2) {
                return Err(Error::Element(format!("nodal P order {order} unsupported")));
            }
            if mesh.cells.iter().any(|c| c.kind != CellKind::Tri) {
                return Err(Error::Element(
                    "nodal micro-distortion spaces are triangle-only".into(),
                ));
            }
        }
        if let PSpace::Nedelec { order } = p_space {
            if !(order == 1 || order == 2) {
                return Err(Error::Element(format!("Nedelec order {order} unsupported")));
            }
        }

        let p_offset = n_u_dofs;
        let (n_p_dofs, cell_inner_offset) = match p_space {
            PSpace::None => (0, Vec::new()),
            PSpace::Nodal { order } => {
                let n_p_nodes = if order == 1 { n_nodes } else { n_nodes + n_edges };
                (4 * n_p_nodes, Vec::new())
            }
            PSpace::Nedelec { order } => {
                let k = order as usize;
                let mut offsets = Vec::with_capacity(mesh.cells.len());
                let mut next = p_offset + 2 * k * n_edges;
                for cell in &mesh.cells {
                    offsets.push(next);
                    if k == 2 {
                        let inner = match cell.kind {
                            CellKind::Tri => 2,
                            CellKind::Quad => 4,
                        };
                        next += 2 * inner;
                    }
                }
                (next - p_offset, offsets)
            }
        };

        let mut map = DofMap {
            p_space,
            n_dofs: n_u_dofs + n_p_dofs,
            n_u_dofs,
            n_p_dofs,
            cells: Vec::with_capacity(mesh.cells.len()),
            u_node_coords,
            n_nodes,
            n_edges,
            p_offset,
            cell_inner_offset,
        };

        for (c, cell) in mesh.cells.iter().enumerate() {
            map.cells.push(map.build_cell(mesh, c, cell.kind, center_node[c])?);
        }
        Ok(map)
    }

    fn build_cell(
        &self,
        mesh: &Mesh2D,
        cell_id: usize,
        kind: CellKind,
        center: usize,
    ) -> Result<CellDofs> {
        let u_elem = ReferenceElement::lagrange(kind, 2)?;
        let mut u_nodes: Vec<usize> = mesh.cells[cell_id].nodes.clone();
        u_nodes.extend(
            mesh.cell_edges[cell_id]
                .iter()
                .map(|&e| self.mid_u_node(e)),
        );
        if kind == CellKind::Quad {
            u_nodes.push(center);
        }
        let mut u_dofs = Vec::with_capacity(2 * u_nodes.len());
        for n in u_nodes {
            u_dofs.push(2 * n);
            u_dofs.push(2 * n + 1);
        }

        let (p_elem, p_dofs, alpha, beta) = match self.p_space {
            PSpace::None => (None, Vec::new(), Vec::new(), Vec::new()),
            PSpace::Nodal { order } => {
                let elem = ReferenceElement::lagrange(kind, order)?;
                let mut dofs = Vec::new();
                for desc in elem.dofs() {
                    let p_node = match desc {
                        DofKind::Vertex(v) => mesh.cells[cell_id].nodes[v],
                        DofKind::Edge { slot, .. } => {
                            self.mid_u_node(mesh.cell_edges[cell_id][slot])
                        }
                        DofKind::Inner(_) => unreachable!("triangle-only nodal space"),
                    };
                    for comp in 0..4 {
                        dofs.push(self.p_offset + 4 * p_node + comp);
                    }
                }
                (Some(elem), dofs, Vec::new(), Vec::new())
            }
            PSpace::Nedelec { order } => {
                let elem = ReferenceElement::nedelec(kind, order)?;
                let k = order as usize;
                let mut dofs = Vec::new();
                let mut alpha = Vec::new();
                let mut beta = Vec::new();
                for desc in elem.dofs() {
                    match desc {
                        DofKind::Edge { slot, moment } => {
                            let e = mesh.cell_edges[cell_id][slot];
                            let edge = &mesh.edges[e];
                            let adj = edge
                                .adj
                                .iter()
                                .find(|a| a.cell == cell_id && a.slot == slot)
                                .expect("edge adjacency must list its cell");
                            let sense = adj.sense as f64;
                            // Moments are anchored at the counterclockwise
                            // start; the global anchoring follows the global
                            // tangent tail.
                            let global_moment = if k == 2 && adj.sense < 0 {
                                1 - moment
                            } else {
                                moment
                            };
                            let location = e * k + global_moment;
                            dofs.push(self.p_offset + 2 * location);
                            dofs.push(self.p_offset + 2 * location + 1);
                            let local_dir =
                                edge.tangent * (sense * ccw_sign(kind, edge_of_slot(kind, slot)));
                            alpha.push(orientation_alpha(local_dir)?);
                            beta.push(beta_normalization(order, edge.length));
                        }
                        DofKind::Inner(i) => {
                            let base = self.cell_inner_offset[cell_id];
                            dofs.push(base + 2 * i);
                            dofs.push(base + 2 * i + 1);
                            alpha.push(1.0);
                            beta.push(1.0);
                        }
                        DofKind::Vertex(_) => unreachable!(),
                    }
                }
                (Some(elem), dofs, alpha, beta)
            }
        };

        Ok(CellDofs {
            u_elem,
            p_elem,
            u_dofs,
            p_dofs,
            alpha,
            beta,
        })
    }

    pub fn corner_u_node(&self, node: usize) -> usize {
        node
    }

    pub fn mid_u_node(&self, edge: usize) -> usize {
        self.n_nodes + edge
    }

    pub fn u_dof(&self, u_node: usize, comp: usize) -> usize {
        2 * u_node + comp
    }

    /// The four tensor dofs (P11, P12, P21, P22) of a nodal P node, or
    /// None when the node carries no P dofs in the active space.
    pub fn nodal_p_dofs(&self, u_node: usize) -> Option<[usize; 4]> {
        match self.p_space {
            PSpace::Nodal { order } => {
                let n_p_nodes = if order == 1 {
                    self.n_nodes
                } else {
                    self.n_nodes + self.n_edges
                };
                (u_node < n_p_nodes).then(|| {
                    let base = self.p_offset + 4 * u_node;
                    [base, base + 1, base + 2, base + 3]
                })
            }
            _ => None,
        }
    }

    /// Global dof of a Nedelec edge moment (globally anchored) and row.
    pub fn nedelec_edge_dof(&self, edge: usize, moment: usize, row: usize) -> usize {
        let PSpace::Nedelec { order } = self.p_space else {
            panic!("nedelec_edge_dof on a non-Nedelec dof map");
        };
        let k = order as usize;
        debug_assert!(moment < k && row < 2);
        self.p_offset + 2 * (edge * k + moment) + row
    }

    pub fn nedelec_order(&self) -> Option<u8> {
        match self.p_space {
            PSpace::Nedelec { order } => Some(order),
            _ => None,
        }
    }

    /// Total dofs per cell (local stiffness dimension).
    pub fn cell_dof_count(&self, cell: usize) -> usize {
        self.cells[cell].u_dofs.len() + self.cells[cell].p_dofs.len()
    }

    /// Concatenated global dofs of a cell: u block then P block.
    pub fn cell_global_dofs(&self, cell: usize) -> Vec<usize> {
        let c = &self.cells[cell];
        let mut out = Vec::with_capacity(c.u_dofs.len() + c.p_dofs.len());
        out.extend_from_slice(&c.u_dofs);
        out.extend_from_slice(&c.p_dofs);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::gen_rectangle;

    #[test]
    fn dof_counts_t2nt1() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 1, CellKind::Tri, Some(1.0)).unwrap();
        // 4 quads worth: 2x1 grid split -> 4 triangles, 6 nodes, 9 edges.
        let map = DofMap::build(&mesh, PSpace::Nedelec { order: 1 }).unwrap();
        assert_eq!(mesh.cells.len(), 4);
        assert_eq!(mesh.edges.len(), 9);
        assert_eq!(map.n_u_dofs, 2 * (6 + 9));
        assert_eq!(map.n_p_dofs, 2 * 9);
        for c in &map.cells {
            assert_eq!(c.u_dofs.len(), 12);
            assert_eq!(c.p_dofs.len(), 6);
        }
    }

    #[test]
    fn dof_counts_q2nq2() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 2, CellKind::Quad, None).unwrap();
        let map = DofMap::build(&mesh, PSpace::Nedelec { order: 2 }).unwrap();
        // 9 nodes, 12 edges, 4 cells.
        assert_eq!(map.n_u_dofs, 2 * (9 + 12 + 4));
        assert_eq!(map.n_p_dofs, 2 * 2 * 12 + 4 * 8);
        for c in &map.cells {
            assert_eq!(c.u_dofs.len(), 18);
            assert_eq!(c.p_dofs.len(), 24);
        }
    }

    #[test]
    fn nodal_p_rejected_on_quads() {
        let mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::Quad, None).unwrap();
        assert!(DofMap::build(&mesh, PSpace::Nodal { order: 1 }).is_err());
    }

    #[test]
    fn shared_edge_dofs_have_identical_ids() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Tri, Some(1.0)).unwrap();
        for order in [1u8, 2] {
            let map = DofMap::build(&mesh, PSpace::Nedelec { order }).unwrap();
            let k = order as usize;
            for e in mesh.interior_edges() {
                let edge = &mesh.edges[e];
                // Collect the global dofs each adjacent cell attaches to
                // this edge; they must coincide as sets.
                let mut per_cell: Vec<Vec<usize>> = Vec::new();
                for adj in &edge.adj {
                    let c = &map.cells[adj.cell];
                    let descs = c.p_elem.as_ref().unwrap().dofs();
                    let mut dofs: Vec<usize> = descs
                        .iter()
                        .enumerate()
                        .filter_map(|(b, d)| match d {
                            DofKind::Edge { slot, .. }
                                if mesh.cell_edges[adj.cell][*slot] == e =>
                            {
                                Some([c.p_dofs[2 * b], c.p_dofs[2 * b + 1]])
                            }
                            _ => None,
                        })
                        .flatten()
                        .collect();
                    dofs.sort_unstable();
                    per_cell.push(dofs);
                }
                assert_eq!(per_cell.len(), 2);
                assert_eq!(per_cell[0], per_cell[1], "edge {e} order {order}");
                assert_eq!(per_cell[0].len(), 2 * k);
            }
        }
    }

    #[test]
    fn dense_and_unique_dof_ids() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Quad, Some(1.0)).unwrap();
        let map = DofMap::build(&mesh, PSpace::Nedelec { order: 2 }).unwrap();
        let mut seen = vec![false; map.n_dofs];
        for c in 0..mesh.cells.len() {
            for d in map.cell_global_dofs(c) {
                assert!(d < map.n_dofs);
                seen[d] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "every dof must be touched by a cell");
    }
}
