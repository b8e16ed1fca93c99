//! Structured generators for the two benchmark geometries: a rectangle
//! with an optional vertical material interface, and a (possibly
//! two-material) annulus approximated by straight-sided cells.

use super::{Cell, CellKind, Mesh2D};
use crate::error::{Error, Result};
use crate::la::Vec2;

/// Splits a counterclockwise quad into two triangles along the diagonal
/// that starts at the lowest node id, for determinism.
fn split_quad(nodes: [usize; 4], region: u32, cells: &mut Vec<Cell>) {
    let p = (0..4).min_by_key(|&i| nodes[i]).unwrap();
    let q = |k: usize| nodes[(p + k) % 4];
    cells.push(Cell {
        kind: CellKind::Tri,
        nodes: vec![q(0), q(1), q(2)],
        region,
    });
    cells.push(Cell {
        kind: CellKind::Tri,
        nodes: vec![q(0), q(2), q(3)],
        region,
    });
}

/// Structured rectangle mesh on `[0, l] x [0, h]`.
///
/// When `interface_x` is given, the grid must contain a vertical line at
/// that position; cells left of it get region 1, cells right of it
/// region 2. Boundary edges are tagged bottom/top/left/right.
pub fn gen_rectangle(
    l: f64,
    h: f64,
    nx: usize,
    ny: usize,
    kind: CellKind,
    interface_x: Option<f64>,
) -> Result<Mesh2D> {
    if nx < 1 || ny < 1 {
        return Err(Error::Parameter("nx and ny must be at least 1".into()));
    }
    if l <= 0.0 || h <= 0.0 {
        return Err(Error::Parameter("rectangle dimensions must be positive".into()));
    }
    if let Some(xi) = interface_x {
        if xi <= 0.0 || xi >= l {
            return Err(Error::Parameter(format!(
                "interface_x = {xi} must lie strictly inside (0, {l})"
            )));
        }
        let hits_grid = (0..=nx).any(|i| (l * i as f64 / nx as f64 - xi).abs() < 1e-9 * l);
        if !hits_grid {
            return Err(Error::Parameter(format!(
                "interface_x = {xi} is not resolved by the {nx}-cell grid"
            )));
        }
    }

    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(Vec2::new(l * i as f64 / nx as f64, h * j as f64 / ny as f64));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;

    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let corners = [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)];
            let cx = l * (i as f64 + 0.5) / nx as f64;
            let region = match interface_x {
                Some(xi) if cx > xi => 2,
                _ => 1,
            };
            match kind {
                CellKind::Quad => cells.push(Cell {
                    kind,
                    nodes: corners.to_vec(),
                    region,
                }),
                CellKind::Tri => split_quad(corners, region, &mut cells),
            }
        }
    }

    let mut mesh = Mesh2D::from_parts(nodes, cells)?;
    let mut tags = Vec::new();
    {
        let on_line = |n: usize, sel: fn(Vec2) -> f64, v: f64| -> bool {
            (sel(mesh.nodes[n]) - v).abs() < 1e-9 * (l + h)
        };
        for eid in 0..mesh.edges.len() {
            if !mesh.edges[eid].is_boundary() {
                continue;
            }
            let [a, b] = mesh.edges[eid].nodes;
            let tag = if on_line(a, |p| p.y, 0.0) && on_line(b, |p| p.y, 0.0) {
                "bottom"
            } else if on_line(a, |p| p.y, h) && on_line(b, |p| p.y, h) {
                "top"
            } else if on_line(a, |p| p.x, 0.0) && on_line(b, |p| p.x, 0.0) {
                "left"
            } else if on_line(a, |p| p.x, l) && on_line(b, |p| p.x, l) {
                "right"
            } else {
                return Err(Error::Topology(format!(
                    "boundary edge {eid} not on the rectangle outline"
                )));
            };
            tags.push((eid, tag));
        }
    }
    for (eid, tag) in tags {
        mesh.tag_edge(eid, tag);
    }
    Ok(mesh)
}

/// Structured rectangle with a deterministic mix of quads and triangles:
/// every cell whose grid index satisfies `(i + j) % 4 == 0` is split.
/// Used by tests that need tri/quad interfaces in one mesh.
pub fn gen_mixed_rectangle(
    l: f64,
    h: f64,
    nx: usize,
    ny: usize,
    interface_x: Option<f64>,
) -> Result<Mesh2D> {
    let quad = gen_rectangle(l, h, nx, ny, CellKind::Quad, interface_x)?;
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let cell = &quad.cells[j * nx + i];
            let corners: [usize; 4] = [
                cell.nodes[0],
                cell.nodes[1],
                cell.nodes[2],
                cell.nodes[3],
            ];
            if (i + j) % 4 == 0 {
                split_quad(corners, cell.region, &mut cells);
            } else {
                cells.push(cell.clone());
            }
        }
    }
    let mut mesh = Mesh2D::from_parts(quad.nodes.clone(), cells)?;
    // Boundary edges coincide with the quad mesh; re-derive the tags.
    let tags: Vec<(usize, String)> = quad
        .boundary_tags
        .iter()
        .map(|(&e, t)| {
            let key = quad.edges[e].key();
            let id = mesh
                .edges
                .iter()
                .position(|m| m.key() == key)
                .expect("boundary edges are preserved by splitting");
            (id, t.clone())
        })
        .collect();
    for (e, t) in tags {
        mesh.tag_edge(e, &t);
    }
    Ok(mesh)
}

/// Log-uniform radius ladder between two radii. Consecutive spacings grow
/// proportionally to r, which keeps cell aspect ratios even across the
/// annulus and concentrates resolution at the inner boundary where the
/// fields are steep.
fn log_radii(r_from: f64, r_to: f64, n: usize) -> Vec<f64> {
    let ratio = r_to / r_from;
    (0..=n)
        .map(|k| r_from * ratio.powf(k as f64 / n as f64))
        .collect()
}

/// Structured polar mesh of an annulus with straight-sided cells.
///
/// When `r_m` is given (two-material case), the radius ladder contains a
/// ring exactly at `r_m`; cells with `r < r_m` get region 2, the rest
/// region 1. Boundary edges are tagged inner/outer.
pub fn gen_annulus(
    r_o: f64,
    r_i: f64,
    r_m: Option<f64>,
    n_r: usize,
    n_theta: usize,
    kind: CellKind,
) -> Result<Mesh2D> {
    if !(r_o > r_i && r_i > 0.0) {
        return Err(Error::Parameter(format!(
            "annulus radii must satisfy r_o > r_i > 0, got r_o={r_o}, r_i={r_i}"
        )));
    }
    if let Some(rm) = r_m {
        if !(r_o > rm && rm > r_i) {
            return Err(Error::Parameter(format!(
                "ring radius must satisfy r_o > r_m > r_i, got r_m={rm}"
            )));
        }
    }
    if n_r < 1 || n_theta < 3 {
        return Err(Error::Parameter(
            "annulus needs n_r >= 1 and n_theta >= 3".into(),
        ));
    }
    if r_m.is_some() && n_r < 2 {
        return Err(Error::Parameter(
            "two-material annulus needs n_r >= 2 to resolve the ring".into(),
        ));
    }

    let radii = match r_m {
        None => log_radii(r_i, r_o, n_r),
        Some(rm) => {
            let span = (r_o / r_i).ln();
            let frac = (rm / r_i).ln() / span;
            let n1 = ((n_r as f64 * frac).round() as usize).clamp(1, n_r - 1);
            let mut radii = log_radii(r_i, rm, n1);
            radii.extend(log_radii(rm, r_o, n_r - n1).into_iter().skip(1));
            radii
        }
    };

    let mut nodes = Vec::with_capacity(radii.len() * n_theta);
    for &r in &radii {
        for j in 0..n_theta {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_theta as f64;
            nodes.push(Vec2::new(r * theta.cos(), r * theta.sin()));
        }
    }
    let id = |k: usize, j: usize| k * n_theta + (j % n_theta);

    let mut cells = Vec::new();
    for k in 0..n_r {
        let r_mid = 0.5 * (radii[k] + radii[k + 1]);
        let region = match r_m {
            Some(rm) if r_mid < rm => 2,
            _ => 1,
        };
        for j in 0..n_theta {
            let corners = [id(k, j), id(k + 1, j), id(k + 1, j + 1), id(k, j + 1)];
            match kind {
                CellKind::Quad => cells.push(Cell {
                    kind,
                    nodes: corners.to_vec(),
                    region,
                }),
                CellKind::Tri => split_quad(corners, region, &mut cells),
            }
        }
    }

    let n_rings = radii.len();
    let mut mesh = Mesh2D::from_parts(nodes, cells)?;
    for eid in 0..mesh.edges.len() {
        if !mesh.edges[eid].is_boundary() {
            continue;
        }
        let [a, b] = mesh.edges[eid].nodes;
        let tag = if a < n_theta && b < n_theta {
            "inner"
        } else if a >= (n_rings - 1) * n_theta && b >= (n_rings - 1) * n_theta {
            "outer"
        } else {
            return Err(Error::Topology(format!(
                "boundary edge {eid} is on neither annulus rim"
            )));
        };
        mesh.tag_edge(eid, tag);
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_bimaterial_two_cells() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 1, CellKind::Quad, Some(1.0)).unwrap();
        assert_eq!(mesh.cells.len(), 2);
        let regions: Vec<u32> = mesh.cells.iter().map(|c| c.region).collect();
        assert_eq!(regions, vec![1, 2]);
        assert!((mesh.total_area() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unit_quad_single_region() {
        let mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::Quad, None).unwrap();
        assert_eq!(mesh.cells.len(), 1);
        assert_eq!(mesh.cells[0].region, 1);
        assert_eq!(mesh.tagged_edges("bottom").len(), 1);
        assert_eq!(mesh.tagged_edges("left").len(), 1);
    }

    #[test]
    fn rectangle_tri_split_counts() {
        let mesh = gen_rectangle(2.0, 1.0, 4, 2, CellKind::Tri, Some(1.0)).unwrap();
        assert_eq!(mesh.cells.len(), 16);
        let per_region = |r: u32| mesh.cells.iter().filter(|c| c.region == r).count();
        assert_eq!(per_region(1), 8);
        assert_eq!(per_region(2), 8);
    }

    #[test]
    fn interface_must_hit_grid() {
        assert!(gen_rectangle(2.0, 1.0, 3, 1, CellKind::Quad, Some(1.0)).is_err());
    }

    #[test]
    fn annulus_counts_and_tags() {
        let mesh = gen_annulus(25.0, 2.0, None, 2, 4, CellKind::Quad).unwrap();
        assert_eq!(mesh.cells.len(), 8);
        assert_eq!(mesh.tagged_edges("inner").len(), 4);
        assert_eq!(mesh.tagged_edges("outer").len(), 4);
    }

    #[test]
    fn coarse_ring() {
        let mesh = gen_annulus(2.0, 1.0, None, 1, 3, CellKind::Quad).unwrap();
        assert_eq!(mesh.cells.len(), 3);
    }

    #[test]
    fn two_material_annulus_split_at_rm() {
        let mesh = gen_annulus(25.0, 2.0, Some(10.0), 4, 8, CellKind::Tri).unwrap();
        assert!(mesh.cells.iter().any(|c| c.region == 1));
        assert!(mesh.cells.iter().any(|c| c.region == 2));
        for cell in 0..mesh.cells.len() {
            let r = mesh.centroid(cell).norm();
            let region = mesh.cells[cell].region;
            assert_eq!(region, if r < 10.0 { 2 } else { 1 }, "cell {cell} at r={r}");
        }
        // The ladder must contain a ring exactly at r_m.
        let hit = mesh
            .nodes
            .iter()
            .any(|p| (p.norm() - 10.0).abs() < 1e-9);
        assert!(hit);
    }

    #[test]
    fn degenerate_radii_rejected() {
        assert!(gen_annulus(2.0, 2.0, None, 2, 8, CellKind::Quad).is_err());
        assert!(gen_annulus(25.0, 2.0, Some(30.0), 4, 8, CellKind::Quad).is_err());
    }

    #[test]
    fn annulus_area_matches_polygon() {
        let n_theta = 64;
        let mesh = gen_annulus(25.0, 2.0, None, 8, n_theta, CellKind::Quad).unwrap();
        // Regular polygon area: n/2 r^2 sin(2 pi / n), outer ring minus hole.
        let poly = |r: f64| 0.5 * n_theta as f64 * r * r * (2.0 * std::f64::consts::PI / n_theta as f64).sin();
        let want = poly(25.0) - poly(2.0);
        assert!((mesh.total_area() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn mixed_rectangle_has_both_kinds_and_valid_topology() {
        let mesh = gen_mixed_rectangle(2.0, 1.0, 8, 5, Some(1.0)).unwrap();
        assert_eq!(mesh.cells.len(), 50);
        assert!(mesh.cells.iter().any(|c| c.kind == CellKind::Tri));
        assert!(mesh.cells.iter().any(|c| c.kind == CellKind::Quad));
        assert!((mesh.total_area() - 2.0).abs() < 1e-12);
        assert_eq!(mesh.tagged_edges("bottom").len(), 8);
    }

    #[test]
    fn region_centroids_lie_in_their_zone() {
        let mesh = gen_rectangle(2.0, 1.0, 8, 4, CellKind::Tri, Some(1.0)).unwrap();
        for cell in 0..mesh.cells.len() {
            let c = mesh.centroid(cell);
            match mesh.cells[cell].region {
                1 => assert!(c.x < 1.0),
                2 => assert!(c.x > 1.0),
                r => panic!("unexpected region {r}"),
            }
        }
    }
}
