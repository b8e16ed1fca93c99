//! Reference-to-physical mappings: geometry Jacobians, gradient push
//! forward, and the covariant Piola transform with the orientation (alpha)
//! and edge-length normalization (beta) corrections that make tangential
//! traces globally consistent.

use crate::elements::lagrange_eval;
use crate::error::{Error, Result};
use crate::la::{Mat2, Vec2};
use crate::mesh::{CellKind, Mesh2D};

/// Geometry of one cell: isoparametric Lagrange map of the given order.
/// Generated meshes place midside nodes at straight-edge midpoints, so
/// orders 1 and 2 coincide there; order 2 is the default to match the
/// quadratic displacement space.
#[derive(Clone, Debug)]
pub struct GeometryMap {
    pub kind: CellKind,
    pub order: u8,
    nodes: Vec<Vec2>,
    cell_id: usize,
}

/// Jacobian data at one reference point.
#[derive(Clone, Copy, Debug)]
pub struct MapEval {
    pub x: Vec2,
    pub jacobian: Mat2,
    pub det: f64,
    pub jac_inv_t: Mat2,
}

impl GeometryMap {
    pub fn from_cell(mesh: &Mesh2D, cell: usize, order: u8) -> Result<Self> {
        let corners = mesh.corner_coords(cell);
        Self::from_corners(mesh.cells[cell].kind, &corners, order, cell)
    }

    /// Builds the map from corner coordinates; order-2 node positions are
    /// derived (edge midpoints, quad center at the corner average).
    pub fn from_corners(
        kind: CellKind,
        corners: &[Vec2],
        order: u8,
        cell_id: usize,
    ) -> Result<Self> {
        if corners.len() != kind.corner_count() {
            return Err(Error::Geometry {
                cell: cell_id,
                msg: format!("expected {} corners, got {}", kind.corner_count(), corners.len()),
            });
        }
        let mut nodes = corners.to_vec();
        if order == 2 {
            let n = corners.len();
            for slot in 0..n {
                nodes.push((corners[slot] + corners[(slot + 1) % n]) * 0.5);
            }
            if kind == CellKind::Quad {
                let c = corners.iter().fold(Vec2::ZERO, |a, &p| a + p) * 0.25;
                nodes.push(c);
            }
        } else if order != 1 {
            return Err(Error::Geometry {
                cell: cell_id,
                msg: format!("unsupported geometry order {order}"),
            });
        }
        Ok(GeometryMap {
            kind,
            order,
            nodes,
            cell_id,
        })
    }

    pub fn eval(&self, xi: Vec2) -> Result<MapEval> {
        let (values, grads) = lagrange_eval(self.kind, self.order, xi)?;
        let mut x = Vec2::ZERO;
        let mut jacobian = Mat2::ZERO;
        for (i, &p) in self.nodes.iter().enumerate() {
            x += p * values[i];
            jacobian = jacobian + Mat2::outer(p, grads[i]);
        }
        let det = jacobian.det();
        if !(det > 0.0) {
            return Err(Error::Geometry {
                cell: self.cell_id,
                msg: format!("non-positive Jacobian determinant {det} at xi=({}, {})", xi.x, xi.y),
            });
        }
        let jac_inv_t = jacobian.inverse().unwrap().transpose();
        Ok(MapEval {
            x,
            jacobian,
            det,
            jac_inv_t,
        })
    }

    /// Physical position only.
    pub fn position(&self, xi: Vec2) -> Vec2 {
        let (values, _) = lagrange_eval(self.kind, self.order, xi).unwrap();
        self.nodes
            .iter()
            .zip(values)
            .fold(Vec2::ZERO, |acc, (&p, v)| acc + p * v)
    }
}

/// Pushes a reference gradient to physical space: `grad = J^{-T} grad_ref`.
pub fn map_scalar_gradient(map: &MapEval, grad_ref: Vec2) -> Vec2 {
    map.jac_inv_t.mul_vec(grad_ref)
}

/// Orientation consistency sign from the physical direction of a local
/// edge tangent: +1 when the direction points along positive x, -1 when
/// along negative x, decided by the y-component for vertical tangents.
pub fn orientation_alpha(local_tangent: Vec2) -> Result<f64> {
    let n = local_tangent.norm();
    if n < 1e-300 {
        return Err(Error::Parameter("zero tangent vector".into()));
    }
    if local_tangent.x.abs() > 1e-12 * n {
        Ok(local_tangent.x.signum())
    } else if local_tangent.y != 0.0 {
        Ok(local_tangent.y.signum())
    } else {
        Err(Error::Parameter("zero tangent vector".into()))
    }
}

/// Edge-length normalization of the scaled Piola transform: `L` for
/// first-order edge dofs, `L/2` for second-order; inner dofs use 1.
pub fn beta_normalization(order: u8, length: f64) -> f64 {
    match order {
        1 => length,
        2 => 0.5 * length,
        _ => 1.0,
    }
}

/// Covariant Piola transform with the alpha/beta corrections:
/// `psi = alpha beta J^{-T} v`, `curl2D psi = alpha beta curl2D_ref(v) / det J`.
pub fn piola_map(map: &MapEval, alpha: f64, beta: f64, v: Vec2, curl_ref: f64) -> (Vec2, f64) {
    let s = alpha * beta;
    (map.jac_inv_t.mul_vec(v) * s, s * curl_ref / map.det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::nedelec_eval;

    fn square_map(side: f64) -> GeometryMap {
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(side, 0.0),
            Vec2::new(side, side),
            Vec2::new(0.0, side),
        ];
        GeometryMap::from_corners(CellKind::Quad, &corners, 2, 0).unwrap()
    }

    #[test]
    fn gradient_identity_and_scaling() {
        let g = Vec2::new(0.3, -0.7);
        let id = MapEval {
            x: Vec2::ZERO,
            jacobian: Mat2::IDENTITY,
            det: 1.0,
            jac_inv_t: Mat2::IDENTITY,
        };
        assert_eq!(map_scalar_gradient(&id, g), g);

        let stretch = MapEval {
            x: Vec2::ZERO,
            jacobian: Mat2::IDENTITY * 2.0,
            det: 4.0,
            jac_inv_t: Mat2::IDENTITY * 0.5,
        };
        assert!((map_scalar_gradient(&stretch, g) - g * 0.5).norm() < 1e-15);
    }

    #[test]
    fn gradient_rotates_with_rotation() {
        let th = std::f64::consts::FRAC_PI_2;
        let rot = Mat2::new(th.cos(), -th.sin(), th.sin(), th.cos());
        let map = MapEval {
            x: Vec2::ZERO,
            jacobian: rot,
            det: 1.0,
            // For a rotation, J^{-T} = J.
            jac_inv_t: rot,
        };
        let g = Vec2::new(1.0, 0.0);
        assert!((map_scalar_gradient(&map, g) - rot.mul_vec(g)).norm() < 1e-15);
    }

    #[test]
    fn alpha_sign_rules() {
        assert_eq!(orientation_alpha(Vec2::new(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(orientation_alpha(Vec2::new(-1.0, 0.0)).unwrap(), -1.0);
        assert_eq!(orientation_alpha(Vec2::new(0.0, 1.0)).unwrap(), 1.0);
        assert_eq!(orientation_alpha(Vec2::new(0.0, -1.0)).unwrap(), -1.0);
        assert!(orientation_alpha(Vec2::ZERO).is_err());
    }

    #[test]
    fn beta_values() {
        assert_eq!(beta_normalization(1, 2.0), 2.0);
        assert_eq!(beta_normalization(2, 2.0), 1.0);
        assert_eq!(beta_normalization(1, 1.0), 1.0);
    }

    #[test]
    fn piola_identity_map_is_identity() {
        let id = MapEval {
            x: Vec2::ZERO,
            jacobian: Mat2::IDENTITY,
            det: 1.0,
            jac_inv_t: Mat2::IDENTITY,
        };
        let v = Vec2::new(0.2, 0.9);
        let (psi, c) = piola_map(&id, 1.0, 1.0, v, 3.5);
        assert_eq!(psi, v);
        assert_eq!(c, 3.5);
    }

    #[test]
    fn piola_curl_scales_inverse_area() {
        let h = 3.0;
        let map = MapEval {
            x: Vec2::ZERO,
            jacobian: Mat2::IDENTITY * h,
            det: h * h,
            jac_inv_t: Mat2::IDENTITY * (1.0 / h),
        };
        let (_, c) = piola_map(&map, 1.0, 1.0, Vec2::new(1.0, 0.0), 2.0);
        assert!((c - 2.0 / (h * h)).abs() < 1e-15);
    }

    /// A side-2 physical square with NQ1 and beta = L gives unit
    /// tangential trace on the owning edge.
    #[test]
    fn scaled_trace_is_unity_on_own_edge() {
        let geo = square_map(2.0);
        // Element edge 0 is the bottom: physical tangent (1, 0), length 2.
        let beta = beta_normalization(1, 2.0);
        for &u in &[0.1, 0.5, 0.9] {
            let xi = Vec2::new(-1.0 + 2.0 * u, -1.0);
            let map = geo.eval(xi).unwrap();
            let (v, c) = nedelec_eval(CellKind::Quad, 1, xi).unwrap();
            let (psi, _) = piola_map(&map, 1.0, beta, v[0], c[0]);
            assert!((psi.dot(Vec2::new(1.0, 0.0)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn degenerate_geometry_reported_with_cell() {
        let corners = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 0.0),
        ];
        let geo = GeometryMap::from_corners(CellKind::Tri, &corners, 1, 7).unwrap();
        match geo.eval(Vec2::new(0.2, 0.2)) {
            Err(Error::Geometry { cell, .. }) => assert_eq!(cell, 7),
            other => panic!("expected geometry error, got {other:?}"),
        }
    }
}
