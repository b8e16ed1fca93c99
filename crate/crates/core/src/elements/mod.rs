//! Reference-space shape functions, degree-of-freedom functionals and
//! their bookkeeping for the scalar Lagrange families (T1, T2, Q1, Q2)
//! and the first-kind Nedelec families (NT1, NT2, NQ1, NQ2).
//!
//! Edge numbering convention: basis functions and tangents follow the
//! element-family ordering (`paper` index 0..n_edges-1, triangle edge 0
//! being the hypotenuse), while mesh-facing dof descriptors use the
//! counterclockwise corner-loop slot. `slot_of_edge`/`edge_of_slot`
//! convert between the two.

mod lagrange;
mod nedelec;

pub use lagrange::lagrange_eval;
pub use nedelec::nedelec_eval;

use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mesh::CellKind;
use crate::quadrature::{cell_rule, unit_interval};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lagrange,
    Nedelec,
}

/// Mesh entity a basis function is attached to. `Edge.slot` is the
/// counterclockwise corner-loop slot of the cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    Vertex(usize),
    Edge { slot: usize, moment: usize },
    Inner(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReferenceElement {
    pub family: Family,
    pub kind: CellKind,
    pub order: u8,
}

/// Counterclockwise reference corners.
pub fn ref_corners(kind: CellKind) -> &'static [Vec2] {
    match kind {
        CellKind::Tri => &[
            Vec2 { x: 0.0, y: 0.0 },
            Vec2 { x: 1.0, y: 0.0 },
            Vec2 { x: 0.0, y: 1.0 },
        ],
        CellKind::Quad => &[
            Vec2 { x: -1.0, y: -1.0 },
            Vec2 { x: 1.0, y: -1.0 },
            Vec2 { x: 1.0, y: 1.0 },
            Vec2 { x: -1.0, y: 1.0 },
        ],
    }
}

/// Counterclockwise endpoints of an edge slot.
pub fn slot_endpoints(kind: CellKind, slot: usize) -> (Vec2, Vec2) {
    let corners = ref_corners(kind);
    let n = corners.len();
    (corners[slot], corners[(slot + 1) % n])
}

/// Converts the element-family edge index to the corner-loop slot.
pub fn slot_of_edge(kind: CellKind, edge: usize) -> usize {
    match kind {
        // Triangle edges: 0 hypotenuse (slot 1), 1 at xi=0 (slot 2),
        // 2 at eta=0 (slot 0).
        CellKind::Tri => [1, 2, 0][edge],
        CellKind::Quad => edge,
    }
}

/// Inverse of [`slot_of_edge`].
pub fn edge_of_slot(kind: CellKind, slot: usize) -> usize {
    match kind {
        CellKind::Tri => [2, 0, 1][slot],
        CellKind::Quad => slot,
    }
}

/// Reference tangent of an element-family edge (unit length). These are
/// the fixed per-edge directions of the dof integrals; they already obey
/// the positive-x (fallback positive-y) rule in reference space.
pub fn edge_tangent(kind: CellKind, edge: usize) -> Vec2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        CellKind::Tri => [Vec2::new(s, -s), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)][edge],
        CellKind::Quad => [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ][edge],
    }
}

/// Sign relating the edge tangent to the counterclockwise traversal:
/// `tangent = ccw_sign * (ccw direction)`.
pub fn ccw_sign(kind: CellKind, edge: usize) -> f64 {
    match kind {
        CellKind::Tri => [-1.0, -1.0, 1.0][edge],
        CellKind::Quad => [1.0, 1.0, -1.0, -1.0][edge],
    }
}

impl ReferenceElement {
    pub fn lagrange(kind: CellKind, order: u8) -> Result<Self> {
        match (kind, order) {
            (CellKind::Tri, 1 | 2) | (CellKind::Quad, 1 | 2) => Ok(ReferenceElement {
                family: Family::Lagrange,
                kind,
                order,
            }),
            _ => Err(Error::Element(format!(
                "no Lagrange element for {kind:?} order {order}"
            ))),
        }
    }

    pub fn nedelec(kind: CellKind, order: u8) -> Result<Self> {
        match (kind, order) {
            (CellKind::Tri, 1 | 2) | (CellKind::Quad, 1 | 2) => Ok(ReferenceElement {
                family: Family::Nedelec,
                kind,
                order,
            }),
            _ => Err(Error::Element(format!(
                "no Nedelec element for {kind:?} order {order}"
            ))),
        }
    }

    /// Number of basis functions.
    pub fn count(&self) -> usize {
        match (self.family, self.kind, self.order) {
            (Family::Lagrange, CellKind::Tri, 1) => 3,
            (Family::Lagrange, CellKind::Tri, 2) => 6,
            (Family::Lagrange, CellKind::Quad, 1) => 4,
            (Family::Lagrange, CellKind::Quad, 2) => 9,
            (Family::Nedelec, CellKind::Tri, 1) => 3,
            (Family::Nedelec, CellKind::Tri, 2) => 8,
            (Family::Nedelec, CellKind::Quad, 1) => 4,
            (Family::Nedelec, CellKind::Quad, 2) => 12,
            _ => unreachable!(),
        }
    }

    pub fn inner_count(&self) -> usize {
        match (self.family, self.kind, self.order) {
            (Family::Nedelec, CellKind::Tri, 2) => 2,
            (Family::Nedelec, CellKind::Quad, 2) => 4,
            (Family::Lagrange, CellKind::Quad, 2) => 1,
            _ => 0,
        }
    }

    /// Dof descriptors aligned with the basis ordering.
    pub fn dofs(&self) -> Vec<DofKind> {
        let kind = self.kind;
        let n_edges = kind.edge_count();
        match self.family {
            Family::Lagrange => {
                let mut out: Vec<DofKind> =
                    (0..kind.corner_count()).map(DofKind::Vertex).collect();
                if self.order == 2 {
                    out.extend((0..n_edges).map(|slot| DofKind::Edge { slot, moment: 0 }));
                    if kind == CellKind::Quad {
                        out.push(DofKind::Inner(0));
                    }
                }
                out
            }
            Family::Nedelec => {
                let k = self.order as usize;
                let mut out = Vec::new();
                for edge in 0..n_edges {
                    let slot = slot_of_edge(kind, edge);
                    for moment in 0..k {
                        out.push(DofKind::Edge { slot, moment });
                    }
                }
                out.extend((0..self.inner_count()).map(DofKind::Inner));
                out
            }
        }
    }

    /// Lagrange node coordinates (vertices, then midsides in slot order,
    /// then the quad center).
    pub fn lagrange_nodes(&self) -> Vec<Vec2> {
        assert_eq!(self.family, Family::Lagrange);
        let corners = ref_corners(self.kind);
        let mut out: Vec<Vec2> = corners.to_vec();
        if self.order == 2 {
            for slot in 0..self.kind.edge_count() {
                let (a, b) = slot_endpoints(self.kind, slot);
                out.push((a + b) * 0.5);
            }
            if self.kind == CellKind::Quad {
                out.push(Vec2::ZERO);
            }
        }
        out
    }

    /// Edge dof functional of the paper form: the tangential moment
    /// `m^{e_i}_j(v) = int_{e_i} (v . t_i) r_j ds` with `r_j` the Lagrange
    /// polynomial along the edge anchored at the counterclockwise start
    /// (`r_0 = 1 - u`, `r_1 = u` for order 2; `r_0 = 1` for order 1).
    pub fn edge_dof_functional(
        &self,
        edge: usize,
        moment: usize,
        field: impl Fn(Vec2) -> Vec2,
    ) -> Result<f64> {
        let k = self.order as usize;
        if moment >= k {
            return Err(Error::Element(format!(
                "moment {moment} out of range for order {k}"
            )));
        }
        let tangent = edge_tangent(self.kind, edge);
        let (a, b) = slot_endpoints(self.kind, slot_of_edge(self.kind, edge));
        let len = (b - a).norm();
        let (pts, wts) = unit_interval(5)?;
        let mut acc = 0.0;
        for (&u, &w) in pts.iter().zip(&wts) {
            let x = a + (b - a) * u;
            let r = match (k, moment) {
                (1, 0) => 1.0,
                (2, 0) => 1.0 - u,
                (2, 1) => u,
                _ => unreachable!(),
            };
            acc += w * field(x).dot(tangent) * r;
        }
        Ok(acc * len)
    }

    /// Inner dof functional `int_B v . q_i dA` with the `q_i` fixed by the
    /// element family; only defined for order-2 Nedelec elements.
    pub fn inner_dof_functional(
        &self,
        inner: usize,
        field: impl Fn(Vec2) -> Vec2,
    ) -> Result<f64> {
        if self.family != Family::Nedelec || self.order != 2 {
            return Err(Error::Element(
                "inner dof functionals exist only for order-2 Nedelec elements".into(),
            ));
        }
        if inner >= self.inner_count() {
            return Err(Error::Element(format!(
                "inner index {inner} out of range"
            )));
        }
        let q = move |p: Vec2| -> Vec2 {
            match (self.kind, inner) {
                (CellKind::Tri, 0) => Vec2::new(1.0, 0.0),
                (CellKind::Tri, 1) => Vec2::new(0.0, 1.0),
                (CellKind::Quad, 0) => Vec2::new(0.5 * (1.0 + p.x), 0.0),
                (CellKind::Quad, 1) => Vec2::new(0.5 * (1.0 - p.x), 0.0),
                (CellKind::Quad, 2) => Vec2::new(0.0, 0.5 * (1.0 + p.y)),
                (CellKind::Quad, 3) => Vec2::new(0.0, 0.5 * (1.0 - p.y)),
                _ => unreachable!(),
            }
        };
        let rule = cell_rule(self.kind, 2 * self.order as usize + 2)?;
        Ok(rule.iter().map(|(p, w)| w * field(p).dot(q(p))).sum())
    }

    /// Applies the dof functional `index` (in basis ordering) to a field.
    pub fn dof_functional(&self, index: usize, field: impl Fn(Vec2) -> Vec2) -> Result<f64> {
        match self.dofs()[index] {
            DofKind::Edge { slot, moment } => {
                self.edge_dof_functional(edge_of_slot(self.kind, slot), moment, field)
            }
            DofKind::Inner(i) => self.inner_dof_functional(i, field),
            DofKind::Vertex(_) => Err(Error::Element(
                "vertex dofs have no integral functional".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::DenseMat;

    #[test]
    fn lagrange_kronecker_at_nodes() {
        for (kind, order) in [
            (CellKind::Tri, 1),
            (CellKind::Tri, 2),
            (CellKind::Quad, 1),
            (CellKind::Quad, 2),
        ] {
            let elem = ReferenceElement::lagrange(kind, order).unwrap();
            let nodes = elem.lagrange_nodes();
            for (j, &xi) in nodes.iter().enumerate() {
                let (values, _) = lagrange_eval(kind, order, xi).unwrap();
                for (i, v) in values.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (v - want).abs() < 1e-14,
                        "{kind:?} order {order} node {j} basis {i}: {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let samples = [
            Vec2::new(0.21, 0.17),
            Vec2::new(0.05, 0.61),
            Vec2::new(0.33, 0.33),
        ];
        for (kind, order) in [(CellKind::Tri, 1), (CellKind::Tri, 2)] {
            for &xi in &samples {
                let (values, grads) = lagrange_eval(kind, order, xi).unwrap();
                let sum: f64 = values.iter().sum();
                assert!((sum - 1.0).abs() < 1e-14);
                let gsum = grads.iter().fold(Vec2::ZERO, |a, &g| a + g);
                assert!(gsum.norm() < 1e-13);
            }
        }
        for order in [1u8, 2] {
            let (values, _) = lagrange_eval(CellKind::Quad, order, Vec2::new(0.3, -0.4)).unwrap();
            let sum: f64 = values.iter().sum();
            assert!((sum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn q2_center_bubble() {
        let (values, _) = lagrange_eval(CellKind::Quad, 2, Vec2::ZERO).unwrap();
        for (i, v) in values.iter().enumerate() {
            let want = if i == 8 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15, "node {i}: {v}");
        }
    }

    #[test]
    fn t1_barycentric_center() {
        let (values, _) = lagrange_eval(CellKind::Tri, 1, Vec2::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();
        for v in values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn lagrange_gradients_match_finite_differences() {
        let h = 1e-6;
        for (kind, order, xi) in [
            (CellKind::Tri, 2, Vec2::new(0.23, 0.31)),
            (CellKind::Quad, 2, Vec2::new(0.37, -0.21)),
            (CellKind::Quad, 1, Vec2::new(-0.5, 0.25)),
        ] {
            let (_, grads) = lagrange_eval(kind, order, xi).unwrap();
            let (vxp, _) = lagrange_eval(kind, order, Vec2::new(xi.x + h, xi.y)).unwrap();
            let (vxm, _) = lagrange_eval(kind, order, Vec2::new(xi.x - h, xi.y)).unwrap();
            let (vyp, _) = lagrange_eval(kind, order, Vec2::new(xi.x, xi.y + h)).unwrap();
            let (vym, _) = lagrange_eval(kind, order, Vec2::new(xi.x, xi.y - h)).unwrap();
            for i in 0..grads.len() {
                let fd = Vec2::new((vxp[i] - vxm[i]) / (2.0 * h), (vyp[i] - vym[i]) / (2.0 * h));
                assert!((fd - grads[i]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn nedelec_paper_point_values() {
        // Triangle order 1, third basis at (0.5, 0).
        let (v, _) = nedelec_eval(CellKind::Tri, 1, Vec2::new(0.5, 0.0)).unwrap();
        assert!((v[2] - Vec2::new(1.0, 0.5)).norm() < 1e-15);
        // Quad order 1, first basis at (0, -1).
        let (v, _) = nedelec_eval(CellKind::Quad, 1, Vec2::new(0.0, -1.0)).unwrap();
        assert!((v[0] - Vec2::new(0.5, 0.0)).norm() < 1e-15);
        // Triangle order 2, first basis vanishes at the origin.
        let (v, _) = nedelec_eval(CellKind::Tri, 2, Vec2::ZERO).unwrap();
        assert!(v[0].norm() < 1e-15);
    }

    #[test]
    fn nedelec_duality_is_identity() {
        for (kind, order) in [
            (CellKind::Tri, 1u8),
            (CellKind::Tri, 2),
            (CellKind::Quad, 1),
            (CellKind::Quad, 2),
        ] {
            let elem = ReferenceElement::nedelec(kind, order).unwrap();
            let n = elem.count();
            let mut m = DenseMat::zeros(n, n);
            for a in 0..n {
                for b in 0..n {
                    let val = elem
                        .dof_functional(a, |p| nedelec_eval(kind, order, p).unwrap().0[b])
                        .unwrap();
                    *m.at_mut(a, b) = val;
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (m.at(a, b) - want).abs() < 1e-12,
                        "{kind:?} order {order} dof {a} basis {b}: {}",
                        m.at(a, b)
                    );
                }
            }
        }
    }

    #[test]
    fn specific_functional_values() {
        let nt1 = ReferenceElement::nedelec(CellKind::Tri, 1).unwrap();
        let v3 = |p: Vec2| nedelec_eval(CellKind::Tri, 1, p).unwrap().0[2];
        assert!((nt1.edge_dof_functional(2, 0, v3).unwrap() - 1.0).abs() < 1e-14);
        assert!(nt1.edge_dof_functional(0, 0, v3).unwrap().abs() < 1e-14);

        let nq2 = ReferenceElement::nedelec(CellKind::Quad, 2).unwrap();
        let ex = |_p: Vec2| Vec2::new(1.0, 0.0);
        assert!((nq2.edge_dof_functional(0, 0, ex).unwrap() - 1.0).abs() < 1e-14);
        assert!((nq2.inner_dof_functional(0, ex).unwrap() - 2.0).abs() < 1e-13);

        let nt2 = ReferenceElement::nedelec(CellKind::Tri, 2).unwrap();
        let basis = |i: usize| move |p: Vec2| nedelec_eval(CellKind::Tri, 2, p).unwrap().0[i];
        assert!((nt2.inner_dof_functional(0, basis(6)).unwrap() - 1.0).abs() < 1e-13);
        assert!(nt2.inner_dof_functional(0, basis(0)).unwrap().abs() < 1e-13);
    }

    #[test]
    fn inner_functional_requires_order_two() {
        let nt1 = ReferenceElement::nedelec(CellKind::Tri, 1).unwrap();
        assert!(nt1.inner_dof_functional(0, |_| Vec2::ZERO).is_err());
    }

    #[test]
    fn reference_curls_match_finite_differences() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let h = 1e-6;
        for (kind, order) in [
            (CellKind::Tri, 1u8),
            (CellKind::Tri, 2),
            (CellKind::Quad, 1),
            (CellKind::Quad, 2),
        ] {
            for _ in 0..20 {
                let xi = match kind {
                    CellKind::Tri => {
                        let a = rng.gen_range(0.05..0.9);
                        let b = rng.gen_range(0.05..(0.95 - a));
                        Vec2::new(a, b)
                    }
                    CellKind::Quad => {
                        Vec2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9))
                    }
                };
                let (_, curls) = nedelec_eval(kind, order, xi).unwrap();
                let (vxp, _) = nedelec_eval(kind, order, Vec2::new(xi.x + h, xi.y)).unwrap();
                let (vxm, _) = nedelec_eval(kind, order, Vec2::new(xi.x - h, xi.y)).unwrap();
                let (vyp, _) = nedelec_eval(kind, order, Vec2::new(xi.x, xi.y + h)).unwrap();
                let (vym, _) = nedelec_eval(kind, order, Vec2::new(xi.x, xi.y - h)).unwrap();
                for i in 0..curls.len() {
                    let fd = (vxp[i].y - vxm[i].y) / (2.0 * h) - (vyp[i].x - vym[i].x) / (2.0 * h);
                    assert!(
                        (fd - curls[i]).abs() < 1e-6,
                        "{kind:?} order {order} basis {i}: fd {fd} vs {}",
                        curls[i]
                    );
                }
            }
        }
    }

    #[test]
    fn unsupported_combinations_rejected() {
        assert!(ReferenceElement::nedelec(CellKind::Tri, 3).is_err());
        assert!(ReferenceElement::lagrange(CellKind::Quad, 0).is_err());
        assert!(nedelec_eval(CellKind::Tri, 3, Vec2::ZERO).is_err());
        assert!(lagrange_eval(CellKind::Tri, 4, Vec2::ZERO).is_err());
    }

    /// Order-1 bases must be exactly representable in the order-2 space:
    /// first-kind spaces are nested.
    #[test]
    fn first_order_spaces_nest_in_second_order() {
        use crate::la::solve_dense;
        for kind in [CellKind::Tri, CellKind::Quad] {
            let lo = ReferenceElement::nedelec(kind, 1).unwrap();
            let hi = ReferenceElement::nedelec(kind, 2).unwrap();
            let rule = cell_rule(kind, 6).unwrap();
            let nh = hi.count();
            // Least squares in the L2 inner product: Gram matrix of the
            // order-2 basis and moments of each order-1 basis.
            let mut gram = DenseMat::zeros(nh, nh);
            for (p, w) in rule.iter() {
                let (vh, _) = nedelec_eval(kind, 2, p).unwrap();
                for a in 0..nh {
                    for b in 0..nh {
                        *gram.at_mut(a, b) += w * vh[a].dot(vh[b]);
                    }
                }
            }
            for lo_idx in 0..lo.count() {
                let mut rhs = vec![0.0; nh];
                for (p, w) in rule.iter() {
                    let (vh, _) = nedelec_eval(kind, 2, p).unwrap();
                    let (vl, _) = nedelec_eval(kind, 1, p).unwrap();
                    for a in 0..nh {
                        rhs[a] += w * vh[a].dot(vl[lo_idx]);
                    }
                }
                let coeff = solve_dense(&gram, &rhs).unwrap();
                // Residual of the fit at sample points.
                for (p, _) in rule.iter() {
                    let (vh, _) = nedelec_eval(kind, 2, p).unwrap();
                    let (vl, _) = nedelec_eval(kind, 1, p).unwrap();
                    let mut fit = Vec2::ZERO;
                    for a in 0..nh {
                        fit += vh[a] * coeff[a];
                    }
                    assert!(
                        (fit - vl[lo_idx]).norm() < 1e-12,
                        "{kind:?} basis {lo_idx} not in order-2 span"
                    );
                }
            }
        }
    }

    /// Tangential traces restricted to any reference edge are polynomials
    /// of degree <= k-1.
    #[test]
    fn tangential_trace_degree() {
        for (kind, order) in [
            (CellKind::Tri, 1u8),
            (CellKind::Tri, 2),
            (CellKind::Quad, 1),
            (CellKind::Quad, 2),
        ] {
            let elem = ReferenceElement::nedelec(kind, order).unwrap();
            let k = order as usize;
            for edge in 0..kind.edge_count() {
                let t = edge_tangent(kind, edge);
                let (a, b) = slot_endpoints(kind, slot_of_edge(kind, edge));
                for basis in 0..elem.count() {
                    // Fit a degree k-1 polynomial through k samples, then
                    // check further samples reproduce it.
                    let trace = |u: f64| {
                        let p = a + (b - a) * u;
                        nedelec_eval(kind, order, p).unwrap().0[basis].dot(t)
                    };
                    let residual = if k == 1 {
                        let c = trace(0.3);
                        (trace(0.77) - c).abs().max((trace(0.12) - c).abs())
                    } else {
                        let (u0, u1) = (0.2, 0.8);
                        let (f0, f1) = (trace(u0), trace(u1));
                        let lin = |u: f64| f0 + (f1 - f0) * (u - u0) / (u1 - u0);
                        (trace(0.5) - lin(0.5))
                            .abs()
                            .max((trace(0.05) - lin(0.05)).abs())
                    };
                    assert!(
                        residual < 1e-12,
                        "{kind:?} order {order} edge {edge} basis {basis}: residual {residual}"
                    );
                }
            }
        }
    }
}
