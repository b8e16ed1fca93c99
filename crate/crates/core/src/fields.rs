//! Solution field evaluation and derived quantities: displacement
//! gradient, restored micro-distortion tensor and its row curl, force
//! stress, micro-stress, moment stress and energy density.

use crate::assembly::{Loads, MaterialModel, RegionMaterials};
use crate::dofmap::DofMap;
use crate::elements::{lagrange_eval, nedelec_eval, Family};
use crate::error::{Error, Result};
use crate::la::{Mat2, Vec2};
use crate::mapping::{map_scalar_gradient, piola_map, GeometryMap};
use crate::materials::{ElasticityTensor2D, IsotropicParams};
use crate::mesh::{CellKind, Mesh2D};
use crate::quadrature::cell_rule;

/// A solved (or manufactured) dof vector bound to its discretization.
pub struct SolutionFields<'a> {
    pub mesh: &'a Mesh2D,
    pub dofmap: &'a DofMap,
    pub dofs: std::borrow::Cow<'a, [f64]>,
    pub geometry_order: u8,
}

/// Field values at one point of one cell.
#[derive(Clone, Copy, Debug)]
pub struct FieldState {
    pub x: Vec2,
    pub u: Vec2,
    pub grad_u: Mat2,
    /// None in displacement-only (elastic) runs.
    pub p: Option<Mat2>,
    /// Row-wise scalar curls (curl2D P^1, curl2D P^2).
    pub curl_p: Option<Vec2>,
}

/// Stress conjugates and energy density at a point.
#[derive(Clone, Copy, Debug)]
pub struct StressState {
    pub sigma: Mat2,
    pub sigma_micro: Mat2,
    /// Active moment stress components (m_13, m_23).
    pub m: Vec2,
    pub w: f64,
}

impl<'a> SolutionFields<'a> {
    pub fn new(mesh: &'a Mesh2D, dofmap: &'a DofMap, dofs: Vec<f64>) -> Self {
        assert_eq!(dofs.len(), dofmap.n_dofs);
        SolutionFields {
            mesh,
            dofmap,
            dofs: std::borrow::Cow::Owned(dofs),
            geometry_order: 2,
        }
    }

    pub fn borrowed(mesh: &'a Mesh2D, dofmap: &'a DofMap, dofs: &'a [f64]) -> Self {
        assert_eq!(dofs.len(), dofmap.n_dofs);
        SolutionFields {
            mesh,
            dofmap,
            dofs: std::borrow::Cow::Borrowed(dofs),
            geometry_order: 2,
        }
    }

    pub fn eval(&self, cell_id: usize, xi: Vec2) -> Result<FieldState> {
        let cell = &self.dofmap.cells[cell_id];
        let kind = self.mesh.cells[cell_id].kind;
        let geo = GeometryMap::from_cell(self.mesh, cell_id, self.geometry_order)?;
        let map = geo.eval(xi)?;

        let (u_values, u_grads_ref) = lagrange_eval(kind, cell.u_elem.order, xi)?;
        let mut u = Vec2::ZERO;
        let mut grad_u = Mat2::ZERO;
        for (node, (&nv, &gr)) in u_values.iter().zip(&u_grads_ref).enumerate() {
            let g = map_scalar_gradient(&map, gr);
            let d = Vec2::new(
                self.dofs[cell.u_dofs[2 * node]],
                self.dofs[cell.u_dofs[2 * node + 1]],
            );
            u += d * nv;
            grad_u = grad_u + Mat2::outer(d, g);
        }

        let (p, curl_p) = match &cell.p_elem {
            None => (None, None),
            Some(elem) if elem.family == Family::Lagrange => {
                let (values, grads_ref) = lagrange_eval(kind, elem.order, xi)?;
                let mut p = Mat2::ZERO;
                let mut curl = Vec2::ZERO;
                for node in 0..values.len() {
                    let g = map_scalar_gradient(&map, grads_ref[node]);
                    for row in 0..2 {
                        for col in 0..2 {
                            let d = self.dofs[cell.p_dofs[4 * node + 2 * row + col]];
                            p.a[row][col] += d * values[node];
                            let c = if col == 0 { -g.y } else { g.x };
                            if row == 0 {
                                curl.x += d * c;
                            } else {
                                curl.y += d * c;
                            }
                        }
                    }
                }
                (Some(p), Some(curl))
            }
            Some(elem) => {
                let (values, curls_ref) = nedelec_eval(kind, elem.order, xi)?;
                let mut p = Mat2::ZERO;
                let mut curl = Vec2::ZERO;
                for b in 0..values.len() {
                    let (psi, curl_psi) =
                        piola_map(&map, cell.alpha[b], cell.beta[b], values[b], curls_ref[b]);
                    let d = Vec2::new(
                        self.dofs[cell.p_dofs[2 * b]],
                        self.dofs[cell.p_dofs[2 * b + 1]],
                    );
                    // P += d (x) psi
                    p = p + Mat2::outer(d, psi);
                    curl += d * curl_psi;
                }
                (Some(p), Some(curl))
            }
        };

        Ok(FieldState {
            x: map.x,
            u,
            grad_u,
            p,
            curl_p,
        })
    }
}

/// Force stress, micro-stress, moment stress and energy density of a
/// micromorphic state.
pub fn stresses_at(state: &FieldState, params: &IsotropicParams) -> Result<StressState> {
    let p = state
        .p
        .ok_or_else(|| Error::Sampling("state carries no micro-distortion field".into()))?;
    let curl = state
        .curl_p
        .ok_or_else(|| Error::Sampling("state carries no curl field".into()))?;
    let e = state.grad_u - p;
    let c_e = params.c_e();
    let c_micro = params.c_micro();
    let sigma = c_e.apply(e.sym()) + e.skew() * (2.0 * params.mu_c);
    let sigma_micro = c_micro.apply(p.sym());
    let moment = params.moment_modulus();
    let m = curl * moment;
    let skew_off = e.skew().a[0][1];
    let w = 0.5
        * (c_e.quad_form(e, e)
            + c_micro.quad_form(p, p)
            + 4.0 * params.mu_c * skew_off * skew_off
            + moment * curl.dot(curl));
    Ok(StressState {
        sigma,
        sigma_micro,
        m,
        w,
    })
}

/// Stress and energy density of a displacement-only state under a given
/// elasticity tensor.
pub fn elastic_stress(state: &FieldState, tensor: &ElasticityTensor2D) -> (Mat2, f64) {
    let e = state.grad_u.sym();
    (tensor.apply(e), 0.5 * tensor.quad_form(e, e))
}

/// Energy split of the total potential, one entry per energy term.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct EnergySplit {
    pub elastic: f64,
    pub micro: f64,
    pub coupling: f64,
    pub curvature: f64,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.elastic + self.micro + self.coupling + self.curvature
    }
}

/// Total potential by quadrature: the stored energy minus the work of
/// the given loads (all shipped studies use zero loads).
pub fn total_potential(
    fields: &SolutionFields,
    materials: &RegionMaterials,
    loads: &Loads,
    quad_degree: usize,
) -> Result<(f64, EnergySplit)> {
    let mut split = EnergySplit::default();
    let mut work = 0.0;
    for cell_id in 0..fields.mesh.cells.len() {
        let kind = fields.mesh.cells[cell_id].kind;
        let geo = GeometryMap::from_cell(fields.mesh, cell_id, fields.geometry_order)?;
        let rule = cell_rule(kind, quad_degree)?;
        let model = materials.get(fields.mesh.cells[cell_id].region)?;
        for (xi, w) in rule.iter() {
            let map = geo.eval(xi)?;
            let state = fields.eval(cell_id, xi)?;
            let scale = w * map.det;
            match model {
                MaterialModel::Micromorphic(params) => {
                    let p = state.p.expect("micromorphic run has P");
                    let curl = state.curl_p.expect("micromorphic run has curl P");
                    let e = state.grad_u - p;
                    let skew_off = e.skew().a[0][1];
                    split.elastic += 0.5 * scale * params.c_e().quad_form(e, e);
                    split.micro += 0.5 * scale * params.c_micro().quad_form(p, p);
                    split.coupling += 0.5 * scale * 4.0 * params.mu_c * skew_off * skew_off;
                    split.curvature +=
                        0.5 * scale * params.moment_modulus() * curl.dot(curl);
                    if let Some(bm) = loads.body_moment {
                        work += scale * bm(state.x).ddot(&p);
                    }
                }
                MaterialModel::Elastic(tensor) => {
                    let e = state.grad_u.sym();
                    split.elastic += 0.5 * scale * tensor.quad_form(e, e);
                }
            }
            if let Some(bf) = loads.body_force {
                work += scale * bf(state.x).dot(state.u);
            }
        }
    }
    if !loads.tractions.is_empty() {
        let (pts, wts) = crate::quadrature::unit_interval(4)?;
        for (tag, traction) in &loads.tractions {
            for e in fields.mesh.tagged_edges(tag) {
                let edge = &fields.mesh.edges[e];
                let adj = edge.adj[0];
                let kind = fields.mesh.cells[adj.cell].kind;
                let (a_ref, b_ref) = crate::elements::slot_endpoints(kind, adj.slot);
                for (&u, &w) in pts.iter().zip(&wts) {
                    let xi = a_ref + (b_ref - a_ref) * u;
                    let state = fields.eval(adj.cell, xi)?;
                    work += w * edge.length * traction(state.x).dot(state.u);
                }
            }
        }
    }
    Ok((split.total() - work, split))
}

/// Writes the affine displacement `u(x) = G x` into the u dofs.
pub fn set_affine_displacement(dofmap: &DofMap, g: Mat2, dofs: &mut [f64]) {
    for (n, &x) in dofmap.u_node_coords.iter().enumerate() {
        let u = g.mul_vec(x);
        dofs[dofmap.u_dof(n, 0)] = u.x;
        dofs[dofmap.u_dof(n, 1)] = u.y;
    }
}

/// Writes P dofs so the interpolant reproduces the constant tensor `G`
/// exactly (constants lie in every supported P space).
pub fn set_constant_micro_distortion(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    g: Mat2,
    dofs: &mut [f64],
) -> Result<()> {
    match dofmap.p_space {
        crate::dofmap::PSpace::None => Ok(()),
        crate::dofmap::PSpace::Nodal { .. } => {
            for n in 0..dofmap.u_node_coords.len() {
                if let Some(pd) = dofmap.nodal_p_dofs(n) {
                    for row in 0..2 {
                        for col in 0..2 {
                            dofs[pd[2 * row + col]] = g.a[row][col];
                        }
                    }
                }
            }
            Ok(())
        }
        crate::dofmap::PSpace::Nedelec { order } => {
            let k = order as usize;
            for (e, edge) in mesh.edges.iter().enumerate() {
                let gt = g.mul_vec(edge.tangent);
                for moment in 0..k {
                    // Constant tangential data: every dual edge weight
                    // integrates to the plain tangential value.
                    dofs[dofmap.nedelec_edge_dof(e, moment, 0)] = gt.x;
                    dofs[dofmap.nedelec_edge_dof(e, moment, 1)] = gt.y;
                }
            }
            if k == 2 {
                // Inner dofs: reference functionals of the Piola pullback
                // of each constant row.
                use crate::elements::DofKind;
                for (cell_id, cell) in dofmap.cells.iter().enumerate() {
                    let elem = cell.p_elem.as_ref().unwrap();
                    let geo = GeometryMap::from_cell(mesh, cell_id, 2)?;
                    for (b, desc) in elem.dofs().iter().enumerate() {
                        if let DofKind::Inner(i) = desc {
                            for row in 0..2 {
                                let g_row = Vec2::new(g.a[row][0], g.a[row][1]);
                                let val = elem.inner_dof_functional(*i, |xi| {
                                    let map = geo.eval(xi).unwrap();
                                    map.jacobian.transpose().mul_vec(g_row)
                                })?;
                                dofs[cell.p_dofs[2 * b + row]] = val;
                            }
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

/// Locates query points inside cells by inverse mapping with a
/// bounding-box prefilter; O(cells) per query, which is fine at desk
/// scale.
pub struct PointLocator<'a> {
    mesh: &'a Mesh2D,
    boxes: Vec<(Vec2, Vec2)>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh2D) -> Self {
        let boxes = (0..mesh.cells.len())
            .map(|c| {
                let coords = mesh.corner_coords(c);
                let mut lo = coords[0];
                let mut hi = coords[0];
                for p in &coords[1..] {
                    lo.x = lo.x.min(p.x);
                    lo.y = lo.y.min(p.y);
                    hi.x = hi.x.max(p.x);
                    hi.y = hi.y.max(p.y);
                }
                (lo, hi)
            })
            .collect();
        PointLocator { mesh, boxes }
    }

    /// Every (cell, reference point) containing `p` within the reference
    /// tolerance; points on shared edges report all adjacent cells.
    pub fn locate_all(&self, p: Vec2, tol: f64) -> Vec<(usize, Vec2)> {
        let mut out = Vec::new();
        for (c, (lo, hi)) in self.boxes.iter().enumerate() {
            let pad = 1e-9 * (hi.x - lo.x + hi.y - lo.y).max(1.0) + tol;
            if p.x < lo.x - pad || p.x > hi.x + pad || p.y < lo.y - pad || p.y > hi.y + pad {
                continue;
            }
            if let Some(xi) = self.invert(c, p, tol) {
                out.push((c, xi));
            }
        }
        out
    }

    pub fn locate_one(&self, p: Vec2, tol: f64) -> Result<(usize, Vec2)> {
        self.locate_all(p, tol)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Sampling(format!("point ({}, {}) is outside the mesh", p.x, p.y)))
    }

    fn invert(&self, cell: usize, p: Vec2, tol: f64) -> Option<Vec2> {
        let coords = self.mesh.corner_coords(cell);
        match self.mesh.cells[cell].kind {
            CellKind::Tri => {
                let a = Mat2::new(
                    coords[1].x - coords[0].x,
                    coords[2].x - coords[0].x,
                    coords[1].y - coords[0].y,
                    coords[2].y - coords[0].y,
                );
                let xi = a.inverse()?.mul_vec(p - coords[0]);
                (xi.x >= -tol && xi.y >= -tol && xi.x + xi.y <= 1.0 + tol).then_some(xi)
            }
            CellKind::Quad => {
                // Newton on the bilinear corner map.
                let mut xi = Vec2::ZERO;
                for _ in 0..30 {
                    let (values, grads) = lagrange_eval(CellKind::Quad, 1, xi).ok()?;
                    let mut x = Vec2::ZERO;
                    let mut j = Mat2::ZERO;
                    for (i, &c) in coords.iter().enumerate() {
                        x += c * values[i];
                        j = j + Mat2::outer(c, grads[i]);
                    }
                    let r = p - x;
                    if r.norm() < 1e-14 * (1.0 + p.norm()) {
                        break;
                    }
                    let step = j.inverse()?.mul_vec(r);
                    xi += step;
                    if step.norm() < 1e-15 {
                        break;
                    }
                }
                (xi.x.abs() <= 1.0 + tol && xi.y.abs() <= 1.0 + tol).then_some(xi)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofmap::PSpace;
    use crate::materials::rect_study_materials;
    use crate::mesh::gen_rectangle;

    /// Manufactured affine state: u with constant gradient G and P = G.
    fn affine_state<'a>(
        mesh: &'a Mesh2D,
        dofmap: &'a DofMap,
        g: Mat2,
    ) -> SolutionFields<'a> {
        let mut dofs = vec![0.0; dofmap.n_dofs];
        set_affine_displacement(dofmap, g, &mut dofs);
        set_constant_micro_distortion(mesh, dofmap, g, &mut dofs).unwrap();
        SolutionFields::new(mesh, dofmap, dofs)
    }

    #[test]
    fn compatible_affine_state_has_zero_force_stress() {
        let g = Mat2::new(0.01, 0.004, -0.002, 0.007);
        let (m1, _) = rect_study_materials();
        for p_space in [
            PSpace::Nodal { order: 1 },
            PSpace::Nodal { order: 2 },
            PSpace::Nedelec { order: 1 },
            PSpace::Nedelec { order: 2 },
        ] {
            let mesh = gen_rectangle(2.0, 1.0, 3, 2, CellKind::Tri, None).unwrap();
            let dofmap = DofMap::build(&mesh, p_space).unwrap();
            let fields = affine_state(&mesh, &dofmap, g);
            for cell in 0..mesh.cells.len() {
                let state = fields.eval(cell, Vec2::new(0.3, 0.2)).unwrap();
                let stress = stresses_at(&state, &m1).unwrap();
                assert!(
                    stress.sigma.norm() < 1e-10,
                    "{p_space:?}: sigma {:?}",
                    stress.sigma
                );
                let want = 0.5 * m1.c_micro().quad_form(g, g);
                assert!((stress.w - want).abs() < 1e-10 * want.max(1.0));
                assert!((state.p.unwrap() - g).norm() < 1e-10);
                assert!(state.curl_p.unwrap().norm() < 1e-9);
            }
        }
    }

    #[test]
    fn point_locator_reports_both_sides_of_shared_edges() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 1, CellKind::Quad, Some(1.0)).unwrap();
        let locator = PointLocator::new(&mesh);
        let hits = locator.locate_all(Vec2::new(1.0, 0.5), 1e-9);
        assert_eq!(hits.len(), 2);
        let inside = locator.locate_all(Vec2::new(0.5, 0.5), 1e-9);
        assert_eq!(inside.len(), 1);
        assert!(locator.locate_one(Vec2::new(5.0, 0.5), 1e-9).is_err());
    }
}
