//! Element verification suite: Kronecker duality of the dof functionals,
//! reference curls against finite differences, tangential trace degrees,
//! nestedness of the first-kind spaces, physical-space unisolvence of the
//! scaled Piola transform on distorted cells, inter-element tangential
//! continuity on randomized meshes, and trace preservation under
//! refinement.
//!
//! Used by the `verify-elements` command and re-exercised by the
//! acceptance tests.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dofmap::{DofMap, PSpace};
use crate::elements::{
    edge_of_slot, nedelec_eval, slot_endpoints, DofKind, ReferenceElement,
};
use crate::error::Result;
use crate::fields::{set_constant_micro_distortion, SolutionFields};
use crate::la::{DenseMat, Mat2, Vec2};
use crate::mapping::GeometryMap;
use crate::mesh::{gen_annulus, gen_rectangle, Cell, CellKind, Mesh2D};
use crate::quadrature::unit_interval;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub family: String,
    pub check: String,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Strict-tolerance override applied to every check.
    pub tolerance_override: Option<f64>,
    /// Fault-injection hook: negates one basis function inside the
    /// duality check, to demonstrate that the suite localizes failures.
    pub negate_basis: Option<(CellKind, u8, usize)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0x5eed,
            tolerance_override: None,
            negate_basis: None,
        }
    }
}

const FAMILIES: [(CellKind, u8, &str); 4] = [
    (CellKind::Tri, 1, "NT1"),
    (CellKind::Tri, 2, "NT2"),
    (CellKind::Quad, 1, "NQ1"),
    (CellKind::Quad, 2, "NQ2"),
];

pub fn verify_elements(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let tol = |base: f64| opts.tolerance_override.unwrap_or(base);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    for &(kind, order, name) in &FAMILIES {
        report.checks.push(duality_check(kind, order, name, tol(1e-12), opts)?);
        report.checks.push(curl_fd_check(kind, order, name, tol(1e-6), &mut rng)?);
        report.checks.push(trace_degree_check(kind, order, name, tol(1e-12))?);
        report
            .checks
            .push(unisolvence_check(kind, order, name, tol(1e-10), &mut rng)?);
        report
            .checks
            .push(continuity_check(kind, order, name, tol(1e-10), &mut rng)?);
        report
            .checks
            .push(refinement_check(kind, order, name, tol(1e-10))?);
    }
    for (kind, name) in [(CellKind::Tri, "NT"), (CellKind::Quad, "NQ")] {
        report.checks.push(nestedness_check(kind, name, tol(1e-12))?);
    }
    Ok(report)
}

/// Dof functionals applied to the own basis must give the identity.
fn duality_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
    opts: &VerifyOptions,
) -> Result<CheckResult> {
    let elem = ReferenceElement::nedelec(kind, order)?;
    let n = elem.count();
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for a in 0..n {
        for b in 0..n {
            let sign = match opts.negate_basis {
                Some((k, o, idx)) if k == kind && o == order && idx == b => -1.0,
                _ => 1.0,
            };
            let val = elem.dof_functional(a, |p| {
                nedelec_eval(kind, order, p).unwrap().0[b] * sign
            })?;
            let want = if a == b { 1.0 } else { 0.0 };
            let dev = (val - want).abs();
            if dev > worst {
                worst = dev;
                detail = format!("functional {a} applied to basis {b}");
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "duality".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

/// Closed-form reference curls against central finite differences.
fn curl_fd_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CheckResult> {
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for _ in 0..20 {
        let xi = random_interior_point(kind, rng);
        let (_, curls) = nedelec_eval(kind, order, xi)?;
        let (vxp, _) = nedelec_eval(kind, order, Vec2::new(xi.x + h, xi.y))?;
        let (vxm, _) = nedelec_eval(kind, order, Vec2::new(xi.x - h, xi.y))?;
        let (vyp, _) = nedelec_eval(kind, order, Vec2::new(xi.x, xi.y + h))?;
        let (vym, _) = nedelec_eval(kind, order, Vec2::new(xi.x, xi.y - h))?;
        for i in 0..curls.len() {
            let fd = (vxp[i].y - vxm[i].y) / (2.0 * h) - (vyp[i].x - vym[i].x) / (2.0 * h);
            let dev = (fd - curls[i]).abs();
            if dev > worst {
                worst = dev;
                detail = format!("basis {i}");
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "reference-curl".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

fn random_interior_point(kind: CellKind, rng: &mut ChaCha8Rng) -> Vec2 {
    match kind {
        CellKind::Tri => {
            let a = rng.gen_range(0.05..0.9);
            let b = rng.gen_range(0.05..(0.95 - a));
            Vec2::new(a, b)
        }
        CellKind::Quad => Vec2::new(rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)),
    }
}

/// Tangential traces on reference edges are polynomials of degree k-1.
fn trace_degree_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
) -> Result<CheckResult> {
    let elem = ReferenceElement::nedelec(kind, order)?;
    let k = order as usize;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for edge in 0..kind.edge_count() {
        let t = crate::elements::edge_tangent(kind, edge);
        let (a, b) = slot_endpoints(kind, crate::elements::slot_of_edge(kind, edge));
        for basis in 0..elem.count() {
            let trace = |u: f64| -> Result<f64> {
                let p = a + (b - a) * u;
                Ok(nedelec_eval(kind, order, p)?.0[basis].dot(t))
            };
            // Interpolate through k nodes, then measure the residual at
            // off-node samples.
            let nodes: Vec<f64> = (0..k).map(|i| 0.2 + 0.6 * i as f64 / (k.max(2) - 1) as f64).collect();
            let fit = |u: f64, values: &[f64]| -> f64 {
                if k == 1 {
                    values[0]
                } else {
                    values[0] + (values[1] - values[0]) * (u - nodes[0]) / (nodes[1] - nodes[0])
                }
            };
            let values: Vec<f64> = nodes.iter().map(|&u| trace(u).unwrap()).collect();
            for &u in &[0.05, 0.5, 0.95] {
                let dev = (trace(u)? - fit(u, &values)).abs();
                if dev > worst {
                    worst = dev;
                    detail = format!("edge {edge} basis {basis}");
                }
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "trace-degree".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

/// Random valid physical cell of the given kind.
fn random_cell(kind: CellKind, rng: &mut ChaCha8Rng) -> Mesh2D {
    loop {
        let base: Vec<Vec2> = crate::elements::ref_corners(kind).to_vec();
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let scale = rng.gen_range(0.5..2.0);
        let shift = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let rot = Mat2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos());
        let corners: Vec<Vec2> = base
            .iter()
            .map(|&p| {
                let jitter = Vec2::new(rng.gen_range(-0.25..0.25), rng.gen_range(-0.25..0.25));
                rot.mul_vec(p + jitter) * scale + shift
            })
            .collect();
        let cell = Cell {
            kind,
            nodes: (0..corners.len()).collect(),
            region: 1,
        };
        if let Ok(mesh) = Mesh2D::from_parts(corners, vec![cell]) {
            return mesh;
        }
    }
}

/// Physical tangential unisolvence of the alpha/beta-scaled transform:
/// on each edge the tangential sum of that edge's bases is one, and the
/// traces of every other edge's bases (and the inner bases) vanish.
fn unisolvence_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut detail = String::new();
    let (pts, _) = unit_interval(4)?;
    for trial in 0..50 {
        let mesh = random_cell(kind, rng);
        let dofmap = DofMap::build(&mesh, PSpace::Nedelec { order })?;
        let cell = &dofmap.cells[0];
        let elem = cell.p_elem.as_ref().unwrap();
        let descs = elem.dofs();
        let geo = GeometryMap::from_cell(&mesh, 0, 2)?;
        for (slot_i, &edge_i) in mesh.cell_edges[0].iter().enumerate() {
            let tau = mesh.edges[edge_i].tangent;
            let (a_ref, b_ref) = slot_endpoints(kind, slot_i);
            for &u in &pts {
                let xi = a_ref + (b_ref - a_ref) * u;
                let map = geo.eval(xi)?;
                let (values, curls) = nedelec_eval(kind, order, xi)?;
                // Group the scaled traces by owning entity.
                for (slot_j, _) in mesh.cell_edges[0].iter().enumerate() {
                    let mut sum = 0.0;
                    for (b, desc) in descs.iter().enumerate() {
                        if *desc
                            == (DofKind::Edge {
                                slot: slot_j,
                                moment: 0,
                            })
                            || (order == 2
                                && *desc
                                    == (DofKind::Edge {
                                        slot: slot_j,
                                        moment: 1,
                                    }))
                        {
                            let (psi, _) = crate::mapping::piola_map(
                                &map,
                                cell.alpha[b],
                                cell.beta[b],
                                values[b],
                                curls[b],
                            );
                            sum += tau.dot(psi);
                        }
                    }
                    let want = if slot_i == slot_j { 1.0 } else { 0.0 };
                    let dev = (sum - want).abs();
                    if dev > worst {
                        worst = dev;
                        detail = format!(
                            "trial {trial}: edge {} traces summed on edge {}",
                            edge_of_slot(kind, slot_j),
                            edge_of_slot(kind, slot_i)
                        );
                    }
                }
                // Inner bases have no tangential trace.
                for (b, desc) in descs.iter().enumerate() {
                    if matches!(desc, DofKind::Inner(_)) {
                        let (psi, _) = crate::mapping::piola_map(
                            &map,
                            cell.alpha[b],
                            cell.beta[b],
                            values[b],
                            curls[b],
                        );
                        let dev = tau.dot(psi).abs();
                        if dev > worst {
                            worst = dev;
                            detail = format!("trial {trial}: inner basis {b} trace");
                        }
                    }
                }
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "physical-unisolvence".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

/// Evaluates `tau . P` from a given cell at a physical point on an edge.
fn tangential_trace(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    fields: &SolutionFields,
    edge: usize,
    adj_index: usize,
    u: f64,
) -> Result<Vec2> {
    let e = &mesh.edges[edge];
    let adj = e.adj[adj_index];
    let kind = mesh.cells[adj.cell].kind;
    let (a_ref, b_ref) = slot_endpoints(kind, adj.slot);
    // Cell-local fraction along its ccw traversal.
    let local = if adj.sense == 1 { u } else { 1.0 - u };
    let xi = a_ref + (b_ref - a_ref) * local;
    let state = fields.eval(adj.cell, xi)?;
    let p = state.p.expect("P space required");
    let _ = dofmap;
    Ok(p.mul_vec(e.tangent))
}

/// Inter-element tangential continuity of random dof vectors on a
/// randomly perturbed mesh.
fn continuity_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<CheckResult> {
    let base = gen_rectangle(2.0, 1.0, 4, 3, kind, None)?;
    let rect = base.perturbed(rng, 0.05)?;
    let ring = gen_annulus(3.0, 1.0, None, 3, 12, kind)?;
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for (mesh_name, mesh) in [("rectangle", &rect), ("annulus", &ring)] {
        let dofmap = DofMap::build(mesh, PSpace::Nedelec { order })?;
        let dofs: Vec<f64> = (0..dofmap.n_dofs).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fields = SolutionFields::borrowed(mesh, &dofmap, &dofs);
        for e in mesh.interior_edges() {
            for &u in &[0.123, 0.5, 0.871] {
                let a = tangential_trace(mesh, &dofmap, &fields, e, 0, u)?;
                let b = tangential_trace(mesh, &dofmap, &fields, e, 1, u)?;
                let dev = (a - b).norm();
                if dev > worst {
                    worst = dev;
                    detail = format!("{mesh_name} edge {e} at u={u}");
                }
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "tangential-continuity".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

/// Splitting a cell and re-interpolating an affine field preserves the
/// tangential traces on the retained boundary edges.
fn refinement_check(
    kind: CellKind,
    order: u8,
    name: &str,
    tolerance: f64,
) -> Result<CheckResult> {
    let g = Mat2::new(0.37, -0.21, 0.84, 0.12);
    // Parent: a mildly distorted cell; children: split through midpoints.
    let (parent_nodes, parent_cells, child_nodes, child_cells) = match kind {
        CellKind::Tri => {
            let v = [Vec2::new(0.1, 0.0), Vec2::new(1.2, 0.1), Vec2::new(0.3, 1.1)];
            let m01 = (v[0] + v[1]) * 0.5;
            let m12 = (v[1] + v[2]) * 0.5;
            let m20 = (v[2] + v[0]) * 0.5;
            let child_nodes = vec![v[0], v[1], v[2], m01, m12, m20];
            let child_cells = vec![
                Cell { kind, nodes: vec![0, 3, 5], region: 1 },
                Cell { kind, nodes: vec![3, 1, 4], region: 1 },
                Cell { kind, nodes: vec![5, 4, 2], region: 1 },
                Cell { kind, nodes: vec![3, 4, 5], region: 1 },
            ];
            (
                v.to_vec(),
                vec![Cell { kind, nodes: vec![0, 1, 2], region: 1 }],
                child_nodes,
                child_cells,
            )
        }
        CellKind::Quad => {
            let v = [
                Vec2::new(0.0, 0.0),
                Vec2::new(1.1, 0.05),
                Vec2::new(1.0, 1.2),
                Vec2::new(-0.1, 1.0),
            ];
            let m01 = (v[0] + v[1]) * 0.5;
            let m12 = (v[1] + v[2]) * 0.5;
            let m23 = (v[2] + v[3]) * 0.5;
            let m30 = (v[3] + v[0]) * 0.5;
            let center = (v[0] + v[1] + v[2] + v[3]) * 0.25;
            let child_nodes = vec![v[0], v[1], v[2], v[3], m01, m12, m23, m30, center];
            let child_cells = vec![
                Cell { kind, nodes: vec![0, 4, 8, 7], region: 1 },
                Cell { kind, nodes: vec![4, 1, 5, 8], region: 1 },
                Cell { kind, nodes: vec![8, 5, 2, 6], region: 1 },
                Cell { kind, nodes: vec![7, 8, 6, 3], region: 1 },
            ];
            (
                v.to_vec(),
                vec![Cell { kind, nodes: vec![0, 1, 2, 3], region: 1 }],
                child_nodes,
                child_cells,
            )
        }
    };
    let parent = Mesh2D::from_parts(parent_nodes, parent_cells)?;
    let child = Mesh2D::from_parts(child_nodes, child_cells)?;

    let interpolate = |mesh: &Mesh2D| -> Result<Vec<f64>> {
        let dofmap = DofMap::build(mesh, PSpace::Nedelec { order })?;
        let mut dofs = vec![0.0; dofmap.n_dofs];
        set_constant_micro_distortion(mesh, &dofmap, g, &mut dofs)?;
        Ok(dofs)
    };
    let parent_dofmap = DofMap::build(&parent, PSpace::Nedelec { order })?;
    let parent_dofs = interpolate(&parent)?;
    let parent_fields = SolutionFields::borrowed(&parent, &parent_dofmap, &parent_dofs);
    let child_dofmap = DofMap::build(&child, PSpace::Nedelec { order })?;
    let child_dofs = interpolate(&child)?;
    let child_fields = SolutionFields::borrowed(&child, &child_dofmap, &child_dofs);

    // Compare tau . P on the parent boundary (retained geometry) from
    // both discretizations against each other.
    let mut worst = 0.0f64;
    let mut detail = String::new();
    let parent_locator = crate::fields::PointLocator::new(&parent);
    let child_locator = crate::fields::PointLocator::new(&child);
    for e in 0..parent.edges.len() {
        let edge = &parent.edges[e];
        let a = parent.nodes[edge.nodes[0]];
        let b = parent.nodes[edge.nodes[1]];
        for &u in &[0.21, 0.43, 0.77] {
            let x = a + (b - a) * u;
            let (pc, pxi) = parent_locator.locate_one(x, 1e-9)?;
            let (cc, cxi) = child_locator.locate_one(x, 1e-9)?;
            let tp = parent_fields.eval(pc, pxi)?.p.unwrap().mul_vec(edge.tangent);
            let tc = child_fields.eval(cc, cxi)?.p.unwrap().mul_vec(edge.tangent);
            let want = g.mul_vec(edge.tangent);
            for (label, v) in [("parent", tp), ("child", tc)] {
                let dev = (v - want).norm();
                if dev > worst {
                    worst = dev;
                    detail = format!("{label} trace on edge {e} at u={u}");
                }
            }
        }
    }
    Ok(CheckResult {
        family: name.into(),
        check: "refinement-trace".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

/// Order-1 bases lie exactly in the order-2 span (nested spaces).
fn nestedness_check(kind: CellKind, prefix: &str, tolerance: f64) -> Result<CheckResult> {
    use crate::la::solve_dense;
    use crate::quadrature::cell_rule;
    let lo = ReferenceElement::nedelec(kind, 1)?;
    let hi = ReferenceElement::nedelec(kind, 2)?;
    let rule = cell_rule(kind, 6)?;
    let nh = hi.count();
    let mut gram = DenseMat::zeros(nh, nh);
    for (p, w) in rule.iter() {
        let (vh, _) = nedelec_eval(kind, 2, p)?;
        for a in 0..nh {
            for b in 0..nh {
                *gram.at_mut(a, b) += w * vh[a].dot(vh[b]);
            }
        }
    }
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for lo_idx in 0..lo.count() {
        let mut rhs = vec![0.0; nh];
        for (p, w) in rule.iter() {
            let (vh, _) = nedelec_eval(kind, 2, p)?;
            let (vl, _) = nedelec_eval(kind, 1, p)?;
            for a in 0..nh {
                rhs[a] += w * vh[a].dot(vl[lo_idx]);
            }
        }
        let coeff = solve_dense(&gram, &rhs)
            .ok_or_else(|| crate::error::Error::Element("singular Gram matrix".into()))?;
        for (p, _) in rule.iter() {
            let (vh, _) = nedelec_eval(kind, 2, p)?;
            let (vl, _) = nedelec_eval(kind, 1, p)?;
            let mut fit = Vec2::ZERO;
            for a in 0..nh {
                fit += vh[a] * coeff[a];
            }
            let dev = (fit - vl[lo_idx]).norm();
            if dev > worst {
                worst = dev;
                detail = format!("order-1 basis {lo_idx}");
            }
        }
    }
    Ok(CheckResult {
        family: format!("{prefix}1-in-{prefix}2"),
        check: "nestedness".into(),
        max_deviation: worst,
        tolerance,
        detail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes() {
        let report = verify_elements(&VerifyOptions::default()).unwrap();
        for check in &report.checks {
            assert!(
                check.passed(),
                "{} / {}: deviation {} > {} ({})",
                check.family,
                check.check,
                check.max_deviation,
                check.tolerance,
                check.detail
            );
        }
    }

    #[test]
    fn negated_basis_is_localized_to_its_edge() {
        let opts = VerifyOptions {
            negate_basis: Some((CellKind::Tri, 1, 2)),
            ..Default::default()
        };
        let report = verify_elements(&opts).unwrap();
        let failures = report.failures();
        assert!(!failures.is_empty());
        let duality_failure = failures
            .iter()
            .find(|c| c.check == "duality" && c.family == "NT1")
            .expect("duality must fail for the negated basis");
        assert!(
            duality_failure.detail.contains("basis 2"),
            "{}",
            duality_failure.detail
        );
    }

    #[test]
    fn strict_tolerance_reports_expected_failures() {
        let opts = VerifyOptions {
            tolerance_override: Some(1e-15),
            ..Default::default()
        };
        let report = verify_elements(&opts).unwrap();
        // The finite-difference curl comparison cannot meet 1e-15.
        assert!(report
            .failures()
            .iter()
            .any(|c| c.check == "reference-curl"));
    }
}
