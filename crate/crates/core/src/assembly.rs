//! Element integration of the quadratic energy density and global
//! assembly of the sparse symmetric stiffness.
//!
//! The energy density per unit volume is
//!
//! ```text
//! W = 1/2 [ sym(grad u - P) : C_e : sym(grad u - P)
//!         + sym P : C_micro : sym P
//!         + skew(grad u - P) : C_c : skew(grad u - P)
//!         + mu Lc^2 curl2D P . curl2D P ]
//! ```
//!
//! with `C_c : skew A = 2 mu_c skew A` and the curl acting row-wise
//! (single out-of-plane component per row in 2D). Body force, body
//! moment and traction terms are carried as general load integrals; all
//! shipped studies use zero loads.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::dofmap::{CellDofs, DofMap};
use crate::elements::{lagrange_eval, nedelec_eval};
use crate::error::{Error, Result};
use crate::la::{DenseMat, Mat2, Vec2};
use crate::mapping::{map_scalar_gradient, piola_map, GeometryMap, MapEval};
use crate::materials::{ElasticityTensor2D, IsotropicParams};
use crate::mesh::Mesh2D;
use crate::quadrature::{cell_rule, unit_interval};
use crate::sparse::CsrMatrix;

/// Constitutive model of one region.
#[derive(Clone, Debug)]
pub enum MaterialModel {
    Micromorphic(IsotropicParams),
    Elastic(ElasticityTensor2D),
}

/// Region id -> material.
#[derive(Clone, Debug, Default)]
pub struct RegionMaterials {
    map: BTreeMap<u32, MaterialModel>,
}

impl RegionMaterials {
    pub fn micromorphic(pairs: &[(u32, IsotropicParams)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (region, params) in pairs {
            params.validate()?;
            map.insert(*region, MaterialModel::Micromorphic(*params));
        }
        Ok(RegionMaterials { map })
    }

    pub fn elastic(pairs: &[(u32, ElasticityTensor2D)]) -> Self {
        let mut map = BTreeMap::new();
        for (region, tensor) in pairs {
            map.insert(*region, MaterialModel::Elastic(*tensor));
        }
        RegionMaterials { map }
    }

    pub fn get(&self, region: u32) -> Result<&MaterialModel> {
        self.map
            .get(&region)
            .ok_or_else(|| Error::Parameter(format!("no material for region {region}")))
    }

    pub fn micromorphic_params(&self, region: u32) -> Result<&IsotropicParams> {
        match self.get(region)? {
            MaterialModel::Micromorphic(p) => Ok(p),
            MaterialModel::Elastic(_) => Err(Error::Parameter(format!(
                "region {region} is elastic, expected micromorphic"
            ))),
        }
    }

    /// Applies an override of the characteristic length to every region.
    pub fn with_l_c(&self, l_c: f64) -> Self {
        let mut map = self.map.clone();
        for model in map.values_mut() {
            if let MaterialModel::Micromorphic(p) = model {
                p.l_c = l_c;
            }
        }
        RegionMaterials { map }
    }
}

/// Optional load data; `None` entries mean zero.
#[derive(Default)]
pub struct Loads<'a> {
    pub body_force: Option<&'a (dyn Fn(Vec2) -> Vec2 + Sync)>,
    pub body_moment: Option<&'a (dyn Fn(Vec2) -> Mat2 + Sync)>,
    /// Boundary tag -> traction vector field.
    pub tractions: Vec<(String, &'a (dyn Fn(Vec2) -> Vec2 + Sync))>,
}

#[derive(Clone, Copy, Debug)]
pub struct AssembleOptions {
    /// Quadrature degree; defaults to 2k+2 = 6 for the quadratic
    /// displacement space.
    pub quad_degree: usize,
    pub geometry_order: u8,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            quad_degree: 6,
            geometry_order: 2,
        }
    }
}

pub struct LinearSystem {
    pub k: CsrMatrix,
    pub f: Vec<f64>,
}

/// Per-dof generalized strain at one quadrature point.
#[derive(Clone, Copy)]
struct DofStrain {
    value_u: Vec2,
    value_p: Mat2,
    e_sym: Mat2,
    e_skew_off: f64,
    p_sym: Mat2,
    curl: Vec2,
}

/// Evaluates the per-dof field derivatives of a cell at one mapped
/// quadrature point. Layout: u dofs then P dofs, matching `CellDofs`.
fn dof_strains(
    cell: &CellDofs,
    map: &MapEval,
    xi: Vec2,
) -> Result<Vec<DofStrain>> {
    let mut out = Vec::with_capacity(cell.u_dofs.len() + cell.p_dofs.len());
    let kind = cell.u_elem.kind;
    let (u_values, u_grads_ref) = lagrange_eval(kind, cell.u_elem.order, xi)?;
    for (node, &n_ref) in u_grads_ref.iter().enumerate() {
        let g = map_scalar_gradient(map, n_ref);
        for comp in 0..2 {
            let e = if comp == 0 {
                Vec2::new(1.0, 0.0)
            } else {
                Vec2::new(0.0, 1.0)
            };
            let grad_u = Mat2::outer(e, g);
            out.push(DofStrain {
                value_u: e * u_values[node],
                value_p: Mat2::ZERO,
                e_sym: grad_u.sym(),
                e_skew_off: grad_u.skew().a[0][1],
                p_sym: Mat2::ZERO,
                curl: Vec2::ZERO,
            });
        }
    }
    if let Some(p_elem) = &cell.p_elem {
        match p_elem.family {
            crate::elements::Family::Lagrange => {
                let (values, grads_ref) = lagrange_eval(kind, p_elem.order, xi)?;
                for node in 0..values.len() {
                    let g = map_scalar_gradient(map, grads_ref[node]);
                    for row in 0..2 {
                        for col in 0..2 {
                            let mut p = Mat2::ZERO;
                            p.a[row][col] = values[node];
                            let mut curl = Vec2::ZERO;
                            // curl2D P^row = P_row2,1 - P_row1,2
                            let c = if col == 0 { -g.y } else { g.x };
                            if row == 0 {
                                curl.x = c;
                            } else {
                                curl.y = c;
                            }
                            out.push(DofStrain {
                                value_u: Vec2::ZERO,
                                value_p: p,
                                e_sym: (Mat2::ZERO - p).sym(),
                                e_skew_off: (Mat2::ZERO - p).skew().a[0][1],
                                p_sym: p.sym(),
                                curl,
                            });
                        }
                    }
                }
            }
            crate::elements::Family::Nedelec => {
                let (values, curls_ref) = nedelec_eval(kind, p_elem.order, xi)?;
                for b in 0..values.len() {
                    let (psi, curl_psi) =
                        piola_map(map, cell.alpha[b], cell.beta[b], values[b], curls_ref[b]);
                    for row in 0..2 {
                        let e = if row == 0 {
                            Vec2::new(1.0, 0.0)
                        } else {
                            Vec2::new(0.0, 1.0)
                        };
                        let p = Mat2::outer(e, psi);
                        let curl = e * curl_psi;
                        out.push(DofStrain {
                            value_u: Vec2::ZERO,
                            value_p: p,
                            e_sym: (Mat2::ZERO - p).sym(),
                            e_skew_off: (Mat2::ZERO - p).skew().a[0][1],
                            p_sym: p.sym(),
                            curl,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Element stiffness and body-load vector of one cell.
pub fn element_stiffness(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    cell_id: usize,
    model: &MaterialModel,
    loads: &Loads,
    opts: &AssembleOptions,
) -> Result<(DenseMat, Vec<f64>)> {
    let cell = &dofmap.cells[cell_id];
    let kind = mesh.cells[cell_id].kind;
    let geo = GeometryMap::from_cell(mesh, cell_id, opts.geometry_order)?;
    let rule = cell_rule(kind, opts.quad_degree)?;

    let n = dofmap.cell_dof_count(cell_id);
    let mut k = DenseMat::zeros(n, n);
    let mut f = vec![0.0; n];

    for (xi, w) in rule.iter() {
        let map = geo.eval(xi)?;
        let strains = dof_strains(cell, &map, xi)?;
        let scale = w * map.det;
        match model {
            MaterialModel::Micromorphic(m) => {
                let c_e = m.c_e();
                let c_micro = m.c_micro();
                let mu_c4 = 4.0 * m.mu_c;
                let moment = m.moment_modulus();
                for a in 0..n {
                    let sa = &strains[a];
                    for b in a..n {
                        let sb = &strains[b];
                        let val = c_e.quad_form(sa.e_sym, sb.e_sym)
                            + c_micro.quad_form(sa.p_sym, sb.p_sym)
                            + mu_c4 * sa.e_skew_off * sb.e_skew_off
                            + moment * sa.curl.dot(sb.curl);
                        *k.at_mut(a, b) += scale * val;
                    }
                }
            }
            MaterialModel::Elastic(c) => {
                for a in 0..n {
                    let sa = &strains[a];
                    for b in a..n {
                        let sb = &strains[b];
                        *k.at_mut(a, b) += scale * c.quad_form(sa.e_sym, sb.e_sym);
                    }
                }
            }
        }
        if loads.body_force.is_some() || loads.body_moment.is_some() {
            let bf = loads.body_force.map(|g| g(map.x));
            let bm = loads.body_moment.map(|g| g(map.x));
            for a in 0..n {
                let sa = &strains[a];
                if let Some(bf) = bf {
                    f[a] += scale * bf.dot(sa.value_u);
                }
                if let Some(bm) = bm {
                    f[a] += scale * bm.ddot(&sa.value_p);
                }
            }
        }
    }
    // Mirror the upper triangle for exact symmetry.
    for a in 0..n {
        for b in 0..a {
            *k.at_mut(a, b) = k.at(b, a);
        }
    }
    Ok((k, f))
}

/// Assembles the global system. Element integration runs in parallel;
/// the scatter is sequential in cell order, so the result is
/// deterministic.
pub fn assemble(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    materials: &RegionMaterials,
    loads: &Loads,
    opts: &AssembleOptions,
) -> Result<LinearSystem> {
    let locals: Vec<(DenseMat, Vec<f64>)> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| {
            let model = materials.get(mesh.cells[c].region)?;
            element_stiffness(mesh, dofmap, c, model, loads, opts)
        })
        .collect::<Result<_>>()?;

    let nnz_estimate: usize = locals.iter().map(|(k, _)| k.rows * k.cols).sum();
    let mut triplets = Vec::with_capacity(nnz_estimate);
    let mut f = vec![0.0; dofmap.n_dofs];
    for (c, (ke, fe)) in locals.iter().enumerate() {
        let gdofs = dofmap.cell_global_dofs(c);
        for (a, &ga) in gdofs.iter().enumerate() {
            f[ga] += fe[a];
            for (b, &gb) in gdofs.iter().enumerate() {
                let v = ke.at(a, b);
                if v != 0.0 {
                    triplets.push((ga, gb, v));
                }
            }
        }
    }
    let k = CsrMatrix::from_triplets(dofmap.n_dofs, dofmap.n_dofs, &mut triplets);
    drop(triplets);

    let mut system = LinearSystem { k, f };
    assemble_tractions(mesh, dofmap, loads, opts, &mut system.f)?;
    Ok(system)
}

/// Adds boundary traction contributions to the load vector.
fn assemble_tractions(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    loads: &Loads,
    opts: &AssembleOptions,
    f: &mut [f64],
) -> Result<()> {
    if loads.tractions.is_empty() {
        return Ok(());
    }
    let (pts, wts) = unit_interval(4)?;
    for (tag, traction) in &loads.tractions {
        let edges = mesh.tagged_edges(tag);
        if edges.is_empty() {
            return Err(Error::Parameter(format!("unknown boundary tag '{tag}'")));
        }
        for e in edges {
            let edge = &mesh.edges[e];
            let adj = edge.adj[0];
            let cell = &dofmap.cells[adj.cell];
            let kind = mesh.cells[adj.cell].kind;
            let (a_ref, b_ref) = crate::elements::slot_endpoints(kind, adj.slot);
            let geo = GeometryMap::from_cell(mesh, adj.cell, opts.geometry_order)?;
            for (&u, &w) in pts.iter().zip(&wts) {
                // Traverse the reference edge in the cell's ccw sense; the
                // measure is direction-independent.
                let xi = a_ref + (b_ref - a_ref) * u;
                let x = geo.position(xi);
                let t = traction(x);
                let (values, _) = lagrange_eval(kind, 2, xi)?;
                for (node, &nv) in values.iter().enumerate() {
                    for comp in 0..2 {
                        f[cell.u_dofs[2 * node + comp]] +=
                            w * edge.length * t.comp(comp) * nv;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dofmap::{DofMap, PSpace};
    use crate::materials::rect_study_materials;
    use crate::mesh::{gen_rectangle, CellKind};

    fn unit_quad_system(p_space: PSpace) -> (Mesh2D, DofMap, LinearSystem) {
        let mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::Quad, None).unwrap();
        let dofmap = DofMap::build(&mesh, p_space).unwrap();
        let (m1, _) = rect_study_materials();
        let materials = RegionMaterials::micromorphic(&[(1, m1)]).unwrap();
        let system = assemble(
            &mesh,
            &dofmap,
            &materials,
            &Loads::default(),
            &AssembleOptions::default(),
        )
        .unwrap();
        (mesh, dofmap, system)
    }

    #[test]
    fn zero_fields_zero_residual() {
        let (_, dofmap, system) = unit_quad_system(PSpace::Nedelec { order: 1 });
        let x = vec![0.0; dofmap.n_dofs];
        let r = system.k.mul_vec(&x);
        assert!(r.iter().all(|&v| v == 0.0));
        assert!(system.f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn global_matrix_is_symmetric() {
        for p_space in [
            PSpace::Nedelec { order: 1 },
            PSpace::Nedelec { order: 2 },
            PSpace::None,
        ] {
            let (_, _, system) = unit_quad_system(p_space);
            let scale = system.k.max_abs();
            assert!(system.k.max_asymmetry() <= 1e-12 * scale);
        }
    }

    #[test]
    fn single_cell_assembly_matches_element_matrix() {
        let mesh = gen_rectangle(1.0, 1.0, 1, 1, CellKind::Quad, None).unwrap();
        let dofmap = DofMap::build(&mesh, PSpace::Nedelec { order: 2 }).unwrap();
        let (m1, _) = rect_study_materials();
        let materials = RegionMaterials::micromorphic(&[(1, m1)]).unwrap();
        let opts = AssembleOptions::default();
        let system = assemble(&mesh, &dofmap, &materials, &Loads::default(), &opts).unwrap();
        let (ke, _) = element_stiffness(
            &mesh,
            &dofmap,
            0,
            materials.get(1).unwrap(),
            &Loads::default(),
            &opts,
        )
        .unwrap();
        let gdofs = dofmap.cell_global_dofs(0);
        for (a, &ga) in gdofs.iter().enumerate() {
            for (b, &gb) in gdofs.iter().enumerate() {
                assert!((system.k.get(ga, gb) - ke.at(a, b)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stiffness_scales_linearly_with_moduli() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 1, CellKind::Quad, Some(1.0)).unwrap();
        let dofmap = DofMap::build(&mesh, PSpace::Nedelec { order: 1 }).unwrap();
        let (m1, m2) = rect_study_materials();
        let scale_params = |p: &IsotropicParams, c: f64| IsotropicParams {
            lambda_micro: c * p.lambda_micro,
            mu_micro: c * p.mu_micro,
            lambda_e: c * p.lambda_e,
            mu_e: c * p.mu_e,
            mu_c: c * p.mu_c,
            mu: c * p.mu,
            ..*p
        };
        let base = RegionMaterials::micromorphic(&[(1, m1), (2, m2)]).unwrap();
        let doubled =
            RegionMaterials::micromorphic(&[(1, scale_params(&m1, 2.0)), (2, scale_params(&m2, 2.0))])
                .unwrap();
        let opts = AssembleOptions::default();
        let k1 = assemble(&mesh, &dofmap, &base, &Loads::default(), &opts)
            .unwrap()
            .k;
        let k2 = assemble(&mesh, &dofmap, &doubled, &Loads::default(), &opts)
            .unwrap()
            .k;
        assert_eq!(k1.nnz(), k2.nnz());
        for (a, b) in k1.values.iter().zip(&k2.values) {
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn missing_region_material_reported() {
        let mesh = gen_rectangle(2.0, 1.0, 2, 1, CellKind::Quad, Some(1.0)).unwrap();
        let dofmap = DofMap::build(&mesh, PSpace::Nedelec { order: 1 }).unwrap();
        let (m1, _) = rect_study_materials();
        let materials = RegionMaterials::micromorphic(&[(1, m1)]).unwrap();
        let err = assemble(
            &mesh,
            &dofmap,
            &materials,
            &Loads::default(),
            &AssembleOptions::default(),
        );
        assert!(err.is_err());
    }
}
