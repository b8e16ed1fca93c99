//! Essential constraints: Dirichlet displacement data, the consistent
//! coupling condition tying the tangential micro-distortion to prescribed
//! boundary data, and exact elimination into a reduced SPD system.
//!
//! Elimination (rather than penalties) keeps prescribed jumps sharp,
//! which the discontinuity studies depend on.

use std::collections::BTreeMap;

use crate::assembly::LinearSystem;
use crate::dofmap::{DofMap, PSpace};
use crate::error::{Error, Result};
use crate::la::{Mat2, Vec2};
use crate::mesh::Mesh2D;
use crate::quadrature::unit_interval;
use crate::sparse::CsrMatrix;

/// Accumulates prescribed values and affine ties; duplicate prescriptions
/// must agree to tolerance, contradictions are reported at elimination.
#[derive(Default, Clone, Debug)]
pub struct ConstraintSet {
    fixes: BTreeMap<usize, f64>,
    ties: BTreeMap<usize, (Vec<(usize, f64)>, f64)>,
    conflicts: Vec<String>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.fixes.len() + self.ties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixes.is_empty() && self.ties.is_empty()
    }

    pub fn fix(&mut self, dof: usize, value: f64) {
        if let Some(&existing) = self.fixes.get(&dof) {
            if (existing - value).abs() > 1e-10 * existing.abs().max(value.abs()).max(1.0) {
                self.conflicts.push(format!(
                    "dof {dof}: prescribed both {existing} and {value}"
                ));
            }
            return;
        }
        if self.ties.contains_key(&dof) {
            self.conflicts
                .push(format!("dof {dof}: prescribed value conflicts with an affine tie"));
            return;
        }
        self.fixes.insert(dof, value);
    }

    pub fn tie(&mut self, dof: usize, terms: Vec<(usize, f64)>, offset: f64) {
        if self.fixes.contains_key(&dof) || self.ties.contains_key(&dof) {
            self.conflicts
                .push(format!("dof {dof}: multiple constraints target the same dof"));
            return;
        }
        self.ties.insert(dof, (terms, offset));
    }

    pub fn fixed_value(&self, dof: usize) -> Option<f64> {
        self.fixes.get(&dof).copied()
    }
}

/// Prescribes `u = ubar(x)` on every displacement node of the tagged
/// boundary (corner and midside nodes of each tagged edge).
pub fn dirichlet_u(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    set: &mut ConstraintSet,
    tag: &str,
    ubar: &dyn Fn(Vec2) -> Vec2,
) -> Result<()> {
    if !mesh.has_tag(tag) {
        return Err(Error::Parameter(format!("unknown boundary tag '{tag}'")));
    }
    for e in mesh.tagged_edges(tag) {
        let edge = &mesh.edges[e];
        let mut nodes = vec![
            dofmap.corner_u_node(edge.nodes[0]),
            dofmap.corner_u_node(edge.nodes[1]),
            dofmap.mid_u_node(e),
        ];
        nodes.dedup();
        for n in nodes {
            let value = ubar(dofmap.u_node_coords[n]);
            set.fix(dofmap.u_dof(n, 0), value.x);
            set.fix(dofmap.u_dof(n, 1), value.y);
        }
    }
    Ok(())
}

/// One tagged portion of the boundary together with the gradient of the
/// analytic extension of its prescribed displacement.
pub struct CouplingBc<'a> {
    pub tag: &'a str,
    pub grad_ubar: &'a dyn Fn(Vec2) -> Mat2,
}

/// Applies the consistent coupling condition `P . tau = grad(ubar) . tau`
/// on the tagged boundaries.
///
/// Nedelec spaces: every boundary edge moment of each P row is set to the
/// matching dual functional of `grad(ubar)`, evaluated by Gauss
/// quadrature along the physical edge, so the interpolated tangential
/// trace matches the data to interpolation order.
///
/// Nodal spaces: at each boundary P node the tangential conditions of all
/// incident tagged edges are gathered; one independent tangent yields an
/// affine tie per row, two independent tangents determine all four
/// tensor dofs. More than two distinct tangents is an error.
pub fn consistent_coupling(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    set: &mut ConstraintSet,
    bcs: &[CouplingBc],
) -> Result<()> {
    match dofmap.p_space {
        PSpace::Nedelec { order } => coupling_nedelec(mesh, dofmap, set, bcs, order),
        PSpace::Nodal { order } => coupling_nodal(mesh, dofmap, set, bcs, order),
        PSpace::None => Ok(()),
    }
}

fn coupling_nedelec(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    set: &mut ConstraintSet,
    bcs: &[CouplingBc],
    order: u8,
) -> Result<()> {
    let k = order as usize;
    let (pts, wts) = unit_interval(5)?;
    for bc in bcs {
        if !mesh.has_tag(bc.tag) {
            return Err(Error::Parameter(format!("unknown boundary tag '{}'", bc.tag)));
        }
        for e in mesh.tagged_edges(bc.tag) {
            let edge = &mesh.edges[e];
            let tail = mesh.nodes[edge.nodes[0]];
            let head = mesh.nodes[edge.nodes[1]];
            for moment in 0..k {
                let mut value = Vec2::ZERO;
                for (&u, &w) in pts.iter().zip(&wts) {
                    let x = tail + (head - tail) * u;
                    let gt = (bc.grad_ubar)(x).mul_vec(edge.tangent);
                    // Dual weights of the scaled tangential traces: the
                    // order-1 dof is the tangential average, the order-2
                    // moments weight with 2(1-u) and 2u from the tangent
                    // tail.
                    let r = match (k, moment) {
                        (1, 0) => 1.0,
                        (2, 0) => 2.0 * (1.0 - u),
                        (2, 1) => 2.0 * u,
                        _ => unreachable!(),
                    };
                    value += gt * (w * r);
                }
                set.fix(dofmap.nedelec_edge_dof(e, moment, 0), value.x);
                set.fix(dofmap.nedelec_edge_dof(e, moment, 1), value.y);
            }
        }
    }
    Ok(())
}

fn coupling_nodal(
    mesh: &Mesh2D,
    dofmap: &DofMap,
    set: &mut ConstraintSet,
    bcs: &[CouplingBc],
    order: u8,
) -> Result<()> {
    // Gather (tangent, G . tau at the node) conditions per P node.
    let mut conditions: BTreeMap<usize, Vec<(Vec2, Vec2)>> = BTreeMap::new();
    for bc in bcs {
        if !mesh.has_tag(bc.tag) {
            return Err(Error::Parameter(format!("unknown boundary tag '{}'", bc.tag)));
        }
        for e in mesh.tagged_edges(bc.tag) {
            let edge = &mesh.edges[e];
            let mut nodes = vec![
                dofmap.corner_u_node(edge.nodes[0]),
                dofmap.corner_u_node(edge.nodes[1]),
            ];
            if order == 2 {
                nodes.push(dofmap.mid_u_node(e));
            }
            for n in nodes {
                let x = dofmap.u_node_coords[n];
                let gt = (bc.grad_ubar)(x).mul_vec(edge.tangent);
                conditions.entry(n).or_default().push((edge.tangent, gt));
            }
        }
    }

    for (node, conds) in conditions {
        // Merge parallel tangents; conflicting data on parallel tangents
        // is a contradiction in the boundary prescription.
        let mut merged: Vec<(Vec2, Vec2)> = Vec::new();
        for (tau, g) in conds {
            match merged.iter().find(|(t, _)| t.cross(tau).abs() < 1e-12) {
                Some((_, g0)) => {
                    if (g - *g0).norm() > 1e-10 * (g.norm() + g0.norm()).max(1.0) {
                        return Err(Error::Constraint(format!(
                            "node {node}: incompatible coupling data along a shared tangent"
                        )));
                    }
                }
                None => merged.push((tau, g)),
            }
        }
        let dofs = dofmap
            .nodal_p_dofs(node)
            .expect("boundary node must carry P dofs in a nodal space");
        match merged.len() {
            1 => {
                let (tau, g) = merged[0];
                for row in 0..2 {
                    // tau_x P_row1 + tau_y P_row2 = g_row, eliminated
                    // against the larger tangent component.
                    let (dep, other, t_dep, t_other) = if tau.x.abs() >= tau.y.abs() {
                        (dofs[2 * row], dofs[2 * row + 1], tau.x, tau.y)
                    } else {
                        (dofs[2 * row + 1], dofs[2 * row], tau.y, tau.x)
                    };
                    let rhs = g.comp(row) / t_dep;
                    if t_other.abs() < 1e-14 {
                        set.fix(dep, rhs);
                    } else {
                        set.tie(dep, vec![(other, -t_other / t_dep)], rhs);
                    }
                }
            }
            2 => {
                let (t1, g1) = merged[0];
                let (t2, g2) = merged[1];
                let m = Mat2::from_rows(t1, t2);
                let inv = m.inverse().ok_or_else(|| {
                    Error::Constraint(format!("node {node}: degenerate corner tangents"))
                })?;
                for row in 0..2 {
                    let p_row = inv.mul_vec(Vec2::new(g1.comp(row), g2.comp(row)));
                    set.fix(dofs[2 * row], p_row.x);
                    set.fix(dofs[2 * row + 1], p_row.y);
                }
            }
            n => {
                return Err(Error::Constraint(format!(
                    "node {node}: {n} distinct boundary tangents (non-manifold corner)"
                )))
            }
        }
    }
    Ok(())
}

/// Classification of a dof after elimination.
#[derive(Clone, Debug)]
pub enum DofClass {
    Free(usize),
    Fixed(f64),
    /// Affine combination of free dofs plus a constant.
    Tie(Vec<(usize, f64)>, f64),
}

#[derive(Debug)]
pub struct ReducedSystem {
    pub k: CsrMatrix,
    pub f: Vec<f64>,
    pub classes: Vec<DofClass>,
    pub n_free: usize,
}

impl ReducedSystem {
    /// Reconstructs the full dof vector from the free solution.
    pub fn recover(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n_free);
        self.classes
            .iter()
            .map(|c| match c {
                DofClass::Free(i) => y[*i],
                DofClass::Fixed(v) => *v,
                DofClass::Tie(terms, off) => {
                    terms.iter().map(|(i, c)| c * y[*i]).sum::<f64>() + off
                }
            })
            .collect()
    }
}

/// Eliminates the constraints exactly: with `x = Z y + g`, the reduced
/// system is `Z^T K Z y = Z^T (f - K g)`.
pub fn eliminate(system: &LinearSystem, set: &ConstraintSet) -> Result<ReducedSystem> {
    if !set.conflicts.is_empty() {
        return Err(Error::Constraint(format!(
            "contradictory constraints: {}",
            set.conflicts.join("; ")
        )));
    }
    let n = system.f.len();
    let mut classes: Vec<DofClass> = Vec::with_capacity(n);
    let mut free_index = vec![usize::MAX; n];
    let mut n_free = 0;
    for dof in 0..n {
        if let Some(&v) = set.fixes.get(&dof) {
            classes.push(DofClass::Fixed(v));
        } else if set.ties.contains_key(&dof) {
            classes.push(DofClass::Fixed(0.0)); // placeholder, resolved below
        } else {
            free_index[dof] = n_free;
            classes.push(DofClass::Free(n_free));
            n_free += 1;
        }
    }
    // Resolve ties: referenced dofs must be free or fixed.
    for (&dof, (terms, offset)) in &set.ties {
        let mut resolved = Vec::with_capacity(terms.len());
        let mut off = *offset;
        for &(ref_dof, coeff) in terms {
            if let Some(&v) = set.fixes.get(&ref_dof) {
                off += coeff * v;
            } else if set.ties.contains_key(&ref_dof) {
                return Err(Error::Constraint(format!(
                    "dof {dof}: tie references tied dof {ref_dof}"
                )));
            } else {
                resolved.push((free_index[ref_dof], coeff));
            }
        }
        classes[dof] = DofClass::Tie(resolved, off);
    }

    // Expansion of a dof into free-space terms and a constant.
    let expand = |dof: usize| -> (&[(usize, f64)], f64, Option<usize>) {
        match &classes[dof] {
            DofClass::Free(i) => (&[], 0.0, Some(*i)),
            DofClass::Fixed(v) => (&[], *v, None),
            DofClass::Tie(terms, off) => (terms.as_slice(), *off, None),
        }
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(system.k.nnz());
    let mut f_red = vec![0.0; n_free];
    // Z^T f
    for dof in 0..n {
        let fv = system.f[dof];
        if fv == 0.0 {
            continue;
        }
        let (terms, _, free) = expand(dof);
        if let Some(i) = free {
            f_red[i] += fv;
        }
        for &(i, c) in terms {
            f_red[i] += c * fv;
        }
    }
    // Z^T K Z and -Z^T K g
    let k = &system.k;
    let mut row_terms: Vec<(usize, f64)> = Vec::new();
    for r in 0..n {
        row_terms.clear();
        let (terms, _, free) = expand(r);
        if let Some(i) = free {
            row_terms.push((i, 1.0));
        }
        row_terms.extend_from_slice(terms);
        if row_terms.is_empty() {
            continue;
        }
        for idx in k.row_ptr[r]..k.row_ptr[r + 1] {
            let c = k.col_idx[idx];
            let v = k.values[idx];
            let (cterms, c_const, c_free) = expand(c);
            for &(fi, ci) in &row_terms {
                if let Some(j) = c_free {
                    triplets.push((fi, j, ci * v));
                }
                for &(fj, cj) in cterms {
                    triplets.push((fi, fj, ci * v * cj));
                }
                if c_const != 0.0 {
                    f_red[fi] -= ci * v * c_const;
                }
            }
        }
    }
    let k_red = CsrMatrix::from_triplets(n_free, n_free, &mut triplets);
    Ok(ReducedSystem {
        k: k_red,
        f: f_red,
        classes,
        n_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::{solve_dense, DenseMat};
    use rand::Rng;
    use rand::SeedableRng;

    fn dense_to_system(a: &DenseMat, f: Vec<f64>) -> LinearSystem {
        let mut triplets = Vec::new();
        for r in 0..a.rows {
            for c in 0..a.cols {
                if a.at(r, c) != 0.0 {
                    triplets.push((r, c, a.at(r, c)));
                }
            }
        }
        LinearSystem {
            k: CsrMatrix::from_triplets(a.rows, a.cols, &mut triplets),
            f,
        }
    }

    fn random_spd(n: usize, rng: &mut impl Rng) -> DenseMat {
        let mut b = DenseMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                *b.at_mut(r, c) = rng.gen_range(-1.0..1.0);
            }
        }
        let mut a = DenseMat::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += b.at(k, r) * b.at(k, c);
                }
                *a.at_mut(r, c) = s + if r == c { n as f64 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn no_constraints_is_identity_reduction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let a = random_spd(5, &mut rng);
        let f: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let system = dense_to_system(&a, f.clone());
        let reduced = eliminate(&system, &ConstraintSet::new()).unwrap();
        assert_eq!(reduced.n_free, 5);
        assert_eq!(reduced.f, f);
        let x = reduced.recover(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn all_fixed_gives_empty_system() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a = random_spd(3, &mut rng);
        let system = dense_to_system(&a, vec![0.0; 3]);
        let mut set = ConstraintSet::new();
        set.fix(0, 1.0);
        set.fix(1, 2.0);
        set.fix(2, 3.0);
        let reduced = eliminate(&system, &set).unwrap();
        assert_eq!(reduced.n_free, 0);
        assert_eq!(reduced.recover(&[]), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn elimination_matches_dense_oracle_with_ties() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 10;
        let a = random_spd(n, &mut rng);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let system = dense_to_system(&a, f.clone());

        let mut set = ConstraintSet::new();
        set.fix(2, 0.7);
        set.fix(7, -0.3);
        // x_4 = 0.5 x_1 - 0.25 x_9 + 0.1
        set.tie(4, vec![(1, 0.5), (9, -0.25)], 0.1);
        let reduced = eliminate(&system, &set).unwrap();
        assert_eq!(reduced.n_free, 7);

        let y = solve_dense(
            &{
                let mut d = DenseMat::zeros(reduced.n_free, reduced.n_free);
                for r in 0..reduced.n_free {
                    for c in 0..reduced.n_free {
                        *d.at_mut(r, c) = reduced.k.get(r, c);
                    }
                }
                d
            },
            &reduced.f,
        )
        .unwrap();
        let x = reduced.recover(&y);

        // Dense oracle: minimize 1/2 x^T A x - f^T x over the affine
        // constraint manifold, by substituting x = Z y + g directly.
        let free: Vec<usize> = vec![0, 1, 3, 5, 6, 8, 9];
        let mut z = DenseMat::zeros(n, free.len());
        let mut g = vec![0.0; n];
        g[2] = 0.7;
        g[7] = -0.3;
        g[4] = 0.1;
        for (j, &d) in free.iter().enumerate() {
            *z.at_mut(d, j) = 1.0;
        }
        *z.at_mut(4, 1) = 0.5;
        *z.at_mut(4, 6) = -0.25;
        let m = free.len();
        let mut kzz = DenseMat::zeros(m, m);
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            for r in 0..n {
                let zri = z.at(r, i);
                if zri == 0.0 {
                    continue;
                }
                rhs[i] += zri * f[r];
                for c in 0..n {
                    rhs[i] -= zri * a.at(r, c) * g[c];
                    for j in 0..m {
                        let zcj = z.at(c, j);
                        if zcj != 0.0 {
                            *kzz.at_mut(i, j) += zri * a.at(r, c) * zcj;
                        }
                    }
                }
            }
        }
        let y_oracle = solve_dense(&kzz, &rhs).unwrap();
        let mut x_oracle = g;
        for r in 0..n {
            for j in 0..m {
                x_oracle[r] += z.at(r, j) * y_oracle[j];
            }
        }
        for (xi, oi) in x.iter().zip(&x_oracle) {
            assert!((xi - oi).abs() < 1e-10, "{xi} vs {oi}");
        }
    }

    #[test]
    fn contradictory_fixes_are_reported() {
        let mut set = ConstraintSet::new();
        set.fix(3, 1.0);
        set.fix(3, 2.0);
        let system = dense_to_system(&DenseMat::zeros(4, 4), vec![0.0; 4]);
        let err = eliminate(&system, &set).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("dof 3"), "{msg}");
    }

    #[test]
    fn duplicate_agreeing_fix_is_kept_once() {
        let mut set = ConstraintSet::new();
        set.fix(0, 1.0);
        set.fix(0, 1.0 + 1e-12);
        assert_eq!(set.len(), 1);
    }
}
