//! Development probe: prints the characteristic-length limit gaps and
//! interface jumps on the coarser levels to gauge convergence margins.

use mmfem_core::fields::PointLocator;
use mmfem_core::la::Vec2;
use mmfem_core::materials::{annulus_study_materials, reuss_macro};
use mmfem_core::mesh::CellKind;
use mmfem_core::studies::*;

fn main() {
    let (m1, _) = annulus_study_materials();
    let c_macro = reuss_macro(&m1.c_e(), &m1.c_micro()).unwrap();
    let c_micro = m1.c_micro();

    for level in 0..=2usize {
        let solver = Default::default();
        let mesh = bvp2_mesh(level, CellKind::Tri, AnnulusCase::A).unwrap();
        let pi_macro = linear_elasticity_solve(Bvp::AnnulusShear, mesh, c_macro, &solver)
            .unwrap()
            .potential;
        let mesh = bvp2_mesh(level, CellKind::Tri, AnnulusCase::A).unwrap();
        let pi_micro = linear_elasticity_solve(Bvp::AnnulusShear, mesh, c_micro, &solver)
            .unwrap()
            .potential;

        let spec = StudySpec::new(Bvp::AnnulusShear, Pairing::T2NT2, level);
        let lo = run_study(&spec.clone().with_l_c(1e-3)).unwrap();
        let hi = run_study(&spec.clone().with_l_c(1e3)).unwrap();
        println!(
            "L{level}: pi_macro={pi_macro:.6e} pi(1e-3)={:.6e} rel={:+.4e}",
            lo.potential,
            (lo.potential - pi_macro) / pi_macro
        );
        println!(
            "L{level}: pi_micro={pi_micro:.6e} pi(1e+3)={:.6e} rel={:+.4e}",
            hi.potential,
            (hi.potential - pi_micro) / pi_micro
        );

        // max |P - grad u| over quadrature-ish points vs max |grad u|.
        let fields = hi.fields();
        let mut max_diff = 0.0f64;
        let mut max_grad = 0.0f64;
        for cell in 0..hi.mesh.cells.len() {
            for &xi in &[
                Vec2::new(0.2, 0.2),
                Vec2::new(0.6, 0.2),
                Vec2::new(0.2, 0.6),
            ] {
                let state = fields.eval(cell, xi).unwrap();
                max_diff = max_diff.max((state.p.unwrap() - state.grad_u).norm());
                max_grad = max_grad.max(state.grad_u.norm());
            }
        }
        println!(
            "L{level}: max|P-grad u| = {max_diff:.3e}, max|grad u| = {max_grad:.3e}, ratio {:.4}",
            max_diff / max_grad
        );
    }

    // Sweep sandwich at level 1.
    let spec = StudySpec::new(Bvp::AnnulusShear, Pairing::T2NT2, 1);
    let sweep = lc_sweep(&spec, &default_lc_sweep()).unwrap();
    println!(
        "sweep: pi_macro={:.6e} pi_micro={:.6e}",
        sweep.pi_macro, sweep.pi_micro
    );
    for row in &sweep.rows {
        println!("  Lc={:9.3e}  Pi={:.8e}", row.l_c, row.potential);
    }

    // BVP1 jump stability for the Nedelec pairings.
    for pairing in [Pairing::T2NT1, Pairing::T2NT2, Pairing::Q2NQ1, Pairing::Q2NQ2] {
        let mut jumps = Vec::new();
        for level in 0..=2usize {
            let conv = run_bvp1(&StudySpec::new(Bvp::RectBimaterial, pairing, level)).unwrap();
            let t = &conv.inspection;
            let (xc, pc, rc) = (
                t.column("x").unwrap(),
                t.column("P21").unwrap(),
                t.column("region").unwrap(),
            );
            let mut left = f64::NAN;
            let mut right = f64::NAN;
            for row in &t.rows {
                if (row[xc] - 1.0).abs() < 1e-12 {
                    if row[rc] == 1.0 {
                        left = row[pc];
                    } else {
                        right = row[pc];
                    }
                }
            }
            jumps.push(right - left);
        }
        println!("{:>6} jumps: {:?}", pairing.name(), jumps);
    }

    // Nodal transition widths.
    for pairing in [Pairing::T2T1, Pairing::T2T2] {
        let conv = mesh_convergence(
            &StudySpec::new(Bvp::RectBimaterial, pairing, 0),
            &[0, 1, 2],
        )
        .unwrap();
        let widths: Vec<f64> = conv.levels.iter().map(|l| l.transition_width).collect();
        println!("{:>6} widths: {widths:?} diffs: {:?}", pairing.name(), conv.diffs);
    }

    // Nedelec convergence differences.
    for pairing in [Pairing::T2NT1, Pairing::T2NT2] {
        let conv = mesh_convergence(
            &StudySpec::new(Bvp::RectBimaterial, pairing, 0),
            &[0, 1, 2],
        )
        .unwrap();
        println!("{:>6} diffs: {:?}", pairing.name(), conv.diffs);
    }

    // Case B interface jump probe.
    let spec = StudySpec::new(Bvp::AnnulusShear, Pairing::Q2NQ1, 1)
        .with_case(AnnulusCase::B)
        .with_l_c(5.0);
    let result = run_bvp2(&spec).unwrap();
    let jump = case_b_interface_jump(&result.run).unwrap();
    println!(
        "case B: P_rt {:+.6e} | {:+.6e}   P_tr {:+.6e} | {:+.6e}",
        jump.p_rt_inner, jump.p_rt_outer, jump.p_tr_inner, jump.p_tr_outer
    );

    // Angular symmetry quick check at level 1, Lc = 5.
    let run = run_study(
        &StudySpec::new(Bvp::AnnulusShear, Pairing::T2NT2, 1).with_l_c(5.0),
    )
    .unwrap();
    let fields = run.fields();
    let locator = PointLocator::new(&run.mesh);
    let r = 7.3;
    let mut vals = Vec::new();
    for k in 0..12 {
        let theta = (k as f64 + 0.37) / 12.0 * std::f64::consts::TAU;
        let p = Vec2::new(r * theta.cos(), r * theta.sin());
        let (cell, xi) = locator.locate_one(p, 1e-9).unwrap();
        let state = fields.eval(cell, xi).unwrap();
        // P_rt in the local polar frame.
        let er = p * (1.0 / p.norm());
        let et = Vec2::new(-er.y, er.x);
        vals.push(er.dot(state.p.unwrap().mul_vec(et)));
    }
    let max = vals.iter().cloned().fold(f64::MIN, f64::max);
    let min = vals.iter().cloned().fold(f64::MAX, f64::min);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    println!("angular variation of P_rt at r={r}: {:.3e}", (max - min) / mean.abs());
}
