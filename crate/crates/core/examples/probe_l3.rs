//! Development probe: times the finest-level annulus solve.

use mmfem_core::studies::*;

fn main() {
    let t0 = std::time::Instant::now();
    let spec = StudySpec::new(Bvp::AnnulusShear, Pairing::T2NT2, 3).with_l_c(1e-3);
    let run = run_study(&spec).unwrap();
    println!(
        "L3 T2NT2: {} cells, {} dofs, solve {:.1}s (factor+refine), total {:.1}s, Pi={:.8e}",
        run.mesh.cells.len(),
        run.dofmap.n_dofs,
        run.report.wall_seconds,
        t0.elapsed().as_secs_f64(),
        run.potential
    );
    let spec = StudySpec::new(Bvp::AnnulusShear, Pairing::T2NT2, 3).with_l_c(1e3);
    let t1 = std::time::Instant::now();
    let run = run_study(&spec).unwrap();
    println!(
        "L3 T2NT2 Lc=1e3: total {:.1}s, Pi={:.8e}, residual {:.2e}",
        t1.elapsed().as_secs_f64(),
        run.potential,
        run.report.rel_residual
    );
}
