//! Turn-key drivers for the two benchmark boundary value problems, the
//! embedded linear-elasticity oracle, and the characteristic-length and
//! mesh-convergence campaigns.
//!
//! Problem 1 (`rect-bimaterial`): a 2 x 1 rectangle made of two side-by-
//! side materials with a vertical interface at x = 1. The bottom edge is
//! fixed, the top edge is displaced by (0.01, 0.01), and the lateral
//! edges follow (0.01 y^2, 0.01 y^2); the consistent coupling condition
//! acts on the whole boundary. The micro-distortion components normal to
//! the interface are discontinuous there, which separates the
//! tangential-conforming from the nodal discretizations.
//!
//! Problem 2 (`annulus-shear`): an annulus with outer radius 25 and
//! inner radius 2, inner rim fixed, outer rim rotated counterclockwise
//! by 0.01/25. Case B adds a second material in the ring between radii
//! 2 and 10. The response is rotationally symmetric with only shear
//! components active, and the characteristic length interpolates between
//! the macro (Reuss) and micro elasticity limits.

use std::path::Path;

use serde::Serialize;

use crate::assembly::{assemble, AssembleOptions, Loads, RegionMaterials};
use crate::constraints::{consistent_coupling, dirichlet_u, eliminate, ConstraintSet, CouplingBc};
use crate::dofmap::{DofMap, PSpace};
use crate::error::{Error, Result};
use crate::fields::{total_potential, EnergySplit, SolutionFields};
use crate::la::{Mat2, Vec2};
use crate::materials::{
    annulus_study_materials, rect_study_materials, reuss_macro, ElasticityTensor2D,
    IsotropicParams,
};
use crate::mesh::{gen_annulus, gen_rectangle, CellKind, Mesh2D};
use crate::sample::{sample_line, sample_line_elastic, Frame, Table};
use crate::solver::{solve_spd, SolveReport, SolverSettings};

pub const RECT_LENGTH: f64 = 2.0;
pub const RECT_HEIGHT: f64 = 1.0;
pub const RECT_INTERFACE_X: f64 = 1.0;
pub const ANNULUS_R_OUTER: f64 = 25.0;
pub const ANNULUS_R_INNER: f64 = 2.0;
pub const ANNULUS_R_RING: f64 = 10.0;
pub const OUTER_ROTATION: f64 = 0.01;

/// Grid resolutions per refinement level.
pub const BVP1_LEVELS: [(usize, usize); 4] = [(10, 5), (22, 11), (42, 21), (82, 41)];
pub const BVP2_LEVELS: [(usize, usize); 4] = [(8, 30), (16, 60), (32, 120), (64, 240)];

/// Default 7-point characteristic-length sweep (decades).
pub fn default_lc_sweep() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bvp {
    RectBimaterial,
    AnnulusShear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AnnulusCase {
    A,
    B,
}

/// The implemented element pairings (displacement space x P space).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Pairing {
    T2T1,
    T2T2,
    T2NT1,
    T2NT2,
    Q2NQ1,
    Q2NQ2,
    T2Elastic,
}

impl Pairing {
    pub const ALL: [Pairing; 7] = [
        Pairing::T2T1,
        Pairing::T2T2,
        Pairing::T2NT1,
        Pairing::T2NT2,
        Pairing::Q2NQ1,
        Pairing::Q2NQ2,
        Pairing::T2Elastic,
    ];

    pub const NEDELEC: [Pairing; 4] = [
        Pairing::T2NT1,
        Pairing::T2NT2,
        Pairing::Q2NQ1,
        Pairing::Q2NQ2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Pairing::T2T1 => "T2T1",
            Pairing::T2T2 => "T2T2",
            Pairing::T2NT1 => "T2NT1",
            Pairing::T2NT2 => "T2NT2",
            Pairing::Q2NQ1 => "Q2NQ1",
            Pairing::Q2NQ2 => "Q2NQ2",
            Pairing::T2Elastic => "T2-elastic",
        }
    }

    pub fn parse(s: &str) -> Result<Pairing> {
        Pairing::ALL
            .iter()
            .copied()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Pairing::ALL.iter().map(|p| p.name()).collect();
                Error::Parameter(format!(
                    "unknown element pairing '{s}'; valid pairings: {}",
                    names.join(", ")
                ))
            })
    }

    pub fn cell_kind(&self) -> CellKind {
        match self {
            Pairing::Q2NQ1 | Pairing::Q2NQ2 => CellKind::Quad,
            _ => CellKind::Tri,
        }
    }

    pub fn p_space(&self) -> PSpace {
        match self {
            Pairing::T2T1 => PSpace::Nodal { order: 1 },
            Pairing::T2T2 => PSpace::Nodal { order: 2 },
            Pairing::T2NT1 => PSpace::Nedelec { order: 1 },
            Pairing::T2NT2 => PSpace::Nedelec { order: 2 },
            Pairing::Q2NQ1 => PSpace::Nedelec { order: 1 },
            Pairing::Q2NQ2 => PSpace::Nedelec { order: 2 },
            Pairing::T2Elastic => PSpace::None,
        }
    }

    pub fn is_nedelec(&self) -> bool {
        matches!(self.p_space(), PSpace::Nedelec { .. })
    }

    pub fn is_nodal(&self) -> bool {
        matches!(self.p_space(), PSpace::Nodal { .. })
    }
}

#[derive(Clone, Debug)]
pub struct StudySpec {
    pub bvp: Bvp,
    pub case: AnnulusCase,
    pub pairing: Pairing,
    pub level: usize,
    /// Overrides the characteristic length of every region.
    pub l_c: Option<f64>,
    pub solver: SolverSettings,
    pub quad_degree: usize,
}

impl StudySpec {
    pub fn new(bvp: Bvp, pairing: Pairing, level: usize) -> Self {
        StudySpec {
            bvp,
            case: AnnulusCase::A,
            pairing,
            level,
            l_c: None,
            solver: SolverSettings::default(),
            quad_degree: AssembleOptions::default().quad_degree,
        }
    }

    pub fn with_case(mut self, case: AnnulusCase) -> Self {
        self.case = case;
        self
    }

    pub fn with_l_c(mut self, l_c: f64) -> Self {
        self.l_c = Some(l_c);
        self
    }

    fn options(&self) -> AssembleOptions {
        AssembleOptions {
            quad_degree: self.quad_degree,
            ..Default::default()
        }
    }
}

/// One completed solve with its discretization and diagnostics.
pub struct BvpRun {
    pub mesh: Mesh2D,
    pub dofmap: DofMap,
    pub dofs: Vec<f64>,
    pub materials: RegionMaterials,
    pub report: SolveReport,
    pub potential: f64,
    pub split: EnergySplit,
    pub options: AssembleOptions,
}

impl BvpRun {
    pub fn fields(&self) -> SolutionFields<'_> {
        SolutionFields::borrowed(&self.mesh, &self.dofmap, &self.dofs)
    }
}

pub fn bvp1_mesh(level: usize, kind: CellKind) -> Result<Mesh2D> {
    let &(nx, ny) = BVP1_LEVELS
        .get(level)
        .ok_or_else(|| Error::Parameter(format!("mesh level {level} out of range 0..=3")))?;
    gen_rectangle(RECT_LENGTH, RECT_HEIGHT, nx, ny, kind, Some(RECT_INTERFACE_X))
}

pub fn bvp2_mesh(level: usize, kind: CellKind, case: AnnulusCase) -> Result<Mesh2D> {
    let &(n_r, n_theta) = BVP2_LEVELS
        .get(level)
        .ok_or_else(|| Error::Parameter(format!("mesh level {level} out of range 0..=3")))?;
    let r_m = match case {
        AnnulusCase::A => None,
        AnnulusCase::B => Some(ANNULUS_R_RING),
    };
    gen_annulus(ANNULUS_R_OUTER, ANNULUS_R_INNER, r_m, n_r, n_theta, kind)
}

pub fn bvp1_ubar(x: Vec2) -> Vec2 {
    let v = 0.01 * x.y * x.y;
    Vec2::new(v, v)
}

pub fn bvp1_grad_ubar(x: Vec2) -> Mat2 {
    let d = 0.02 * x.y;
    Mat2::new(0.0, d, 0.0, d)
}

pub fn bvp2_outer_ubar(x: Vec2) -> Vec2 {
    let s = OUTER_ROTATION / ANNULUS_R_OUTER;
    Vec2::new(-s * x.y, s * x.x)
}

pub fn bvp2_outer_grad(_x: Vec2) -> Mat2 {
    let s = OUTER_ROTATION / ANNULUS_R_OUTER;
    Mat2::new(0.0, -s, s, 0.0)
}

fn zero_vec(_x: Vec2) -> Vec2 {
    Vec2::ZERO
}

fn zero_mat(_x: Vec2) -> Mat2 {
    Mat2::ZERO
}

/// Materials of a study, with optional characteristic-length override.
pub fn study_materials(bvp: Bvp, case: AnnulusCase, l_c: Option<f64>) -> Result<RegionMaterials> {
    let (m1, m2) = match bvp {
        Bvp::RectBimaterial => rect_study_materials(),
        Bvp::AnnulusShear => annulus_study_materials(),
    };
    let pairs: Vec<(u32, IsotropicParams)> = match (bvp, case) {
        (Bvp::RectBimaterial, _) => vec![(1, m1), (2, m2)],
        (Bvp::AnnulusShear, AnnulusCase::A) => vec![(1, m1)],
        (Bvp::AnnulusShear, AnnulusCase::B) => vec![(1, m1), (2, m2)],
    };
    let materials = RegionMaterials::micromorphic(&pairs)?;
    Ok(match l_c {
        Some(l_c) => materials.with_l_c(l_c),
        None => materials,
    })
}

fn apply_bvp_bcs(
    bvp: Bvp,
    mesh: &Mesh2D,
    dofmap: &DofMap,
    set: &mut ConstraintSet,
) -> Result<()> {
    match bvp {
        Bvp::RectBimaterial => {
            for tag in ["bottom", "top", "left", "right"] {
                dirichlet_u(mesh, dofmap, set, tag, &bvp1_ubar)?;
            }
            let bcs: Vec<CouplingBc> = ["bottom", "top", "left", "right"]
                .iter()
                .map(|tag| CouplingBc {
                    tag,
                    grad_ubar: &bvp1_grad_ubar,
                })
                .collect();
            consistent_coupling(mesh, dofmap, set, &bcs)?;
        }
        Bvp::AnnulusShear => {
            dirichlet_u(mesh, dofmap, set, "inner", &zero_vec)?;
            dirichlet_u(mesh, dofmap, set, "outer", &bvp2_outer_ubar)?;
            consistent_coupling(
                mesh,
                dofmap,
                set,
                &[
                    CouplingBc {
                        tag: "inner",
                        grad_ubar: &zero_mat,
                    },
                    CouplingBc {
                        tag: "outer",
                        grad_ubar: &bvp2_outer_grad,
                    },
                ],
            )?;
        }
    }
    Ok(())
}

/// Assembles, constrains, solves and post-computes the potential.
fn solve_study(
    bvp: Bvp,
    mesh: Mesh2D,
    p_space: PSpace,
    materials: RegionMaterials,
    solver: &SolverSettings,
    options: AssembleOptions,
) -> Result<BvpRun> {
    let dofmap = DofMap::build(&mesh, p_space)?;
    let system = assemble(&mesh, &dofmap, &materials, &Loads::default(), &options)?;
    let mut set = ConstraintSet::new();
    apply_bvp_bcs(bvp, &mesh, &dofmap, &mut set)?;
    let reduced = eliminate(&system, &set)?;
    let (y, report) = solve_spd(&reduced.k, &reduced.f, solver)?;
    let dofs = reduced.recover(&y);
    let fields = SolutionFields::borrowed(&mesh, &dofmap, &dofs);
    let (potential, split) =
        total_potential(&fields, &materials, &Loads::default(), options.quad_degree)?;
    drop(fields);
    Ok(BvpRun {
        mesh,
        dofmap,
        dofs,
        materials,
        report,
        potential,
        split,
        options,
    })
}

/// Runs one micromorphic study described by the spec.
pub fn run_study(spec: &StudySpec) -> Result<BvpRun> {
    run_study_with_materials(spec, study_materials(spec.bvp, spec.case, spec.l_c)?)
}

/// Same as [`run_study`] with explicit region materials (for custom
/// parameter sets from the run config).
pub fn run_study_with_materials(
    spec: &StudySpec,
    materials: RegionMaterials,
) -> Result<BvpRun> {
    if spec.pairing == Pairing::T2Elastic {
        return Err(Error::Parameter(
            "T2-elastic runs use linear_elasticity_solve with an explicit tensor".into(),
        ));
    }
    let mesh = match spec.bvp {
        Bvp::RectBimaterial => bvp1_mesh(spec.level, spec.pairing.cell_kind())?,
        Bvp::AnnulusShear => bvp2_mesh(spec.level, spec.pairing.cell_kind(), spec.case)?,
    };
    solve_study(
        spec.bvp,
        mesh,
        spec.pairing.p_space(),
        materials,
        &spec.solver,
        spec.options(),
    )
}

/// Tensor selector for displacement-only comparison runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ElasticTensorKind {
    /// Reuss combination of the region-1 pair (the small-length limit).
    Macro,
    /// The region-1 micro tensor (the large-length limit).
    Micro,
    /// The region-1 elastic tensor.
    ElasticE,
}

impl ElasticTensorKind {
    pub fn tensor(&self, bvp: Bvp) -> Result<ElasticityTensor2D> {
        let (m1, _) = match bvp {
            Bvp::RectBimaterial => rect_study_materials(),
            Bvp::AnnulusShear => annulus_study_materials(),
        };
        Ok(match self {
            ElasticTensorKind::Macro => reuss_macro(&m1.c_e(), &m1.c_micro())?,
            ElasticTensorKind::Micro => m1.c_micro(),
            ElasticTensorKind::ElasticE => m1.c_e(),
        })
    }
}

/// Displacement-only comparison run with line/radial samples, the
/// `T2-elastic` pairing of the study specs.
pub fn run_elastic_study(
    spec: &StudySpec,
    tensor_kind: ElasticTensorKind,
) -> Result<(BvpRun, Table)> {
    let tensor = tensor_kind.tensor(spec.bvp)?;
    let (mesh, points, frame) = match spec.bvp {
        Bvp::RectBimaterial => (
            bvp1_mesh(spec.level, CellKind::Tri)?,
            bvp1_inspection_points(),
            Frame::Cartesian,
        ),
        Bvp::AnnulusShear => (
            bvp2_mesh(spec.level, CellKind::Tri, spec.case)?,
            bvp2_radial_points(120),
            Frame::Polar,
        ),
    };
    let run = linear_elasticity_solve(spec.bvp, mesh, tensor, &spec.solver)?;
    let fields = run.fields();
    let mut table = sample_line_elastic(&fields, &run.materials, &points, frame)?;
    table.push_meta("pairing", "T2-elastic");
    table.push_meta("elastic_tensor", format!("{tensor_kind:?}"));
    table.push_meta("level", spec.level);
    drop(fields);
    Ok((run, table))
}

/// Quadratic-Lagrange displacement-only solve under the same boundary
/// data, used as the oracle for the characteristic-length limits.
pub fn linear_elasticity_solve(
    bvp: Bvp,
    mesh: Mesh2D,
    tensor: ElasticityTensor2D,
    solver: &SolverSettings,
) -> Result<BvpRun> {
    let regions: Vec<u32> = {
        let mut r: Vec<u32> = mesh.cells.iter().map(|c| c.region).collect();
        r.sort_unstable();
        r.dedup();
        r
    };
    let pairs: Vec<(u32, ElasticityTensor2D)> = regions.iter().map(|&r| (r, tensor)).collect();
    let materials = RegionMaterials::elastic(&pairs);
    solve_study(
        bvp,
        mesh,
        PSpace::None,
        materials,
        solver,
        AssembleOptions::default(),
    )
}

/// The inspection-line abscissas for the rectangle study: a fixed set of
/// x positions on y = 0.5 that avoids every grid line of every level,
/// plus the interface point x = 1 where both one-sided values appear.
pub fn bvp1_inspection_points() -> Vec<Vec2> {
    let mut points: Vec<Vec2> = (0..200)
        .map(|k| Vec2::new((k as f64 + 0.4321) / 100.0, 0.5))
        .collect();
    points.push(Vec2::new(RECT_INTERFACE_X, 0.5));
    points
}

/// Radial sample stations along the positive x-axis, geometrically
/// clustered toward the inner radius where the gradients are steep.
pub fn bvp2_radial_points(n: usize) -> Vec<Vec2> {
    let ratio = ANNULUS_R_OUTER / ANNULUS_R_INNER;
    (0..n)
        .map(|j| {
            let t = (j as f64 + 0.383) / n as f64;
            Vec2::new(ANNULUS_R_INNER * ratio.powf(t), 0.0)
        })
        .collect()
}

pub struct Bvp1Result {
    pub run: BvpRun,
    pub inspection: Table,
}

/// Solves the rectangle study and samples the inspection line.
pub fn run_bvp1(spec: &StudySpec) -> Result<Bvp1Result> {
    run_bvp1_custom(spec, study_materials(spec.bvp, spec.case, spec.l_c)?)
}

pub fn run_bvp1_custom(spec: &StudySpec, materials: RegionMaterials) -> Result<Bvp1Result> {
    let run = run_study_with_materials(spec, materials)?;
    let fields = run.fields();
    let mut inspection = sample_line(
        &fields,
        &run.materials,
        &bvp1_inspection_points(),
        Frame::Cartesian,
    )?;
    inspection.push_meta("study", "rect-bimaterial");
    inspection.push_meta("pairing", spec.pairing.name());
    inspection.push_meta("level", spec.level);
    inspection.push_meta("cells", run.mesh.cells.len());
    inspection.push_meta(
        "Lc",
        spec.l_c.map_or("table".to_string(), |v| v.to_string()),
    );
    drop(fields);
    Ok(Bvp1Result { run, inspection })
}

pub struct Bvp2Result {
    pub run: BvpRun,
    pub radial: Table,
}

/// Solves the annulus study and samples the polar components along the
/// positive x-axis.
pub fn run_bvp2(spec: &StudySpec) -> Result<Bvp2Result> {
    run_bvp2_custom(spec, study_materials(spec.bvp, spec.case, spec.l_c)?)
}

pub fn run_bvp2_custom(spec: &StudySpec, materials: RegionMaterials) -> Result<Bvp2Result> {
    let run = run_study_with_materials(spec, materials)?;
    let fields = run.fields();
    let mut radial = sample_line(
        &fields,
        &run.materials,
        &bvp2_radial_points(120),
        Frame::Polar,
    )?;
    radial.push_meta("study", "annulus-shear");
    radial.push_meta(
        "case",
        match spec.case {
            AnnulusCase::A => "A",
            AnnulusCase::B => "B",
        },
    );
    radial.push_meta("pairing", spec.pairing.name());
    radial.push_meta("level", spec.level);
    radial.push_meta("cells", run.mesh.cells.len());
    radial.push_meta(
        "Lc",
        spec.l_c.map_or("table".to_string(), |v| v.to_string()),
    );
    drop(fields);
    Ok(Bvp2Result { run, radial })
}

/// One-sided interface probe for case B: polar P components immediately
/// inside and outside the material ring at `r = 10`, evaluated at a
/// chord midpoint so the analytic tangential direction coincides with
/// the mesh edge.
pub struct InterfaceJump {
    pub p_rt_inner: f64,
    pub p_rt_outer: f64,
    pub p_tr_inner: f64,
    pub p_tr_outer: f64,
}

pub fn case_b_interface_jump(run: &BvpRun) -> Result<InterfaceJump> {
    // Find the two nodes on the r = 10 ring nearest theta = 0+ and take
    // the chord midpoint between them.
    let mut ring: Vec<Vec2> = run
        .mesh
        .nodes
        .iter()
        .copied()
        .filter(|p| (p.norm() - ANNULUS_R_RING).abs() < 1e-9 * ANNULUS_R_RING)
        .collect();
    if ring.is_empty() {
        return Err(Error::Sampling("mesh has no ring at r = 10".into()));
    }
    ring.sort_by(|a, b| {
        a.y.atan2(a.x)
            .partial_cmp(&b.y.atan2(b.x))
            .unwrap()
    });
    let first = ring
        .iter()
        .copied()
        .find(|p| p.y.atan2(p.x) >= 0.0)
        .unwrap_or(ring[0]);
    let second = ring
        .iter()
        .copied()
        .find(|p| p.y.atan2(p.x) > first.y.atan2(first.x) + 1e-12)
        .unwrap_or(ring[0]);
    let probe = (first + second) * 0.5;

    let fields = run.fields();
    let table = sample_line(&fields, &run.materials, &[probe], Frame::Polar)?;
    let region_col = table.column("region").unwrap();
    let p_rt = table.column("P_rt").unwrap();
    let p_tr = table.column("P_tr").unwrap();
    let mut inner = None;
    let mut outer = None;
    for row in &table.rows {
        if row[region_col] == 2.0 {
            inner = Some((row[p_rt], row[p_tr]));
        } else {
            outer = Some((row[p_rt], row[p_tr]));
        }
    }
    let (inner, outer) = match (inner, outer) {
        (Some(i), Some(o)) => (i, o),
        _ => {
            return Err(Error::Sampling(
                "interface probe did not see both sides of the ring".into(),
            ))
        }
    };
    Ok(InterfaceJump {
        p_rt_inner: inner.0,
        p_rt_outer: outer.0,
        p_tr_inner: inner.1,
        p_tr_outer: outer.1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub l_c: f64,
    pub potential: f64,
    pub split: EnergySplit,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub pi_macro: f64,
    pub pi_micro: f64,
}

impl SweepResult {
    /// Sweep table plus the two oracle constants as appended rows
    /// (labelled by an infinite/zero characteristic length).
    pub fn table(&self) -> Table {
        let mut t = Table::default();
        t.columns = vec![
            "Lc".into(),
            "potential".into(),
            "elastic".into(),
            "micro".into(),
            "coupling".into(),
            "curvature".into(),
        ];
        for row in &self.rows {
            t.rows.push(vec![
                row.l_c,
                row.potential,
                row.split.elastic,
                row.split.micro,
                row.split.coupling,
                row.split.curvature,
            ]);
        }
        t.push_meta("pi_macro_oracle", self.pi_macro);
        t.push_meta("pi_micro_oracle", self.pi_micro);
        t
    }
}

/// Sweeps the characteristic length on annulus case A and appends the
/// two elasticity oracle potentials computed on the same mesh.
pub fn lc_sweep(spec: &StudySpec, l_c_values: &[f64]) -> Result<SweepResult> {
    if l_c_values.is_empty() {
        return Err(Error::Parameter("empty characteristic-length sweep".into()));
    }
    if spec.bvp != Bvp::AnnulusShear {
        return Err(Error::Parameter(
            "the characteristic-length sweep is defined on the annulus study".into(),
        ));
    }
    let mut values = l_c_values.to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rows = Vec::with_capacity(values.len());
    for &l_c in &values {
        let run = run_study(&spec.clone().with_l_c(l_c))?;
        rows.push(SweepRow {
            l_c,
            potential: run.potential,
            split: run.split,
        });
    }

    let (m1, _) = annulus_study_materials();
    let c_macro = reuss_macro(&m1.c_e(), &m1.c_micro())?;
    let c_micro = m1.c_micro();
    let kind = spec.pairing.cell_kind();
    let mesh_macro = bvp2_mesh(spec.level, kind, spec.case)?;
    let pi_macro =
        linear_elasticity_solve(Bvp::AnnulusShear, mesh_macro, c_macro, &spec.solver)?.potential;
    let mesh_micro = bvp2_mesh(spec.level, kind, spec.case)?;
    let pi_micro =
        linear_elasticity_solve(Bvp::AnnulusShear, mesh_micro, c_micro, &spec.solver)?.potential;
    Ok(SweepResult {
        rows,
        pi_macro,
        pi_micro,
    })
}

pub struct ConvergenceLevel {
    pub level: usize,
    pub cells: usize,
    pub n_dofs: usize,
    /// P21 samples at the shared inspection abscissas (interface point
    /// excluded).
    pub line_values: Vec<f64>,
    /// One-sided P21 values at the interface (left, right of x = 1).
    pub interface: (f64, f64),
    /// Width of the 25%-75% transition zone around the interface.
    pub transition_width: f64,
}

pub struct ConvergenceResult {
    pub pairing: Pairing,
    pub levels: Vec<ConvergenceLevel>,
    /// Relative L2 difference of the line samples between consecutive
    /// levels.
    pub diffs: Vec<f64>,
}

/// Mesh-convergence study: samples the inspection quantity at every
/// level and reports consecutive-level differences. For the rectangle
/// this is P21 along y = 0.5 with interface jumps and transition widths;
/// for the annulus it is the radial shear component P_tr along the ray.
pub fn mesh_convergence(spec: &StudySpec, levels: &[usize]) -> Result<ConvergenceResult> {
    if levels.len() < 2 {
        return Err(Error::Parameter(
            "mesh convergence needs at least two levels".into(),
        ));
    }
    let mut out: Vec<ConvergenceLevel> = Vec::new();
    for &level in levels {
        let level_spec = StudySpec {
            level,
            ..spec.clone()
        };
        let (table, run, quantity, station_col) = match spec.bvp {
            Bvp::RectBimaterial => {
                let r = run_bvp1(&level_spec)?;
                (r.inspection, r.run, "P21", "x")
            }
            Bvp::AnnulusShear => {
                let r = run_bvp2(&level_spec)?;
                (r.radial, r.run, "P_tr", "r")
            }
        };
        let x_col = table.column(station_col).unwrap();
        let q_col = table.column(quantity).unwrap();
        let region_col = table.column("region").unwrap();
        let mut line_values = Vec::new();
        let mut left = f64::NAN;
        let mut right = f64::NAN;
        let mut xs = Vec::new();
        for row in &table.rows {
            let x = row[x_col];
            if spec.bvp == Bvp::RectBimaterial && (x - RECT_INTERFACE_X).abs() < 1e-12 {
                if row[region_col] == 1.0 {
                    left = row[q_col];
                } else {
                    right = row[q_col];
                }
                continue;
            }
            // A station on a mesh line yields one row per adjacent cell;
            // keep the first so the vectors align across levels.
            if xs.last().is_some_and(|&last: &f64| (last - x).abs() < 1e-12) {
                continue;
            }
            line_values.push(row[q_col]);
            xs.push(x);
        }
        let transition_width = match spec.bvp {
            Bvp::RectBimaterial => transition_width(&xs, &line_values),
            Bvp::AnnulusShear => f64::NAN,
        };
        out.push(ConvergenceLevel {
            level,
            cells: run.mesh.cells.len(),
            n_dofs: run.dofmap.n_dofs,
            line_values,
            interface: (left, right),
            transition_width,
        });
    }
    let mut diffs = Vec::new();
    for pair in out.windows(2) {
        let a = &pair[0].line_values;
        let b = &pair[1].line_values;
        assert_eq!(a.len(), b.len());
        let num: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        diffs.push(num / den.max(1e-300));
    }
    Ok(ConvergenceResult {
        pairing: spec.pairing,
        levels: out,
        diffs,
    })
}

/// Width of the interface transition measured between the 25% and 75%
/// crossings of the plateau-to-plateau change of P21 around x = 1.
fn transition_width(xs: &[f64], values: &[f64]) -> f64 {
    let plateau = |lo: f64, hi: f64| {
        let sel: Vec<f64> = xs
            .iter()
            .zip(values)
            .filter(|(&x, _)| x >= lo && x <= hi)
            .map(|(_, &v)| v)
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    };
    let p_left = plateau(0.60, 0.85);
    let p_right = plateau(1.15, 1.40);
    let delta = p_right - p_left;
    if delta.abs() < 1e-300 {
        return 0.0;
    }
    let level_at = |frac: f64| p_left + frac * delta;
    let crossing = |target: f64, from_left: bool| -> f64 {
        let idx: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] > 0.85 && xs[i] < 1.15).collect();
        let rising = delta > 0.0;
        let crossed = |v: f64| if rising { v >= target } else { v <= target };
        if from_left {
            for w in idx.windows(2) {
                let (i, j) = (w[0], w[1]);
                if !crossed(values[i]) && crossed(values[j]) {
                    let t = (target - values[i]) / (values[j] - values[i]);
                    return xs[i] + t * (xs[j] - xs[i]);
                }
            }
            1.0
        } else {
            for w in idx.windows(2).rev() {
                let (i, j) = (w[0], w[1]);
                if crossed(values[j]) && !crossed(values[i]) {
                    let t = (target - values[i]) / (values[j] - values[i]);
                    return xs[i] + t * (xs[j] - xs[i]);
                }
            }
            1.0
        }
    };
    let x25 = crossing(level_at(0.25), true);
    let x75 = crossing(level_at(0.75), false);
    (x75 - x25).abs()
}

/// Structured per-run report for the summary file.
#[derive(Serialize)]
pub struct RunSummary {
    pub study: String,
    pub case: Option<String>,
    pub pairing: String,
    pub level: usize,
    pub l_c: Option<f64>,
    pub cells: usize,
    pub n_dofs: usize,
    pub n_u_dofs: usize,
    pub n_p_dofs: usize,
    pub potential: f64,
    pub energy_split: EnergySplit,
    pub solve: SolveReport,
}

impl RunSummary {
    pub fn from_run(spec: &StudySpec, run: &BvpRun) -> RunSummary {
        RunSummary {
            study: match spec.bvp {
                Bvp::RectBimaterial => "rect-bimaterial".into(),
                Bvp::AnnulusShear => "annulus-shear".into(),
            },
            case: match spec.bvp {
                Bvp::AnnulusShear => Some(
                    match spec.case {
                        AnnulusCase::A => "A",
                        AnnulusCase::B => "B",
                    }
                    .into(),
                ),
                _ => None,
            },
            pairing: spec.pairing.name().into(),
            level: spec.level,
            l_c: spec.l_c,
            cells: run.mesh.cells.len(),
            n_dofs: run.dofmap.n_dofs,
            n_u_dofs: run.dofmap.n_u_dofs,
            n_p_dofs: run.dofmap.n_p_dofs,
            potential: run.potential,
            energy_split: run.split,
            solve: run.report.clone(),
        }
    }
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(summary)
        .map_err(|e| Error::Format(format!("summary serialization failed: {e}")))?;
    std::fs::write(path, json + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_parse_roundtrip() {
        for p in Pairing::ALL {
            assert_eq!(Pairing::parse(p.name()).unwrap(), p);
        }
        assert!(Pairing::parse("T3NT7").is_err());
    }

    #[test]
    fn inspection_points_avoid_grid_lines() {
        for &(nx, _) in &BVP1_LEVELS {
            for p in bvp1_inspection_points() {
                if (p.x - RECT_INTERFACE_X).abs() < 1e-12 {
                    continue;
                }
                let t = p.x * nx as f64 / RECT_LENGTH;
                assert!((t - t.round()).abs() > 1e-6, "x={} hits grid nx={nx}", p.x);
            }
        }
    }

    #[test]
    fn radial_points_stay_inside() {
        for p in bvp2_radial_points(120) {
            assert!(p.x > ANNULUS_R_INNER && p.x < ANNULUS_R_OUTER);
        }
    }

    #[test]
    fn coarse_bvp1_solves_for_every_pairing() {
        for pairing in [Pairing::T2T1, Pairing::T2NT1, Pairing::Q2NQ1] {
            let spec = StudySpec::new(Bvp::RectBimaterial, pairing, 0);
            let result = run_bvp1(&spec).unwrap();
            assert!(result.run.potential > 0.0, "{pairing:?}");
            assert!(result.run.report.rel_residual <= 1e-10);
            // The prescribed top-edge displacement is reproduced.
            let fields = result.run.fields();
            let locator = crate::fields::PointLocator::new(&result.run.mesh);
            let (cell, xi) = locator.locate_one(Vec2::new(0.37, 0.999999), 1e-6).unwrap();
            let state = fields.eval(cell, xi).unwrap();
            assert!((state.u - Vec2::new(0.01, 0.01)).norm() < 1e-5, "{pairing:?}");
        }
    }

    #[test]
    fn elastic_patch_test_affine_field() {
        // A uniform elastic plate with affine boundary data reproduces
        // the affine field exactly.
        let mesh = bvp1_mesh(0, CellKind::Tri).unwrap();
        let tensor = ElasticityTensor2D::from_lame(486.11, 729.17);
        let materials = RegionMaterials::elastic(&[(1, tensor), (2, tensor)]);
        let dofmap = DofMap::build(&mesh, PSpace::None).unwrap();
        let system = assemble(
            &mesh,
            &dofmap,
            &materials,
            &Loads::default(),
            &AssembleOptions::default(),
        )
        .unwrap();
        let g = Mat2::new(3e-3, 1e-3, -2e-3, 5e-3);
        let affine = |x: Vec2| g.mul_vec(x);
        let mut set = ConstraintSet::new();
        for tag in ["bottom", "top", "left", "right"] {
            dirichlet_u(&mesh, &dofmap, &mut set, tag, &affine).unwrap();
        }
        let reduced = eliminate(&system, &set).unwrap();
        let (y, _) = solve_spd(&reduced.k, &reduced.f, &SolverSettings::default()).unwrap();
        let dofs = reduced.recover(&y);
        let fields = SolutionFields::borrowed(&mesh, &dofmap, &dofs);
        for cell in [0usize, 3, 7] {
            let state = fields.eval(cell, Vec2::new(0.25, 0.3)).unwrap();
            assert!((state.u - g.mul_vec(state.x)).norm() < 1e-10);
            assert!((state.grad_u - g).norm() < 1e-9);
        }
    }

    #[test]
    fn elastic_potential_scales_linearly_in_tensor() {
        let tensor = ElasticityTensor2D::from_lame(486.11, 729.17);
        let mesh1 = bvp2_mesh(0, CellKind::Tri, AnnulusCase::A).unwrap();
        let run1 = linear_elasticity_solve(
            Bvp::AnnulusShear,
            mesh1,
            tensor,
            &SolverSettings::default(),
        )
        .unwrap();
        let mesh2 = bvp2_mesh(0, CellKind::Tri, AnnulusCase::A).unwrap();
        let run2 = linear_elasticity_solve(
            Bvp::AnnulusShear,
            mesh2,
            tensor.scale(2.0),
            &SolverSettings::default(),
        )
        .unwrap();
        assert!((run2.potential - 2.0 * run1.potential).abs() < 1e-9 * run1.potential.abs());
    }
}
