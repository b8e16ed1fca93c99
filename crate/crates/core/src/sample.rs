//! Field sampling along point sets, with optional polar components.
//!
//! Values are evaluated element-wise without cross-edge averaging; a
//! point on an interior edge yields one row per adjacent cell, so
//! discontinuities stay visible in the output.

use crate::assembly::{MaterialModel, RegionMaterials};
use crate::error::Result;
use crate::fields::{elastic_stress, stresses_at, PointLocator, SolutionFields};
use crate::la::{Mat2, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Cartesian,
    Polar,
}

/// A column-labeled numeric table with `#`-style metadata lines.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn values(&self, name: &str) -> Vec<f64> {
        let idx = self.column(name).expect("unknown column");
        self.rows.iter().map(|r| r[idx]).collect()
    }

    pub fn push_meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }
}

/// Rotation to the local polar frame at `x`: columns are the radial and
/// tangential unit vectors.
fn polar_rotation(x: Vec2) -> Mat2 {
    let r = x.norm();
    if r < 1e-300 {
        return Mat2::IDENTITY;
    }
    let er = x * (1.0 / r);
    Mat2::new(er.x, -er.y, er.y, er.x)
}

fn tensor_components(a: Mat2, rot: Option<Mat2>) -> [f64; 4] {
    let t = match rot {
        Some(r) => r.transpose().mul_mat(&a).mul_mat(&r),
        None => a,
    };
    [t.a[0][0], t.a[0][1], t.a[1][0], t.a[1][1]]
}

fn vector_components(v: Vec2, rot: Option<Mat2>) -> [f64; 2] {
    let t = match rot {
        Some(r) => r.transpose().mul_vec(v),
        None => v,
    };
    [t.x, t.y]
}

/// Samples the full micromorphic state at each point. Column names carry
/// the frame: cartesian `P11..`, polar `P_rr, P_rt, P_tr, P_tt` and so
/// on; `m` components are `(m1, m2)` or `(m_r, m_t)`.
pub fn sample_line(
    fields: &SolutionFields,
    materials: &RegionMaterials,
    points: &[Vec2],
    frame: Frame,
) -> Result<Table> {
    let locator = PointLocator::new(fields.mesh);
    let mut table = Table::default();
    let (p_names, s_names, sm_names, m_names, u_names) = match frame {
        Frame::Cartesian => (
            ["P11", "P12", "P21", "P22"],
            ["sig11", "sig12", "sig21", "sig22"],
            ["sigm11", "sigm12", "sigm21", "sigm22"],
            ["m1", "m2"],
            ["u1", "u2"],
        ),
        Frame::Polar => (
            ["P_rr", "P_rt", "P_tr", "P_tt"],
            ["sig_rr", "sig_rt", "sig_tr", "sig_tt"],
            ["sigm_rr", "sigm_rt", "sigm_tr", "sigm_tt"],
            ["m_r", "m_t"],
            ["u_r", "u_t"],
        ),
    };
    table.columns = ["x", "y", "r", "theta", "cell", "region"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    table.columns.extend(u_names.iter().map(|s| s.to_string()));
    table.columns.extend(p_names.iter().map(|s| s.to_string()));
    table.columns.extend(s_names.iter().map(|s| s.to_string()));
    table.columns.extend(sm_names.iter().map(|s| s.to_string()));
    table.columns.extend(m_names.iter().map(|s| s.to_string()));
    table.columns.push("W".to_string());

    for &p in points {
        let hits = locator.locate_all(p, 1e-9);
        if hits.is_empty() {
            return Err(crate::error::Error::Sampling(format!(
                "point ({}, {}) is outside the mesh",
                p.x, p.y
            )));
        }
        for (cell, xi) in hits {
            let state = fields.eval(cell, xi)?;
            let region = fields.mesh.cells[cell].region;
            let params = materials.micromorphic_params(region)?;
            let stress = stresses_at(&state, params)?;
            let rot = (frame == Frame::Polar).then(|| polar_rotation(state.x));
            let mut row = vec![
                state.x.x,
                state.x.y,
                state.x.norm(),
                state.x.y.atan2(state.x.x),
                cell as f64,
                region as f64,
            ];
            row.extend(vector_components(state.u, rot));
            row.extend(tensor_components(state.p.unwrap(), rot));
            row.extend(tensor_components(stress.sigma, rot));
            row.extend(tensor_components(stress.sigma_micro, rot));
            row.extend(vector_components(stress.m, rot));
            row.push(stress.w);
            table.rows.push(row);
        }
    }
    Ok(table)
}

/// Samples a displacement-only (elastic) solution.
pub fn sample_line_elastic(
    fields: &SolutionFields,
    materials: &RegionMaterials,
    points: &[Vec2],
    frame: Frame,
) -> Result<Table> {
    let locator = PointLocator::new(fields.mesh);
    let mut table = Table::default();
    let (s_names, u_names) = match frame {
        Frame::Cartesian => (["sig11", "sig12", "sig21", "sig22"], ["u1", "u2"]),
        Frame::Polar => (["sig_rr", "sig_rt", "sig_tr", "sig_tt"], ["u_r", "u_t"]),
    };
    table.columns = ["x", "y", "r", "theta", "cell", "region"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    table.columns.extend(u_names.iter().map(|s| s.to_string()));
    table.columns.extend(s_names.iter().map(|s| s.to_string()));
    table.columns.push("W".to_string());

    for &p in points {
        for (cell, xi) in locator.locate_all(p, 1e-9) {
            let state = fields.eval(cell, xi)?;
            let region = fields.mesh.cells[cell].region;
            let tensor = match materials.get(region)? {
                MaterialModel::Elastic(t) => t,
                MaterialModel::Micromorphic(_) => {
                    return Err(crate::error::Error::Sampling(
                        "elastic sampler used with micromorphic materials".into(),
                    ))
                }
            };
            let (sigma, w) = elastic_stress(&state, tensor);
            let rot = (frame == Frame::Polar).then(|| polar_rotation(state.x));
            let mut row = vec![
                state.x.x,
                state.x.y,
                state.x.norm(),
                state.x.y.atan2(state.x.x),
                cell as f64,
                region as f64,
            ];
            row.extend(vector_components(state.u, rot));
            row.extend(tensor_components(sigma, rot));
            row.push(w);
            table.rows.push(row);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_frame_on_positive_x_axis_is_identity() {
        let rot = polar_rotation(Vec2::new(3.0, 0.0));
        assert!((rot - Mat2::IDENTITY).norm() < 1e-15);
        let a = Mat2::new(1.0, 2.0, 3.0, 4.0);
        let comps = tensor_components(a, Some(rot));
        // P_rt = P12, P_tr = P21 on the x-axis.
        assert_eq!(comps[1], 2.0);
        assert_eq!(comps[2], 3.0);
    }

    #[test]
    fn polar_rotation_maps_radial_to_first_component() {
        let x = Vec2::new(1.0, 1.0);
        let rot = polar_rotation(x);
        let v = vector_components(x, Some(rot));
        assert!((v[0] - x.norm()).abs() < 1e-14);
        assert!(v[1].abs() < 1e-14);
    }
}
