//! Isotropic constitutive tensors and the derived macro (Reuss) tensor.
//!
//! The 2D reduction is plane strain: in-plane fields with all
//! out-of-plane components of the micro-distortion set to zero. This
//! affects absolute stress values but not the qualitative studies.
//!
//! `ElasticityTensor2D` stores the Mandel 3x3 matrix of the map on
//! symmetric tensors in the orthonormal basis `(e11, e22, sqrt(2) e12)`,
//! so compositions and inversions are plain matrix algebra and quadratic
//! forms carry no hidden shear factors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::{DenseMat, Mat2, solve_dense};

/// Parameter set of the relaxed micromorphic solid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotropicParams {
    pub lambda_micro: f64,
    pub mu_micro: f64,
    pub lambda_e: f64,
    pub mu_e: f64,
    pub mu_c: f64,
    pub mu: f64,
    #[serde(rename = "Lc")]
    pub l_c: f64,
    /// Scalar multiple of the identity curvature tensor.
    #[serde(rename = "L_scale", default = "one")]
    pub l_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl IsotropicParams {
    pub fn validate(&self) -> Result<()> {
        let admissible = |l: f64, m: f64| m > 0.0 && 3.0 * l + 2.0 * m > 0.0;
        if !admissible(self.lambda_micro, self.mu_micro) {
            return Err(Error::Material(format!(
                "micro pair (lambda={}, mu={}) is not positive definite",
                self.lambda_micro, self.mu_micro
            )));
        }
        if !admissible(self.lambda_e, self.mu_e) {
            return Err(Error::Material(format!(
                "elastic pair (lambda={}, mu={}) is not positive definite",
                self.lambda_e, self.mu_e
            )));
        }
        if self.mu_c < 0.0 {
            return Err(Error::Material("mu_c must be non-negative".into()));
        }
        if self.l_c < 0.0 {
            return Err(Error::Material("Lc must be non-negative".into()));
        }
        if self.l_scale < 0.0 {
            return Err(Error::Material("L_scale must be non-negative".into()));
        }
        Ok(())
    }

    pub fn c_e(&self) -> ElasticityTensor2D {
        ElasticityTensor2D::from_lame(self.lambda_e, self.mu_e)
    }

    pub fn c_micro(&self) -> ElasticityTensor2D {
        ElasticityTensor2D::from_lame(self.lambda_micro, self.mu_micro)
    }

    /// Coefficient of the curvature term: `mu Lc^2` times the scalar
    /// curvature scale.
    pub fn moment_modulus(&self) -> f64 {
        self.mu * self.l_c * self.l_c * self.l_scale
    }

    pub fn with_l_c(mut self, l_c: f64) -> Self {
        self.l_c = l_c;
        self
    }
}

/// Plane-strain elasticity tensor acting on symmetric 2x2 tensors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticityTensor2D {
    /// Mandel matrix in the basis `(e11, e22, sqrt(2) e12)`.
    pub m: [[f64; 3]; 3],
}

fn to_mandel(e: Mat2) -> [f64; 3] {
    [e.a[0][0], e.a[1][1], std::f64::consts::SQRT_2 * e.a[0][1]]
}

fn from_mandel(v: [f64; 3]) -> Mat2 {
    let s = v[2] / std::f64::consts::SQRT_2;
    Mat2::new(v[0], s, s, v[1])
}

impl ElasticityTensor2D {
    pub fn from_lame(lambda: f64, mu: f64) -> Self {
        ElasticityTensor2D {
            m: [
                [lambda + 2.0 * mu, lambda, 0.0],
                [lambda, lambda + 2.0 * mu, 0.0],
                [0.0, 0.0, 2.0 * mu],
            ],
        }
    }

    /// Recovers the Lame pair from an isotropic Mandel matrix.
    pub fn lame(&self) -> (f64, f64) {
        let mu = 0.5 * self.m[2][2];
        let lambda = self.m[0][1];
        (lambda, mu)
    }

    /// Applies the tensor to a symmetric strain: `sigma = C : e`.
    pub fn apply(&self, e: Mat2) -> Mat2 {
        let ev = to_mandel(e.sym());
        let mut sv = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                sv[i] += self.m[i][j] * ev[j];
            }
        }
        from_mandel(sv)
    }

    /// Quadratic/bilinear form `a : C : b` on symmetric parts.
    pub fn quad_form(&self, a: Mat2, b: Mat2) -> f64 {
        let av = to_mandel(a.sym());
        let bv = to_mandel(b.sym());
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += av[i] * self.m[i][j] * bv[j];
            }
        }
        s
    }

    pub fn is_spd(&self) -> bool {
        // Leading principal minors of the symmetric Mandel matrix.
        let m = &self.m;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = d2 * m[2][2]
            - m[0][0] * m[1][2] * m[2][1]
            - m[2][0] * m[0][2] * m[1][1]
            + m[0][1] * m[1][2] * m[2][0]
            + m[2][1] * m[0][2] * m[1][0];
        d1 > 0.0 && d2 > 0.0 && d3 > 0.0
    }

    pub fn inverse(&self) -> Result<ElasticityTensor2D> {
        let mut a = DenseMat::zeros(3, 3);
        for r in 0..3 {
            for c in 0..3 {
                *a.at_mut(r, c) = self.m[r][c];
            }
        }
        let mut out = [[0.0; 3]; 3];
        for c in 0..3 {
            let mut rhs = [0.0; 3];
            rhs[c] = 1.0;
            let col = solve_dense(&a, &rhs)
                .ok_or_else(|| Error::Material("singular elasticity tensor".into()))?;
            for r in 0..3 {
                out[r][c] = col[r];
            }
        }
        Ok(ElasticityTensor2D { m: out })
    }

    pub fn scale(&self, s: f64) -> ElasticityTensor2D {
        let mut m = self.m;
        for row in &mut m {
            for v in row {
                *v *= s;
            }
        }
        ElasticityTensor2D { m }
    }
}

/// Builds a plane-strain isotropic tensor, validating admissibility.
pub fn build_tensor(lambda: f64, mu: f64) -> Result<ElasticityTensor2D> {
    if !(mu > 0.0 && 3.0 * lambda + 2.0 * mu > 0.0) {
        return Err(Error::Material(format!(
            "inadmissible Lame pair (lambda={lambda}, mu={mu})"
        )));
    }
    Ok(ElasticityTensor2D::from_lame(lambda, mu))
}

/// Reuss (compliance-average) combination governing the small-length
/// limit: `C_macro = (C_e^{-1} + C_micro^{-1})^{-1}`.
pub fn reuss_macro(
    c_e: &ElasticityTensor2D,
    c_micro: &ElasticityTensor2D,
) -> Result<ElasticityTensor2D> {
    let ie = c_e.inverse()?;
    let im = c_micro.inverse()?;
    let mut sum = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            sum[r][c] = ie.m[r][c] + im.m[r][c];
        }
    }
    let combined = ElasticityTensor2D { m: sum }.inverse()?;
    if !combined.is_spd() {
        return Err(Error::Material("Reuss combination is not positive definite".into()));
    }
    Ok(combined)
}

/// The two Table-style parameter sets of the bimaterial rectangle study.
pub fn rect_study_materials() -> (IsotropicParams, IsotropicParams) {
    (
        IsotropicParams {
            lambda_micro: 555.55,
            mu_micro: 833.33,
            lambda_e: 486.11,
            mu_e: 729.17,
            mu_c: 0.0,
            mu: 833.33,
            l_c: 1.0,
            l_scale: 1.0,
        },
        IsotropicParams {
            lambda_micro: 1111.11,
            mu_micro: 1667.67,
            lambda_e: 972.22,
            mu_e: 1458.33,
            mu_c: 0.0,
            mu: 1666.67,
            l_c: 1.0,
            l_scale: 1.0,
        },
    )
}

/// The two parameter sets of the annulus shear study.
pub fn annulus_study_materials() -> (IsotropicParams, IsotropicParams) {
    (
        IsotropicParams {
            lambda_micro: 555.55,
            mu_micro: 833.33,
            lambda_e: 486.11,
            mu_e: 729.17,
            mu_c: 0.0,
            mu: 833.33,
            l_c: 1.0,
            l_scale: 1.0,
        },
        IsotropicParams {
            lambda_micro: 2777.78,
            mu_micro: 4166.67,
            lambda_e: 2430.555,
            mu_e: 3645.85,
            mu_c: 0.0,
            mu: 4166.67,
            l_c: 1.0,
            l_scale: 1.0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_shear_stress() {
        let c = build_tensor(0.0, 1.0).unwrap();
        let sigma = c.apply(Mat2::IDENTITY);
        assert!((sigma - Mat2::IDENTITY * 2.0).norm() < 1e-14);

        let c = build_tensor(555.55, 833.33).unwrap();
        let shear = Mat2::new(0.0, 1.0, 1.0, 0.0);
        let sigma = c.apply(shear);
        assert!((sigma.a[0][1] - 1666.66).abs() < 1e-10);
        assert!(sigma.a[0][0].abs() < 1e-12);
    }

    #[test]
    fn lambda_only_trace_response() {
        let c = build_tensor(1.0, 1e-9).unwrap();
        let sigma = c.apply(Mat2::IDENTITY);
        // lambda tr(e) I with tr = 2 dominates.
        assert!((sigma.a[0][0] - 2.0).abs() < 1e-6);
        assert!((sigma.a[1][1] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn lame_roundtrip() {
        let c = build_tensor(486.11, 729.17).unwrap();
        let (l, m) = c.lame();
        assert!((l - 486.11).abs() < 1e-12);
        assert!((m - 729.17).abs() < 1e-12);
    }

    #[test]
    fn reuss_equal_tensors_halve() {
        let c = build_tensor(486.11, 729.17).unwrap();
        let r = reuss_macro(&c, &c).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r.m[i][j] - 0.5 * c.m[i][j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reuss_shear_is_harmonic_mean() {
        let (m1, _) = rect_study_materials();
        let r = reuss_macro(&m1.c_e(), &m1.c_micro()).unwrap();
        let (_, mu_macro) = r.lame();
        let want = 1.0 / (1.0 / 729.17 + 1.0 / 833.33);
        assert!((mu_macro - want).abs() < 1e-9, "{mu_macro} vs {want}");
        assert!((want - 388.89).abs() < 5e-3);
    }

    #[test]
    fn reuss_limit_to_stiffer_tensor() {
        let c_e = build_tensor(486.11, 729.17).unwrap();
        let c_micro = build_tensor(555.55, 833.33).unwrap().scale(1e6);
        let r = reuss_macro(&c_e, &c_micro).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let denom = c_e.m[i][j].abs().max(1.0);
                assert!((r.m[i][j] - c_e.m[i][j]).abs() / denom < 1e-4);
            }
        }
    }

    #[test]
    fn reuss_bounded_by_both_inputs() {
        let c_e = build_tensor(486.11, 729.17).unwrap();
        let c_m = build_tensor(555.55, 833.33).unwrap();
        let r = reuss_macro(&c_e, &c_m).unwrap();
        // Isotropic eigenvalues: 2(lambda + mu) on the trace part, 2 mu on
        // the deviatoric part.
        let eigs = |c: &ElasticityTensor2D| {
            let (l, m) = c.lame();
            [2.0 * (l + m), 2.0 * m]
        };
        let [ra, rb] = eigs(&r);
        for other in [&c_e, &c_m] {
            let [oa, ob] = eigs(other);
            assert!(ra <= oa && rb <= ob);
        }
    }

    #[test]
    fn moment_modulus_values() {
        let (m1, _) = rect_study_materials();
        assert!((m1.moment_modulus() - 833.33).abs() < 1e-12);
        assert_eq!(m1.with_l_c(0.0).moment_modulus(), 0.0);
        let p = IsotropicParams {
            mu: 2.0,
            l_c: 3.0,
            ..m1
        };
        assert!((p.moment_modulus() - 18.0).abs() < 1e-12);
    }

    #[test]
    fn quad_form_matches_tensorial_contraction() {
        let c = build_tensor(486.11, 729.17).unwrap();
        let (l, mu) = (486.11, 729.17);
        let a = Mat2::new(0.3, -0.2, 0.7, 0.1);
        let sa = a.sym();
        let direct = l * sa.trace() * sa.trace() + 2.0 * mu * sa.ddot(&sa);
        assert!((c.quad_form(a, a) - direct).abs() < 1e-10);
    }

    #[test]
    fn inadmissible_pairs_rejected() {
        assert!(build_tensor(0.0, 0.0).is_err());
        assert!(build_tensor(-0.5, 1.0).is_ok());
        assert!(build_tensor(-10.0, 1.0).is_err());
        let (mut m1, _) = rect_study_materials();
        m1.mu_c = -1.0;
        assert!(m1.validate().is_err());
    }
}
