//! Quadrature rules on the reference triangle and reference square.
//!
//! Triangle rules up to degree 6 use the classic symmetric point sets
//! (all weights positive); degrees 7-8 fall back to a collapsed tensor
//! Gauss rule. Square rules are tensor-product Gauss-Legendre.

use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mesh::CellKind;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Reference-cell coordinates.
    pub points: Vec<Vec2>,
    /// Positive weights summing to the reference-cell measure.
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec2, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` for `n <= 5` points.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = (1.0f64 / 3.0).sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (3.0f64 / 5.0).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let t = (6.0f64 / 5.0).sqrt();
            let a = (3.0 / 7.0 - 2.0 / 7.0 * t).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * t).sqrt();
            let s30 = 30.0f64.sqrt();
            let wa = (18.0 + s30) / 36.0;
            let wb = (18.0 - s30) / 36.0;
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let t = (10.0f64 / 7.0).sqrt();
            let a = (5.0 - 2.0 * t).sqrt() / 3.0;
            let b = (5.0 + 2.0 * t).sqrt() / 3.0;
            let s70 = 70.0f64.sqrt();
            let wa = (322.0 + 13.0 * s70) / 900.0;
            let wb = (322.0 - 13.0 * s70) / 900.0;
            (
                vec![-b, -a, 0.0, a, b],
                vec![wb, wa, 128.0 / 225.0, wa, wb],
            )
        }
        _ => {
            return Err(Error::Parameter(format!(
                "gauss_legendre supports 1..=5 points, got {n}"
            )))
        }
    };
    Ok((x, w))
}

/// Gauss points on the unit interval `[0, 1]`, weights summing to 1.
pub fn unit_interval(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_legendre(n)?;
    Ok((
        x.iter().map(|t| 0.5 * (t + 1.0)).collect(),
        w.iter().map(|wi| 0.5 * wi).collect(),
    ))
}

/// Tensor-product Gauss rule on `[-1,1]^2` exact to the requested degree.
pub fn quad_rule(degree: usize) -> Result<QuadratureRule> {
    if degree > 8 {
        return Err(Error::Parameter(format!(
            "quadrature degree {degree} exceeds the supported maximum 8"
        )));
    }
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n)?;
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for (i, &xi) in x.iter().enumerate() {
        for (j, &eta) in x.iter().enumerate() {
            points.push(Vec2::new(xi, eta));
            weights.push(w[i] * w[j]);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Symmetric rule on the reference triangle `{0<=xi, 0<=eta, xi+eta<=1}`.
pub fn tri_rule(degree: usize) -> Result<QuadratureRule> {
    // Orbits are given in normalized weights (summing to 1); the reference
    // triangle has measure 1/2.
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let push3 = |a: f64, w: f64, pts: &mut Vec<Vec2>, ws: &mut Vec<f64>| {
        pts.push(Vec2::new(a, a));
        pts.push(Vec2::new(1.0 - 2.0 * a, a));
        pts.push(Vec2::new(a, 1.0 - 2.0 * a));
        ws.extend([w, w, w]);
    };
    match degree {
        0 | 1 => {
            points.push(Vec2::new(1.0 / 3.0, 1.0 / 3.0));
            weights.push(1.0);
        }
        2 => push3(1.0 / 6.0, 1.0 / 3.0, &mut points, &mut weights),
        3 | 4 => {
            // Degree-4 six-point rule (covers the degree-3 request with
            // positive weights; the classic 4-point degree-3 rule has a
            // negative centroid weight).
            push3(
                0.445948490915965,
                0.223381589678011,
                &mut points,
                &mut weights,
            );
            push3(
                0.091576213509771,
                0.109951743655322,
                &mut points,
                &mut weights,
            );
        }
        5 => {
            let s15 = 15.0f64.sqrt();
            points.push(Vec2::new(1.0 / 3.0, 1.0 / 3.0));
            weights.push(9.0 / 40.0);
            push3(
                (6.0 + s15) / 21.0,
                (155.0 + s15) / 1200.0,
                &mut points,
                &mut weights,
            );
            push3(
                (6.0 - s15) / 21.0,
                (155.0 - s15) / 1200.0,
                &mut points,
                &mut weights,
            );
        }
        6 => {
            push3(
                0.063089014491502,
                0.050844906370207,
                &mut points,
                &mut weights,
            );
            push3(
                0.249286745170910,
                0.116786275726379,
                &mut points,
                &mut weights,
            );
            let (a, b) = (0.310352451033785, 0.636502499121399);
            let c = 1.0 - a - b;
            let w = 0.082851075618374;
            for (x, y) in [(a, b), (b, a), (a, c), (c, a), (b, c), (c, b)] {
                points.push(Vec2::new(x, y));
                weights.push(w);
            }
        }
        7 | 8 => return collapsed_tri_rule(degree),
        _ => {
            return Err(Error::Parameter(format!(
                "quadrature degree {degree} exceeds the supported maximum 8"
            )))
        }
    }
    for w in &mut weights {
        *w *= 0.5;
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Collapsed tensor Gauss rule on the triangle: maps `[0,1]^2` by
/// `(a, b) -> (a, b(1-a))` with the `(1-a)` factor folded into the weight.
fn collapsed_tri_rule(degree: usize) -> Result<QuadratureRule> {
    // In the first direction the integrand degree rises by one.
    let n = (degree + 1) / 2 + 1;
    let (x, w) = unit_interval(n.min(5))?;
    let mut points = Vec::with_capacity(x.len() * x.len());
    let mut weights = Vec::with_capacity(x.len() * x.len());
    for (i, &a) in x.iter().enumerate() {
        for (j, &b) in x.iter().enumerate() {
            points.push(Vec2::new(a, b * (1.0 - a)));
            weights.push(w[i] * w[j] * (1.0 - a));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

/// Rule on the reference cell of the given kind.
pub fn cell_rule(kind: CellKind, degree: usize) -> Result<QuadratureRule> {
    match kind {
        CellKind::Tri => tri_rule(degree),
        CellKind::Quad => quad_rule(degree),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &QuadratureRule, f: impl Fn(Vec2) -> f64) -> f64 {
        rule.iter().map(|(p, w)| w * f(p)).sum()
    }

    /// Exact monomial integral over the reference triangle.
    fn tri_exact(p: u32, q: u32) -> f64 {
        // int xi^p eta^q = p! q! / (p+q+2)!
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>().max(1.0);
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn quad_degree_3_is_2x2_gauss() {
        let rule = quad_rule(3).unwrap();
        assert_eq!(rule.len(), 4);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 4.0).abs() < 1e-14);
    }

    #[test]
    fn tri_degree_2_is_3_points() {
        let rule = tri_rule(2).unwrap();
        assert_eq!(rule.len(), 3);
        let total: f64 = rule.weights.iter().sum();
        assert!((total - 0.5).abs() < 1e-14);
        assert!((integrate(&rule, |p| p.x * p.x) - tri_exact(2, 0)).abs() < 1e-15);
    }

    #[test]
    fn tri_degree_5_is_7_points_and_exact() {
        let rule = tri_rule(5).unwrap();
        assert_eq!(rule.len(), 7);
        // xi^2 eta^3 has exact integral 1/420.
        let got = integrate(&rule, |p| p.x * p.x * p.y * p.y * p.y);
        assert!((got - 1.0 / 420.0).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn all_tri_rules_exact_to_stated_degree() {
        for degree in 1..=8usize {
            let rule = tri_rule(degree).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for p in 0..=degree as u32 {
                for q in 0..=(degree as u32 - p) {
                    let got = integrate(&rule, |v| v.x.powi(p as i32) * v.y.powi(q as i32));
                    let want = tri_exact(p, q);
                    assert!(
                        (got - want).abs() < 1e-13,
                        "degree {degree} monomial ({p},{q}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn all_quad_rules_exact_to_stated_degree() {
        for degree in 1..=8usize {
            let rule = quad_rule(degree).unwrap();
            for p in 0..=degree as u32 {
                for q in 0..=degree as u32 {
                    if p + q > degree as u32 {
                        continue;
                    }
                    let got = integrate(&rule, |v| v.x.powi(p as i32) * v.y.powi(q as i32));
                    let exact1 = |k: u32| {
                        if k % 2 == 1 {
                            0.0
                        } else {
                            2.0 / (k as f64 + 1.0)
                        }
                    };
                    let want = exact1(p) * exact1(q);
                    assert!(
                        (got - want).abs() < 1e-13,
                        "degree {degree} monomial ({p},{q}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_9_rejected() {
        assert!(tri_rule(9).is_err());
        assert!(quad_rule(9).is_err());
    }
}
