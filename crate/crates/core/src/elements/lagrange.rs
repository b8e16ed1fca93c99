//! Scalar Lagrange shape functions on the reference triangle and square.
//!
//! Node ordering: corners counterclockwise, then midside nodes in slot
//! order, then the quad center node.

use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mesh::CellKind;

/// Values and reference gradients of all shape functions at `xi`.
pub fn lagrange_eval(kind: CellKind, order: u8, xi: Vec2) -> Result<(Vec<f64>, Vec<Vec2>)> {
    match (kind, order) {
        (CellKind::Tri, 1) => Ok(t1(xi)),
        (CellKind::Tri, 2) => Ok(t2(xi)),
        (CellKind::Quad, 1) => Ok(q1(xi)),
        (CellKind::Quad, 2) => Ok(q2(xi)),
        _ => Err(Error::Element(format!(
            "no Lagrange element for {kind:?} order {order}"
        ))),
    }
}

fn t1(xi: Vec2) -> (Vec<f64>, Vec<Vec2>) {
    let (x, y) = (xi.x, xi.y);
    (
        vec![1.0 - x - y, x, y],
        vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
    )
}

fn t2(xi: Vec2) -> (Vec<f64>, Vec<Vec2>) {
    let (x, y) = (xi.x, xi.y);
    let lam = [1.0 - x - y, x, y];
    let grad = [Vec2::new(-1.0, -1.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
    let mut values = Vec::with_capacity(6);
    let mut grads = Vec::with_capacity(6);
    for i in 0..3 {
        values.push(lam[i] * (2.0 * lam[i] - 1.0));
        grads.push(grad[i] * (4.0 * lam[i] - 1.0));
    }
    // Midside nodes on slots (0,1), (1,2), (2,0).
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        values.push(4.0 * lam[a] * lam[b]);
        grads.push(grad[a] * (4.0 * lam[b]) + grad[b] * (4.0 * lam[a]));
    }
    (values, grads)
}

fn q1(xi: Vec2) -> (Vec<f64>, Vec<Vec2>) {
    let (x, y) = (xi.x, xi.y);
    let signs = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
    let mut values = Vec::with_capacity(4);
    let mut grads = Vec::with_capacity(4);
    for (sx, sy) in signs {
        values.push(0.25 * (1.0 + sx * x) * (1.0 + sy * y));
        grads.push(Vec2::new(
            0.25 * sx * (1.0 + sy * y),
            0.25 * sy * (1.0 + sx * x),
        ));
    }
    (values, grads)
}

/// 1D quadratic Lagrange basis on [-1, 1] with nodes -1, 0, +1.
fn l1d(t: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * t * (t - 1.0), 1.0 - t * t, 0.5 * t * (t + 1.0)],
        [t - 0.5, -2.0 * t, t + 0.5],
    )
}

fn q2(xi: Vec2) -> (Vec<f64>, Vec<Vec2>) {
    let (lx, dx) = l1d(xi.x);
    let (ly, dy) = l1d(xi.y);
    // (ix, iy) 1D node indices per 2D node: corners, midsides, center.
    let nodes = [
        (0, 0),
        (2, 0),
        (2, 2),
        (0, 2),
        (1, 0),
        (2, 1),
        (1, 2),
        (0, 1),
        (1, 1),
    ];
    let mut values = Vec::with_capacity(9);
    let mut grads = Vec::with_capacity(9);
    for (ix, iy) in nodes {
        values.push(lx[ix] * ly[iy]);
        grads.push(Vec2::new(dx[ix] * ly[iy], lx[ix] * dy[iy]));
    }
    (values, grads)
}
