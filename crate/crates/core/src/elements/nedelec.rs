//! First-kind Nedelec shape functions in closed form.
//!
//! Basis ordering: edge bases in element-family edge order (each edge's
//! moments consecutively), then inner bases. Each basis function is dual
//! to the matching tangential edge moment or inner moment; the duality is
//! exercised by quadrature in the element tests and the verification
//! suite.

use crate::error::{Error, Result};
use crate::la::Vec2;
use crate::mesh::CellKind;

/// Vector values and scalar reference curls of all shape functions.
pub fn nedelec_eval(kind: CellKind, order: u8, xi: Vec2) -> Result<(Vec<Vec2>, Vec<f64>)> {
    match (kind, order) {
        (CellKind::Tri, 1) => Ok(nt1(xi)),
        (CellKind::Tri, 2) => Ok(nt2(xi)),
        (CellKind::Quad, 1) => Ok(nq1(xi)),
        (CellKind::Quad, 2) => Ok(nq2(xi)),
        _ => Err(Error::Element(format!(
            "no Nedelec element for {kind:?} order {order}"
        ))),
    }
}

fn nt1(xi: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let (x, y) = (xi.x, xi.y);
    (
        vec![
            Vec2::new(y, -x),
            Vec2::new(y, 1.0 - x),
            Vec2::new(1.0 - y, x),
        ],
        vec![-2.0, -2.0, 2.0],
    )
}

fn nt2(xi: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let (x, y) = (xi.x, xi.y);
    let values = vec![
        Vec2::new(-y + 4.0 * y * x, 2.0 * x - 4.0 * x * x) * 2.0,
        Vec2::new(-2.0 * y + 4.0 * y * y, x - 4.0 * y * x) * 2.0,
        Vec2::new(-2.0 * y + 4.0 * y * y, -1.0 + 3.0 * y + x - 4.0 * y * x) * 2.0,
        Vec2::new(
            3.0 * y - 4.0 * y * y - 4.0 * y * x,
            2.0 - 3.0 * y - 6.0 * x + 4.0 * y * x + 4.0 * x * x,
        ) * 2.0,
        Vec2::new(
            2.0 - 6.0 * y + 4.0 * y * y - 3.0 * x + 4.0 * y * x,
            3.0 * x - 4.0 * y * x - 4.0 * x * x,
        ) * 2.0,
        Vec2::new(-1.0 + y + 3.0 * x - 4.0 * y * x, -2.0 * x + 4.0 * x * x) * 2.0,
        Vec2::new(
            8.0 * y - 8.0 * y * y - 4.0 * y * x,
            -4.0 * x + 8.0 * y * x + 4.0 * x * x,
        ) * 2.0,
        Vec2::new(
            -4.0 * y + 4.0 * y * y + 8.0 * y * x,
            8.0 * x - 4.0 * y * x - 8.0 * x * x,
        ) * 2.0,
    ];
    let curls = vec![
        2.0 * (3.0 - 12.0 * x),
        2.0 * (3.0 - 12.0 * y),
        2.0 * (3.0 - 12.0 * y),
        2.0 * (-9.0 + 12.0 * y + 12.0 * x),
        2.0 * (9.0 - 12.0 * y - 12.0 * x),
        2.0 * (-3.0 + 12.0 * x),
        2.0 * (-12.0 + 24.0 * y + 12.0 * x),
        2.0 * (12.0 - 12.0 * y - 24.0 * x),
    ];
    (values, curls)
}

fn nq1(xi: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let (x, y) = (xi.x, xi.y);
    (
        vec![
            Vec2::new(0.25 * (1.0 - y), 0.0),
            Vec2::new(0.0, 0.25 * (1.0 + x)),
            Vec2::new(0.25 * (1.0 + y), 0.0),
            Vec2::new(0.0, 0.25 * (1.0 - x)),
        ],
        vec![0.25, 0.25, -0.25, -0.25],
    )
}

fn nq2(xi: Vec2) -> (Vec<Vec2>, Vec<f64>) {
    let (x, y) = (xi.x, xi.y);
    let (x2, y2) = (x * x, y * y);
    let values = vec![
        // edge 1
        Vec2::new(
            -0.125 - 0.25 * y + 0.375 * y2 + 0.375 * x + 0.75 * y * x - 1.125 * y2 * x,
            0.0,
        ),
        Vec2::new(
            -0.125 - 0.25 * y + 0.375 * y2 - 0.375 * x - 0.75 * y * x + 1.125 * y2 * x,
            0.0,
        ),
        // edge 2
        Vec2::new(
            0.0,
            -0.125 + 0.375 * y + 0.25 * x - 0.75 * y * x + 0.375 * x2 - 1.125 * y * x2,
        ),
        Vec2::new(
            0.0,
            -0.125 - 0.375 * y + 0.25 * x + 0.75 * y * x + 0.375 * x2 + 1.125 * y * x2,
        ),
        // edge 3
        Vec2::new(
            -0.125 + 0.25 * y + 0.375 * y2 - 0.375 * x + 0.75 * y * x + 1.125 * y2 * x,
            0.0,
        ),
        Vec2::new(
            -0.125 + 0.25 * y + 0.375 * y2 + 0.375 * x - 0.75 * y * x - 1.125 * y2 * x,
            0.0,
        ),
        // edge 4
        Vec2::new(
            0.0,
            -0.125 - 0.375 * y - 0.25 * x - 0.75 * y * x + 0.375 * x2 + 1.125 * y * x2,
        ),
        Vec2::new(
            0.0,
            -0.125 + 0.375 * y - 0.25 * x + 0.75 * y * x + 0.375 * x2 - 1.125 * y * x2,
        ),
        // inner
        Vec2::new(0.375 - 0.375 * y2 + 1.125 * x - 1.125 * y2 * x, 0.0),
        Vec2::new(0.375 - 0.375 * y2 - 1.125 * x + 1.125 * y2 * x, 0.0),
        Vec2::new(0.0, 0.375 + 1.125 * y - 0.375 * x2 - 1.125 * y * x2),
        Vec2::new(0.0, 0.375 - 1.125 * y - 0.375 * x2 + 1.125 * y * x2),
    ];
    let curls = vec![
        0.25 - 0.75 * y - 0.75 * x + 2.25 * y * x,
        0.25 - 0.75 * y + 0.75 * x - 2.25 * y * x,
        0.25 - 0.75 * y + 0.75 * x - 2.25 * y * x,
        0.25 + 0.75 * y + 0.75 * x + 2.25 * y * x,
        -0.25 - 0.75 * y - 0.75 * x - 2.25 * y * x,
        -0.25 - 0.75 * y + 0.75 * x + 2.25 * y * x,
        -0.25 - 0.75 * y + 0.75 * x + 2.25 * y * x,
        -0.25 + 0.75 * y + 0.75 * x - 2.25 * y * x,
        0.75 * y + 2.25 * y * x,
        0.75 * y - 2.25 * y * x,
        -0.75 * x - 2.25 * y * x,
        -0.75 * x + 2.25 * y * x,
    ];
    (values, curls)
}
