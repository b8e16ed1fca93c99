//! Small fixed-size linear algebra used by the element kernels.
//!
//! All fields live in 2D: vectors are `Vec2`, second-order tensors are
//! `Mat2` (row-major, non-symmetric in general). A tiny heap-backed
//! `DenseMat` covers element stiffness blocks and the dense solves used
//! by test oracles.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Cross product z-component of two in-plane vectors.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn comp(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => panic!("Vec2 component index {i} out of range"),
        }
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

/// 2x2 tensor, row-major: `a[row][col]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2 {
    pub a: [[f64; 2]; 2],
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2 { a: [[0.0; 2]; 2] };
    pub const IDENTITY: Mat2 = Mat2 {
        a: [[1.0, 0.0], [0.0, 1.0]],
    };

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 {
            a: [[a11, a12], [a21, a22]],
        }
    }

    pub fn from_rows(r0: Vec2, r1: Vec2) -> Self {
        Mat2::new(r0.x, r0.y, r1.x, r1.y)
    }

    /// Dyadic product `a ⊗ b`.
    pub fn outer(a: Vec2, b: Vec2) -> Self {
        Mat2::new(a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y)
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2::new(self.a[i][0], self.a[i][1])
    }

    pub fn col(&self, j: usize) -> Vec2 {
        Vec2::new(self.a[0][j], self.a[1][j])
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a[0][0], self.a[1][0], self.a[0][1], self.a[1][1])
    }

    pub fn det(&self) -> f64 {
        self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.a[0][0] + self.a[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let inv = 1.0 / d;
        Some(Mat2::new(
            self.a[1][1] * inv,
            -self.a[0][1] * inv,
            -self.a[1][0] * inv,
            self.a[0][0] * inv,
        ))
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a[0][0] * v.x + self.a[0][1] * v.y,
            self.a[1][0] * v.x + self.a[1][1] * v.y,
        )
    }

    pub fn mul_mat(&self, m: &Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][0] * m.a[0][j] + self.a[i][1] * m.a[1][j];
            }
        }
        out
    }

    pub fn sym(&self) -> Mat2 {
        let off = 0.5 * (self.a[0][1] + self.a[1][0]);
        Mat2::new(self.a[0][0], off, off, self.a[1][1])
    }

    pub fn skew(&self) -> Mat2 {
        let off = 0.5 * (self.a[0][1] - self.a[1][0]);
        Mat2::new(0.0, off, -off, 0.0)
    }

    /// Double contraction `A : B`.
    pub fn ddot(&self, other: &Mat2) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += self.a[i][j] * other.a[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][j] + rhs.a[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][j] - rhs.a[i][j];
            }
        }
        out
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.a[i][j] = self.a[i][j] * s;
            }
        }
        out
    }
}

/// Heap-backed dense matrix, row-major.
#[derive(Clone, Debug)]
pub struct DenseMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            out[r] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m: f64 = 0.0;
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                m = m.max((self.at(r, c) - self.at(c, r)).abs());
            }
        }
        m
    }
}

/// Solve a small dense system by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is numerically singular.
pub fn solve_dense(a: &DenseMat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows;
    assert_eq!(a.cols, n);
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for r in (k + 1)..n {
            let v = m[r * n + k].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != k {
            for c in 0..n {
                m.swap(k * n + c, piv * n + c);
            }
            x.swap(k, piv);
        }
        let d = m[k * n + k];
        for r in (k + 1)..n {
            let factor = m[r * n + k] / d;
            if factor == 0.0 {
                continue;
            }
            for c in k..n {
                m[r * n + c] -= factor * m[k * n + c];
            }
            x[r] -= factor * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for c in (k + 1)..n {
            s -= m[k * n + c] * x[c];
        }
        x[k] = s / m[k * n + k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat2_inverse_roundtrip() {
        let m = Mat2::new(2.0, 1.0, 0.5, 3.0);
        let inv = m.inverse().unwrap();
        let id = m.mul_mat(&inv);
        assert!((id.a[0][0] - 1.0).abs() < 1e-14);
        assert!(id.a[0][1].abs() < 1e-14);
        assert!((id.a[1][1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sym_skew_decompose() {
        let m = Mat2::new(1.0, 2.0, 4.0, 3.0);
        let s = m.sym() + m.skew();
        assert_eq!(s, m);
        assert_eq!(m.skew().a[0][1], -1.0);
    }

    #[test]
    fn dense_solve_matches_hand_inverse() {
        let mut a = DenseMat::zeros(3, 3);
        let vals = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        for r in 0..3 {
            for c in 0..3 {
                *a.at_mut(r, c) = vals[r][c];
            }
        }
        let x = solve_dense(&a, &[1.0, 2.0, 3.0]).unwrap();
        let back = a.mul_vec(&x);
        for (bi, want) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((bi - want).abs() < 1e-12);
        }
    }
}
