//! Fixed-size vectors and matrices over any [`Scalar`].
//!
//! Only the shapes the frame computation needs: vectors in R³, 2×2 matrices
//! and 3×2 matrices stored by columns (`w1`, `w2`).

use super::jet::Scalar;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3<S>(pub [S; 3]);

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<S>(pub [[S; 2]; 2]);

/// 3×2 matrix stored as two columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat32<S> {
    pub cols: [Vec3<S>; 2],
}

impl<S: Scalar> Vec3<S> {
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    pub fn zero() -> Self {
        Vec3([S::zero(); 3])
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Vec3<T> {
        Vec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn values(&self) -> [f64; 3] {
        [self.0[0].value(), self.0[1].value(), self.0[2].value()]
    }

    pub fn dot(&self, o: &Vec3<S>) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3<S>) -> Vec3<S> {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn scale(&self, s: S) -> Vec3<S> {
        self.map(|x| x * s)
    }

    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    pub fn norm(&self) -> Result<S> {
        self.norm_sq().sqrt()
    }

    pub fn normalize(&self) -> Result<Vec3<S>> {
        let inv = self.norm()?.recip()?;
        Ok(self.scale(inv))
    }
}

impl<S: Scalar> std::ops::Add for Vec3<S> {
    type Output = Vec3<S>;
    fn add(self, o: Vec3<S>) -> Vec3<S> {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Scalar> std::ops::Sub for Vec3<S> {
    type Output = Vec3<S>;
    fn sub(self, o: Vec3<S>) -> Vec3<S> {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a11: S, a12: S, a21: S, a22: S) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn identity() -> Self {
        Mat2::new(S::one(), S::zero(), S::zero(), S::one())
    }

    pub fn diag(a: S, b: S) -> Self {
        Mat2::new(a, S::zero(), S::zero(), b)
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.0[i][j]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Mat2<T> {
        let m = &self.0;
        Mat2([[f(m[0][0]), f(m[0][1])], [f(m[1][0]), f(m[1][1])]])
    }

    pub fn values(&self) -> [[f64; 2]; 2] {
        let m = &self.0;
        [
            [m[0][0].value(), m[0][1].value()],
            [m[1][0].value(), m[1][1].value()],
        ]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn det(&self) -> S {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> S {
        self.0[0][0] + self.0[1][1]
    }

    /// Classical adjoint: `A · adj(A) = det(A) · I`.
    pub fn adj(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    pub fn inv(&self) -> Result<Self> {
        let r = self.det().recip()?;
        Ok(self.adj().scale(r))
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn mul(&self, o: &Mat2<S>) -> Mat2<S> {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn add(&self, o: &Mat2<S>) -> Mat2<S> {
        let (a, b) = (&self.0, &o.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }

    pub fn sub(&self, o: &Mat2<S>) -> Mat2<S> {
        self.add(&o.scale(S::constant(-1.0)))
    }
}

impl Mat2<f64> {
    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Singular values `(σ1, σ2)` with `σ1 ≥ σ2 ≥ 0`.
    pub fn singular_values(&self) -> (f64, f64) {
        let fro = self.0.iter().flatten().map(|x| x * x).sum::<f64>();
        let d = self.det().abs();
        let s = (fro + 2.0 * d).max(0.0).sqrt();
        let t = (fro - 2.0 * d).max(0.0).sqrt();
        (0.5 * (s + t), 0.5 * (s - t).max(0.0))
    }
}

impl<S: Scalar> Mat32<S> {
    pub fn from_cols(w1: Vec3<S>, w2: Vec3<S>) -> Self {
        Mat32 { cols: [w1, w2] }
    }

    /// Builds from rows `(a_i1, a_i2)`.
    pub fn from_rows(rows: [[S; 2]; 3]) -> Self {
        Mat32::from_cols(
            Vec3([rows[0][0], rows[1][0], rows[2][0]]),
            Vec3([rows[0][1], rows[1][1], rows[2][1]]),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.cols[j].0[i]
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T + Copy) -> Mat32<T> {
        Mat32::from_cols(self.cols[0].map(f), self.cols[1].map(f))
    }

    pub fn values(&self) -> [[f64; 2]; 3] {
        let mut out = [[0.0; 2]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.get(i, j).value();
            }
        }
        out
    }

    /// `selfᵀ · o`.
    pub fn gram(&self, o: &Mat32<S>) -> Mat2<S> {
        Mat2::new(
            self.cols[0].dot(&o.cols[0]),
            self.cols[0].dot(&o.cols[1]),
            self.cols[1].dot(&o.cols[0]),
            self.cols[1].dot(&o.cols[1]),
        )
    }

    /// `self · m`.
    pub fn mul2(&self, m: &Mat2<S>) -> Mat32<S> {
        let [w1, w2] = &self.cols;
        let c1 = w1.scale(m.get(0, 0)) + w2.scale(m.get(1, 0));
        let c2 = w1.scale(m.get(0, 1)) + w2.scale(m.get(1, 1));
        Mat32::from_cols(c1, c2)
    }

    pub fn sub(&self, o: &Mat32<S>) -> Mat32<S> {
        Mat32::from_cols(self.cols[0] - o.cols[0], self.cols[1] - o.cols[1])
    }

    pub fn swap_cols(&self) -> Mat32<S> {
        Mat32::from_cols(self.cols[1], self.cols[0])
    }
}

impl Mat32<f64> {
    pub fn max_abs(&self) -> f64 {
        self.cols
            .iter()
            .flat_map(|c| c.0.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}
