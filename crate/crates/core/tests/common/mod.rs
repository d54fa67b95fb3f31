//! Plain-float oracles: surface quantities from fourth-order finite
//! differences of the expressions, with no use of the jet machinery.

#![allow(dead_code)]

use frontlab::exprlang::Params;
use frontlab::frontal::Frontal;

pub type M2 = [[f64; 2]; 2];
pub type M32 = [[f64; 2]; 3];

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

pub fn rel_m<const R: usize>(a: &[[f64; 2]; R], b: &[[f64; 2]; R]) -> f64 {
    let scale = a.iter().chain(b).flatten().fold(1f64, |m, x| m.max(x.abs()));
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn x_at(f: &Frontal, u: f64, v: f64) -> [f64; 3] {
    let p = Params::new();
    [0, 1, 2].map(|i| f.x[i].eval_real(u, v, &p).unwrap())
}

pub fn omega_at(f: &Frontal, u: f64, v: f64) -> M32 {
    let p = Params::new();
    [0, 1, 2].map(|i| [0, 1].map(|j| f.omega[i][j].eval_real(u, v, &p).unwrap()))
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn col(m: &M32, j: usize) -> [f64; 3] {
    [m[0][j], m[1][j], m[2][j]]
}

pub fn normal_of(m: &M32) -> [f64; 3] {
    let c = cross(col(m, 0), col(m, 1));
    let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
    c.map(|x| x / n)
}

pub fn normal_at(f: &Frontal, u: f64, v: f64) -> [f64; 3] {
    normal_of(&omega_at(f, u, v))
}

/// Jacobian of `g` at `(u, v)` by the five-point stencil.
pub fn jacobian(g: impl Fn(f64, f64) -> [f64; 3], u: f64, v: f64, h: f64) -> M32 {
    let d = |a: [f64; 3], b: [f64; 3], c: [f64; 3], e: [f64; 3]| [0, 1, 2].map(|i| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + e[i]) / (12.0 * h));
    let du = d(g(u + 2.0 * h, v), g(u + h, v), g(u - h, v), g(u - 2.0 * h, v));
    let dv = d(g(u, v + 2.0 * h), g(u, v + h), g(u, v - h), g(u, v - 2.0 * h));
    [0, 1, 2].map(|i| [du[i], dv[i]])
}

pub fn gram(a: &M32, b: &M32) -> M2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = (0..3).map(|k| a[k][i] * b[k][j]).sum();
        }
    }
    out
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    [[a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]], [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]]]
}

pub fn mul32(a: &M32, b: &M2) -> M32 {
    [0, 1, 2].map(|i| [0, 1].map(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn t(a: &M2) -> M2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

pub fn det(a: &M2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn adj(a: &M2) -> M2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

pub fn inv(a: &M2) -> M2 {
    let d = det(a);
    adj(a).map(|r| r.map(|x| x / d))
}

pub fn scale(a: &M2, s: f64) -> M2 {
    a.map(|r| r.map(|x| x * s))
}

pub fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

/// Roots `(k1, k2)`, `k1 <= k2`, of `k² - 2hk + p`.
pub fn roots(h: f64, p: f64) -> (f64, f64) {
    let s = (h * h - p).max(0.0).sqrt();
    if h >= 0.0 {
        let big = h + s;
        (if big != 0.0 { p / big } else { 0.0 }, big)
    } else {
        let small = h - s;
        (small, p / small)
    }
}

/// Everything at a point from finite differences.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub omega: M32,
    pub dx: M32,
    pub n: [f64; 3],
    pub dn: M32,
    /// `Lambdaᵀ`, `muᵀ` by least squares against `Omega`.
    pub lambda_t: M2,
    pub mu_t: M2,
}

pub const H: f64 = 1e-3;

impl Oracle {
    pub fn at(f: &Frontal, u: f64, v: f64) -> Oracle {
        let omega = omega_at(f, u, v);
        let dx = jacobian(|a, b| x_at(f, a, b), u, v, H);
        let dn = jacobian(|a, b| normal_at(f, a, b), u, v, H);
        let g = inv(&gram(&omega, &omega));
        Oracle { omega, dx, n: normal_of(&omega), dn, lambda_t: mul(&g, &gram(&omega, &dx)), mu_t: mul(&g, &gram(&omega, &dn)) }
    }

    pub fn lambda(&self) -> f64 {
        det(&self.lambda_t)
    }

    pub fn first(&self) -> M2 {
        gram(&self.dx, &self.dx)
    }

    pub fn second(&self) -> M2 {
        scale(&gram(&self.dx, &self.dn), -1.0)
    }

    /// Weingarten matrix `-IIᵀ I⁻¹`, off the singular set.
    pub fn alpha(&self) -> M2 {
        scale(&mul(&t(&self.second()), &inv(&self.first())), -1.0)
    }

    pub fn k(&self) -> f64 {
        det(&self.second()) / det(&self.first())
    }

    pub fn h(&self) -> f64 {
        -0.5 * (self.alpha()[0][0] + self.alpha()[1][1])
    }

    /// Principal curvatures, smaller first.
    pub fn principal(&self) -> (f64, f64) {
        roots(self.h(), self.k())
    }
}

/// Deterministic uniform points in a box.
pub fn points(seed: u64, n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.gen_range(lo..hi), rng.gen_range(lo..hi))).collect()
}
