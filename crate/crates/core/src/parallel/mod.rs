//! Parallel surfaces `y_t = x + t n`, the offset determinant
//! `det(Lambdaᵀ + t muᵀ) = lambda - 2t H_Omega + t² K_Omega`, immersion windows
//! and triangle meshes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontal::{relative_roots, FrameTol, Frontal, FrontalFrame};
use crate::numcore::{rel_dev, Jet1, Mat2, Mat32, Vec3};
use crate::singular::{scan, Calibration, Grid, NodeRecord};
use crate::tolerance::Tolerances;

/// `x + t n` for a fixed `t`.
#[derive(Debug, Clone)]
pub struct OffsetSurface<'a> {
    pub base: &'a Frontal,
    pub t: f64,
}

impl OffsetSurface<'_> {
    /// `y_t` at `(u, v)` and `D y_t` from differentiating it.
    pub fn eval(&self, u: f64, v: f64, tol: &FrameTol) -> Result<(Vec3<f64>, Mat32<Jet1>)> {
        let (x, _) = self.base.seeded(u, v)?;
        let n = self.base.normal_jet2(u, v, tol)?;
        let y = x + n.map(|c| c * self.t);
        Ok((y.map(|c| c.val), Mat32::from_cols(y.map(|c| c.d_u()), y.map(|c| c.d_v()))))
    }

    /// `D y_t` as `Omega (Lambdaᵀ + t muᵀ)`.
    pub fn factored_derivative(&self, f: &FrontalFrame) -> Mat32<f64> {
        f.omega.mul2(&f.lambda_mat.add(&f.mu.scale(self.t)).transpose())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetDet {
    pub u: f64,
    pub v: f64,
    pub t: f64,
    /// `lambda - 2t H_Omega + t² K_Omega`.
    pub value: f64,
    /// `det(Lambdaᵀ + t muᵀ)` from the matrices.
    pub direct: f64,
    /// `k_iOmega / K_Omega` where `|K_Omega| > tol_k`.
    pub roots: Option<[f64; 2]>,
}

pub fn offset_det(frontal: &Frontal, p: (f64, f64), t: f64, cal: &Calibration) -> Result<OffsetDet> {
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    Ok(offset_det_of(&f, t, cal.tol_k))
}

pub fn offset_det_of(f: &FrontalFrame, t: f64, tol_k: f64) -> OffsetDet {
    let roots = (f.k_omega.abs() > tol_k).then(|| [f.k1_omega / f.k_omega, f.k2_omega / f.k_omega]);
    OffsetDet { u: f.u, v: f.v, t, value: f.offset_det(t), direct: f.offset_det_direct(t), roots }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideCheck {
    /// `+1` for `t in (0, eps)`, `-1` for `(-eps, 0)`.
    pub side: i8,
    pub eps: f64,
    pub min_abs: f64,
    /// Common sign of the determinant, 0 when it is not uniform.
    pub sign: i8,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImmersionWindow {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    pub samples: usize,
    pub t_levels: usize,
    pub plus: SideCheck,
    pub minus: SideCheck,
}

/// `n` values log-spaced from `eps` down to `eps * 1e-6`.
pub fn log_levels(eps: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| eps * 10f64.powf(-6.0 * i as f64 / (n - 1) as f64)).collect()
}

/// Checks the offset determinant over the nodes of `grid` in `B_r(p)`, plus
/// `p` itself, against log-spaced `t` on both sides of 0.
pub fn immersion_window(frontal: &Frontal, p: (f64, f64), r: f64, eps: f64, grid: &Grid, tol: &Tolerances) -> Result<ImmersionWindow> {
    let s = scan(frontal, grid, tol)?;
    let centre = NodeRecord::from_frame(&frontal.frame(p.0, p.1, &tol.frame_uncalibrated())?);
    let mut samples: Vec<&NodeRecord> = in_ball(&s.records, p, r).collect();
    samples.push(&centre);
    window_from_records(p, r, &samples, [eps, eps], tol)
}

pub(crate) fn in_ball(records: &[NodeRecord], p: (f64, f64), r: f64) -> impl Iterator<Item = &NodeRecord> {
    records.iter().filter(move |n| (n.u - p.0).hypot(n.v - p.1) <= r)
}

pub(crate) fn window_from_records(p: (f64, f64), r: f64, samples: &[&NodeRecord], eps: [f64; 2], tol: &Tolerances) -> Result<ImmersionWindow> {
    if samples.len() < tol.min_samples {
        return Err(Error::InsufficientSamples { what: format!("ball of radius {r} around ({}, {})", p.0, p.1), found: samples.len(), required: tol.min_samples });
    }
    let side = |sgn: f64, eps: f64| {
        let levels = log_levels(eps, tol.t_levels);
        let (mut min_abs, mut pos, mut neg) = (f64::INFINITY, false, false);
        for n in samples {
            for &t in &levels {
                let t = sgn * t;
                let d = n.lambda - 2.0 * t * n.h_omega + t * t * n.k_omega;
                min_abs = min_abs.min(d.abs());
                pos |= d > 0.0;
                neg |= d < 0.0;
            }
        }
        let sign = match (pos, neg) {
            (true, false) => 1,
            (false, true) => -1,
            _ => 0,
        };
        SideCheck { side: sgn as i8, eps, min_abs, sign, passes: min_abs > 0.0 && sign != 0 }
    };
    Ok(ImmersionWindow { u: p.0, v: p.1, r, samples: samples.len(), t_levels: tol.t_levels, plus: side(1.0, eps[0]), minus: side(-1.0, eps[1]) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviations {
    pub k: f64,
    pub h: f64,
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetFrameCheck {
    pub u: f64,
    pub v: f64,
    pub l: f64,
    /// Signed offset along the normal of `y_l`: `l`, or `-l` when that
    /// normal is `-n`.
    pub l_effective: f64,
    /// Classical invariants of `y_l` with the normal `D y_l` induces.
    pub k_l: f64,
    pub h_l: f64,
    pub k1_l: f64,
    pub k2_l: f64,
    /// Frame of `x` relative to `Omega' = D y_l`.
    pub lambda_prime: f64,
    pub k_omega_prime: f64,
    pub h_omega_prime: f64,
    pub k1_omega_prime: f64,
    pub k2_omega_prime: f64,
    /// `D y_l` induces `-n` rather than `n`.
    pub normal_flipped: bool,
    pub deviations: Deviations,
    pub max_deviation: f64,
}

/// Compares the curvatures of the immersed offset `y_l` with the frame of
/// `x` taken relative to `D y_l`.
pub fn offset_frame_check(frontal: &Frontal, p: (f64, f64), l: f64, tol: &Tolerances) -> Result<OffsetFrameCheck> {
    let ft = tol.frame_uncalibrated();
    let f = frontal.frame(p.0, p.1, &ft)?;
    let scale = (f.lambda_mat.frobenius().powi(2) + l * l * f.mu.frobenius().powi(2)).max(f64::MIN_POSITIVE);
    let rho = 1e-3;
    let mut sign = 0.0;
    for k in 0..9 {
        let q = if k == 0 {
            p
        } else {
            let a = std::f64::consts::TAU * k as f64 / 8.0;
            (p.0 + rho * a.cos(), p.1 + rho * a.sin())
        };
        let d = frontal.frame(q.0, q.1, &ft)?.offset_det_direct(l);
        if !(d.abs() > 1e-9 * scale) || (sign != 0.0 && d.signum() != sign) {
            return Err(Error::NotImmersed { u: q.0, v: q.1, l, det: d });
        }
        sign = d.signum();
    }

    let (x, _) = frontal.seeded(p.0, p.1)?;
    let n = frontal.normal_jet2(p.0, p.1, &ft)?;
    let y = x + n.map(|c| c * l);
    let dy = Mat32::from_cols(y.map(|c| c.d_u()), y.map(|c| c.d_v()));
    let fp = FrontalFrame::from_jets(p.0, p.1, &x, &dy, &ft)?;

    // y_l is measured with the normal D y_l induces, which is -n where
    // det(Lambdaᵀ + l muᵀ) < 0; then y_l = x + (-l)(-n)
    let flip = sign;
    let le = flip * l;
    let dyv = dy.map(|c| c.val);
    let dn = Mat32::from_cols(n.map(|c| c.du * flip), n.map(|c| c.dv * flip));
    let i_l = dyv.gram(&dyv);
    let ii_l = dyv.gram(&dn).scale(-1.0);
    let shape = i_l.inv()?.mul(&ii_l);
    let k_l = shape.det();
    let h_l = 0.5 * shape.trace();
    let (k1_l, k2_l) = ordered_roots(h_l, k_l);

    let deviations = Deviations {
        k: rel_dev(fp.k_omega, k_l),
        h: rel_dev(fp.h_omega, h_l + k_l * le),
        lambda: rel_dev(fp.lambda, 1.0 + 2.0 * h_l * le + k_l * le * le),
        k1: rel_dev(fp.k1_omega, k1_l * (1.0 + le * k2_l)),
        k2: rel_dev(fp.k2_omega, k2_l * (1.0 + le * k1_l)),
    };
    let max_deviation = [deviations.k, deviations.h, deviations.lambda, deviations.k1, deviations.k2].into_iter().fold(0.0, f64::max);
    Ok(OffsetFrameCheck {
        u: p.0,
        v: p.1,
        l,
        l_effective: le,
        k_l,
        h_l,
        k1_l,
        k2_l,
        lambda_prime: fp.lambda,
        k_omega_prime: fp.k_omega,
        h_omega_prime: fp.h_omega,
        k1_omega_prime: fp.k1_omega,
        k2_omega_prime: fp.k2_omega,
        normal_flipped: sign < 0.0,
        deviations,
        max_deviation,
    })
}

/// Principal curvatures `h ∓ sqrt(h² - k)` in increasing order.
fn ordered_roots(h: f64, k: f64) -> (f64, f64) {
    let (a, b, _) = relative_roots(h, k);
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub grid: Grid,
    pub t: f64,
    pub vertices: usize,
    pub triangles: usize,
    /// Nodes whose normal was copied from the nearest node with a
    /// non-degenerate base.
    pub fallback_normals: usize,
    /// Cells `(i, j)` with a triangle of (numerically) zero area.
    pub degenerate_cells: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub normals: Vec<[f64; 3]>,
    /// 0-based vertex indices.
    pub faces: Vec<[usize; 3]>,
    pub report: MeshReport,
}

/// Mesh of `x + t n` over `grid`: one vertex per node, two triangles per
/// cell wound like `(x_u, x_v)`.
pub fn mesh(frontal: &Frontal, grid: &Grid, t: f64, tol: &Tolerances) -> Result<Mesh> {
    let evals: Vec<Result<([f64; 3], Option<[f64; 3]>)>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (u, v) = grid.node_at(idx);
            let (x, omega) = frontal.seeded(u, v).map_err(|e| e.at_node(u, v))?;
            let c = omega.cols[0].cross(&omega.cols[1]).map(|e| e.val);
            let norm = c.norm_sq().sqrt();
            let n = (norm > tol.tol_base).then(|| c.values().map(|e| e / norm));
            Ok((x.values(), n))
        })
        .collect();
    let mut xs = Vec::with_capacity(grid.len());
    let mut ns = Vec::with_capacity(grid.len());
    for e in evals {
        let (x, n) = e?;
        xs.push(x);
        ns.push(n);
    }
    let mut fallback_normals = 0;
    let normals: Vec<[f64; 3]> = (0..grid.len())
        .map(|idx| match ns[idx] {
            Some(n) => n,
            None => {
                fallback_normals += 1;
                nearest_normal(grid, &ns, idx)
            }
        })
        .collect();
    let vertices: Vec<[f64; 3]> = xs.iter().zip(&normals).map(|(x, n)| [x[0] + t * n[0], x[1] + t * n[1], x[2] + t * n[2]]).collect();

    let mut faces = Vec::with_capacity(2 * (grid.nu - 1) * (grid.nv - 1));
    let mut cells = Vec::with_capacity(faces.capacity() / 2);
    for i in 0..grid.nu - 1 {
        for j in 0..grid.nv - 1 {
            let a = grid.index(i, j);
            let b = grid.index(i + 1, j);
            let c = grid.index(i + 1, j + 1);
            let d = grid.index(i, j + 1);
            faces.push([a, b, c]);
            faces.push([a, c, d]);
            cells.push([i, j]);
        }
    }
    let areas: Vec<f64> = faces.iter().map(|f| area(&vertices, f)).collect();
    let mean = areas.iter().sum::<f64>() / areas.len() as f64;
    let degenerate_cells = cells
        .iter()
        .enumerate()
        .filter(|(k, _)| areas[2 * k].min(areas[2 * k + 1]) <= 1e-12 * mean)
        .map(|(_, c)| *c)
        .collect();
    let report = MeshReport { grid: *grid, t, vertices: vertices.len(), triangles: faces.len(), fallback_normals, degenerate_cells };
    Ok(Mesh { vertices, normals, faces, report })
}

fn area(v: &[[f64; 3]], f: &[usize; 3]) -> f64 {
    let p = |i: usize| Vec3(v[f[i]]);
    (p(1) - p(0)).cross(&(p(2) - p(0))).norm_sq().sqrt() / 2.0
}

fn nearest_normal(grid: &Grid, ns: &[Option<[f64; 3]>], idx: usize) -> [f64; 3] {
    let (i0, j0) = ((idx / grid.nv) as isize, (idx % grid.nv) as isize);
    let reach = grid.nu.max(grid.nv) as isize;
    for ring in 1..reach {
        let mut best: Option<(isize, [f64; 3])> = None;
        for di in -ring..=ring {
            for dj in -ring..=ring {
                if di.abs().max(dj.abs()) != ring {
                    continue;
                }
                let (i, j) = (i0 + di, j0 + dj);
                if i < 0 || j < 0 || i >= grid.nu as isize || j >= grid.nv as isize {
                    continue;
                }
                if let Some(n) = ns[grid.index(i as usize, j as usize)] {
                    let d2 = di * di + dj * dj;
                    if best.map_or(true, |(b, _)| d2 < b) {
                        best = Some((d2, n));
                    }
                }
            }
        }
        if let Some((_, n)) = best {
            return n;
        }
    }
    [0.0, 0.0, 1.0]
}

/// Wavefront OBJ text; `header` lines become comments.
pub fn write_obj(mesh: &Mesh, header: &[String]) -> String {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for n in &mesh.normals {
        let _ = writeln!(s, "vn {} {} {}", n[0], n[1], n[2]);
    }
    for f in &mesh.faces {
        let [a, b, c] = f.map(|i| i + 1);
        let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
    }
    s
}

/// `Lambda + l mu`, whose determinant is the offset determinant.
pub fn mixed_lambda(f: &FrontalFrame, l: f64) -> Mat2<f64> {
    f.lambda_mat.add(&f.mu.scale(l))
}
