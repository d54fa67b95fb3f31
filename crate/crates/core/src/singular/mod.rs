//! Sampling grids, node scans, and location and classification of the
//! singular set `lambda = 0`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontal::{Classical, FrameTol, Frontal, FrontalFrame};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub nu: usize,
    pub nv: usize,
}

impl Grid {
    pub fn new(u: [f64; 2], v: [f64; 2], nu: usize, nv: usize) -> Result<Grid> {
        if !(u[0] < u[1]) || !(v[0] < v[1]) || !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(Error::Region(format!("empty or non-finite interval u = {u:?}, v = {v:?}")));
        }
        if nu < 2 || nv < 2 {
            return Err(Error::Region(format!("resolution must be at least 2 per axis, got {nu}x{nv}")));
        }
        Ok(Grid { u, v, nu, nv })
    }

    /// Square grid of side `2r` centred at `p`.
    pub fn around(p: (f64, f64), r: f64, n: usize) -> Result<Grid> {
        Grid::new([p.0 - r, p.0 + r], [p.1 - r, p.1 + r], n, n)
    }

    pub fn du(&self) -> f64 {
        (self.u[1] - self.u[0]) / (self.nu - 1) as f64
    }

    pub fn dv(&self) -> f64 {
        (self.v[1] - self.v[0]) / (self.nv - 1) as f64
    }

    pub fn cell(&self) -> f64 {
        self.du().min(self.dv())
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major with `v` fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        // endpoints exact, interior by interpolation
        let t = |a: [f64; 2], k: usize, n: usize| {
            if k + 1 == n {
                a[1]
            } else {
                a[0] + (a[1] - a[0]) * (k as f64 / (n - 1) as f64)
            }
        };
        (t(self.u, i, self.nu), t(self.v, j, self.nv))
    }

    pub fn node_at(&self, idx: usize) -> (f64, f64) {
        self.node(idx / self.nv, idx % self.nv)
    }

    pub fn contains(&self, p: (f64, f64)) -> bool {
        p.0 >= self.u[0] && p.0 <= self.u[1] && p.1 >= self.v[0] && p.1 <= self.v[1]
    }
}

/// Scalar fields of a frame at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeRecord {
    pub u: f64,
    pub v: f64,
    pub x: [f64; 3],
    pub n: [f64; 3],
    pub lambda: f64,
    pub dlambda: [f64; 2],
    pub k_omega: f64,
    pub h_omega: f64,
    pub k1_omega: f64,
    pub k2_omega: f64,
    pub sigma: [f64; 2],
    /// Frobenius norms of `mu` and `Lambda`, the natural scales of the
    /// relative curvatures.
    pub mu_norm: f64,
    pub lambda_norm: f64,
    pub classical: Option<Classical>,
}

impl NodeRecord {
    pub fn from_frame(f: &FrontalFrame) -> NodeRecord {
        let (s1, s2) = f.lambda_singular_values();
        NodeRecord {
            u: f.u,
            v: f.v,
            x: f.x,
            n: f.n,
            lambda: f.lambda,
            dlambda: f.dlambda,
            k_omega: f.k_omega,
            h_omega: f.h_omega,
            k1_omega: f.k1_omega,
            k2_omega: f.k2_omega,
            sigma: [s1, s2],
            mu_norm: f.mu.frobenius(),
            lambda_norm: f.lambda_mat.frobenius(),
            classical: f.classical,
        }
    }
}

/// Region-dependent absolute thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub lambda_scale: f64,
    pub tol_lambda: f64,
    pub grad_scale: f64,
    pub tol_grad: f64,
    pub sigma_median: f64,
    pub tol_rank: f64,
    pub h_scale: f64,
    pub k_scale: f64,
    pub tol_h: f64,
    pub tol_k: f64,
    pub tol_base: f64,
    pub tol_fit: f64,
}

impl Calibration {
    pub fn from_records(records: &[NodeRecord], tol: &Tolerances) -> Calibration {
        let max = |f: &dyn Fn(&NodeRecord) -> f64| records.iter().map(f).fold(0.0f64, f64::max);
        let lambda_scale = max(&|r| r.lambda.abs());
        let grad_scale = max(&|r| r.dlambda[0].hypot(r.dlambda[1]));
        let h_scale = max(&|r| r.h_omega.abs());
        let k_scale = max(&|r| r.k_omega.abs());
        let mut s1: Vec<f64> = records.iter().map(|r| r.sigma[0]).collect();
        s1.sort_by(f64::total_cmp);
        let sigma_median = if s1.is_empty() { 0.0 } else { s1[s1.len() / 2] };
        Calibration {
            lambda_scale,
            tol_lambda: tol.tol_lambda * lambda_scale,
            grad_scale,
            tol_grad: tol.tol_grad * grad_scale,
            sigma_median,
            tol_rank: tol.tol_rank,
            h_scale,
            k_scale,
            tol_h: tol.tol_invariant * h_scale.max(f64::MIN_POSITIVE),
            tol_k: tol.tol_invariant * k_scale.max(f64::MIN_POSITIVE),
            tol_base: tol.tol_base,
            tol_fit: tol.tol_fit,
        }
    }

    pub fn frame_tol(&self) -> FrameTol {
        FrameTol { lambda: self.tol_lambda, base: self.tol_base, fit: self.tol_fit }
    }

    /// `#{sigma_i > tol_rank * max(sigma1, median sigma1)}`.
    pub fn rank(&self, sigma: [f64; 2]) -> u8 {
        let scale = sigma[0].max(self.sigma_median);
        sigma.iter().filter(|s| **s > self.tol_rank * scale).count() as u8
    }
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub grid: Grid,
    pub records: Vec<NodeRecord>,
    pub calibration: Calibration,
}

impl Scan {
    pub fn record(&self, i: usize, j: usize) -> &NodeRecord {
        &self.records[self.grid.index(i, j)]
    }
}

/// Frames at every node of `grid`, in row-major order (`v` fastest).
/// Classical fields are dropped where `|lambda| <= tol_lambda`.
pub fn scan(frontal: &Frontal, grid: &Grid, tol: &Tolerances) -> Result<Scan> {
    let ft = tol.frame_uncalibrated();
    let results: Vec<Result<NodeRecord>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (u, v) = grid.node_at(idx);
            frontal.frame(u, v, &ft).map(|f| NodeRecord::from_frame(&f)).map_err(|e| e.at_node(u, v))
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        records.push(r?);
    }
    let calibration = Calibration::from_records(&records, tol);
    for r in &mut records {
        if r.lambda.abs() <= calibration.tol_lambda {
            r.classical = None;
        }
    }
    Ok(Scan { grid: *grid, records, calibration })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Node,
    Edge,
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularPoint {
    pub u: f64,
    pub v: f64,
    pub lambda: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SingularSet {
    pub points: Vec<SingularPoint>,
    /// Edges whose bisection did not reach `tol_lambda`.
    pub failures: Vec<String>,
    pub diagnostics: Vec<String>,
}

fn bisect(frontal: &Frontal, a: (f64, f64), b: (f64, f64), la: f64, tol_l: f64, ft: &FrameTol) -> Result<SingularPoint> {
    let (mut a, mut b, mut la) = (a, b, la);
    for _ in 0..60 {
        let m = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
        let lm = frontal.lambda(m.0, m.1, ft)?.val;
        if lm.abs() <= tol_l {
            return Ok(SingularPoint { u: m.0, v: m.1, lambda: lm, origin: Origin::Edge });
        }
        if (lm > 0.0) == (la > 0.0) {
            a = m;
            la = lm;
        } else {
            b = m;
        }
    }
    Err(Error::NonConvergence { u0: a.0, v0: a.1, u1: b.0, v1: b.1 })
}

/// Pattern search on `|lambda|` from a node; returns the point if it gets
/// below `tol_l`.
fn compass(frontal: &Frontal, p: (f64, f64), step: f64, tol_l: f64, grid: &Grid, ft: &FrameTol) -> Option<SingularPoint> {
    let f = |q: (f64, f64)| frontal.lambda(q.0, q.1, ft).ok().map(|j| j.val.abs());
    let mut p = p;
    let mut fp = f(p)?;
    let mut h = step;
    for _ in 0..400 {
        if fp <= tol_l {
            let lambda = frontal.lambda(p.0, p.1, ft).ok()?.val;
            return Some(SingularPoint { u: p.0, v: p.1, lambda, origin: Origin::Refined });
        }
        if h < 1e-13 * step {
            break;
        }
        let mut moved = false;
        for d in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
            let q = (p.0 + h * d.0, p.1 + h * d.1);
            if !grid.contains(q) {
                continue;
            }
            if let Some(fq) = f(q) {
                if fq < fp {
                    p = q;
                    fp = fq;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    None
}

struct Dedup {
    radius: f64,
    buckets: HashMap<(i64, i64), Vec<(f64, f64)>>,
}

impl Dedup {
    fn new(radius: f64) -> Dedup {
        Dedup { radius, buckets: HashMap::new() }
    }

    fn key(&self, p: (f64, f64)) -> (i64, i64) {
        ((p.0 / self.radius).floor() as i64, (p.1 / self.radius).floor() as i64)
    }

    /// Inserts unless an accepted point is closer than `radius`.
    fn insert(&mut self, p: (f64, f64)) -> bool {
        let (ki, kj) = self.key(p);
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(b) = self.buckets.get(&(ki + di, kj + dj)) {
                    if b.iter().any(|q| (q.0 - p.0).hypot(q.1 - p.1) < self.radius) {
                        return false;
                    }
                }
            }
        }
        self.buckets.entry((ki, kj)).or_default().push(p);
        true
    }
}

/// Zeros of `lambda` on the grid: bisected sign changes along edges, nodes
/// with `|lambda| <= tol_lambda`, and a refinement pass from local minima of
/// `|lambda|`. Zeros without a sign change that fall between nodes are only
/// found by the refinement pass, so the set may under-approximate them.
pub fn locate_singular(frontal: &Frontal, scan: &Scan) -> SingularSet {
    let g = &scan.grid;
    let cal = &scan.calibration;
    let tol_l = cal.tol_lambda;
    let ft = cal.frame_tol();
    let lam = |i: usize, j: usize| scan.record(i, j).lambda;
    let mut out = SingularSet::default();

    let mut node_hits = Vec::new();
    for i in 0..g.nu {
        for j in 0..g.nv {
            if lam(i, j).abs() <= tol_l {
                node_hits.push((i, j));
            }
        }
    }

    let mut edges = Vec::new();
    for i in 0..g.nu {
        for j in 0..g.nv {
            for (di, dj) in [(1usize, 0usize), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 >= g.nu || j2 >= g.nv {
                    continue;
                }
                let (a, b) = (lam(i, j), lam(i2, j2));
                if a.abs() > tol_l && b.abs() > tol_l && (a > 0.0) != (b > 0.0) {
                    edges.push(((i, j), (i2, j2)));
                }
            }
        }
    }
    let bisected: Vec<Result<SingularPoint>> = edges
        .par_iter()
        .map(|&((i, j), (i2, j2))| bisect(frontal, g.node(i, j), g.node(i2, j2), lam(i, j), tol_l, &ft))
        .collect();

    // refinement candidates: 3x3 local minima of |lambda| below sqrt(tol_rel) * scale
    let cutoff = (cal.tol_lambda * cal.lambda_scale).sqrt();
    let mut candidates = Vec::new();
    for i in 0..g.nu {
        for j in 0..g.nv {
            let l = lam(i, j).abs();
            if l <= tol_l || l >= cutoff {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < g.nu && (b as usize) < g.nv {
                        is_min &= lam(a as usize, b as usize).abs() >= l;
                    }
                }
            }
            if is_min {
                candidates.push((i, j));
            }
        }
    }
    let refined: Vec<Option<SingularPoint>> = candidates
        .par_iter()
        .map(|&(i, j)| compass(frontal, g.node(i, j), 0.5 * g.cell(), tol_l, g, &ft))
        .collect();

    let mut dedup = Dedup::new(0.5 * g.cell());
    for (i, j) in node_hits {
        let (u, v) = g.node(i, j);
        if dedup.insert((u, v)) {
            out.points.push(SingularPoint { u, v, lambda: lam(i, j), origin: Origin::Node });
        }
    }
    for r in bisected {
        match r {
            Ok(p) => {
                if dedup.insert((p.u, p.v)) {
                    out.points.push(p);
                }
            }
            Err(e) => out.failures.push(e.to_string()),
        }
    }
    for p in refined.into_iter().flatten() {
        if dedup.insert((p.u, p.v)) {
            out.points.push(p);
        }
    }

    // lambda vanishing on a whole 3x3 block: not a proper frontal there
    let mut flagged = Dedup::new(4.0 * g.cell());
    for i in 1..g.nu.saturating_sub(1) {
        for j in 1..g.nv.saturating_sub(1) {
            let flat = (0..3).all(|a| (0..3).all(|b| lam(i + a - 1, j + b - 1).abs() <= tol_l));
            if flat && flagged.insert(g.node(i, j)) {
                let (u, v) = g.node(i, j);
                out.diagnostics.push(format!(
                    "lambda vanishes on the 3x3 block around ({u}, {v}); the singular set may have interior there, no verdict"
                ));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evidence {
    pub lambda: f64,
    pub dlambda_norm: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub k_omega: f64,
    pub h_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClass {
    pub u: f64,
    pub v: f64,
    pub singular: bool,
    pub rank: u8,
    pub degenerate: bool,
    pub front_here: bool,
    pub evidence: Evidence,
    pub diagnostics: Vec<String>,
}

/// Rank, degeneracy and front test at a point.
pub fn classify(frontal: &Frontal, p: (f64, f64), cal: &Calibration) -> Result<PointClass> {
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    Ok(classify_frame(&f, cal))
}

pub fn classify_frame(f: &FrontalFrame, cal: &Calibration) -> PointClass {
    let (s1, s2) = f.lambda_singular_values();
    let rank = cal.rank([s1, s2]);
    let singular = f.lambda.abs() <= cal.tol_lambda;
    let mut diagnostics = Vec::new();
    if singular != (rank < 2) {
        diagnostics.push(format!(
            "|lambda| = {:e} against tol {:e} disagrees with rank {rank} from singular values ({s1:e}, {s2:e})",
            f.lambda.abs(),
            cal.tol_lambda
        ));
    }
    let front_here = match rank {
        0 => f.k_omega.abs() > cal.tol_k,
        1 => f.h_omega.abs() > cal.tol_h,
        _ => true,
    };
    let dn = f.dlambda_norm();
    PointClass {
        u: f.u,
        v: f.v,
        singular,
        rank,
        degenerate: singular && dn <= cal.tol_grad,
        front_here,
        evidence: Evidence { lambda: f.lambda, dlambda_norm: dn, sigma1: s1, sigma2: s2, k_omega: f.k_omega, h_omega: f.h_omega },
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::Params;
    use crate::gallery;

    fn square(n: usize) -> Grid {
        Grid::new([-1.0, 1.0], [-1.0, 1.0], n, n).unwrap()
    }

    #[test]
    fn grid_validation_and_order() {
        assert!(Grid::new([1.0, 1.0], [0.0, 1.0], 3, 3).is_err());
        assert!(Grid::new([0.0, 1.0], [0.0, 1.0], 1, 3).is_err());
        let g = Grid::new([0.0, 1.0], [0.0, 2.0], 3, 5).unwrap();
        assert_eq!(g.node_at(1), (0.0, 0.5));
        assert_eq!(g.node_at(5), (0.5, 0.0));
        assert_eq!(g.node(2, 4), (1.0, 2.0));
    }

    #[test]
    fn beaks_sign_changes_along_two_lines() {
        let e = gallery::get("cuspidal_beaks", &Params::new()).unwrap();
        let s = scan(&e.frontal, &square(101), &Tolerances::default()).unwrap();
        let set = locate_singular(&e.frontal, &s);
        assert!(set.points.len() > 100);
        for p in &set.points {
            assert!((6.0 * p.v * p.v - p.u * p.u).abs() <= 1e-8, "({}, {})", p.u, p.v);
        }
    }

    #[test]
    fn edge_and_swallowtail_curves() {
        let tol = Tolerances::default();
        let e = gallery::get("cuspidal_edge", &Params::new()).unwrap();
        let s = scan(&e.frontal, &square(41), &tol).unwrap();
        let set = locate_singular(&e.frontal, &s);
        assert_eq!(set.points.len(), 41);
        assert!(set.points.iter().all(|p| p.v.abs() <= 1e-9));

        let e = gallery::get("swallowtail", &Params::new()).unwrap();
        let s = scan(&e.frontal, &square(60), &tol).unwrap();
        let set = locate_singular(&e.frontal, &s);
        assert!(!set.points.is_empty());
        for p in &set.points {
            assert!((p.v + 6.0 * p.u * p.u).abs() < 1e-8);
        }
    }

    #[test]
    fn rank0_axes() {
        let p = Params::from([("k".to_string(), 3.0), ("s".to_string(), 1.0)]);
        let e = gallery::get("rank0_family", &p).unwrap();
        let s = scan(&e.frontal, &square(21), &Tolerances::default()).unwrap();
        let set = locate_singular(&e.frontal, &s);
        assert!(set.points.len() >= 41 - 1);
        assert!(set.points.iter().all(|p| p.u.abs() < 1e-6 || p.v.abs() < 1e-6));
        assert!(set.diagnostics.is_empty());
    }

    #[test]
    fn refinement_finds_touching_zero_between_nodes() {
        // lambda = u^2 + 6v^2 has an isolated zero; with an even grid no node hits it
        let e = gallery::get("cuspidal_lips", &Params::new()).unwrap();
        let s = scan(&e.frontal, &square(200), &Tolerances::default()).unwrap();
        let set = locate_singular(&e.frontal, &s);
        assert_eq!(set.points.len(), 1);
        let p = set.points[0];
        assert_eq!(p.origin, Origin::Refined);
        assert!(p.u.hypot(p.v) < 1e-3);
    }

    #[test]
    fn classification_of_marked_points() {
        for e in gallery::catalog() {
            let s = scan(&e.frontal, &square(41), &Tolerances::default()).unwrap();
            let c = classify(&e.frontal, e.point, &s.calibration).unwrap();
            assert!(c.singular, "{}", e.name);
            assert_eq!(c.rank, e.expect.rank, "{}", e.name);
            assert_eq!(c.degenerate, e.expect.degenerate, "{}", e.name);
            assert_eq!(c.front_here, e.expect.front, "{}", e.name);
            assert!(c.diagnostics.is_empty(), "{}: {:?}", e.name, c.diagnostics);
        }
    }

    #[test]
    fn plane_and_sphere_are_regular() {
        let tol = Tolerances::default();
        let plane = Frontal::parse(["u", "v", "0"], [["1", "0"], ["0", "1"], ["0", "0"]], &Params::new()).unwrap();
        let s = scan(&plane, &square(11), &tol).unwrap();
        assert!(locate_singular(&plane, &s).points.is_empty());
        let sphere = Frontal::parse(
            ["cos(u)*cos(v)", "sin(u)*cos(v)", "sin(v)"],
            [["-sin(u)", "-cos(u)*sin(v)"], ["cos(u)", "-sin(u)*sin(v)"], ["0", "cos(v)"]],
            &Params::new(),
        )
        .unwrap();
        let s = scan(&sphere, &square(21), &tol).unwrap();
        assert!(locate_singular(&sphere, &s).points.is_empty());
    }

    #[test]
    fn flat_block_is_flagged() {
        let f = Frontal::parse(["u", "0", "0"], [["1", "0"], ["0", "1"], ["0", "0"]], &Params::new()).unwrap();
        let s = scan(&f, &square(9), &Tolerances::default()).unwrap();
        assert!(!locate_singular(&f, &s).diagnostics.is_empty());
    }

    #[test]
    fn scan_errors_carry_the_node() {
        let f = Frontal::parse(["u", "v", "log(u)"], [["1", "0"], ["0", "1"], ["1/u", "0"]], &Params::new()).unwrap();
        match scan(&f, &square(5), &Tolerances::default()) {
            Err(Error::AtNode { u, .. }) => assert_eq!(u, -1.0),
            other => panic!("{other:?}"),
        }
    }
}
