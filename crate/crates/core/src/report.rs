//! Serializable outputs: frame dumps, the CSV field table and the combined
//! report. Every artifact starts with the scene hash.

use std::fmt::Write as _;

use serde::Serialize;

use crate::behavior::{self, BehaviorReport, Quantity, SmoothabilityReport, Verdict};
use crate::error::Result;
use crate::frontal::{Classical, FrontalFrame};
use crate::parallel::{self, Mesh, MeshReport};
use crate::scene::Job;
use crate::singular::{self, Calibration, PointClass, Scan, SingularSet};

pub const CSV_COLUMNS: [&str; 19] = [
    "u", "v", "x", "y", "z", "nx", "ny", "nz", "lambda", "Dlambda_u", "Dlambda_v", "K_Omega", "H_Omega", "k1_Omega", "k2_Omega", "K", "H", "k1", "k2",
];

/// Every field of a frame, matrices as rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDump {
    pub u: f64,
    pub v: f64,
    pub x: [f64; 3],
    pub dx: [[f64; 2]; 3],
    pub omega: [[f64; 2]; 3],
    pub i_omega: [[f64; 2]; 2],
    pub lambda_matrix: [[f64; 2]; 2],
    pub lambda: f64,
    pub dlambda: [f64; 2],
    pub n: [f64; 3],
    pub dn: [[f64; 2]; 3],
    pub ii_omega: [[f64; 2]; 2],
    pub mu: [[f64; 2]; 2],
    pub alpha_omega: [[f64; 2]; 2],
    pub k_omega: f64,
    pub h_omega: f64,
    pub k1_omega: f64,
    pub k2_omega: f64,
    pub discriminant: f64,
    pub first_form: [[f64; 2]; 2],
    pub second_form: [[f64; 2]; 2],
    pub fit_residual: f64,
    pub classical: Option<Classical>,
}

impl From<&FrontalFrame> for FrameDump {
    fn from(f: &FrontalFrame) -> Self {
        FrameDump {
            u: f.u,
            v: f.v,
            x: f.x,
            dx: f.dx.values(),
            omega: f.omega.values(),
            i_omega: f.i_omega.values(),
            lambda_matrix: f.lambda_mat.values(),
            lambda: f.lambda,
            dlambda: f.dlambda,
            n: f.n,
            dn: f.dn.values(),
            ii_omega: f.ii_omega.values(),
            mu: f.mu.values(),
            alpha_omega: f.alpha_omega.values(),
            k_omega: f.k_omega,
            h_omega: f.h_omega,
            k1_omega: f.k1_omega,
            k2_omega: f.k2_omega,
            discriminant: f.discriminant,
            first_form: f.i_form.values(),
            second_form: f.ii_form.values(),
            fit_residual: f.fit_residual,
            classical: f.classical,
        }
    }
}

/// Common wrapper of every JSON artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Artifact<T> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub scene_hash: String,
    pub seed: u64,
    pub orientation: String,
    pub result: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new(job: &Job, command: &'static str, result: T) -> Self {
        Artifact {
            tool: "frontlab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            scene_hash: job.hash.clone(),
            seed: job.scene.tolerances.seed,
            orientation: job.orientation.clone(),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }
}

/// One row per node, `v` fastest; classical columns empty at singular nodes.
pub fn csv_table(scan: &Scan, scene_hash: &str) -> String {
    let mut out = String::with_capacity(256 * scan.records.len());
    writeln!(out, "# scene {scene_hash}").unwrap();
    writeln!(out, "{}", CSV_COLUMNS.join(",")).unwrap();
    for r in &scan.records {
        let mut cols = vec![r.u, r.v, r.x[0], r.x[1], r.x[2], r.n[0], r.n[1], r.n[2], r.lambda, r.dlambda[0], r.dlambda[1], r.k_omega, r.h_omega, r.k1_omega, r.k2_omega]
            .into_iter()
            .map(|x| format!("{x:?}"))
            .collect::<Vec<_>>();
        match r.classical {
            Some(c) => cols.extend([c.k, c.h, c.k1, c.k2].map(|x| format!("{x:?}"))),
            None => cols.extend(std::iter::repeat(String::new()).take(4)),
        }
        writeln!(out, "{}", cols.join(",")).unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub frame: FrameDump,
    pub class: PointClass,
    pub calibration: Calibration,
}

/// Frame and classification at `p`, calibrated on the scene grid.
pub fn analyze(job: &Job, p: (f64, f64)) -> Result<Analysis> {
    let s = singular::scan(&job.frontal, &job.grid, &job.scene.tolerances)?;
    analyze_with(job, &s, p)
}

fn analyze_with(job: &Job, s: &Scan, p: (f64, f64)) -> Result<Analysis> {
    let f = job.frontal.frame(p.0, p.1, &s.calibration.frame_tol())?;
    Ok(Analysis { frame: FrameDump::from(&f), class: singular::classify_frame(&f, &s.calibration), calibration: s.calibration })
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularReport {
    pub grid: singular::Grid,
    pub calibration: Calibration,
    pub singular_set: SingularSet,
    /// Classification of every located point.
    pub classes: Vec<PointClass>,
    pub point: PointClass,
}

pub fn singular_report(job: &Job) -> Result<SingularReport> {
    let s = singular::scan(&job.frontal, &job.grid, &job.scene.tolerances)?;
    singular_with(job, &s)
}

fn singular_with(job: &Job, s: &Scan) -> Result<SingularReport> {
    let set = singular::locate_singular(&job.frontal, s);
    let classes = set.points.iter().map(|q| singular::classify(&job.frontal, (q.u, q.v), &s.calibration)).collect::<Result<Vec<_>>>()?;
    let point = singular::classify(&job.frontal, job.point, &s.calibration)?;
    Ok(SingularReport { grid: s.grid, calibration: s.calibration, singular_set: set, classes, point })
}

/// Boundedness over the scene grid, then extendibility and divergence at
/// `p` when `p` is singular.
#[derive(Debug, Clone, Serialize)]
pub struct QuantityReport {
    pub quantity: Quantity,
    pub boundedness: BehaviorReport,
    pub extendibility: Option<BehaviorReport>,
    pub divergence: Option<BehaviorReport>,
}

impl QuantityReport {
    pub fn verdicts(&self) -> impl Iterator<Item = Verdict> + '_ {
        [Some(&self.boundedness), self.extendibility.as_ref(), self.divergence.as_ref()].into_iter().flatten().map(|r| r.verdict)
    }
}

pub fn quantity_report(job: &Job, q: Quantity, p: (f64, f64)) -> Result<QuantityReport> {
    let tol = &job.scene.tolerances;
    let s = singular::scan(&job.frontal, &job.grid, tol)?;
    let class = singular::classify(&job.frontal, p, &s.calibration)?;
    let boundedness = behavior::boundedness(&job.frontal, q, &job.grid, tol)?;
    let (extendibility, divergence) = if class.singular {
        (Some(behavior::extendibility(&job.frontal, q, p, &job.grid, tol)?), Some(behavior::divergence(&job.frontal, q, p, tol)?))
    } else {
        (None, None)
    };
    Ok(QuantityReport { quantity: q, boundedness, extendibility, divergence })
}

#[derive(Debug, Clone, Serialize)]
pub struct FullReport {
    pub scene: serde_json::Value,
    pub gallery: Option<&'static str>,
    pub analysis: Analysis,
    pub singular: SingularReport,
    pub behavior: Vec<QuantityReport>,
    pub smoothability: Option<SmoothabilityReport>,
    pub mesh: MeshReport,
}

impl FullReport {
    /// Some verdict abstained.
    pub fn inconclusive(&self) -> bool {
        self.behavior.iter().flat_map(|q| q.verdicts()).any(|v| v == Verdict::Inconclusive)
            || self.smoothability.as_ref().is_some_and(|s| s.verdict == behavior::SmoothVerdict::Inconclusive)
    }
}

/// Everything the scene asks for, plus the scan and the offset mesh at the
/// scene's `t` (0 when absent) for the CSV and OBJ artifacts.
pub fn full_report(job: &Job) -> Result<(FullReport, Scan, Mesh)> {
    let tol = &job.scene.tolerances;
    let s = singular::scan(&job.frontal, &job.grid, tol)?;
    let analysis = analyze_with(job, &s, job.point)?;
    let singular = singular_with(job, &s)?;
    let mut behavior = Vec::new();
    for q in &job.scene.quantities {
        behavior.push(quantity_report(job, Quantity::parse(q)?, job.point)?);
    }
    let smoothability = if analysis.class.singular { Some(behavior::smoothability(&job.frontal, job.point, tol.radius, tol)?) } else { None };
    let mesh = parallel::mesh(&job.frontal, &job.grid, job.scene.t.unwrap_or(0.0), tol)?;
    let report = FullReport {
        scene: serde_json::to_value(&job.scene).expect("scene serializes"),
        gallery: job.gallery,
        analysis,
        singular,
        behavior,
        smoothability,
        mesh: mesh.report.clone(),
    };
    Ok((report, s, mesh))
}

#[derive(Debug, Clone, Serialize)]
pub struct OffsetReport {
    pub t: f64,
    pub mesh: MeshReport,
    pub offset_det: parallel::OffsetDet,
    /// Offset-frame identities at the point, when `y_t` is immersed there.
    pub frame_check: Option<parallel::OffsetFrameCheck>,
    pub notes: Vec<String>,
}

/// Mesh of `x + t n` over the scene grid and the offset quantities at `p`.
pub fn offset_report(job: &Job, p: (f64, f64), t: f64) -> Result<(OffsetReport, Mesh)> {
    let tol = &job.scene.tolerances;
    let s = singular::scan(&job.frontal, &job.grid, tol)?;
    let offset_det = parallel::offset_det(&job.frontal, p, t, &s.calibration)?;
    let mut notes = Vec::new();
    let frame_check = match parallel::offset_frame_check(&job.frontal, p, t, tol) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let mesh = parallel::mesh(&job.frontal, &job.grid, t, tol)?;
    Ok((OffsetReport { t, mesh: mesh.report.clone(), offset_det, frame_check, notes }, mesh))
}

/// Header lines of an OBJ file for `job`.
pub fn obj_header(job: &Job, mesh: &Mesh) -> Vec<String> {
    let g = &mesh.report.grid;
    vec![
        format!("scene {}", job.hash),
        format!("t {:?}", mesh.report.t),
        format!("grid u [{:?}, {:?}] v [{:?}, {:?}] {}x{}", g.u[0], g.u[1], g.v[0], g.v[1], g.nu, g.nv),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Scene;

    fn job(name: &str, n: usize) -> Job {
        let mut s = Scene::gallery(name, Default::default());
        s.resolution = [n, n];
        s.prepare().unwrap()
    }

    #[test]
    fn csv_layout() {
        let j = job("cuspidal_edge", 5);
        let s = singular::scan(&j.frontal, &j.grid, &j.scene.tolerances).unwrap();
        let csv = csv_table(&s, &j.hash);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], format!("# scene {}", j.hash));
        assert_eq!(lines[1], CSV_COLUMNS.join(","));
        assert_eq!(lines.len(), 2 + 25);
        // v runs fastest; the middle row of the first column lies on v = 0
        let mid: Vec<&str> = lines[2 + 2].split(',').collect();
        assert_eq!(mid.len(), 19);
        assert_eq!((mid[0], mid[1]), ("-1.0", "0.0"));
        assert!(mid[15..].iter().all(|c| c.is_empty()));
        let off: Vec<&str> = lines[2 + 3].split(',').collect();
        assert!(off[15..].iter().all(|c| c.parse::<f64>().is_ok()));
        for line in &lines[2..] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 19);
            let lambda: f64 = cols[8].parse().unwrap();
            let v: f64 = cols[1].parse().unwrap();
            assert!((lambda - v).abs() < 1e-12);
        }
    }

    #[test]
    fn analysis_of_edge() {
        let j = job("cuspidal_edge", 21);
        let a = analyze(&j, (0.3, 0.0)).unwrap();
        assert!(a.class.singular);
        assert_eq!(a.class.rank, 1);
        assert!(a.frame.classical.is_none());
        let json = Artifact::new(&j, "analyze", &a).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["scene_hash"], j.hash.as_str());
        assert_eq!(v["result"]["frame"]["lambda_matrix"][1][1], 0.0);
    }

    #[test]
    fn beaks_singular_report() {
        let j = job("cuspidal_beaks", 41);
        let r = singular_report(&j).unwrap();
        assert_eq!(r.point.rank, 1);
        assert!(r.point.degenerate);
        assert_eq!(r.classes.len(), r.singular_set.points.len());
        for p in &r.singular_set.points {
            assert!((6.0 * p.v * p.v - p.u * p.u).abs() < 1e-6, "{p:?}");
        }
    }
}
