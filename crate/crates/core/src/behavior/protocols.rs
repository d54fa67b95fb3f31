use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::tube::{self, Disk, Tubes};
use super::{BehaviorReport, PathKind, PathLimit, Protocol, Quantity, Rung, Verdict};
use crate::error::Result;
use crate::frontal::{FrameTol, Frontal, FrontalFrame};
use crate::singular::{classify_frame, scan, Calibration, Grid, NodeRecord, PointClass, Scan};
use crate::tolerance::Tolerances;

/// Algebraic prediction of divergence from the values at the point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub rank: u8,
    pub divergent: bool,
    pub reason: String,
}

/// Ratio ladder of `q` over the whole of `grid`.
pub fn boundedness(frontal: &Frontal, q: Quantity, grid: &Grid, tol: &Tolerances) -> Result<BehaviorReport> {
    let s = scan(frontal, grid, tol)?;
    Ok(bounded_from_scan(frontal, q, &s, None, tol)?.0)
}

/// Ratio ladder of `q` over the ball `B_r(p)`, `r = tol.radius`.
pub fn boundedness_in_ball(frontal: &Frontal, q: Quantity, p: (f64, f64), tol: &Tolerances) -> Result<BehaviorReport> {
    let (s, disk) = ball_scan(frontal, p, tol)?;
    Ok(bounded_from_scan(frontal, q, &s, Some(disk), tol)?.0)
}

pub(crate) fn ball_scan(frontal: &Frontal, p: (f64, f64), tol: &Tolerances) -> Result<(Scan, Disk)> {
    let grid = Grid::around(p, tol.radius, tol.ball_resolution)?;
    Ok((scan(frontal, &grid, tol)?, Disk { centre: p, r: tol.radius }))
}

pub(crate) fn bounded_from_scan(frontal: &Frontal, q: Quantity, scan: &Scan, disk: Option<Disk>, tol: &Tolerances) -> Result<(BehaviorReport, Tubes)> {
    let tubes = tube::sample(frontal, scan, disk, tol.delta0, tol.ladder_levels)?;
    let mut rep = BehaviorReport::new(q, Protocol::Boundedness, disk.map(|d| d.centre));
    note_rank0(&mut rep, &tubes);
    let cal = &scan.calibration;
    rep.sampled_sup = tubes.pool.iter().filter(|r| r.lambda.abs() > cal.tol_lambda).filter_map(|r| q.ratio(r)).reduce(f64::max);
    rep.ladder = ladder(&tubes, |band| band.iter().filter_map(|r| q.ratio(r)).reduce(f64::max));

    if !tubes.sigma_present {
        rep.verdict = Verdict::Bounded;
        rep.constant = Some(rep.sampled_sup.unwrap_or(0.0));
        rep.notes.push("no singular point in the window".into());
        return Ok((rep, tubes));
    }
    if insufficient(&mut rep, tol) {
        return Ok((rep, tubes));
    }
    let values: Vec<f64> = rep.ladder.iter().map(|r| r.value).collect();
    rep.verdict = growth_verdict(&values, tol, Verdict::Unbounded, Verdict::Bounded);
    if rep.verdict == Verdict::Bounded {
        rep.constant = values.last().copied();
    }
    Ok((rep, tubes))
}

fn note_rank0(rep: &mut BehaviorReport, tubes: &Tubes) {
    rep.rank0_in_window = tubes.rank0_in_window;
    if tubes.rank0_in_window {
        rep.notes.push("window contains rank-0 points; the rank-1 boundedness and extension results do not cover them".into());
    }
}

fn ladder(tubes: &Tubes, stat: impl Fn(&[NodeRecord]) -> Option<f64>) -> Vec<Rung> {
    let mut run = 0.0f64;
    tubes
        .deltas
        .iter()
        .zip(&tubes.bands)
        .map(|(&delta, band)| {
            let raw = stat(band).unwrap_or(0.0);
            run = run.max(raw);
            Rung { delta, samples: band.len(), raw, value: run }
        })
        .collect()
}

/// Forces an inconclusive verdict when some band is too thin.
fn insufficient(rep: &mut BehaviorReport, tol: &Tolerances) -> bool {
    let thin: Vec<String> = rep.ladder.iter().enumerate().filter(|(_, r)| r.samples < tol.min_samples).map(|(j, r)| format!("level {j} (delta {:e}) has {} < {} samples", r.delta, r.samples, tol.min_samples)).collect();
    if thin.is_empty() {
        return false;
    }
    rep.verdict = Verdict::Inconclusive;
    rep.notes.push(format!("insufficient samples: {}", thin.join("; ")));
    true
}

/// `grows` when the last three halvings each multiply the ladder by at
/// least `growth`; `flat` when `R_J <= (1 + growth_tol) R_{J-2}`.
pub(crate) fn growth_verdict(v: &[f64], tol: &Tolerances, grows: Verdict, flat: Verdict) -> Verdict {
    let j = v.len() - 1;
    if v[j] > 0.0 && (j - 2..=j).all(|i| v[i] >= tol.growth * v[i - 1]) {
        grows
    } else if v[j] <= (1.0 + tol.growth_tol) * v[j - 2] {
        flat
    } else {
        Verdict::Inconclusive
    }
}

/// Ratio ladder over `grid` plus limits of `q` along paths into `p`.
pub fn extendibility(frontal: &Frontal, q: Quantity, p: (f64, f64), grid: &Grid, tol: &Tolerances) -> Result<BehaviorReport> {
    let s = scan(frontal, grid, tol)?;
    let (b, _) = bounded_from_scan(frontal, q, &s, None, tol)?;
    Ok(extend_from(frontal, q, p, b, &s.calibration, tol))
}

pub(crate) fn extend_from(frontal: &Frontal, q: Quantity, p: (f64, f64), bounded: BehaviorReport, cal: &Calibration, tol: &Tolerances) -> BehaviorReport {
    let mut rep = bounded;
    rep.protocol = Protocol::Extendibility;
    rep.point = Some([p.0, p.1]);
    rep.ladder_verdict = Some(rep.verdict);
    rep.seed = Some(tol.seed);
    rep.path_limits = path_limits(frontal, q, p, cal, tol);

    let mut limits: Vec<f64> = rep.path_limits.iter().filter_map(|l| l.limit).collect();
    limits.sort_by(f64::total_cmp);
    if limits.len() < 2 {
        rep.verdict = Verdict::Inconclusive;
        rep.notes.push(format!("only {} usable paths into the point", limits.len()));
        return rep;
    }
    let median = limits[limits.len() / 2];
    let spread = limits[limits.len() - 1] - limits[0];
    let osc = tol.osc_tol * (1.0 + median.abs());
    let bounded = rep.ladder_verdict;
    rep.verdict = if bounded == Some(Verdict::Unbounded) || spread > 10.0 * osc {
        Verdict::NotExtendable
    } else if bounded == Some(Verdict::Bounded) && spread <= osc {
        rep.extension_value = Some(median);
        Verdict::Extendable
    } else {
        Verdict::Inconclusive
    };
    rep.notes.push(format!("path limits spread {spread:e} against osc_tol {osc:e}"));
    rep
}

fn path_limits(frontal: &Frontal, q: Quantity, p: (f64, f64), cal: &Calibration, tol: &Tolerances) -> Vec<PathLimit> {
    let r = tol.radius;
    let ft = FrameTol { lambda: 0.0, base: cal.tol_base, fit: cal.tol_fit };
    let mut paths: Vec<(PathKind, [f64; 2], i8)> = (0..tol.rays).map(|m| (PathKind::Ray, unit(TAU * m as f64 / tol.rays as f64), 0)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(tol.seed);
    for _ in 0..tol.random_rays {
        paths.push((PathKind::RandomRay, unit(rng.gen::<f64>() * TAU), 0));
    }
    for d in sigma_directions(frontal, p, r / 4.0, &ft) {
        paths.push((PathKind::Tangential, d, 1));
        paths.push((PathKind::Tangential, d, -1));
    }
    let floor = 1e-12 * cal.lambda_scale;
    paths
        .into_iter()
        .map(|(kind, d, side)| {
            let perp = [-d[1], d[0]];
            let mut vals = Vec::new();
            for i in 0..=40 {
                let s = r * 0.5f64.powi(i);
                let off = side as f64 * s * s / r;
                let (u, v) = (p.0 + s * d[0] + off * perp[0], p.1 + s * d[1] + off * perp[1]);
                let Ok(f) = frontal.frame(u, v, &ft) else { break };
                let rec = NodeRecord::from_frame(&f);
                if rec.lambda.abs() <= floor {
                    if vals.is_empty() {
                        continue;
                    }
                    break;
                }
                match q.classical(&rec) {
                    Some(x) => vals.push(x),
                    None => break,
                }
            }
            PathLimit { kind, direction: d, side, samples: vals.len(), limit: richardson(&vals) }
        })
        .collect()
}

fn unit(a: f64) -> [f64; 2] {
    [a.cos(), a.sin()]
}

/// Limit of a sequence sampled at `s_0 2^-i`, eliminating the `s` and `s²`
/// terms; among successive estimates the most stable one is kept.
pub(crate) fn richardson(vals: &[f64]) -> Option<f64> {
    if vals.len() < 3 {
        return None;
    }
    let r1: Vec<f64> = vals.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let r2: Vec<f64> = r1.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    if r2.len() == 1 {
        return Some(r2[0]);
    }
    let best = (1..r2.len()).min_by(|&a, &b| (r2[a] - r2[a - 1]).abs().total_cmp(&(r2[b] - r2[b - 1]).abs()))?;
    Some(r2[best])
}

/// Directions in which the singular set leaves `p`, from sign changes of
/// `lambda` on the circle of radius `rho`.
fn sigma_directions(frontal: &Frontal, p: (f64, f64), rho: f64, ft: &FrameTol) -> Vec<[f64; 2]> {
    let n = 256;
    let lam = |a: f64| frontal.lambda(p.0 + rho * a.cos(), p.1 + rho * a.sin(), ft).map(|l| l.val).ok();
    let angles: Vec<f64> = (0..n).map(|k| TAU * (k as f64 + 0.5) / n as f64).collect();
    let vals: Vec<Option<f64>> = angles.iter().map(|&a| lam(a)).collect();
    let mut dirs = Vec::new();
    for k in 0..n {
        let k2 = (k + 1) % n;
        let (Some(fa), Some(fb)) = (vals[k], vals[k2]) else { continue };
        if fa * fb >= 0.0 {
            continue;
        }
        let (mut a, mut b) = (angles[k], if k2 == 0 { TAU + angles[0] } else { angles[k2] });
        let mut fa = fa;
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            let Some(fm) = lam(m) else { break };
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        dirs.push(unit(0.5 * (a + b)));
    }
    dirs
}

/// Smallest `|q|` on the annuli `r_j / 2 < |(u, v) - p| <= r_j`,
/// `r_j = r 2^-j`, cross-checked against the values of the relative
/// curvatures at `p`.
pub fn divergence(frontal: &Frontal, q: Quantity, p: (f64, f64), tol: &Tolerances) -> Result<BehaviorReport> {
    let (s, disk) = ball_scan(frontal, p, tol)?;
    let cal = s.calibration;
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    let class = classify_frame(&f, &cal);
    let mut rep = BehaviorReport::new(q, Protocol::Divergence, Some(p));
    rep.predictor = predictor(q, &class, &f, &cal);
    if !class.singular {
        rep.verdict = Verdict::NotDivergent;
        rep.notes.push("regular point".into());
        return Ok(rep);
    }
    rep.rank0_in_window = s.records.iter().any(|n| disk.contains(n.u, n.v) && n.sigma[0] <= 1e-2 * cal.sigma_median);
    let ft = FrameTol { lambda: 0.0, base: cal.tol_base, fit: cal.tol_fit };
    let levels: Vec<(f64, Vec<f64>)> = (0..=tol.ladder_levels)
        .into_par_iter()
        .map(|j| {
            let rj = tol.radius * 0.5f64.powi(j as i32);
            let mut ratios = Vec::new();
            for c in RING_RADII {
                for k in 0..RING_ANGLES {
                    let a = TAU * (k as f64 + 0.5) / RING_ANGLES as f64;
                    let (u, v) = (p.0 + c * rj * a.cos(), p.1 + c * rj * a.sin());
                    if let Some(x) = frontal.frame(u, v, &ft).ok().and_then(|f| q.ratio(&NodeRecord::from_frame(&f))) {
                        ratios.push(x);
                    }
                }
            }
            (rj, ratios)
        })
        .collect();
    let mut run = 0.0f64;
    rep.ladder = levels
        .iter()
        .map(|(rj, ratios)| {
            let raw = ratios.iter().copied().reduce(f64::min).unwrap_or(0.0);
            run = run.max(raw);
            Rung { delta: *rj, samples: ratios.len(), raw, value: run }
        })
        .collect();
    if insufficient(&mut rep, tol) {
        return Ok(rep);
    }
    let values: Vec<f64> = rep.ladder.iter().map(|r| r.value).collect();
    let ladder_verdict = growth_verdict(&values, tol, Verdict::Divergent, Verdict::NotDivergent);
    rep.ladder_verdict = Some(ladder_verdict);
    rep.verdict = match &rep.predictor {
        Some(pred) if ladder_verdict != Verdict::Inconclusive && (ladder_verdict == Verdict::Divergent) != pred.divergent => {
            rep.notes.push(format!("ladder says {ladder_verdict:?}, predictor says divergent = {}", pred.divergent));
            Verdict::Inconclusive
        }
        _ => ladder_verdict,
    };
    Ok(rep)
}

const RING_RADII: [f64; 5] = [1.0, 0.875, 0.75, 0.625, 0.51];
const RING_ANGLES: usize = 64;

fn predictor(q: Quantity, class: &PointClass, f: &FrontalFrame, cal: &Calibration) -> Option<Prediction> {
    let pred = |divergent: bool, reason: String| Some(Prediction { rank: class.rank, divergent, reason });
    match (class.rank, q) {
        (2, _) => pred(false, "regular point".into()),
        (1, Quantity::K) => pred(f.k_omega.abs() > cal.tol_k, format!("K_Omega(p) = {:e}", f.k_omega)),
        (1, Quantity::H) => pred(f.h_omega.abs() > cal.tol_h, format!("H_Omega(p) = {:e}", f.h_omega)),
        (1, Quantity::K1) => pred(f.k1_omega.abs() > cal.tol_h, format!("k1_Omega(p) = {:e}", f.k1_omega)),
        (1, Quantity::K2) => pred(f.k2_omega.abs() > cal.tol_h, format!("k2_Omega(p) = {:e}", f.k2_omega)),
        (0, Quantity::K | Quantity::K1 | Quantity::K2) => pred(true, "rank 0".into()),
        _ => None,
    }
}
