//! Samples sorted into the bands `delta_j / 2 < |lambda| <= delta_j`.
//!
//! Grid nodes alone thin out as `delta_j` shrinks below the grid spacing,
//! so every band is topped up with points on the level curves
//! `lambda = ±c delta_j`, c in {0.55, ..., 0.95}, found on grid edges.

use rayon::prelude::*;

use crate::error::Result;
use crate::frontal::{FrameTol, Frontal};
use crate::singular::{NodeRecord, Scan};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Disk {
    pub centre: (f64, f64),
    pub r: f64,
}

impl Disk {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        (u - self.centre.0).hypot(v - self.centre.1) <= self.r
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Tubes {
    pub deltas: Vec<f64>,
    pub bands: Vec<Vec<NodeRecord>>,
    /// Masked nodes and level-curve points.
    pub pool: Vec<NodeRecord>,
    pub sigma_present: bool,
    pub rank0_in_window: bool,
}

const LEVELS: [f64; 5] = [0.55, 0.65, 0.75, 0.85, 0.95];

pub(crate) fn sample(frontal: &Frontal, scan: &Scan, disk: Option<Disk>, delta0: Option<f64>, levels: usize) -> Result<Tubes> {
    let g = &scan.grid;
    let cal = &scan.calibration;
    let inside = |i: usize, j: usize| {
        let (u, v) = g.node(i, j);
        disk.map_or(true, |d| d.contains(u, v))
    };
    let nodes: Vec<&NodeRecord> = (0..g.nu).flat_map(|i| (0..g.nv).map(move |j| (i, j))).filter(|&(i, j)| inside(i, j)).map(|(i, j)| scan.record(i, j)).collect();

    let max_lambda = nodes.iter().map(|r| r.lambda.abs()).fold(0.0, f64::max);
    let delta0 = delta0.unwrap_or(max_lambda / 4.0);
    let deltas: Vec<f64> = (0..=levels).map(|j| delta0 * 0.5f64.powi(j as i32)).collect();

    let (mut pos, mut neg, mut zero) = (false, false, false);
    for r in &nodes {
        if r.lambda.abs() <= cal.tol_lambda {
            zero = true;
        } else if r.lambda > 0.0 {
            pos = true;
        } else {
            neg = true;
        }
    }
    let rank0_in_window = nodes.iter().any(|r| r.sigma[0] <= 1e-2 * cal.sigma_median);

    // level crossings on grid edges, in a fixed order
    let mut tasks: Vec<((f64, f64), (f64, f64), f64, f64, f64)> = Vec::new();
    let taus: Vec<f64> = deltas.iter().flat_map(|d| LEVELS.iter().flat_map(move |c| [c * d, -c * d])).collect();
    for i in 0..g.nu {
        for j in 0..g.nv {
            if !inside(i, j) {
                continue;
            }
            let a = scan.record(i, j);
            for (di, dj) in [(1, 0), (0, 1)] {
                let (i2, j2) = (i + di, j + dj);
                if i2 >= g.nu || j2 >= g.nv || !inside(i2, j2) {
                    continue;
                }
                let b = scan.record(i2, j2);
                for &tau in &taus {
                    if (a.lambda - tau) * (b.lambda - tau) < 0.0 {
                        tasks.push(((a.u, a.v), (b.u, b.v), a.lambda, b.lambda, tau));
                    }
                }
            }
        }
    }
    let ft = FrameTol { lambda: 0.0, base: cal.tol_base, fit: cal.tol_fit };
    let crossings: Vec<Result<NodeRecord>> = tasks
        .par_iter()
        .map(|&(a, b, la, lb, tau)| {
            let s = level_point(frontal, a, b, la - tau, lb - tau, tau, &ft);
            let (u, v) = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
            frontal.frame(u, v, &ft).map(|f| NodeRecord::from_frame(&f)).map_err(|e| e.at_node(u, v))
        })
        .collect();

    let mut pool: Vec<NodeRecord> = nodes.into_iter().copied().collect();
    for c in crossings {
        pool.push(c?);
    }
    let mut bands = vec![Vec::new(); deltas.len()];
    for r in &pool {
        if let Some(j) = band_of(&deltas, r.lambda.abs()) {
            bands[j].push(*r);
        }
    }
    Ok(Tubes { deltas, bands, pool, sigma_present: zero || (pos && neg), rank0_in_window })
}

/// Index `j` with `delta_j / 2 < a <= delta_j`.
pub(crate) fn band_of(deltas: &[f64], a: f64) -> Option<usize> {
    let last = *deltas.last()?;
    if !(a > last / 2.0 && a <= deltas[0]) {
        return None;
    }
    let mut j = ((deltas[0] / a).log2().floor().max(0.0) as usize).min(deltas.len() - 1);
    while j > 0 && a > deltas[j] {
        j -= 1;
    }
    while j + 1 < deltas.len() && a <= deltas[j + 1] {
        j += 1;
    }
    (a > deltas[j] / 2.0 && a <= deltas[j]).then_some(j)
}

/// Parameter on the segment `a -> b` where `lambda = tau`: linear guess
/// refined by two Illinois steps.
fn level_point(frontal: &Frontal, a: (f64, f64), b: (f64, f64), fa: f64, fb: f64, tau: f64, ft: &FrameTol) -> f64 {
    let (mut s0, mut s1, mut f0, mut f1) = (0.0, 1.0, fa, fb);
    let mut s = s0 - f0 * (s1 - s0) / (f1 - f0);
    for _ in 0..2 {
        let p = (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
        let Ok(l) = frontal.lambda(p.0, p.1, ft) else { break };
        let f = l.val - tau;
        if f == 0.0 {
            break;
        }
        if (f < 0.0) == (f0 < 0.0) {
            s0 = s;
            f0 = f;
            f1 /= 2.0;
        } else {
            s1 = s;
            f1 = f;
            f0 /= 2.0;
        }
        s = s0 - f0 * (s1 - s0) / (f1 - f0);
    }
    s.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands_partition_the_tube() {
        let deltas: Vec<f64> = (0..=4).map(|j| 0.5f64.powi(j)).collect();
        assert_eq!(band_of(&deltas, 1.0), Some(0));
        assert_eq!(band_of(&deltas, 0.5), Some(1));
        assert_eq!(band_of(&deltas, 0.50001), Some(0));
        assert_eq!(band_of(&deltas, 0.0625), Some(4));
        assert_eq!(band_of(&deltas, 0.03125), None);
        assert_eq!(band_of(&deltas, 1.5), None);
        for k in 1..1000 {
            let a = k as f64 / 1000.0;
            if let Some(j) = band_of(&deltas, a) {
                assert!(a > deltas[j] / 2.0 && a <= deltas[j]);
            }
        }
    }
}
