//! Parallel smoothability, the extendable principal curvature at rank 1,
//! and the special laws at rank 0.

use serde::Serialize;

use super::protocols::{ball_scan, bounded_from_scan, divergence, extend_from};
use super::{BehaviorReport, Quantity, Verdict};
use crate::error::{Error, Result};
use crate::frontal::Frontal;
use crate::numcore::rel_dev;
use crate::parallel::{in_ball, window_from_records, ImmersionWindow};
use crate::singular::{classify_frame, Grid, NodeRecord};
use crate::tolerance::Tolerances;

/// Sign census; values with `|x| <= tol` count as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct Census {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Census {
    pub fn of(values: impl Iterator<Item = f64>, tol: f64) -> Census {
        let mut c = Census::default();
        for x in values {
            if x > tol {
                c.positive += 1;
            } else if x < -tol {
                c.negative += 1;
            } else {
                c.zero += 1;
            }
        }
        c
    }

    pub fn changes_sign(&self) -> bool {
        self.positive > 0 && self.negative > 0
    }
}

/// Zeros in `t` of the offset determinant over the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct RootCensus {
    pub positive: usize,
    pub negative: usize,
    pub min_positive: Option<f64>,
    pub min_negative: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothVerdict {
    SmoothablePlusSide,
    SmoothableMinusSide,
    Smoothable,
    NotSmoothable,
    Inconclusive,
}

impl SmoothVerdict {
    pub fn is_smoothable(self) -> bool {
        matches!(self, SmoothVerdict::SmoothablePlusSide | SmoothVerdict::SmoothableMinusSide | SmoothVerdict::Smoothable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothabilityReport {
    pub point: [f64; 2],
    pub rank: u8,
    pub r: f64,
    pub lambda_census: Census,
    /// Rank 0 only.
    pub lambda_k_census: Option<Census>,
    pub h_census: Option<Census>,
    /// Signs of `k2_Omega`, reported as evidence only.
    pub k2_census: Census,
    pub roots: RootCensus,
    pub verdict: SmoothVerdict,
    /// Offset determinant over `B_r(p)` and both sides.
    pub direct: Option<ImmersionWindow>,
    pub notes: Vec<String>,
}

/// Sign criteria for one-sided immersive offsets, confirmed by the offset
/// determinant on the chosen side.
pub fn smoothability(frontal: &Frontal, p: (f64, f64), r: f64, tol: &Tolerances) -> Result<SmoothabilityReport> {
    let grid = Grid::around(p, r, tol.ball_resolution)?;
    let s = crate::singular::scan(frontal, &grid, tol)?;
    let cal = s.calibration;
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    let class = classify_frame(&f, &cal);
    if !class.singular {
        return Err(Error::Rank { expected: 1, found: class.rank });
    }
    let centre = NodeRecord::from_frame(&f);
    let mut samples: Vec<&NodeRecord> = in_ball(&s.records, p, r).collect();
    samples.push(&centre);

    let lambda_census = Census::of(samples.iter().map(|n| n.lambda), cal.tol_lambda);
    let h_all = Census::of(samples.iter().map(|n| n.h_omega), cal.tol_h);
    let k2_census = Census::of(samples.iter().map(|n| n.k2_omega), cal.tol_h);
    let mut rep = SmoothabilityReport {
        point: [p.0, p.1],
        rank: class.rank,
        r,
        lambda_census,
        lambda_k_census: None,
        h_census: None,
        k2_census,
        roots: RootCensus::default(),
        verdict: SmoothVerdict::Inconclusive,
        direct: None,
        notes: Vec::new(),
    };
    let criterion = if class.rank == 0 {
        let lk = Census::of(samples.iter().map(|n| n.lambda * n.k_omega), cal.tol_lambda * cal.k_scale);
        rep.lambda_k_census = Some(lk);
        rep.h_census = Some(h_all);
        lk.negative == 0 && !h_all.changes_sign()
    } else {
        !lambda_census.changes_sign()
    };

    let mut roots = RootCensus::default();
    for n in &samples {
        let ts: Vec<f64> = if n.k_omega.abs() > cal.tol_k {
            vec![n.k1_omega / n.k_omega, n.k2_omega / n.k_omega]
        } else if n.h_omega.abs() > cal.tol_h {
            vec![n.lambda / (2.0 * n.h_omega)]
        } else {
            vec![]
        };
        for t in ts {
            if t > 0.0 {
                roots.positive += 1;
                roots.min_positive = Some(roots.min_positive.map_or(t, |m: f64| m.min(t)));
            } else if t < 0.0 {
                roots.negative += 1;
                roots.min_negative = Some(roots.min_negative.map_or(-t, |m: f64| m.min(-t)));
            }
        }
    }
    rep.roots = roots;
    let eps_for = |m: Option<f64>| m.map_or(tol.epsilon, |m| tol.epsilon.min(m / 2.0));
    let eps = [eps_for(roots.min_positive), eps_for(roots.min_negative)];
    let window = window_from_records(p, r, &samples, eps, tol)?;

    if !criterion {
        rep.verdict = SmoothVerdict::NotSmoothable;
        rep.direct = Some(window);
        return Ok(rep);
    }
    // a side whose nearest root sits at the point itself is blocked
    let open = |e: f64| e >= 1e-2 * tol.epsilon;
    let plus = window.plus.passes && open(eps[0]);
    let minus = window.minus.passes && open(eps[1]);
    rep.verdict = match (plus, minus) {
        (true, true) => SmoothVerdict::Smoothable,
        (true, false) => SmoothVerdict::SmoothablePlusSide,
        (false, true) => SmoothVerdict::SmoothableMinusSide,
        (false, false) => {
            rep.notes.push("sign criterion holds but neither side passes the offset determinant check".into());
            SmoothVerdict::Inconclusive
        }
    };
    rep.direct = Some(window);
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaEvidence {
    pub kappa_minus: Verdict,
    pub kappa_plus: Verdict,
    pub extends: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalExtension {
    pub point: [f64; 2],
    pub h_omega: f64,
    /// `k1` when `H_Omega(p) > 0`, else `k2`.
    pub extends: Quantity,
    /// `K_Omega / k_iOmega` at `p`, `i` the other index.
    pub value: f64,
    /// Largest relative gap between the classical curvature and the
    /// extension field over the ball, off the singular set.
    pub field_deviation: f64,
    pub kappa: KappaEvidence,
    pub smoothability: SmoothVerdict,
    /// `kappa` extension agrees with smoothability.
    pub consistent: bool,
}

/// The principal curvature with a smooth extension across a rank-1 front
/// point, and the extendibility of `kappa∓` set against smoothability.
pub fn principal_extension(frontal: &Frontal, p: (f64, f64), tol: &Tolerances) -> Result<PrincipalExtension> {
    let (s, disk) = ball_scan(frontal, p, tol)?;
    let cal = s.calibration;
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    let class = classify_frame(&f, &cal);
    if class.rank != 1 {
        return Err(Error::Rank { expected: 1, found: class.rank });
    }
    if !class.front_here {
        return Err(Error::NotFront { u: p.0, v: p.1 });
    }
    let (extends, field): (Quantity, fn(&NodeRecord) -> f64) = if f.h_omega > 0.0 {
        (Quantity::K1, |n| n.k_omega / n.k2_omega)
    } else {
        (Quantity::K2, |n| n.k_omega / n.k1_omega)
    };
    let value = field(&NodeRecord::from_frame(&f));
    let field_deviation = s
        .records
        .iter()
        .filter(|n| disk.contains(n.u, n.v))
        .filter_map(|n| {
            let c = n.classical?;
            let k = if extends == Quantity::K1 { c.k1 } else { c.k2 };
            Some(rel_dev(k, field(n)))
        })
        .fold(0.0, f64::max);

    let kappa_verdict = |q: Quantity| -> Result<Verdict> {
        let (b, _) = bounded_from_scan(frontal, q, &s, Some(disk), tol)?;
        Ok(extend_from(frontal, q, p, b, &cal, tol).verdict)
    };
    let (km, kp) = (kappa_verdict(Quantity::KappaMinus)?, kappa_verdict(Quantity::KappaPlus)?);
    let kappa = KappaEvidence { kappa_minus: km, kappa_plus: kp, extends: km == Verdict::Extendable || kp == Verdict::Extendable };
    let smoothability = smoothability(frontal, p, tol.radius, tol)?.verdict;
    Ok(PrincipalExtension {
        point: [p.0, p.1],
        h_omega: f.h_omega,
        extends,
        value,
        field_deviation,
        consistent: kappa.extends == smoothability.is_smoothable(),
        kappa,
        smoothability,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEvidence {
    pub delta: f64,
    pub samples: usize,
    /// Largest `|k1/k2 + 1|` on the innermost band.
    pub max_deviation: f64,
    /// `K < 0` at every sample of the band.
    pub k_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rank0Laws {
    pub point: [f64; 2],
    pub k_omega: f64,
    pub h_omega: f64,
    pub k1_omega: f64,
    pub k2_omega: f64,
    /// `k2_Omega / K_Omega`, `k1_Omega / K_Omega` and `2 H_Omega / K_Omega` at
    /// `p`: the extensions of `1/k1`, `1/k2` and `1/k1 + 1/k2`.
    pub inv_k1: f64,
    pub inv_k2: f64,
    pub inv_sum: f64,
    pub h_boundedness: Verdict,
    pub ratio: Option<RatioEvidence>,
    pub k_divergence: BehaviorReport,
}

pub fn rank0_laws(frontal: &Frontal, p: (f64, f64), tol: &Tolerances) -> Result<Rank0Laws> {
    let (s, disk) = ball_scan(frontal, p, tol)?;
    let cal = s.calibration;
    let f = frontal.frame(p.0, p.1, &cal.frame_tol())?;
    let class = classify_frame(&f, &cal);
    if class.rank != 0 {
        return Err(Error::Rank { expected: 0, found: class.rank });
    }
    if !class.front_here {
        return Err(Error::NotFront { u: p.0, v: p.1 });
    }
    let (h, tubes) = bounded_from_scan(frontal, Quantity::H, &s, Some(disk), tol)?;
    let ratio = (h.verdict == Verdict::Bounded).then(|| {
        let j = tubes.bands.len() - 1;
        let band = &tubes.bands[j];
        let max_deviation = band.iter().filter(|n| n.k2_omega != 0.0).map(|n| (n.k1_omega / n.k2_omega + 1.0).abs()).fold(0.0, f64::max);
        let k_negative = band.iter().all(|n| n.k_omega / n.lambda < 0.0);
        RatioEvidence { delta: tubes.deltas[j], samples: band.len(), max_deviation, k_negative }
    });
    Ok(Rank0Laws {
        point: [p.0, p.1],
        k_omega: f.k_omega,
        h_omega: f.h_omega,
        k1_omega: f.k1_omega,
        k2_omega: f.k2_omega,
        inv_k1: f.k2_omega / f.k_omega,
        inv_k2: f.k1_omega / f.k_omega,
        inv_sum: 2.0 * f.h_omega / f.k_omega,
        h_boundedness: h.verdict,
        ratio,
        k_divergence: divergence(frontal, Quantity::K, p, tol)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprlang::Params;
    use crate::gallery;

    fn tol() -> Tolerances {
        Tolerances { ball_resolution: 101, ..Tolerances::default() }
    }

    fn entry(name: &str, params: &[(&str, f64)]) -> Frontal {
        let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        gallery::get(name, &p).unwrap().frontal
    }

    #[test]
    fn census_counts() {
        let c = Census::of([1.0, -1.0, 0.0, 1e-12].into_iter(), 1e-9);
        assert_eq!(c, Census { positive: 1, negative: 1, zero: 2 });
        assert!(c.changes_sign());
    }

    #[test]
    fn lips_smoothable_on_minus_side() {
        let r = smoothability(&entry("cuspidal_lips", &[]), (0.0, 0.0), 0.25, &tol()).unwrap();
        assert_eq!(r.verdict, SmoothVerdict::SmoothableMinusSide, "{r:#?}");
        assert!(r.direct.unwrap().minus.min_abs > 0.0);
    }

    #[test]
    fn sign_changing_cases_are_not_smoothable() {
        for name in ["cuspidal_edge", "swallowtail", "cuspidal_beaks"] {
            let r = smoothability(&entry(name, &[]), (0.0, 0.0), 0.25, &tol()).unwrap();
            assert_eq!(r.verdict, SmoothVerdict::NotSmoothable, "{name}");
        }
    }

    #[test]
    fn rank0_table() {
        for (k, s, yes) in [(3.0, 1.0, true), (2.0, 1.0, false), (3.0, -1.0, false), (2.0, -1.0, false)] {
            let r = smoothability(&entry("rank0_family", &[("k", k), ("s", s)]), (0.0, 0.0), 0.25, &tol()).unwrap();
            assert_eq!(r.rank, 0);
            assert_eq!(r.verdict.is_smoothable(), yes, "k={k} s={s}: {r:#?}");
        }
    }

    #[test]
    fn regular_point_is_rejected() {
        let e = entry("cuspidal_edge", &[]);
        assert!(matches!(smoothability(&e, (0.0, 0.5), 0.25, &tol()), Err(Error::Rank { .. })));
    }

    #[test]
    fn edge_principal_extension() {
        let x = principal_extension(&entry("cuspidal_edge", &[]), (0.0, 0.0), &tol()).unwrap();
        assert_eq!(x.extends, Quantity::K1);
        assert_eq!(x.value, 0.0);
        assert!(!x.kappa.extends && x.consistent, "{x:#?}");
    }

    #[test]
    fn lips_kappa_extension_matches_smoothability() {
        let x = principal_extension(&entry("cuspidal_lips", &[]), (0.0, 0.0), &tol()).unwrap();
        assert!(x.kappa.extends && x.smoothability.is_smoothable(), "{x:#?}");
        assert!(x.field_deviation < 1e-6);
    }

    #[test]
    fn rank0_laws_on_zero_mean() {
        let l = rank0_laws(&entry("zero_mean", &[]), (0.0, 0.0), &tol()).unwrap();
        assert!(l.h_omega.abs() <= 1e-9 && l.inv_sum.abs() <= 1e-9);
        assert_eq!(l.h_boundedness, Verdict::Bounded);
        let r = l.ratio.unwrap();
        assert!(r.max_deviation <= 1e-2 && r.k_negative, "{r:?}");
        assert_eq!(l.k_divergence.verdict, Verdict::Divergent);
    }

    #[test]
    fn rank0_laws_need_rank0() {
        let e = entry("cuspidal_edge", &[]);
        assert!(matches!(rank0_laws(&e, (0.0, 0.0), &tol()), Err(Error::Rank { expected: 0, found: 1 })));
    }
}
