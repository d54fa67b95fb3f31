//! Sampled protocols for the behaviour of curvatures near the singular set.
//!
//! Every classical quantity `q` is the quotient `q_Omega / lambda` of a smooth
//! relative quantity by `lambda`. Boundedness is read off the ratio ladder
//! `R_j = max |q_Omega| / |lambda|` over the bands `delta_j / 2 < |lambda| <= delta_j`,
//! `delta_j = delta_0 2^-j`; extendibility additionally asks that the limits
//! of `q` along many paths into the point agree. Both are finite-resolution
//! stand-ins for ideal membership and carry their evidence.

mod protocols;
mod smooth;
mod tube;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::singular::NodeRecord;

pub use protocols::{boundedness, boundedness_in_ball, divergence, extendibility, Prediction};
pub use smooth::{principal_extension, rank0_laws, smoothability, Census, KappaEvidence, PrincipalExtension, Rank0Laws, RatioEvidence, RootCensus, SmoothVerdict, SmoothabilityReport};

/// Quantity under study; its relative counterpart is what gets sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    K,
    H,
    #[serde(rename = "kappa-")]
    KappaMinus,
    #[serde(rename = "kappa+")]
    KappaPlus,
    #[serde(rename = "k1")]
    K1,
    #[serde(rename = "k2")]
    K2,
    #[serde(rename = "1/k1+1/k2")]
    InvSum,
}

impl Quantity {
    pub const ALL: [Quantity; 7] = [Quantity::K, Quantity::H, Quantity::KappaMinus, Quantity::KappaPlus, Quantity::K1, Quantity::K2, Quantity::InvSum];

    pub fn tag(self) -> &'static str {
        match self {
            Quantity::K => "K",
            Quantity::H => "H",
            Quantity::KappaMinus => "kappa-",
            Quantity::KappaPlus => "kappa+",
            Quantity::K1 => "k1",
            Quantity::K2 => "k2",
            Quantity::InvSum => "1/k1+1/k2",
        }
    }

    pub fn parse(s: &str) -> Result<Quantity> {
        let q = match s {
            "kappa_minus" | "kappa-" => Quantity::KappaMinus,
            "kappa_plus" | "kappa+" => Quantity::KappaPlus,
            "inv_sum" => Quantity::InvSum,
            _ => return Quantity::ALL.into_iter().find(|q| q.tag() == s).ok_or_else(|| Error::BadParameter(format!("unknown quantity `{s}`"))),
        };
        Ok(q)
    }

    /// `lambda q` at a sample: `K_Omega`, `H_Omega`, `k_iOmega`, ... with values
    /// below `1e-12` of their natural scale set to zero. `None` for
    /// `1/k1 + 1/k2` where `K_Omega` vanishes.
    pub fn relative(self, r: &NodeRecord) -> Option<f64> {
        let floor_k = 1e-12 * r.mu_norm * r.mu_norm;
        let floor_h = 1e-12 * r.mu_norm * r.lambda_norm;
        let cut = |x: f64, f: f64| if x.abs() <= f { 0.0 } else { x };
        let (k1, k2) = (cut(r.k1_omega, floor_h), cut(r.k2_omega, floor_h));
        Some(match self {
            Quantity::K => cut(r.k_omega, floor_k),
            Quantity::H => cut(r.h_omega, floor_h),
            Quantity::K1 => k1,
            Quantity::K2 => k2,
            Quantity::KappaMinus => {
                if r.lambda > 0.0 {
                    k1
                } else {
                    k2
                }
            }
            Quantity::KappaPlus => {
                if r.lambda > 0.0 {
                    k2
                } else {
                    k1
                }
            }
            Quantity::InvSum => {
                if r.k_omega.abs() <= floor_k {
                    return None;
                }
                r.lambda * 2.0 * cut(r.h_omega, floor_h) / r.k_omega
            }
        })
    }

    /// `|q| = |q_Omega| / |lambda|` off the singular set.
    pub fn ratio(self, r: &NodeRecord) -> Option<f64> {
        if r.lambda == 0.0 {
            return None;
        }
        self.relative(r).map(|q| q.abs() / r.lambda.abs())
    }

    /// Signed classical value `q_Omega / lambda`.
    pub fn classical(self, r: &NodeRecord) -> Option<f64> {
        if r.lambda == 0.0 {
            return None;
        }
        self.relative(r).map(|q| q / r.lambda)
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Extendable,
    NotExtendable,
    Divergent,
    NotDivergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Boundedness,
    Extendibility,
    Divergence,
}

/// One level of the ladder: the band `delta / 2 < |lambda| <= delta`, or
/// for divergence the annulus `delta / 2 < |(u, v) - p| <= delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rung {
    pub delta: f64,
    pub samples: usize,
    /// Band statistic: largest `|q|` for boundedness, smallest for
    /// divergence.
    pub raw: f64,
    /// Running maximum of `raw` over the levels so far.
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Ray,
    RandomRay,
    /// `p + s d ± (s² / r) d⊥` with `d` tangent to the singular set.
    Tangential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLimit {
    pub kind: PathKind,
    /// Unit direction of approach.
    pub direction: [f64; 2],
    /// Side of the tangential parabola; 0 for rays.
    pub side: i8,
    pub samples: usize,
    /// Richardson-extrapolated limit of `q` at the point.
    pub limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BehaviorReport {
    pub quantity: Quantity,
    pub protocol: Protocol,
    pub point: Option<[f64; 2]>,
    pub verdict: Verdict,
    pub ladder: Vec<Rung>,
    pub path_limits: Vec<PathLimit>,
    /// `R_J` when bounded.
    pub constant: Option<f64>,
    /// Largest sampled `|q|` off the singular set.
    pub sampled_sup: Option<f64>,
    pub extension_value: Option<f64>,
    /// Boundedness verdict an extendibility verdict builds on, or the bare
    /// ladder verdict of a divergence test.
    pub ladder_verdict: Option<Verdict>,
    pub predictor: Option<Prediction>,
    /// The window contains rank-0 points, outside the hypotheses of the
    /// rank-1 results the protocols mirror.
    pub rank0_in_window: bool,
    pub seed: Option<u64>,
    pub notes: Vec<String>,
}

impl BehaviorReport {
    fn new(quantity: Quantity, protocol: Protocol, point: Option<(f64, f64)>) -> Self {
        BehaviorReport {
            quantity,
            protocol,
            point: point.map(|p| [p.0, p.1]),
            verdict: Verdict::Inconclusive,
            ladder: Vec::new(),
            path_limits: Vec::new(),
            constant: None,
            sampled_sup: None,
            extension_value: None,
            ladder_verdict: None,
            predictor: None,
            rank0_in_window: false,
            seed: None,
            notes: Vec::new(),
        }
    }
}
