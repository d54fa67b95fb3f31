use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontal::FrameTol;

/// Every threshold the analyses use. Relative factors are scaled by
/// quantities sampled over the analysis region (see `singular::Calibration`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|lambda|` threshold relative to `max |lambda|` on the region.
    pub tol_lambda: f64,
    /// Singular value threshold relative to `max(sigma1, median sigma1)`.
    pub tol_rank: f64,
    /// `|D lambda|` threshold relative to `max |D lambda|` on the region.
    pub tol_grad: f64,
    /// Tmb residual threshold, times `1 + max |Dx|`.
    pub tol_fit: f64,
    /// Threshold on the asymmetry of `alpha_Omega I`, see `FrontalFrame::alpha_asymmetry`.
    pub tol_sym: f64,
    /// Absolute lower bound on `|w1 x w2|`.
    pub tol_base: f64,
    /// Zero test for `H_Omega`, `K_Omega` and friends, relative to their
    /// largest sampled magnitude.
    pub tol_invariant: f64,
    pub osc_tol: f64,
    pub growth_tol: f64,
    /// Per-halving growth that counts as divergence.
    pub growth: f64,
    /// Number `J` of halvings in the ratio ladder.
    pub ladder_levels: usize,
    /// First ladder level; `max |lambda| / 4` when absent.
    pub delta0: Option<f64>,
    pub min_samples: usize,
    /// Radius of the ball around the point under study.
    pub radius: f64,
    /// Offset interval length for smoothability checks.
    pub epsilon: f64,
    pub t_levels: usize,
    pub rays: usize,
    pub random_rays: usize,
    /// Nodes per axis of the square grids laid over balls `B_r(p)`.
    pub ball_resolution: usize,
    /// Seed of the random sampling directions.
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_lambda: 1e-9,
            tol_rank: 1e-7,
            tol_grad: 1e-6,
            tol_fit: 1e-8,
            tol_sym: 1e-9,
            tol_base: 1e-10,
            tol_invariant: 1e-8,
            osc_tol: 1e-3,
            growth_tol: 0.15,
            growth: 1.8,
            ladder_levels: 8,
            delta0: None,
            min_samples: 32,
            radius: 0.25,
            epsilon: 0.1,
            t_levels: 64,
            rays: 16,
            random_rays: 4,
            ball_resolution: 201,
            seed: 7,
        }
    }
}

impl Tolerances {
    /// Rejects non-positive thresholds; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("tol_lambda", self.tol_lambda),
            ("tol_rank", self.tol_rank),
            ("tol_grad", self.tol_grad),
            ("tol_fit", self.tol_fit),
            ("tol_sym", self.tol_sym),
            ("tol_base", self.tol_base),
            ("tol_invariant", self.tol_invariant),
            ("osc_tol", self.osc_tol),
            ("growth_tol", self.growth_tol),
            ("radius", self.radius),
            ("epsilon", self.epsilon),
            ("delta0", self.delta0.unwrap_or(1.0)),
        ];
        for (name, x) in reals {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Scene { pointer: format!("/tolerances/{name}"), message: format!("must be positive, got {x}") });
            }
        }
        if !(self.growth > 1.0) {
            return Err(Error::Scene { pointer: "/tolerances/growth".into(), message: "must exceed 1".into() });
        }
        let counts = [
            ("ladder_levels", self.ladder_levels, 3),
            ("min_samples", self.min_samples, 1),
            ("t_levels", self.t_levels, 2),
            ("rays", self.rays, 4),
            ("ball_resolution", self.ball_resolution, 11),
        ];
        for (name, n, min) in counts {
            if n < min {
                return Err(Error::Scene { pointer: format!("/tolerances/{name}"), message: format!("must be at least {min}") });
            }
        }
        Ok(())
    }

    /// Frame thresholds before the region scale is known: classical
    /// invariants are produced wherever `lambda != 0`.
    pub fn frame_uncalibrated(&self) -> FrameTol {
        FrameTol { lambda: 0.0, base: self.tol_base, fit: self.tol_fit }
    }
}
