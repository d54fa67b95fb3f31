//! Per-point frame of a frontal relative to a tangent moving base.
//!
//! With `Dx = Omega Lambdaᵀ` and `Dn = Omega muᵀ`, the relative invariants are
//! `lambda = det Lambda`, `K_Omega = det mu`, `H_Omega = -tr(mu adj Lambda)/2`
//! and `k_iOmega = H_Omega ∓ sqrt(H_Omega² - lambda K_Omega)`. Off the
//! singular set they equal `lambda` times the classical `K`, `H`, `k_i`.
//!
//! The unit normal is `w1 × w2 / |w1 × w2|` in the column order given.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::{parse_expr, Expr, Params};
use crate::numcore::{Jet1, Jet2, Mat2, Mat32, Scalar, Vec3};

pub const ORIENTATION_NOTE: &str = "n = (w1 x w2)/|w1 x w2| with the tmb columns in the order given";

/// Thresholds used while evaluating a single frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTol {
    /// Absolute threshold on `|lambda|` below which classical invariants are
    /// not reported.
    pub lambda: f64,
    /// Absolute lower bound on `|w1 × w2|`.
    pub base: f64,
    /// Relative factor of the tmb residual test, `fit · (1 + max|Dx|)`.
    pub fit: f64,
}

impl Default for FrameTol {
    fn default() -> Self {
        FrameTol { lambda: 1e-9, base: 1e-10, fit: 1e-8 }
    }
}

/// A surface `x` with a tangent moving base `Omega`, all entries bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontal {
    pub x: [Expr; 3],
    /// Rows of `Omega`; column `j` of the 3×2 matrix is `w_{j+1}`.
    pub omega: [[Expr; 2]; 3],
}

/// Classical invariants, defined off the singular set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classical {
    pub k: f64,
    pub h: f64,
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontalFrame {
    pub u: f64,
    pub v: f64,
    pub x: [f64; 3],
    pub dx: Mat32<f64>,
    pub omega: Mat32<f64>,
    pub i_omega: Mat2<f64>,
    /// `Lambda`, so that `Dx = Omega Lambdaᵀ`.
    pub lambda_mat: Mat2<f64>,
    pub lambda: f64,
    pub dlambda: [f64; 2],
    pub n: [f64; 3],
    pub dn: Mat32<f64>,
    pub ii_omega: Mat2<f64>,
    pub mu: Mat2<f64>,
    pub k_omega: f64,
    pub alpha_omega: Mat2<f64>,
    pub h_omega: f64,
    pub k1_omega: f64,
    pub k2_omega: f64,
    /// `H_Omega² - lambda K_Omega` before clamping.
    pub discriminant: f64,
    pub i_form: Mat2<f64>,
    pub ii_form: Mat2<f64>,
    /// Largest entry of `Dx - Omega Lambdaᵀ`.
    pub fit_residual: f64,
    pub classical: Option<Classical>,
}

/// Roots `(h - sqrt(h² - p), h + sqrt(h² - p))` of `t² - 2ht + p`, computed
/// without cancellation. Negative discriminants are clamped to zero; the
/// unclamped value is returned as well.
pub fn relative_roots(h: f64, p: f64) -> (f64, f64, f64) {
    let disc = h * h - p;
    let s = disc.max(0.0).sqrt();
    if h >= 0.0 {
        let big = h + s;
        let small = if big != 0.0 { p / big } else { 0.0 };
        (small, big, disc)
    } else {
        let big = h - s;
        (big, p / big, disc)
    }
}

impl Frontal {
    pub fn new(x: [Expr; 3], omega: [[Expr; 2]; 3]) -> Result<Frontal> {
        let all = x.iter().chain(omega.iter().flatten());
        if let Some(p) = all.flat_map(|e| e.params()).next() {
            return Err(Error::UnboundName(p));
        }
        Ok(Frontal { x, omega })
    }

    /// Parses and binds the expression strings.
    pub fn parse(x: [&str; 3], omega: [[&str; 2]; 3], params: &Params) -> Result<Frontal> {
        let p = |s: &str| parse_expr(s)?.bind(params);
        Frontal::new(
            [p(x[0])?, p(x[1])?, p(x[2])?],
            [
                [p(omega[0][0])?, p(omega[0][1])?],
                [p(omega[1][0])?, p(omega[1][1])?],
                [p(omega[2][0])?, p(omega[2][1])?],
            ],
        )
    }

    /// Same surface with the tmb columns transformed by `Omega -> Omega m`
    /// for a constant invertible `m`.
    pub fn with_tmb_mixed(&self, m: [[f64; 2]; 2]) -> Frontal {
        use crate::exprlang::BinOp;
        let comb = |a: &Expr, b: &Expr, c1: f64, c2: f64| {
            let t1 = Expr::bin(BinOp::Mul, Expr::number(c1), a.clone());
            let t2 = Expr::bin(BinOp::Mul, Expr::number(c2), b.clone());
            Expr::bin(BinOp::Add, t1, t2)
        };
        let omega = self.omega.clone().map(|[a, b]| {
            [comb(&a, &b, m[0][0], m[1][0]), comb(&a, &b, m[0][1], m[1][1])]
        });
        Frontal { x: self.x.clone(), omega }
    }

    pub fn swap_tmb_columns(&self) -> Frontal {
        let omega = self.omega.clone().map(|[a, b]| [b, a]);
        Frontal { x: self.x.clone(), omega }
    }

    /// `x` and `Omega` evaluated with arbitrary `Jet2` arguments standing
    /// for `(u, v)`.
    pub fn jets_at(&self, u: Jet2, v: Jet2) -> Result<(Vec3<Jet2>, Mat32<Jet2>)> {
        let x = Vec3::new(self.x[0].eval(u, v)?, self.x[1].eval(u, v)?, self.x[2].eval(u, v)?);
        let mut rows = [[Jet2::zero(); 2]; 3];
        for (r, er) in rows.iter_mut().zip(&self.omega) {
            r[0] = er[0].eval(u, v)?;
            r[1] = er[1].eval(u, v)?;
        }
        Ok((x, Mat32::from_rows(rows)))
    }

    pub fn seeded(&self, u: f64, v: f64) -> Result<(Vec3<Jet2>, Mat32<Jet2>)> {
        self.jets_at(Jet2::seed_u(u), Jet2::seed_v(v))
    }

    pub fn frame(&self, u: f64, v: f64, tol: &FrameTol) -> Result<FrontalFrame> {
        let (x, omega) = self.seeded(u, v)?;
        FrontalFrame::from_jets(u, v, &x, &omega.map(|e| e.truncate()), tol)
    }

    /// Only `lambda` and its gradient; cheaper than a full frame.
    pub fn lambda(&self, u: f64, v: f64, tol: &FrameTol) -> Result<Jet1> {
        let (x, omega) = self.seeded(u, v)?;
        let om = omega.map(|e| e.truncate());
        let dx = Mat32::from_cols(x.map(|e| e.d_u()), x.map(|e| e.d_v()));
        check_base(u, v, &om, tol)?;
        let lam_t = om.gram(&om).inv()?.mul(&om.gram(&dx));
        Ok(lam_t.det())
    }

    /// Unit normal with second derivatives.
    pub fn normal_jet2(&self, u: f64, v: f64, tol: &FrameTol) -> Result<Vec3<Jet2>> {
        let (_, omega) = self.seeded(u, v)?;
        let c = omega.cols[0].cross(&omega.cols[1]);
        let norm = c.norm()?;
        if norm.val <= tol.base {
            return Err(Error::DegenerateBase { u, v, norm: norm.val });
        }
        Ok(c.scale(norm.recip()?))
    }

    /// Frame of `x ∘ h` with tmb `Omega^h = (Omega ∘ h) Dh` at `q`, where
    /// `h = (h1, h2)` is a local diffeomorphism.
    pub fn reparametrize_frame(&self, h: &[Expr; 2], q: (f64, f64), tol: &FrameTol) -> Result<FrontalFrame> {
        let (su, sv) = (Jet2::seed_u(q.0), Jet2::seed_v(q.1));
        let h1 = h[0].eval(su, sv)?;
        let h2 = h[1].eval(su, sv)?;
        let dh = Mat2::new(h1.d_u(), h1.d_v(), h2.d_u(), h2.d_v());
        let det = dh.det().val;
        if det.abs() <= tol.base {
            return Err(Error::DegenerateDiffeo { u: q.0, v: q.1, det });
        }
        let (x, omega) = self.jets_at(h1, h2)?;
        let omega_h = omega.map(|e| e.truncate()).mul2(&dh);
        FrontalFrame::from_jets(q.0, q.1, &x, &omega_h, tol)
    }
}

fn check_base(u: f64, v: f64, omega: &Mat32<Jet1>, tol: &FrameTol) -> Result<()> {
    let norm = omega.cols[0].cross(&omega.cols[1]).norm_sq().val.sqrt();
    if norm <= tol.base {
        return Err(Error::DegenerateBase { u, v, norm });
    }
    Ok(())
}

fn grad_cols(n: &Vec3<Jet1>) -> Mat32<f64> {
    Mat32::from_cols(Vec3(n.0.map(|c| c.du)), Vec3(n.0.map(|c| c.dv)))
}

impl FrontalFrame {
    /// Builds the frame from the surface jet and a tmb carrying first
    /// derivatives.
    pub fn from_jets(u: f64, v: f64, x: &Vec3<Jet2>, omega: &Mat32<Jet1>, tol: &FrameTol) -> Result<FrontalFrame> {
        check_base(u, v, omega, tol)?;
        let dx_j = Mat32::from_cols(x.map(|e| e.d_u()), x.map(|e| e.d_v()));
        let i_omega_j = omega.gram(omega);
        let i_inv_j = i_omega_j.inv()?;
        let lambda_t = i_inv_j.mul(&omega.gram(&dx_j));
        let lambda_j = lambda_t.det();

        let dx = dx_j.map(|e| e.val);
        let om = omega.map(|e| e.val);
        let lambda_mat = lambda_t.transpose().map(|e| e.val);
        let fit_residual = dx.sub(&om.mul2(&lambda_mat.transpose())).max_abs();
        let fit_tol = tol.fit * (1.0 + dx.max_abs());
        if !(fit_residual <= fit_tol) {
            return Err(Error::TmbResidual { u, v, residual: fit_residual, tolerance: fit_tol });
        }

        let n_j = omega.cols[0].cross(&omega.cols[1]).normalize()?;
        let dn = grad_cols(&n_j);
        let i_omega = i_omega_j.map(|e| e.val);
        let mu = i_omega.inv()?.mul(&om.gram(&dn)).transpose();
        let ii_omega = om.gram(&dn).scale(-1.0);
        let k_omega = mu.det();
        let alpha_omega = mu.mul(&lambda_mat.adj());
        let h_omega = -0.5 * alpha_omega.trace();
        let lambda = lambda_j.val;
        let (k1_omega, k2_omega, discriminant) = relative_roots(h_omega, lambda * k_omega);

        let i_form = dx.gram(&dx);
        let ii_form = dx.gram(&dn).scale(-1.0);
        let mut frame = FrontalFrame {
            u,
            v,
            x: x.values(),
            dx,
            omega: om,
            i_omega,
            lambda_mat,
            lambda,
            dlambda: lambda_j.grad(),
            n: n_j.values(),
            dn,
            ii_omega,
            mu,
            k_omega,
            alpha_omega,
            h_omega,
            k1_omega,
            k2_omega,
            discriminant,
            i_form,
            ii_form,
            fit_residual,
            classical: None,
        };
        if lambda.abs() > tol.lambda {
            frame.classical = Some(frame.classical_invariants(tol.lambda)?);
        }
        Ok(frame)
    }

    /// `K`, `H`, `kappa∓` and `k1`, `k2` ordered by the sign of `lambda`.
    pub fn classical_invariants(&self, tol_lambda: f64) -> Result<Classical> {
        let l = self.lambda;
        if !(l.abs() > tol_lambda) {
            return Err(Error::SingularPoint { u: self.u, v: self.v, lambda: l });
        }
        let k = self.k_omega / l;
        let h = self.h_omega / l;
        let (kappa_minus, kappa_plus, _) = relative_roots(h, k);
        let (k1, k2) = if l > 0.0 { (kappa_minus, kappa_plus) } else { (kappa_plus, kappa_minus) };
        Ok(Classical { k, h, kappa_minus, kappa_plus, k1, k2 })
    }

    /// `det(Lambdaᵀ + t muᵀ)`, computed from the matrices.
    pub fn offset_det_direct(&self, t: f64) -> f64 {
        self.lambda_mat.add(&self.mu.scale(t)).det()
    }

    /// `lambda - 2t H_Omega + t² K_Omega`.
    pub fn offset_det(&self, t: f64) -> f64 {
        self.lambda - 2.0 * t * self.h_omega + t * t * self.k_omega
    }

    /// Asymmetry of `alpha_Omega I`, which equals `-lambda IIᵀ` and is
    /// symmetric on all of `U`, relative to `1 + |alpha_Omega| |I|`.
    /// The matrix `alpha_Omega` itself is only self-adjoint for `I`.
    pub fn alpha_asymmetry(&self) -> f64 {
        let s = self.alpha_omega.mul(&self.i_form);
        (s.get(0, 1) - s.get(1, 0)).abs() / (1.0 + self.alpha_omega.max_abs() * self.i_form.max_abs())
    }

    /// Raw `|alpha12 - alpha21|` of `alpha_Omega`.
    pub fn alpha_matrix_asymmetry(&self) -> f64 {
        (self.alpha_omega.get(0, 1) - self.alpha_omega.get(1, 0)).abs()
    }

    /// Largest singular value of `Lambda`, and the smallest.
    pub fn lambda_singular_values(&self) -> (f64, f64) {
        self.lambda_mat.singular_values()
    }

    pub fn dlambda_norm(&self) -> f64 {
        self.dlambda[0].hypot(self.dlambda[1])
    }
}
