//! Forward-mode jets in two variables `(u, v)`.
//!
//! [`Jet2`] carries a value with its exact first and second partials and is
//! what surface expressions are evaluated in. [`Jet1`] keeps only the
//! gradient; quantities built from first derivatives of the surface (the
//! matrix `Lambda`, its determinant, the normal) live there, so that a
//! second-order input is enough to get their gradients.
//!
//! All three scalars (`f64`, [`Jet1`], [`Jet2`]) implement [`Scalar`], which
//! is what the expression evaluator and the small matrices are generic over.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Smallest magnitude accepted as a divisor.
pub const DIV_FLOOR: f64 = 1e-300;

/// Elementary functions the jets know how to propagate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
    Neg,
    Recip,
    /// Real power with a constant exponent; requires a positive base.
    Pow(f64),
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Tan => "tan",
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sqrt => "sqrt",
            Elementary::Atan => "atan",
            Elementary::Neg => "neg",
            Elementary::Recip => "recip",
            Elementary::Pow(_) => "pow",
        }
    }

    /// `(f(x), f'(x), f''(x))`, or a domain error.
    pub fn taylor(self, x: f64) -> Result<(f64, f64, f64)> {
        let domain = |op| Err(Error::Domain { op, value: x });
        Ok(match self {
            Elementary::Sin => {
                let (s, c) = x.sin_cos();
                (s, c, -s)
            }
            Elementary::Cos => {
                let (s, c) = x.sin_cos();
                (c, -s, -c)
            }
            Elementary::Tan => {
                let c = x.cos();
                if c.abs() < DIV_FLOOR {
                    return domain("tan");
                }
                let t = x.tan();
                let sec2 = 1.0 + t * t;
                (t, sec2, 2.0 * t * sec2)
            }
            Elementary::Exp => {
                let e = x.exp();
                (e, e, e)
            }
            Elementary::Log => {
                if !(x > 0.0) {
                    return domain("log");
                }
                (x.ln(), 1.0 / x, -1.0 / (x * x))
            }
            Elementary::Sqrt => {
                if !(x > 0.0) {
                    return domain("sqrt");
                }
                let s = x.sqrt();
                (s, 0.5 / s, -0.25 / (s * x))
            }
            Elementary::Atan => {
                let d = 1.0 + x * x;
                (x.atan(), 1.0 / d, -2.0 * x / (d * d))
            }
            Elementary::Neg => (-x, -1.0, 0.0),
            Elementary::Recip => {
                if x.abs() < DIV_FLOOR {
                    return domain("recip");
                }
                let r = 1.0 / x;
                (r, -r * r, 2.0 * r * r * r)
            }
            Elementary::Pow(p) => {
                if !(x > 0.0) {
                    return domain("pow");
                }
                let f = x.powf(p);
                (f, p * f / x, p * (p - 1.0) * f / (x * x))
            }
        })
    }
}

/// Arithmetic shared by `f64`, [`Jet1`] and [`Jet2`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn constant(c: f64) -> Self;

    fn value(&self) -> f64;

    /// Composes with a function whose value and first two derivatives at
    /// `self.value()` are `f0, f1, f2`.
    fn lift(self, f0: f64, f1: f64, f2: f64) -> Self;

    fn apply(self, f: Elementary) -> Result<Self> {
        let (f0, f1, f2) = f.taylor(self.value())?;
        Ok(self.lift(f0, f1, f2))
    }

    fn recip(self) -> Result<Self> {
        self.apply(Elementary::Recip)
    }

    fn try_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }

    fn sqrt(self) -> Result<Self> {
        self.apply(Elementary::Sqrt)
    }

    /// Integer power by repeated multiplication, exact in sign for negative
    /// bases. Negative exponents go through one reciprocal.
    fn powi(self, n: i64) -> Result<Self> {
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Self::constant(1.0);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        if n < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    fn zero() -> Self {
        Self::constant(0.0)
    }

    fn one() -> Self {
        Self::constant(1.0)
    }
}

impl Scalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn lift(self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
}

/// Value and gradient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet1 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
}

impl Jet1 {
    pub const fn new(val: f64, du: f64, dv: f64) -> Self {
        Jet1 { val, du, dv }
    }

    pub fn grad(&self) -> [f64; 2] {
        [self.du, self.dv]
    }
}

impl Scalar for Jet1 {
    fn constant(c: f64) -> Self {
        Jet1::new(c, 0.0, 0.0)
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn lift(self, f0: f64, f1: f64, _f2: f64) -> Self {
        Jet1::new(f0, f1 * self.du, f1 * self.dv)
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, r: Jet1) -> Jet1 {
        Jet1::new(self.val + r.val, self.du + r.du, self.dv + r.dv)
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, r: Jet1) -> Jet1 {
        Jet1::new(self.val - r.val, self.du - r.du, self.dv - r.dv)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, r: Jet1) -> Jet1 {
        Jet1::new(
            self.val * r.val,
            self.du * r.val + self.val * r.du,
            self.dv * r.val + self.val * r.dv,
        )
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        Jet1::new(-self.val, -self.du, -self.dv)
    }
}

impl Add<f64> for Jet1 {
    type Output = Jet1;
    fn add(self, r: f64) -> Jet1 {
        Jet1::new(self.val + r, self.du, self.dv)
    }
}

impl Mul<f64> for Jet1 {
    type Output = Jet1;
    fn mul(self, r: f64) -> Jet1 {
        Jet1::new(self.val * r, self.du * r, self.dv * r)
    }
}

/// Value with exact first and second partials in `(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub const fn new(val: f64, du: f64, dv: f64, duu: f64, duv: f64, dvv: f64) -> Self {
        Jet2 { val, du, dv, duu, duv, dvv }
    }

    /// The coordinate `u` seeded at `u0`.
    pub const fn seed_u(u0: f64) -> Self {
        Jet2::new(u0, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// The coordinate `v` seeded at `v0`.
    pub const fn seed_v(v0: f64) -> Self {
        Jet2::new(v0, 0.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// `∂/∂u` as a first-order jet.
    pub fn d_u(&self) -> Jet1 {
        Jet1::new(self.du, self.duu, self.duv)
    }

    /// `∂/∂v` as a first-order jet.
    pub fn d_v(&self) -> Jet1 {
        Jet1::new(self.dv, self.duv, self.dvv)
    }

    pub fn truncate(&self) -> Jet1 {
        Jet1::new(self.val, self.du, self.dv)
    }
}

impl Scalar for Jet2 {
    fn constant(c: f64) -> Self {
        Jet2::new(c, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    fn value(&self) -> f64 {
        self.val
    }

    fn lift(self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2::new(
            f0,
            f1 * self.du,
            f1 * self.dv,
            f2 * self.du * self.du + f1 * self.duu,
            f2 * self.du * self.dv + f1 * self.duv,
            f2 * self.dv * self.dv + f1 * self.dvv,
        )
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, r: Jet2) -> Jet2 {
        Jet2::new(
            self.val + r.val,
            self.du + r.du,
            self.dv + r.dv,
            self.duu + r.duu,
            self.duv + r.duv,
            self.dvv + r.dvv,
        )
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, r: Jet2) -> Jet2 {
        Jet2::new(
            self.val - r.val,
            self.du - r.du,
            self.dv - r.dv,
            self.duu - r.duu,
            self.duv - r.duv,
            self.dvv - r.dvv,
        )
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, r: Jet2) -> Jet2 {
        let (a, b) = (self, r);
        Jet2::new(
            a.val * b.val,
            a.du * b.val + a.val * b.du,
            a.dv * b.val + a.val * b.dv,
            a.duu * b.val + 2.0 * a.du * b.du + a.val * b.duu,
            a.duv * b.val + a.du * b.dv + a.dv * b.du + a.val * b.duv,
            a.dvv * b.val + 2.0 * a.dv * b.dv + a.val * b.dvv,
        )
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        Jet2::new(-self.val, -self.du, -self.dv, -self.duu, -self.duv, -self.dvv)
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, r: f64) -> Jet2 {
        Jet2 { val: self.val + r, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, r: f64) -> Jet2 {
        Jet2::new(
            self.val * r,
            self.du * r,
            self.dv * r,
            self.duu * r,
            self.duv * r,
            self.dvv * r,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn seeds_and_constants() {
        let c = Jet2::constant(3.0);
        assert_eq!((c.du, c.dv, c.duu, c.duv, c.dvv), (0.0, 0.0, 0.0, 0.0, 0.0));
        let u = Jet2::seed_u(0.5);
        assert_eq!((u.val, u.du, u.dv, u.duu), (0.5, 1.0, 0.0, 0.0));
        let v = Jet2::seed_v(-1.0);
        assert_eq!((v.val, v.du, v.dv), (-1.0, 0.0, 1.0));
    }

    #[test]
    fn sin_of_u_seed_at_zero() {
        let s = Jet2::seed_u(0.0).apply(Elementary::Sin).unwrap();
        assert_eq!(s.val, 0.0);
        assert_eq!(s.du, 1.0);
        assert_eq!(s.duu, 0.0);
    }

    #[test]
    fn log_of_constant_one() {
        let l = Jet2::constant(1.0).apply(Elementary::Log).unwrap();
        assert_eq!(l, Jet2::constant(0.0));
    }

    #[test]
    fn sqrt_of_one_plus_u_squared() {
        let u = Jet2::seed_u(0.5);
        let s = (u * u + 1.0).sqrt().unwrap();
        let r = 1.25f64.sqrt();
        let du = 0.5 / r;
        let duu = (r * 1.0 - 0.5 * du) / 1.25;
        assert!(close(s.val, r, 1e-15));
        assert!(close(s.du, du, 1e-15));
        assert!(close(s.duu, duu, 1e-15));

        // central differences with h = 1e-4
        let f = |x: f64| (1.0 + x * x).sqrt();
        let h = 1e-4;
        let fd1 = (f(0.5 + h) - f(0.5 - h)) / (2.0 * h);
        let fd2 = (f(0.5 + h) - 2.0 * f(0.5) + f(0.5 - h)) / (h * h);
        assert!((s.du - fd1).abs() <= 1e-7 * s.du.abs());
        assert!((s.duu - fd2).abs() <= 1e-7 * s.duu.abs());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            Jet2::constant(-1.0).apply(Elementary::Log),
            Err(Error::Domain { op: "log", .. })
        ));
        assert!(Jet2::constant(0.0).sqrt().is_err());
        assert!(Jet2::constant(0.0).recip().is_err());
        assert!(Jet2::constant(1e-301).recip().is_err());
        assert!(Jet2::constant(-2.0).apply(Elementary::Pow(0.5)).is_err());
        assert!(Jet1::constant(1e-310).try_div(Jet1::constant(1e-310)).is_err());
    }

    #[test]
    fn powi_is_exact_for_negative_base() {
        let v = Jet2::seed_v(-2.0);
        let p = v.powi(3).unwrap();
        assert_eq!(p.val, -8.0);
        assert_eq!(p.dv, 12.0);
        assert_eq!(p.dvv, -12.0);
        let q = v.powi(-2).unwrap();
        assert!(close(q.val, 0.25, 1e-15));
        assert!(close(q.dv, 0.25, 1e-15)); // d/dv v^-2 = -2 v^-3 = 0.25 at v = -2
        assert_eq!(v.powi(0).unwrap(), Jet2::constant(1.0));
    }

    #[test]
    fn product_rule_second_order() {
        let u = Jet2::seed_u(0.3);
        let v = Jet2::seed_v(0.7);
        let p = u * u * v;
        assert!(close(p.duu, 2.0 * 0.7, 1e-15));
        assert!(close(p.duv, 2.0 * 0.3, 1e-15));
        assert_eq!(p.dvv, 0.0);
    }

    #[test]
    fn partial_extraction() {
        let u = Jet2::seed_u(0.3);
        let v = Jet2::seed_v(0.7);
        let p = u * u * v;
        assert_eq!(p.d_u(), Jet1::new(p.du, p.duu, p.duv));
        assert_eq!(p.d_v(), Jet1::new(p.dv, p.duv, p.dvv));
    }
}
