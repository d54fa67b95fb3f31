use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::numcore::{Elementary, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "atan" => Func::Atan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        self.elementary().name()
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Tan => Elementary::Tan,
            Func::Atan => Elementary::Atan,
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sqrt => Elementary::Sqrt,
        }
    }
}

/// Parameter values by name.
pub type Params = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Coord),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// A literal; negative values become `Neg(Num)` so the tree stays printable.
    pub fn number(x: f64) -> Expr {
        if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
            Expr::Neg(Box::new(Expr::Num(-x)))
        } else {
            Expr::Num(x)
        }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Names of all parameters in the tree.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn depends_on_coords(&self) -> bool {
        let mut dep = false;
        self.walk(&mut |e| dep |= matches!(e, Expr::Var(_)));
        dep
    }

    fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(a) | Expr::Call(_, a) => a.walk(f),
            Expr::Bin(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            _ => {}
        }
    }

    /// Substitutes every parameter; fails on the first unbound name.
    pub fn bind(&self, params: &Params) -> Result<Expr> {
        Ok(match self {
            Expr::Param(p) => match params.get(p) {
                Some(&x) => Expr::number(x),
                None => return Err(Error::UnboundName(p.clone())),
            },
            Expr::Num(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.bind(params)?)),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.bind(params)?)),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.bind(params)?, b.bind(params)?),
        })
    }

    /// Substitutes the coordinates by other expressions, e.g. a
    /// reparametrization `(u, v) -> (h1, h2)`.
    pub fn compose(&self, hu: &Expr, hv: &Expr) -> Expr {
        match self {
            Expr::Var(Coord::U) => hu.clone(),
            Expr::Var(Coord::V) => hv.clone(),
            Expr::Num(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.compose(hu, hv))),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.compose(hu, hv))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.compose(hu, hv), b.compose(hu, hv)),
        }
    }

    /// Evaluates with `u`, `v` given as scalars. Parameters must have been
    /// bound beforehand, see [`Expr::bind`].
    pub fn eval<S: Scalar>(&self, u: S, v: S) -> Result<S> {
        Ok(match self {
            Expr::Num(x) => S::constant(*x),
            Expr::Var(Coord::U) => u,
            Expr::Var(Coord::V) => v,
            Expr::Param(p) => return Err(Error::UnboundName(p.clone())),
            Expr::Neg(a) => -a.eval(u, v)?,
            Expr::Call(f, a) => a.eval(u, v)?.apply(f.elementary())?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(u, v)?;
                match op {
                    BinOp::Add => x + b.eval(u, v)?,
                    BinOp::Sub => x - b.eval(u, v)?,
                    BinOp::Mul => x * b.eval(u, v)?,
                    BinOp::Div => x.try_div(b.eval(u, v)?)?,
                    BinOp::Pow => pow(x, b, u, v)?,
                }
            }
        })
    }

    /// Evaluates over reals with parameters looked up in `params`.
    pub fn eval_real(&self, u: f64, v: f64, params: &Params) -> Result<f64> {
        self.bind(params)?.eval(u, v)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn pow<S: Scalar>(base: S, exponent: &Expr, u: S, v: S) -> Result<S> {
    if !exponent.depends_on_coords() {
        let p: f64 = exponent.eval(0.0, 0.0)?;
        if p.fract() == 0.0 && p.abs() <= i64::MAX as f64 {
            return base.powi(p as i64);
        }
        return base.apply(Elementary::Pow(p));
    }
    // variable exponent: exp(e log b), positive base only
    let e = exponent.eval(u, v)?;
    let lb = base.apply(Elementary::Log).map_err(|_| Error::Domain { op: "pow", value: base.value() })?;
    (e * lb).apply(Elementary::Exp)
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 => write!(f, "({x})"),
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(Coord::U) => f.write_str("u"),
            Expr::Var(Coord::V) => f.write_str("v"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, l, r) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                write_child(f, a, l)?;
                f.write_str(sym)?;
                write_child(f, b, r)
            }
        }
    }
}
