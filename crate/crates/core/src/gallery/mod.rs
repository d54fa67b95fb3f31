//! Built-in frontals with known closed forms, used as the test oracle corpus.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprlang::{parse_expr, Expr, Params};
use crate::frontal::Frontal;

pub const NAMES: [&str; 7] = [
    "cuspidal_edge",
    "swallowtail",
    "cuspidal_lips",
    "cuspidal_beaks",
    "sin_family",
    "rank0_family",
    "zero_mean",
];

/// What is known about the marked point of an entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub rank: u8,
    pub degenerate: bool,
    pub front: bool,
    pub smoothable: Option<bool>,
    pub k_bounded: Option<bool>,
    pub k_extendable: Option<bool>,
    /// `H_Omega` vanishes identically.
    pub h_omega_zero: bool,
}

#[derive(Debug, Clone)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: Params,
    pub x_src: [String; 3],
    pub omega_src: [[String; 2]; 3],
    pub lambda_src: String,
    pub frontal: Frontal,
    /// Closed form of `lambda` for the shipped tmb.
    pub lambda: Expr,
    pub region: [[f64; 2]; 2],
    pub point: (f64, f64),
    pub expect: Expectation,
}

struct Raw {
    summary: &'static str,
    x: [&'static str; 3],
    omega: [[&'static str; 2]; 3],
    lambda: &'static str,
    expect: Expectation,
}

fn rank1(degenerate: bool, smoothable: Option<bool>) -> Expectation {
    Expectation {
        rank: 1,
        degenerate,
        front: true,
        smoothable,
        k_bounded: None,
        k_extendable: None,
        h_omega_zero: false,
    }
}

fn rank0(smoothable: Option<bool>) -> Expectation {
    Expectation { rank: 0, degenerate: true, ..rank1(true, smoothable) }
}

const GRAPH_TMB: [[&str; 2]; 3] = [["1", "0"], ["0", "1"], ["u", "v"]];

fn raw(name: &str, params: &Params) -> Result<Raw> {
    Ok(match name {
        "cuspidal_edge" => Raw {
            summary: "cuspidal edge (u, v^2, v^3)",
            x: ["u", "v^2", "v^3"],
            omega: [["1", "0"], ["0", "2"], ["0", "3*v"]],
            lambda: "v",
            expect: rank1(false, Some(false)),
        },
        "swallowtail" => Raw {
            summary: "swallowtail (3u^4 + u^2 v, 4u^3 + 2uv, v)",
            x: ["3*u^4 + u^2*v", "4*u^3 + 2*u*v", "v"],
            omega: [["u", "u^2"], ["1", "2*u"], ["0", "1"]],
            lambda: "12*u^2 + 2*v",
            expect: rank1(false, Some(false)),
        },
        "cuspidal_lips" => Raw {
            summary: "cuspidal lips (u, 2v^3 + u^2 v, 3v^4 + u^2 v^2)",
            x: ["u", "2*v^3 + u^2*v", "3*v^4 + u^2*v^2"],
            omega: [["1", "0"], ["2*u*v", "1"], ["2*u*v^2", "2*v"]],
            lambda: "u^2 + 6*v^2",
            expect: Expectation {
                k_bounded: Some(true),
                k_extendable: Some(false),
                ..rank1(true, Some(true))
            },
        },
        "cuspidal_beaks" => Raw {
            summary: "cuspidal beaks (u, 2v^3 - u^2 v, 3v^4 - u^2 v^2)",
            x: ["u", "2*v^3 - u^2*v", "3*v^4 - u^2*v^2"],
            omega: [["1", "0"], ["-2*u*v", "1"], ["-2*u*v^2", "2*v"]],
            lambda: "6*v^2 - u^2",
            expect: rank1(true, Some(false)),
        },
        "sin_family" => Raw {
            summary: "(u, sin(ku) v^(k+1)/(k+1), sin(ku) v^(k+2)/(k+2)), k >= 1",
            x: ["u", "sin(k*u)*v^(k + 1)/(k + 1)", "sin(k*u)*v^(k + 2)/(k + 2)"],
            omega: [
                ["1", "0"],
                ["cos(k*u)*k*v^(k + 1)/(k + 1)", "1"],
                ["cos(k*u)*k*v^(k + 2)/(k + 2)", "v"],
            ],
            lambda: "sin(k*u)*v^k",
            expect: Expectation { k_extendable: Some(true), k_bounded: Some(true), ..rank1(true, None) },
        },
        "rank0_family" => {
            let k = params["k"];
            let s = params["s"];
            let smooth = k as i64 % 2 == 1 && s > 0.0;
            Raw {
                summary: "(u^k, s v^k, k/(k+1) u^(k+1) + s k/(k+1) v^(k+1)), k >= 2, s = +-1",
                x: ["u^k", "s*v^k", "k/(k + 1)*u^(k + 1) + s*k/(k + 1)*v^(k + 1)"],
                omega: GRAPH_TMB,
                lambda: "s*k^2*u^(k - 1)*v^(k - 1)",
                expect: rank0(Some(smooth)),
            }
        }
        "zero_mean" => Raw {
            summary: "rank-0 front with H_Omega = 0",
            x: [
                "log(v^2 + 1)/2 - log(u^2 + 1)/2",
                "u*v/(v^2 + 1)",
                "u*v^2/(v^2 + 1) - u + atan(u)",
            ],
            omega: GRAPH_TMB,
            lambda: "-(u^2 + v^2)/((1 + u^2)*(1 + v^2)^2)",
            expect: Expectation { h_omega_zero: true, ..rank0(None) },
        },
        _ => return Err(Error::UnknownEntry(name.to_string())),
    })
}

fn integer(params: &Params, key: &str, default: f64, min: f64) -> Result<f64> {
    let k = params.get(key).copied().unwrap_or(default);
    if k.fract() != 0.0 || k < min || k > 64.0 {
        return Err(Error::BadParameter(format!("{key} must be an integer in [{min}, 64], got {k}")));
    }
    Ok(k)
}

/// Validates parameters, filling in defaults (`k = 1` for `sin_family`,
/// `k = 3, s = 1` for `rank0_family`).
pub fn normalize_params(name: &str, params: &Params) -> Result<Params> {
    let mut out = Params::new();
    let allowed: &[&str] = match name {
        "sin_family" => {
            out.insert("k".into(), integer(params, "k", 1.0, 1.0)?);
            &["k"]
        }
        "rank0_family" => {
            out.insert("k".into(), integer(params, "k", 3.0, 2.0)?);
            let s = params.get("s").copied().unwrap_or(1.0);
            if s != 1.0 && s != -1.0 {
                return Err(Error::BadParameter(format!("s must be 1 or -1, got {s}")));
            }
            out.insert("s".into(), s);
            &["k", "s"]
        }
        n if NAMES.contains(&n) => &[],
        n => return Err(Error::UnknownEntry(n.to_string())),
    };
    if let Some(extra) = params.keys().find(|p| !allowed.contains(&p.as_str())) {
        return Err(Error::BadParameter(format!("{name} takes no parameter `{extra}`")));
    }
    Ok(out)
}

pub fn get(name: &str, params: &Params) -> Result<GalleryEntry> {
    let params = normalize_params(name, params)?;
    let r = raw(name, &params)?;
    let name = NAMES.iter().copied().find(|n| *n == name).expect("validated above");
    let frontal = Frontal::parse(r.x, r.omega, &params)?;
    Ok(GalleryEntry {
        name,
        summary: r.summary,
        x_src: r.x.map(String::from),
        omega_src: r.omega.map(|row| row.map(String::from)),
        lambda_src: r.lambda.to_string(),
        lambda: parse_expr(r.lambda)?.bind(&params)?,
        params,
        frontal,
        region: [[-1.0, 1.0], [-1.0, 1.0]],
        point: (0.0, 0.0),
        expect: r.expect,
    })
}

/// Every entry with the parameter choices the test suite exercises.
pub fn catalog() -> Vec<GalleryEntry> {
    let mut out = Vec::new();
    for name in NAMES {
        match name {
            "sin_family" => {
                for k in [1.0, 2.0, 3.0] {
                    out.push(get(name, &Params::from([("k".to_string(), k)])).unwrap());
                }
            }
            "rank0_family" => {
                for (k, s) in [(3.0, 1.0), (2.0, 1.0), (3.0, -1.0), (2.0, -1.0)] {
                    let p = Params::from([("k".to_string(), k), ("s".to_string(), s)]);
                    out.push(get(name, &p).unwrap());
                }
            }
            _ => out.push(get(name, &Params::new()).unwrap()),
        }
    }
    out
}

/// One representative per entry name.
pub fn defaults() -> Vec<GalleryEntry> {
    NAMES.iter().map(|n| get(n, &Params::new()).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontal::FrameTol;
    use crate::numcore::rel_close;

    #[test]
    fn lambda_matches_closed_form() {
        let tol = FrameTol::default();
        for e in catalog() {
            for i in 0..=20 {
                for j in 0..=20 {
                    let u = -1.0 + 0.1 * i as f64 + 0.013;
                    let v = -1.0 + 0.1 * j as f64 - 0.007;
                    let f = e.frontal.frame(u, v, &tol).unwrap();
                    let want = e.lambda.eval(u, v).unwrap();
                    assert!(rel_close(f.lambda, want, 1e-9), "{} ({u},{v}): {} vs {want}", e.name, f.lambda);
                }
            }
        }
    }

    #[test]
    fn beaks_lambda_matrix() {
        let e = get("cuspidal_beaks", &Params::new()).unwrap();
        let f = e.frontal.frame(0.3, 0.2, &FrameTol::default()).unwrap();
        let l = f.lambda_mat.values();
        assert!(rel_close(l[0][0], 1.0, 1e-14) && l[0][1].abs() < 1e-14 && l[1][0].abs() < 1e-14);
        assert!(rel_close(l[1][1], 6.0 * 0.04 - 0.09, 1e-14));
    }

    #[test]
    fn rank0_defining_map() {
        let p = Params::from([("k".to_string(), 3.0), ("s".to_string(), 1.0)]);
        let e = get("rank0_family", &p).unwrap();
        let (u, v): (f64, f64) = (0.4, -0.7);
        let want = [u * u * u, v * v * v, 0.75 * u.powi(4) + 0.75 * v.powi(4)];
        for (c, w) in e.frontal.x.iter().zip(want) {
            assert!(rel_close(c.eval(u, v).unwrap(), w, 1e-15));
        }
        let f = e.frontal.frame(u, v, &FrameTol::default()).unwrap();
        let r2 = 1.0 + u * u + v * v;
        assert!(rel_close(f.k_omega, 1.0 / (r2 * r2), 1e-12));
    }

    #[test]
    fn zero_mean_matrices() {
        let e = get("zero_mean", &Params::new()).unwrap();
        let (u, v) = (0.3, -0.6);
        let f = e.frontal.frame(u, v, &FrameTol::default()).unwrap();
        let l = f.lambda_mat.values();
        let (a, b) = (1.0 + u * u, 1.0 + v * v);
        let lam = [[-u / a, v / b], [v / b, u * (1.0 - v * v) / (b * b)]];
        let r = (1.0 + u * u + v * v).powf(1.5);
        let mu = [[-b / r, u * v / r], [u * v / r, -a / r]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel_close(l[i][j], lam[i][j], 1e-13));
                assert!(rel_close(f.mu.get(i, j), mu[i][j], 1e-13));
            }
        }
        assert!(f.h_omega.abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(get("nope", &Params::new()), Err(Error::UnknownEntry(_))));
        let bad = |n: &str, k: &str, x: f64| get(n, &Params::from([(k.to_string(), x)]));
        assert!(matches!(bad("sin_family", "k", 0.0), Err(Error::BadParameter(_))));
        assert!(matches!(bad("sin_family", "k", 1.5), Err(Error::BadParameter(_))));
        assert!(matches!(bad("rank0_family", "k", 1.0), Err(Error::BadParameter(_))));
        assert!(matches!(bad("rank0_family", "s", 0.5), Err(Error::BadParameter(_))));
        assert!(matches!(bad("cuspidal_edge", "k", 2.0), Err(Error::BadParameter(_))));
    }
}
