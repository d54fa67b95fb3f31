//! Jet arithmetic and small fixed-size linear algebra.

pub mod jet;
pub mod linalg;

pub use jet::{Elementary, Jet1, Jet2, Scalar, DIV_FLOOR};
pub use linalg::{Mat2, Mat32, Vec3};

/// `|a - b| <= rel * max(1, |a|, |b|)`.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Relative deviation measured against `max(1, |a|, |b|)`.
pub fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
