//! Analysis jobs read from JSON.
//!
//! ```json
//! {
//!   "surface": { "gallery": "rank0_family", "params": { "k": 3, "s": 1 } },
//!   "tmb": "gallery",
//!   "region": { "u": [-1, 1], "v": [-1, 1] },
//!   "resolution": [201, 201],
//!   "point": [0, 0],
//!   "tolerances": { "radius": 0.25 }
//! }
//! ```
//!
//! A surface is either a gallery reference or three expressions
//! `"x": ["u", "v", "u^2"]` with optional real `params`; the tmb is either
//! `"gallery"` or three rows of two expressions. Errors carry the JSON
//! pointer of the offending value.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exprlang::{parse_expr, Expr, Params};
use crate::frontal::{Frontal, ORIENTATION_NOTE};
use crate::gallery;
use crate::singular::Grid;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gallery: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<[String; 3]>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TmbSpec {
    Gallery(GalleryTag),
    Rows([[String; 2]; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GalleryTag {
    Gallery,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub surface: SurfaceSpec,
    #[serde(default = "default_tmb")]
    pub tmb: TmbSpec,
    /// Defaults to the gallery region, else `[-1, 1]²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
    /// Point of interest; defaults to the gallery's marked point, else the
    /// centre of the region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    /// Offset used by `parallel` and `report` when none is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Quantities `report` runs the behaviour protocols on.
    #[serde(default = "default_quantities")]
    pub quantities: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<String>,
}

fn default_tmb() -> TmbSpec {
    TmbSpec::Gallery(GalleryTag::Gallery)
}

fn default_resolution() -> [usize; 2] {
    [201, 201]
}

fn default_quantities() -> Vec<String> {
    vec!["K".into(), "H".into()]
}

/// A validated scene with everything bound.
#[derive(Debug, Clone)]
pub struct Job {
    pub scene: Scene,
    pub hash: String,
    pub frontal: Frontal,
    pub grid: Grid,
    pub point: (f64, f64),
    pub gallery: Option<&'static str>,
    pub orientation: String,
}

impl Scene {
    pub fn from_json(text: &str) -> Result<Scene> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| Error::Scene { pointer: pointer_of(e.path()), message: e.inner().to_string() })?;
        Ok(scene)
    }

    pub fn gallery(name: &str, params: Params) -> Scene {
        Scene {
            surface: SurfaceSpec { gallery: Some(name.to_string()), x: None, params },
            tmb: default_tmb(),
            region: None,
            resolution: default_resolution(),
            point: None,
            t: None,
            quantities: default_quantities(),
            tolerances: Tolerances::default(),
            orientation: None,
        }
    }

    /// Pretty JSON in declaration order, for writing scene files.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    /// Sorted-key compact JSON with every default filled in.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("scene serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn prepare(&self) -> Result<Job> {
        let bad = |pointer: &str, message: String| Error::Scene { pointer: pointer.into(), message };
        self.tolerances.validate()?;
        let s = &self.surface;
        let (frontal, region, point, name) = match (&s.gallery, &s.x) {
            (Some(name), None) => {
                let entry = gallery::get(name, &s.params).map_err(|e| match e {
                    Error::UnknownEntry(_) => bad("/surface/gallery", e.to_string()),
                    e => bad("/surface/params", e.to_string()),
                })?;
                let frontal = match &self.tmb {
                    TmbSpec::Gallery(_) => entry.frontal.clone(),
                    TmbSpec::Rows(rows) => Frontal::new(entry.frontal.x.clone(), bind_rows(rows, &entry.params)?)?,
                };
                let region = Region { u: entry.region[0], v: entry.region[1] };
                (frontal, region, entry.point, Some(entry.name))
            }
            (None, Some(x)) => {
                let TmbSpec::Rows(rows) = &self.tmb else {
                    return Err(bad("/tmb", "\"gallery\" requires a gallery surface".into()));
                };
                let xs = [0, 1, 2].map(|i| bind(&x[i], &s.params, &format!("/surface/x/{i}")));
                let [a, b, c] = xs;
                let frontal = Frontal::new([a?, b?, c?], bind_rows(rows, &s.params)?)?;
                let region = Region { u: [-1.0, 1.0], v: [-1.0, 1.0] };
                (frontal, region, (0.0, 0.0), None)
            }
            _ => return Err(bad("/surface", "give exactly one of `gallery` and `x`".into())),
        };
        let region = self.region.unwrap_or(region);
        for (axis, r) in [("u", region.u), ("v", region.v)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(bad(&format!("/region/{axis}"), format!("need finite lo < hi, got {r:?}")));
            }
        }
        let [nu, nv] = self.resolution;
        let grid = Grid::new(region.u, region.v, nu, nv).map_err(|e| bad("/resolution", e.to_string()))?;
        let point = match (self.point, s.x.is_some()) {
            (Some(p), _) => (p[0], p[1]),
            (None, true) => (0.5 * (region.u[0] + region.u[1]), 0.5 * (region.v[0] + region.v[1])),
            (None, false) => point,
        };
        if !(point.0.is_finite() && point.1.is_finite()) {
            return Err(bad("/point", "must be finite".into()));
        }
        if let Some(t) = self.t {
            if !t.is_finite() {
                return Err(bad("/t", "must be finite".into()));
            }
        }
        for (i, q) in self.quantities.iter().enumerate() {
            crate::behavior::Quantity::parse(q).map_err(|e| bad(&format!("/quantities/{i}"), e.to_string()))?;
        }
        let orientation = match &self.orientation {
            Some(note) => format!("{ORIENTATION_NOTE}; {note}"),
            None => ORIENTATION_NOTE.to_string(),
        };
        Ok(Job { scene: self.clone(), hash: self.hash(), frontal, grid, point, gallery: name, orientation })
    }
}

fn bind(src: &str, params: &Params, pointer: &str) -> Result<Expr> {
    parse_expr(src)
        .and_then(|e| e.bind(params))
        .map_err(|e| Error::Scene { pointer: pointer.into(), message: e.to_string() })
}

fn bind_rows(rows: &[[String; 2]; 3], params: &Params) -> Result<[[Expr; 2]; 3]> {
    let mut out: Vec<Expr> = Vec::with_capacity(6);
    for (i, row) in rows.iter().enumerate() {
        for (j, src) in row.iter().enumerate() {
            out.push(bind(src, params, &format!("/tmb/{i}/{j}"))?);
        }
    }
    let mut it = out.into_iter();
    let mut next = || it.next().expect("six entries");
    Ok([[next(), next()], [next(), next()], [next(), next()]])
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const LIPS: &str = r#"{"surface": {"gallery": "cuspidal_lips"}, "resolution": [11, 11]}"#;

    #[test]
    fn gallery_scene_defaults() {
        let job = Scene::from_json(LIPS).unwrap().prepare().unwrap();
        assert_eq!(job.gallery, Some("cuspidal_lips"));
        assert_eq!(job.point, (0.0, 0.0));
        assert_eq!(job.grid.nu, 11);
        assert_eq!(job.hash.len(), 64);
    }

    #[test]
    fn hash_ignores_formatting_and_key_order() {
        let a = Scene::from_json(LIPS).unwrap();
        let b = Scene::from_json("{ \"resolution\":[11,11],\n \"surface\":{\"gallery\":\"cuspidal_lips\"}, \"tmb\": \"gallery\" }").unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = Scene::from_json(r#"{"surface": {"gallery": "cuspidal_lips"}, "resolution": [13, 11]}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn expression_scene() {
        let text = r#"{
            "surface": {"x": ["u", "v^2", "a*v^3"], "params": {"a": 1.5}},
            "tmb": [["1", "0"], ["0", "2*v"], ["0", "3*a*v^2"]],
            "region": {"u": [0, 1], "v": [-1, 1]}
        }"#;
        let job = Scene::from_json(text).unwrap().prepare().unwrap();
        assert_eq!(job.point, (0.5, 0.0));
        let f = job.frontal.frame(0.5, 0.5, &Default::default()).unwrap();
        assert!((f.x[2] - 1.5 * 0.125).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_pointers() {
        let cases = [
            (r#"{"surface": {"gallery": "lips"}}"#, "/surface/gallery"),
            (r#"{"surface": {"gallery": "sin_family", "params": {"k": 1.5}}}"#, "/surface/params"),
            (r#"{"surface": {"x": ["u", "v", "u^2"]}}"#, "/tmb"),
            (r#"{"surface": {"x": ["u", "v", "u^"]}, "tmb": [["1","0"],["0","1"],["0","0"]]}"#, "/surface/x/2"),
            (r#"{"surface": {"x": ["u", "v", "u"]}, "tmb": [["1","0"],["0","1"],["b","0"]]}"#, "/tmb/2/0"),
            (r#"{"surface": {"gallery": "zero_mean"}, "tolerances": {"osc_tol": -1}}"#, "/tolerances/osc_tol"),
            (r#"{"surface": {"gallery": "zero_mean"}, "tolerances": {"oops": 1}}"#, "/tolerances/oops"),
            (r#"{"surface": {"gallery": "zero_mean"}, "region": {"u": [1, 0], "v": [0, 1]}}"#, "/region/u"),
            (r#"{"surface": {"gallery": "zero_mean"}, "resolution": [2, "x"]}"#, "/resolution/1"),
            (r#"{"surface": {"gallery": "zero_mean"}, "quantities": ["K", "Q"]}"#, "/quantities/1"),
        ];
        for (text, pointer) in cases {
            let err = Scene::from_json(text).and_then(|s| s.prepare().map(|_| ())).unwrap_err();
            match err {
                Error::Scene { pointer: p, .. } => assert_eq!(p, pointer, "{text}"),
                e => panic!("{text}: {e}"),
            }
        }
    }

    #[test]
    fn parse_error_reports_offset() {
        let err = Scene::from_json(r#"{"surface": {"x": ["u", "v", "u $ v"]}, "tmb": [["1","0"],["0","1"],["0","0"]]}"#).unwrap().prepare().unwrap_err();
        assert!(err.to_string().contains("offset 2"), "{err}");
    }
}
