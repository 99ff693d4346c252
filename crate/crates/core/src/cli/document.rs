use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use super::CliError;
use crate::ma::DEFAULT_T_SCHEDULE;
use crate::rational::{self, QVec, Q};
use crate::stability::Geometry;
use crate::toric::Fan;

/// Exact rational that travels as a `"p/q"` string (integers are also
/// accepted on input).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rat(pub Q);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct RatVisitor;
        impl Visitor<'_> for RatVisitor {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as a \"p/q\" string or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                rational::parse(v).map(Rat).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(rational::int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                i64::try_from(v).map(|v| Rat(rational::int(v))).map_err(E::custom)
            }
        }
        d.deserialize_any(RatVisitor)
    }
}

impl From<Q> for Rat {
    fn from(q: Q) -> Self {
        Rat(q)
    }
}

fn rats(v: &[Q]) -> Vec<Rat> {
    v.iter().cloned().map(Rat).collect()
}

/// One offset, or one offset per decomposition row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Offsets {
    One(Rat),
    PerRow(Vec<Rat>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawHalfspace {
    pub normal: Vec<Rat>,
    pub offset: Offsets,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `<normal, x> >= -offset`
    #[default]
    Geq,
    /// `<normal, x> <= offset`; normals are negated at ingestion.
    Leq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub radius: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radius: 8.0, step: 0.004 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Options {
    pub tol: f64,
    pub grid: GridSpec,
    pub t_schedule: Vec<f64>,
    pub max_iter: usize,
    pub relaxation: f64,
    /// Rational data approximates irrational parameters; verdicts use `tol`.
    pub float_mode: bool,
    pub halfspace_convention: Convention,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Rat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<Rat>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            tol: 1e-10,
            grid: GridSpec::default(),
            t_schedule: DEFAULT_T_SCHEDULE.to_vec(),
            max_iter: 5000,
            relaxation: 0.5,
            float_mode: false,
            halfspace_convention: Convention::Geq,
            v: None,
            cap: None,
        }
    }
}

/// The on-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub name: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_cones: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<RawHalfspace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Vec<Vec<Rat>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector_fields: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub options: Options,
}

impl ProblemDocument {
    pub fn from_fan(name: &str, fan: &Fan, rows: &[QVec]) -> Self {
        ProblemDocument {
            name: name.to_string(),
            dimension: fan.dim(),
            rays: Some(fan.rays().to_vec()),
            max_cones: Some(fan.max_cones().to_vec()),
            halfspaces: None,
            decomposition: Some(rows.iter().map(|r| rats(r)).collect()),
            vector_fields: None,
            options: Options::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }
}

/// Parses a document, reporting the field path of any failure.
pub fn parse_problem(text: &str) -> Result<ProblemDocument, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ProblemDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "?" || path == "." {
            CliError::Input(inner.to_string())
        } else {
            CliError::Input(format!("{path}: {inner}"))
        }
    })?;
    Problem::from_document(&doc)?;
    Ok(doc)
}

pub fn load_problem(path: &Path) -> Result<ProblemDocument, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text)
}

/// A checked document: typed geometry plus the support matrix.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub geometry: Geometry,
    pub rows: Vec<QVec>,
    pub vector_fields: Option<Vec<Vec<f64>>>,
    pub options: Options,
    /// Notes on conversions applied while reading the document.
    pub ingestion: Vec<String>,
}

fn field(path: &str, msg: impl fmt::Display) -> CliError {
    CliError::Input(format!("{path}: {msg}"))
}

impl Problem {
    pub fn from_document(doc: &ProblemDocument) -> Result<Self, CliError> {
        let n = doc.dimension;
        if n == 0 {
            return Err(field("dimension", "must be positive"));
        }
        let fan_parts = doc.rays.is_some() || doc.max_cones.is_some() || doc.decomposition.is_some();
        if fan_parts == doc.halfspaces.is_some() {
            return Err(CliError::Input(
                "exactly one geometry source: either rays + max_cones + decomposition, or halfspaces".into(),
            ));
        }
        let mut ingestion = Vec::new();
        let (geometry, rows) = if let Some(hs) = &doc.halfspaces {
            Self::raw_geometry(n, hs, doc.options.halfspace_convention, &mut ingestion)?
        } else {
            let rays = doc.rays.clone().ok_or_else(|| field("rays", "missing"))?;
            let cones = doc.max_cones.clone().ok_or_else(|| field("max_cones", "missing"))?;
            let decomposition = doc.decomposition.as_ref().ok_or_else(|| field("decomposition", "missing"))?;
            for (i, r) in rays.iter().enumerate() {
                if r.len() != n {
                    return Err(field(&format!("rays[{i}]"), format!("expected {n} coordinates, got {}", r.len())));
                }
            }
            let fan = Fan::new(n, rays, cones).map_err(|e| field("max_cones", e))?;
            let rows: Vec<QVec> = decomposition.iter().map(|r| r.iter().map(|q| q.0.clone()).collect()).collect();
            for (i, r) in rows.iter().enumerate() {
                if r.len() != fan.num_rays() {
                    return Err(field(
                        &format!("decomposition[{i}]"),
                        format!("expected {} support numbers, got {}", fan.num_rays(), r.len()),
                    ));
                }
            }
            if rows.is_empty() {
                return Err(field("decomposition", "needs at least one row"));
            }
            (Geometry::Fan(fan), rows)
        };
        if let Some(vs) = &doc.vector_fields {
            if vs.len() != rows.len() {
                return Err(field("vector_fields", format!("expected {} vectors, got {}", rows.len(), vs.len())));
            }
            for (i, v) in vs.iter().enumerate() {
                if v.len() != n {
                    return Err(field(&format!("vector_fields[{i}]"), format!("expected {n} components")));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(field(&format!("vector_fields[{i}]"), "components must be finite"));
                }
            }
        }
        let o = &doc.options;
        if !(o.tol > 0.0) {
            return Err(field("options.tol", "must be positive"));
        }
        if !(o.relaxation > 0.0 && o.relaxation <= 1.0) {
            return Err(field("options.relaxation", "must lie in (0, 1]"));
        }
        if let Some(v) = &o.v {
            if v.len() != n {
                return Err(field("options.v", format!("expected {n} components")));
            }
        }
        Ok(Problem {
            name: doc.name.clone(),
            geometry,
            rows,
            vector_fields: doc.vector_fields.clone(),
            options: doc.options.clone(),
            ingestion,
        })
    }

    fn raw_geometry(
        n: usize,
        hs: &[RawHalfspace],
        convention: Convention,
        notes: &mut Vec<String>,
    ) -> Result<(Geometry, Vec<QVec>), CliError> {
        if hs.is_empty() {
            return Err(field("halfspaces", "needs at least one halfspace"));
        }
        let k = match &hs[0].offset {
            Offsets::One(_) => 1,
            Offsets::PerRow(v) => v.len(),
        };
        if k == 0 {
            return Err(field("halfspaces[0].offset", "needs at least one offset"));
        }
        let sign = match convention {
            Convention::Geq => rational::int(1),
            Convention::Leq => rational::int(-1),
        };
        let mut normals = Vec::with_capacity(hs.len());
        let mut rows = vec![Vec::with_capacity(hs.len()); k];
        for (j, h) in hs.iter().enumerate() {
            if h.normal.len() != n {
                return Err(field(&format!("halfspaces[{j}].normal"), format!("expected {n} coordinates")));
            }
            normals.push(h.normal.iter().map(|q| &q.0 * &sign).collect::<QVec>());
            let offsets: Vec<Q> = match &h.offset {
                Offsets::One(q) => vec![q.0.clone()],
                Offsets::PerRow(v) => v.iter().map(|q| q.0.clone()).collect(),
            };
            if offsets.len() != k {
                return Err(field(&format!("halfspaces[{j}].offset"), format!("expected {k} offsets")));
            }
            for (row, o) in rows.iter_mut().zip(offsets) {
                row.push(o);
            }
        }
        if convention == Convention::Leq {
            notes.push("halfspaces given as <normal, x> <= offset; normals negated to <-normal, x> >= -offset".into());
        }
        Ok((Geometry::Halfspaces { dim: n, normals }, rows))
    }
}
