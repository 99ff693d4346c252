use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{Result, StabilityError};
use crate::moments::{self, FloatMesh};
use crate::rational::{self, QVec, Q};
use crate::toric::{
    ampleness_class, polytope_from_halfspaces, polytope_from_support, triangulate, Ampleness, Fan, Halfspace, Polytope,
    SimplexMesh, SupportVector,
};

/// Where the normals of the decomposition come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// A smooth complete fan; rows are support vectors over its rays.
    Fan(Fan),
    /// Raw inward normals `d_j` with rows giving offsets, `<d_j, x> >= -c_j`.
    Halfspaces { dim: usize, normals: Vec<QVec> },
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Fan(f) => f.dim(),
            Geometry::Halfspaces { dim, .. } => *dim,
        }
    }

    pub fn num_normals(&self) -> usize {
        match self {
            Geometry::Fan(f) => f.num_rays(),
            Geometry::Halfspaces { normals, .. } => normals.len(),
        }
    }

    pub fn normal(&self, j: usize) -> QVec {
        match self {
            Geometry::Fan(f) => f.ray(j),
            Geometry::Halfspaces { normals, .. } => normals[j].clone(),
        }
    }

    /// Polytope cut out by one row of support numbers.
    pub fn polytope(&self, row: &[Q]) -> Result<Polytope> {
        Ok(match self {
            Geometry::Fan(f) => polytope_from_support(f, &SupportVector(row.to_vec()))?,
            Geometry::Halfspaces { dim, normals } => polytope_from_halfspaces(
                *dim,
                normals.iter().zip(row).map(|(d, c)| Halfspace::new(d.clone(), c.clone())).collect(),
            )?,
        })
    }
}

/// Classification of one row of the support matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
pub enum RowClass {
    Ample,
    NefOnly {
        equalities: Vec<(usize, usize)>,
    },
    NotConvex {
        cone: usize,
        ray: usize,
    },
    /// Raw geometry: halfspaces that do not define facets.
    Redundant {
        halfspaces: Vec<usize>,
    },
    /// The row does not cut out a bounded full-dimensional polytope.
    Degenerate {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnFailure {
    pub column: usize,
    #[serde(serialize_with = "rational::as_string::q")]
    pub sum: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub valid: bool,
    pub rows: Vec<RowClass>,
    pub column_failures: Vec<ColumnFailure>,
}

fn check_shape(geometry: &Geometry, rows: &[QVec]) -> Result<()> {
    if rows.is_empty() {
        return Err(StabilityError::NoRows);
    }
    let m = geometry.num_normals();
    for (row, r) in rows.iter().enumerate() {
        if r.len() != m {
            return Err(StabilityError::Shape { row, expected: m, got: r.len() });
        }
    }
    Ok(())
}

fn classify(geometry: &Geometry, row: &[Q]) -> Result<RowClass> {
    match geometry {
        Geometry::Fan(f) => Ok(match ampleness_class(f, &SupportVector(row.to_vec()))? {
            Ampleness::Ample => RowClass::Ample,
            Ampleness::NefOnly { equalities } => RowClass::NefOnly { equalities },
            Ampleness::NotConvex { cone, ray } => RowClass::NotConvex { cone, ray },
        }),
        Geometry::Halfspaces { .. } => match geometry.polytope(row) {
            Ok(p) if p.num_redundant() == 0 => Ok(RowClass::Ample),
            Ok(p) => Ok(RowClass::Redundant {
                halfspaces: (0..p.halfspaces().len()).filter(|&j| p.redundant()[j]).collect(),
            }),
            Err(StabilityError::Geometry(e)) => Ok(RowClass::Degenerate { reason: e.to_string() }),
            Err(e) => Err(e),
        },
    }
}

/// Per-row ampleness plus the column-sum normalization against all ones.
pub fn validate_decomposition(geometry: &Geometry, rows: &[QVec]) -> Result<DecompositionReport> {
    check_shape(geometry, rows)?;
    let classes = rows.iter().map(|r| classify(geometry, r)).collect::<Result<Vec<_>>>()?;
    let column_failures: Vec<ColumnFailure> = (0..geometry.num_normals())
        .filter_map(|column| {
            let sum: Q = rows.iter().map(|r| r[column].clone()).sum();
            (!sum.is_one()).then_some(ColumnFailure { column, sum })
        })
        .collect();
    let valid = column_failures.is_empty() && classes.iter().all(|c| *c == RowClass::Ample);
    Ok(DecompositionReport { valid, rows: classes, column_failures })
}

/// A validated decomposition with its polytopes and meshes built once.
#[derive(Debug, Clone)]
pub struct Decomposition {
    geometry: Geometry,
    rows: Vec<QVec>,
    float_mode: bool,
    polytopes: Vec<Polytope>,
    meshes: Vec<SimplexMesh>,
    float_meshes: Vec<FloatMesh>,
}

impl Decomposition {
    pub fn new(geometry: Geometry, rows: Vec<QVec>) -> Result<Self> {
        let report = validate_decomposition(&geometry, &rows)?;
        if !report.valid {
            return Err(StabilityError::Invalid(Box::new(report)));
        }
        let polytopes = rows.iter().map(|r| geometry.polytope(r)).collect::<Result<Vec<_>>>()?;
        let meshes = polytopes.iter().map(triangulate).collect::<Result<Vec<_>, _>>()?;
        let float_meshes = meshes.iter().map(FloatMesh::from).collect();
        Ok(Decomposition { geometry, rows, float_mode: false, polytopes, meshes, float_meshes })
    }

    pub fn from_fan(fan: Fan, rows: Vec<QVec>) -> Result<Self> {
        Self::new(Geometry::Fan(fan), rows)
    }

    /// Marks the data as a rational approximation of irrational parameters,
    /// so verdicts use a tolerance instead of an exact zero test.
    pub fn with_float_mode(mut self, float_mode: bool) -> Self {
        self.float_mode = float_mode;
        self
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn rows(&self) -> &[QVec] {
        &self.rows
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn float_mode(&self) -> bool {
        self.float_mode
    }

    pub fn polytopes(&self) -> &[Polytope] {
        &self.polytopes
    }

    pub fn meshes(&self) -> &[SimplexMesh] {
        &self.meshes
    }

    pub fn float_meshes(&self) -> &[FloatMesh] {
        &self.float_meshes
    }

    /// Replaces each `P_i` by `P_i + t_i`, i.e. `c_ij -> c_ij - <d_j, t_i>`.
    /// With `Σ t_i = 0` the column sums are unchanged.
    pub fn translated(&self, ts: &[QVec]) -> Result<Self> {
        if ts.len() != self.k() {
            return Err(StabilityError::FieldCount { expected: self.k(), got: ts.len() });
        }
        let n = self.dim();
        let mut rows = self.rows.clone();
        for (row, t) in rows.iter_mut().zip(ts) {
            if t.len() != n {
                return Err(StabilityError::FieldDimension { expected: n, got: t.len() });
            }
            for (j, c) in row.iter_mut().enumerate() {
                *c -= rational::dot(&self.geometry.normal(j), t);
            }
        }
        Ok(Self::new(self.geometry.clone(), rows)?.with_float_mode(self.float_mode))
    }
}

/// Exact `Σ_i b(P_i)`.
pub fn sum_barycenter(d: &Decomposition) -> QVec {
    d.meshes.iter().map(moments::barycenter).fold(vec![Q::zero(); d.dim()], |acc, b| rational::add(&acc, &b))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum KeVerdict {
    Exists,
    NotExists {
        #[serde(serialize_with = "rational::as_string::vec")]
        destabilizer: QVec,
    },
}

/// Coupled Kähler–Einstein existence from the barycenter sum. Exact zero test
/// unless the decomposition is in float mode, where `|Σb| < tol` decides.
pub fn coupled_ke_verdict(d: &Decomposition, tol: f64) -> KeVerdict {
    let sum = sum_barycenter(d);
    let zero = if d.float_mode {
        rational::vec_to_f64(&sum).iter().map(|x| x * x).sum::<f64>().sqrt() < tol
    } else {
        rational::is_zero_vec(&sum)
    };
    if zero {
        KeVerdict::Exists
    } else {
        KeVerdict::NotExists { destabilizer: sum.iter().map(|x| -x).collect() }
    }
}

/// `max_j |x_j|` of an exact vector as a float, for reports.
pub fn sup_norm(v: &[Q]) -> f64 {
    v.iter().map(|x| rational::to_f64(&x.abs())).fold(0.0, f64::max)
}
