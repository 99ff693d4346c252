use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::fan::{Fan, SupportVector};
use super::{GeometryError, Result};
use crate::rational::{self, QVec, Q};

pub const MAX_BRUTE_FORCE_DIM: usize = 6;
pub const MAX_BRUTE_FORCE_HALFSPACES: usize = 32;

/// The inequality `<normal, x> >= -offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub normal: QVec,
    pub offset: Q,
}

impl Halfspace {
    pub fn new(normal: QVec, offset: Q) -> Self {
        Halfspace { normal, offset }
    }

    /// `<normal, x> + offset`; non-negative exactly on the halfspace.
    pub fn slack(&self, x: &[Q]) -> Q {
        rational::dot(&self.normal, x) + &self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FanSupport,
    Raw,
    Minkowski,
    Lifted,
    Translate,
}

/// Bounded full-dimensional polytope carrying both its H- and V-description.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<QVec>,
    redundant: Vec<bool>,
    provenance: Provenance,
}

impl Polytope {
    /// Builds the polytope from a verified vertex list and flags every
    /// halfspace that does not define a facet (or repeats an earlier facet).
    fn assemble(dim: usize, halfspaces: Vec<Halfspace>, vertices: Vec<QVec>, provenance: Provenance) -> Result<Self> {
        let refs: Vec<&QVec> = vertices.iter().collect();
        let affine_dim = rational::affine_dim(&refs);
        if affine_dim != dim as isize {
            return Err(GeometryError::Degenerate { affine_dim, dim });
        }
        let mut seen: Vec<Vec<usize>> = Vec::new();
        let redundant = halfspaces
            .iter()
            .map(|h| {
                let tight: Vec<usize> = (0..vertices.len()).filter(|&i| h.slack(&vertices[i]).is_zero()).collect();
                let pts: Vec<&QVec> = tight.iter().map(|&i| &vertices[i]).collect();
                let facet = rational::affine_dim(&pts) == dim as isize - 1;
                if !facet || seen.contains(&tight) {
                    return true;
                }
                seen.push(tight);
                false
            })
            .collect();
        Ok(Polytope { dim, halfspaces, vertices, redundant, provenance })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[QVec] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn redundant(&self) -> &[bool] {
        &self.redundant
    }

    pub fn num_redundant(&self) -> usize {
        self.redundant.iter().filter(|&&r| r).count()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub(crate) fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.halfspaces.iter().all(|h| !h.slack(x).is_negative())
    }

    /// Indices of vertices on which halfspace `j` is tight.
    pub fn tight_vertices(&self, j: usize) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.halfspaces[j].slack(&self.vertices[i]).is_zero()).collect()
    }

    /// Vertex index sets of the facets, one per non-redundant halfspace.
    pub fn facets(&self) -> Vec<Vec<usize>> {
        (0..self.halfspaces.len()).filter(|&j| !self.redundant[j]).map(|j| self.tight_vertices(j)).collect()
    }

    pub fn vertices_f64(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| rational::vec_to_f64(v)).collect()
    }
}

pub fn polytope_from_support(fan: &Fan, c: &SupportVector) -> Result<Polytope> {
    if c.len() != fan.num_rays() {
        return Err(GeometryError::SupportLength { expected: fan.num_rays(), got: c.len() });
    }
    let halfspaces: Vec<Halfspace> = (0..fan.num_rays()).map(|j| Halfspace::new(fan.ray(j), c.0[j].clone())).collect();
    let mut vertices: Vec<QVec> = Vec::new();
    for cone in 0..fan.max_cones().len() {
        let v = fan.cone_vertex(cone, c).ok_or(GeometryError::NotSmooth { cone })?;
        if let Some(ray) = halfspaces.iter().position(|h| h.slack(&v).is_negative()) {
            return Err(GeometryError::NotConvex { cone, ray });
        }
        if !vertices.contains(&v) {
            vertices.push(v);
        }
    }
    Polytope::assemble(fan.dim(), halfspaces, vertices, Provenance::FanSupport)
}

/// Vertices of `{x : a_j(x) >= 0}` obtained from `dim`-subsets of tight
/// constraints, plus the given equalities which are always imposed.
fn enumerate_vertices(dim: usize, halfspaces: &[Halfspace], equalities: &[QVec]) -> Vec<QVec> {
    let free = dim - equalities.len();
    let mut found = BTreeSet::new();
    for subset in (0..halfspaces.len()).combinations(free) {
        let mut a: Vec<QVec> = subset.iter().map(|&j| halfspaces[j].normal.clone()).collect();
        let mut b: QVec = subset.iter().map(|&j| -halfspaces[j].offset.clone()).collect();
        for e in equalities {
            a.push(e.clone());
            b.push(Q::zero());
        }
        if let Some(x) = rational::solve(&a, &b) {
            if halfspaces.iter().all(|h| !h.slack(&x).is_negative()) {
                found.insert(x);
            }
        }
    }
    found.into_iter().collect()
}

pub fn polytope_from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Polytope> {
    if dim == 0 || dim > MAX_BRUTE_FORCE_DIM || halfspaces.len() > MAX_BRUTE_FORCE_HALFSPACES {
        return Err(GeometryError::TooLarge {
            dim,
            halfspaces: halfspaces.len(),
            max_dim: MAX_BRUTE_FORCE_DIM,
            max_halfspaces: MAX_BRUTE_FORCE_HALFSPACES,
        });
    }
    for (index, h) in halfspaces.iter().enumerate() {
        if h.normal.len() != dim {
            return Err(GeometryError::HalfspaceDimension { index, expected: dim, got: h.normal.len() });
        }
    }
    let normals: Vec<QVec> = halfspaces.iter().map(|h| h.normal.clone()).collect();
    let lineality = rational::null_space(&normals, dim);
    if !lineality.is_empty() {
        // Translating along the lineality space never changes feasibility, so
        // restricting to its orthogonal complement decides emptiness.
        return if enumerate_vertices(dim, &halfspaces, &lineality).is_empty() {
            Err(GeometryError::Empty)
        } else {
            Err(GeometryError::Unbounded { direction: lineality[0].clone() })
        };
    }
    let vertices = enumerate_vertices(dim, &halfspaces, &[]);
    if vertices.is_empty() {
        return Err(GeometryError::Empty);
    }
    // A pointed recession cone is nontrivial iff it has an extreme ray, which
    // is cut out by dim-1 independent tight constraints.
    for subset in (0..halfspaces.len()).combinations(dim - 1) {
        let rows: Vec<QVec> = subset.iter().map(|&j| normals[j].clone()).collect();
        let ns = rational::null_space(&rows, dim);
        if ns.len() != 1 {
            continue;
        }
        for direction in [ns[0].clone(), rational::scale(&ns[0], &-Q::from_integer(1.into()))] {
            if normals.iter().all(|n| !rational::dot(n, &direction).is_negative()) {
                return Err(GeometryError::Unbounded { direction });
            }
        }
    }
    Polytope::assemble(dim, halfspaces, vertices, Provenance::Raw)
}

/// Sums support vectors over one fan and cross-checks the result against
/// the hull of pairwise vertex sums.
pub fn minkowski_sum(fan: &Fan, parts: &[SupportVector]) -> Result<(SupportVector, Polytope)> {
    let (first, rest) = parts.split_first().ok_or(GeometryError::NoParts)?;
    for p in parts {
        if p.len() != fan.num_rays() {
            return Err(GeometryError::SupportLength { expected: fan.num_rays(), got: p.len() });
        }
    }
    let mut total = first.clone();
    let mut running = polytope_from_support(fan, first)?;
    for (offset, part) in rest.iter().enumerate() {
        let summand = polytope_from_support(fan, part)?;
        total = SupportVector(rational::add(&total.0, &part.0));
        let next = polytope_from_support(fan, &total)?;
        let sums: BTreeSet<QVec> =
            running.vertices().iter().cartesian_product(summand.vertices()).map(|(a, b)| rational::add(a, b)).collect();
        let vertices_are_sums = next.vertices().iter().all(|v| sums.contains(v));
        let sums_inside = sums.iter().all(|s| next.contains(s));
        if !vertices_are_sums || !sums_inside {
            return Err(GeometryError::MinkowskiMismatch { part: offset + 1 });
        }
        running = next;
    }
    Ok((total, running.with_provenance(Provenance::Minkowski)))
}

pub fn support_function(p: &Polytope, u: &[Q]) -> Q {
    p.vertices().iter().map(|v| rational::dot(u, v)).max().expect("polytope has vertices")
}

/// `P + t`: vertices shift by `t` and each offset becomes `c_j - <d_j, t>`.
pub fn translate(p: &Polytope, t: &[Q]) -> Result<Polytope> {
    if t.len() != p.dim() {
        return Err(GeometryError::TranslationDimension { expected: p.dim(), got: t.len() });
    }
    let halfspaces = p
        .halfspaces
        .iter()
        .map(|h| Halfspace::new(h.normal.clone(), &h.offset - rational::dot(&h.normal, t)))
        .collect();
    let vertices = p.vertices.iter().map(|v| rational::add(v, t)).collect();
    Ok(Polytope { dim: p.dim, halfspaces, vertices, redundant: p.redundant.clone(), provenance: Provenance::Translate })
}
