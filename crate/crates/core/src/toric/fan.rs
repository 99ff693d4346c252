use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Result};
use crate::rational::{self, int, QVec, Q};

/// Primitive integer rays plus the maximal cones of a simplicial fan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Checks shapes only (dimensions, cone sizes, index ranges). Primitivity,
    /// smoothness and completeness are the job of [`validate_fan`].
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, max_cones: Vec<Vec<usize>>) -> Result<Self> {
        if rays.is_empty() {
            return Err(GeometryError::EmptyFan);
        }
        for (index, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(GeometryError::RayDimension { index, expected: dim, got: r.len() });
            }
        }
        for (cone, c) in max_cones.iter().enumerate() {
            if c.len() != dim {
                return Err(GeometryError::ConeSize { cone, expected: dim, got: c.len() });
            }
            if let Some(&index) = c.iter().find(|&&j| j >= rays.len()) {
                return Err(GeometryError::ConeIndexOutOfRange { cone, index });
            }
        }
        Ok(Fan { dim, rays, max_cones })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn ray(&self, j: usize) -> QVec {
        self.rays[j].iter().map(|&x| int(x)).collect()
    }

    pub(crate) fn cone_matrix(&self, cone: usize) -> Vec<QVec> {
        self.max_cones[cone].iter().map(|&j| self.ray(j)).collect()
    }

    /// Vertex dual to a maximal cone: `<d_j, v> = -c_j` for `j` in the cone.
    /// `None` when the cone's rays are linearly dependent.
    pub(crate) fn cone_vertex(&self, cone: usize, c: &SupportVector) -> Option<QVec> {
        let a = self.cone_matrix(cone);
        let b: QVec = self.max_cones[cone].iter().map(|&j| -c.0[j].clone()).collect();
        rational::solve(&a, &b)
    }

    /// The projective line: rays `1`, `-1`.
    pub fn projective_line() -> Self {
        Fan::new(1, vec![vec![1], vec![-1]], vec![vec![0], vec![1]]).unwrap()
    }

    pub fn projective_plane() -> Self {
        Fan::new(2, vec![vec![1, 0], vec![0, 1], vec![-1, -1]], vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap()
    }

    pub fn p1_x_p1() -> Self {
        Fan::new(
            2,
            vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
        .unwrap()
    }

    /// The plane blown up at one torus-fixed point; the extra ray is `(1, 1)`.
    pub fn blowup_p2_one_point() -> Self {
        Fan::new(
            2,
            vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
        .unwrap()
    }

    /// The plane blown up at three points (del Pezzo of degree 6). Rays in
    /// cyclic order `(1,0), (1,1), (0,1), (-1,0), (-1,-1), (0,-1)`.
    pub fn hexagon() -> Self {
        Fan::new(
            2,
            vec![vec![1, 0], vec![1, 1], vec![0, 1], vec![-1, 0], vec![-1, -1], vec![0, -1]],
            (0..6).map(|i| vec![i, (i + 1) % 6]).collect(),
        )
        .unwrap()
    }
}

/// Support numbers `c_j`, one per ray, for `P = {<d_j, x> >= -c_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportVector(pub Vec<Q>);

impl SupportVector {
    /// The anticanonical support vector (all ones).
    pub fn ones(m: usize) -> Self {
        SupportVector(vec![Q::one(); m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Q] {
        &self.0
    }
}

impl From<Vec<Q>> for SupportVector {
    fn from(v: Vec<Q>) -> Self {
        SupportVector(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FanWitness {
    /// Maximal cone whose generator matrix does not have determinant ±1.
    SingularCone { cone: usize, det: Q },
    /// Wall (sorted ray indices) not shared by exactly two maximal cones.
    Wall { rays: Vec<usize>, incidence: usize },
    /// The anticanonical support vector failed the ampleness test.
    NotFano(Ampleness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanReport {
    pub complete: bool,
    pub smooth: bool,
    pub fano: bool,
    pub witnesses: Vec<FanWitness>,
}

pub fn validate_fan(fan: &Fan) -> Result<FanReport> {
    for (index, r) in fan.rays.iter().enumerate() {
        if rational::gcd_vec(r) != 1 {
            return Err(GeometryError::RayNotPrimitive { index });
        }
        if let Some(previous) = fan.rays[..index].iter().position(|p| p == r) {
            return Err(GeometryError::DuplicateRay { index, previous });
        }
    }
    let mut witnesses = Vec::new();

    let mut smooth = true;
    for cone in 0..fan.max_cones.len() {
        let d = rational::det(&fan.cone_matrix(cone));
        if d.abs() != Q::one() {
            smooth = false;
            witnesses.push(FanWitness::SingularCone { cone, det: d });
        }
    }

    let mut walls: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for cone in &fan.max_cones {
        let mut sorted = cone.clone();
        sorted.sort_unstable();
        for skip in 0..sorted.len() {
            let wall: Vec<usize> = sorted.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &j)| j).collect();
            *walls.entry(wall).or_default() += 1;
        }
    }
    let mut complete = !fan.max_cones.is_empty();
    for (wall, &incidence) in &walls {
        if incidence != 2 {
            complete = false;
            witnesses.push(FanWitness::Wall { rays: wall.clone(), incidence });
        }
    }

    let fano = if smooth && complete {
        let class = ampleness_class(fan, &SupportVector::ones(fan.num_rays()))?;
        let ok = class == Ampleness::Ample;
        if !ok {
            witnesses.push(FanWitness::NotFano(class));
        }
        ok
    } else {
        false
    };
    Ok(FanReport { complete, smooth, fano, witnesses })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ampleness {
    /// Strict inequality for every (cone, ray not in cone) pair.
    Ample,
    /// Convex but with the listed (cone, ray) equalities.
    NefOnly { equalities: Vec<(usize, usize)> },
    /// First violating (cone, ray) pair.
    NotConvex { cone: usize, ray: usize },
}

pub fn ampleness_class(fan: &Fan, c: &SupportVector) -> Result<Ampleness> {
    if c.len() != fan.num_rays() {
        return Err(GeometryError::SupportLength { expected: fan.num_rays(), got: c.len() });
    }
    let mut equalities = Vec::new();
    for (cone, members) in fan.max_cones.iter().enumerate() {
        let v = fan.cone_vertex(cone, c).ok_or(GeometryError::NotSmooth { cone })?;
        for ray in (0..fan.num_rays()).filter(|j| !members.contains(j)) {
            let slack = rational::dot(&fan.ray(ray), &v) + &c.0[ray];
            if slack.is_negative() {
                return Ok(Ampleness::NotConvex { cone, ray });
            }
            if slack.is_zero() {
                equalities.push((cone, ray));
            }
        }
    }
    Ok(if equalities.is_empty() { Ampleness::Ample } else { Ampleness::NefOnly { equalities } })
}
