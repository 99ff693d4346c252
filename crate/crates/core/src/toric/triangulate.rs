use std::collections::BTreeSet;

use num_traits::Signed;

use super::{GeometryError, Polytope, Result};
use crate::rational::{self, QVec, Q};

/// Simplices (each `dim + 1` exact vertices) covering a polytope without overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMesh {
    pub dim: usize,
    pub simplices: Vec<Vec<QVec>>,
}

impl SimplexMesh {
    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// `|det(v_1 - v_0, ..., v_n - v_0)|` for each simplex (n! times its volume).
    pub fn scaled_volumes(&self) -> Vec<Q> {
        self.simplices
            .iter()
            .map(|s| {
                let rows: Vec<QVec> = s[1..].iter().map(|v| rational::sub(v, &s[0])).collect();
                rational::det(&rows).abs()
            })
            .collect()
    }
}

/// Which vertex a face is coned from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ApexRule {
    #[default]
    LexMin,
    LexMax,
}

/// Pulling triangulation from the lexicographically smallest vertex.
pub fn triangulate(p: &Polytope) -> Result<SimplexMesh> {
    triangulate_with(p, ApexRule::LexMin)
}

/// Cone from the apex over every facet not containing it, triangulating the
/// facets recursively by the same rule.
pub fn triangulate_with(p: &Polytope, rule: ApexRule) -> Result<SimplexMesh> {
    let vertices = p.vertices();
    let refs: Vec<&QVec> = vertices.iter().collect();
    let affine_dim = rational::affine_dim(&refs);
    if affine_dim != p.dim() as isize {
        return Err(GeometryError::Degenerate { affine_dim, dim: p.dim() });
    }
    let facets = p.facets();
    let all: Vec<usize> = (0..vertices.len()).collect();
    let simplices = triangulate_face(&all, p.dim(), &facets, vertices, rule)
        .into_iter()
        .map(|s| s.into_iter().map(|i| vertices[i].clone()).collect())
        .collect();
    Ok(SimplexMesh { dim: p.dim(), simplices })
}

fn triangulate_face(
    face: &[usize],
    face_dim: usize,
    facets: &[Vec<usize>],
    vertices: &[QVec],
    rule: ApexRule,
) -> Vec<Vec<usize>> {
    let by_coords = |&&a: &&usize, &&b: &&usize| vertices[a].cmp(&vertices[b]);
    let apex = *match rule {
        ApexRule::LexMin => face.iter().min_by(by_coords),
        ApexRule::LexMax => face.iter().max_by(by_coords),
    }
    .expect("faces are nonempty");
    if face_dim == 0 {
        return vec![vec![apex]];
    }
    // Facets of the face are its intersections with facets of the polytope
    // that drop the dimension by exactly one.
    let subfaces: BTreeSet<Vec<usize>> = facets
        .iter()
        .map(|f| face.iter().copied().filter(|i| f.contains(i)).collect::<Vec<_>>())
        .filter(|g| g.len() < face.len() && !g.contains(&apex))
        .filter(|g| {
            let pts: Vec<&QVec> = g.iter().map(|&i| &vertices[i]).collect();
            rational::affine_dim(&pts) == face_dim as isize - 1
        })
        .collect();
    let mut out = Vec::new();
    for g in &subfaces {
        for mut s in triangulate_face(g, face_dim - 1, facets, vertices, rule) {
            s.insert(0, apex);
            out.push(s);
        }
    }
    out
}
