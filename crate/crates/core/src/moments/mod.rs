//! Volumes, barycenters and exponentially weighted moments of polytopes.
//!
//! Unweighted moments are exact rationals summed over a [`SimplexMesh`].
//! The weighted ones, `Vol_V(P) = ∫_P e^{<V,p>} dp`, the tilted barycenter
//! `A_P(V)` and the tilted covariance, are floating point and go through the
//! divided-difference kernel in [`kernel`]. All simplex sums run in mesh
//! order with Neumaier compensation, so results are bit-reproducible.

pub mod kernel;
pub mod quadrature;

use num_traits::Zero;
use serde::Serialize;

use crate::rational::{self, QVec, Q};
use crate::toric::SimplexMesh;
use kernel::{exp_divided_difference, Estimate, MAX_EXPONENT};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MomentError {
    #[error("exponent {exponent} exceeds the overflow guard of {limit}")]
    Range { exponent: f64, limit: f64 },
    #[error("vector field has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("vector field has a non-finite component")]
    NonFinite,
    #[error("mesh is empty")]
    EmptyMesh,
}

pub type Result<T, E = MomentError> = std::result::Result<T, E>;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn volume(mesh: &SimplexMesh) -> Q {
    let total: Q = mesh.scaled_volumes().into_iter().sum();
    total / rational::factorial(mesh.dim)
}

/// Volume-weighted average of simplex centroids.
pub fn barycenter(mesh: &SimplexMesh) -> QVec {
    let weights = mesh.scaled_volumes();
    let total: Q = weights.iter().cloned().sum();
    let mut acc = vec![Q::zero(); mesh.dim];
    let n_vertices = rational::int(mesh.dim as i64 + 1);
    for (simplex, w) in mesh.simplices.iter().zip(&weights) {
        for (c, a) in acc.iter_mut().enumerate() {
            let s: Q = simplex.iter().map(|v| v[c].clone()).sum();
            *a += s * w / &n_vertices;
        }
    }
    acc.into_iter().map(|a| a / &total).collect()
}

/// A simplex mesh converted to floats once, with its exact barycenter used as
/// the exponent shift.
#[derive(Debug, Clone)]
pub struct FloatMesh {
    pub dim: usize,
    pub simplices: Vec<Vec<Vec<f64>>>,
    pub scaled_volumes: Vec<f64>,
    pub center: Vec<f64>,
}

impl From<&SimplexMesh> for FloatMesh {
    fn from(mesh: &SimplexMesh) -> Self {
        FloatMesh {
            dim: mesh.dim,
            simplices: mesh.simplices.iter().map(|s| s.iter().map(|v| rational::vec_to_f64(v)).collect()).collect(),
            scaled_volumes: mesh.scaled_volumes().iter().map(rational::to_f64).collect(),
            center: rational::vec_to_f64(&barycenter(mesh)),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_field(dim: usize, v: &[f64]) -> Result<()> {
    if v.len() != dim {
        return Err(MomentError::Dimension { expected: dim, got: v.len() });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(MomentError::NonFinite);
    }
    Ok(())
}

/// `∫_Δ e^{<V,x>} dx` for one simplex given by its `n + 1` vertices.
pub fn exp_integral_simplex(simplex: &[Vec<f64>], v: &[f64]) -> Result<f64> {
    check_field(simplex.len() - 1, v)?;
    let nodes: Vec<f64> = simplex.iter().map(|p| dot(v, p)).collect();
    if let Some(&exponent) = nodes.iter().find(|a| a.abs() > MAX_EXPONENT) {
        return Err(MomentError::Range { exponent, limit: MAX_EXPONENT });
    }
    Ok(kernel::scaled_volume_f64(simplex) * exp_divided_difference(&nodes).value)
}

/// Moments of the `e^{<V,p>}`-tilted uniform measure, with the exponent
/// pre-shifted by `<V, b(P)>`.
#[derive(Debug, Clone)]
pub struct Tilted {
    /// `log Vol_V(P)`
    pub log_volume: f64,
    /// `A_P(V)`
    pub mean: Vec<f64>,
    /// Covariance, present when requested.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// Relative error bound propagated from the kernel.
    pub rel_err: f64,
}

impl Tilted {
    pub fn volume(&self) -> f64 {
        self.log_volume.exp()
    }
}

pub fn tilted_moments(mesh: &FloatMesh, v: &[f64], with_covariance: bool) -> Result<Tilted> {
    check_field(mesh.dim, v)?;
    if mesh.simplices.is_empty() {
        return Err(MomentError::EmptyMesh);
    }
    let n = mesh.dim;
    let shift = dot(v, &mesh.center);
    let mut z = CompensatedSum::default();
    let mut z_err = 0.0;
    let mut first = vec![CompensatedSum::default(); n];
    let mut second = vec![CompensatedSum::default(); n * n];
    let mut first_err = 0.0;
    for (simplex, &jac) in mesh.simplices.iter().zip(&mesh.scaled_volumes) {
        let nodes: Vec<f64> = simplex.iter().map(|p| dot(v, p) - shift).collect();
        if let Some(&exponent) = nodes.iter().find(|a| a.abs() > MAX_EXPONENT) {
            return Err(MomentError::Range { exponent, limit: MAX_EXPONENT });
        }
        let Estimate { value, abs_err } = exp_divided_difference(&nodes);
        z.add(jac * value);
        z_err += jac * abs_err;
        let mut extended = nodes.clone();
        extended.push(0.0);
        // ∫ λ_j e^ℓ = jac · exp[nodes, a_j]
        let lambda: Vec<Estimate> = (0..=n)
            .map(|j| {
                extended[n + 1] = nodes[j];
                exp_divided_difference(&extended)
            })
            .collect();
        for (j, vertex) in simplex.iter().enumerate() {
            first_err += jac * lambda[j].abs_err * vertex.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for c in 0..n {
                first[c].add(jac * lambda[j].value * vertex[c]);
            }
        }
        if with_covariance {
            // ∫ λ_j λ_k e^ℓ = (1 + δ_jk) · jac · exp[nodes, a_j, a_k]
            let mut twice = nodes.clone();
            twice.extend([0.0, 0.0]);
            for j in 0..=n {
                for k in j..=n {
                    twice[n + 1] = nodes[j];
                    twice[n + 2] = nodes[k];
                    let factor = if j == k { 2.0 } else { 1.0 };
                    let w = jac * factor * exp_divided_difference(&twice).value;
                    for r in 0..n {
                        for c in 0..n {
                            let mut term = w * simplex[j][r] * simplex[k][c];
                            if j != k {
                                term += w * simplex[k][r] * simplex[j][c];
                            }
                            second[r * n + c].add(term);
                        }
                    }
                }
            }
        }
    }
    let total = z.value();
    let mean: Vec<f64> = first.iter().map(|f| f.value() / total).collect();
    let covariance = with_covariance.then(|| {
        let mut cov = vec![vec![0.0; n]; n];
        for r in 0..n {
            for c in 0..n {
                cov[r][c] = second[r * n + c].value() / total - mean[r] * mean[c];
            }
        }
        // Symmetrize exactly.
        for r in 0..n {
            for c in r + 1..n {
                let avg = 0.5 * (cov[r][c] + cov[c][r]);
                cov[r][c] = avg;
                cov[c][r] = avg;
            }
        }
        cov
    });
    let scale = mean.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let rel_err = z_err / total + first_err / (total * scale) + 8.0 * f64::EPSILON;
    Ok(Tilted { log_volume: shift + total.ln(), mean, covariance, rel_err })
}

/// `Vol_V(P) = ∫_P e^{<V,p>} dp`.
pub fn weighted_volume(mesh: &FloatMesh, v: &[f64]) -> Result<f64> {
    let t = tilted_moments(mesh, v, false)?;
    let value = t.volume();
    if !value.is_finite() {
        return Err(MomentError::Range { exponent: t.log_volume, limit: MAX_EXPONENT });
    }
    Ok(value)
}

/// `A_P(V) = Vol_V(P)^{-1} ∫_P p e^{<V,p>} dp`.
pub fn weighted_barycenter(mesh: &FloatMesh, v: &[f64]) -> Result<Vec<f64>> {
    Ok(tilted_moments(mesh, v, false)?.mean)
}

/// Covariance of the tilted measure; the Jacobian of `A_P` and the Hessian of
/// `log Vol_V(P)`.
pub fn weighted_covariance(mesh: &FloatMesh, v: &[f64]) -> Result<Vec<Vec<f64>>> {
    Ok(tilted_moments(mesh, v, true)?.covariance.expect("requested"))
}

/// Same moments by adaptive conical-product quadrature, simplex by simplex.
/// Returns the tilted moments and the largest observed relative change
/// between the final two orders.
pub fn tilted_moments_by_quadrature(mesh: &FloatMesh, v: &[f64], rel_tol: f64) -> Result<(Tilted, f64)> {
    check_field(mesh.dim, v)?;
    if mesh.simplices.is_empty() {
        return Err(MomentError::EmptyMesh);
    }
    let n = mesh.dim;
    let shift = dot(v, &mesh.center);
    let mut cache = quadrature::RuleCache::default();
    let width = 1 + n + n * n;
    let mut acc = vec![CompensatedSum::default(); width];
    let mut worst = 0.0f64;
    for simplex in &mesh.simplices {
        let (parts, change) = quadrature::adaptive(&mut cache, simplex, width, rel_tol, 2_000_000, |x, out| {
            let w = (dot(v, x) - shift).exp();
            out[0] = w;
            for r in 0..n {
                out[1 + r] = w * x[r];
                for c in 0..n {
                    out[1 + n + r * n + c] = w * x[r] * x[c];
                }
            }
        });
        worst = worst.max(change);
        for (a, p) in acc.iter_mut().zip(&parts) {
            a.add(*p);
        }
    }
    let total = acc[0].value();
    let mean: Vec<f64> = (0..n).map(|r| acc[1 + r].value() / total).collect();
    let covariance =
        (0..n).map(|r| (0..n).map(|c| acc[1 + n + r * n + c].value() / total - mean[r] * mean[c]).collect()).collect();
    Ok((Tilted { log_volume: shift + total.ln(), mean, covariance: Some(covariance), rel_err: worst }, worst))
}

/// Exact and weighted moments of one polytope for one vector field.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    #[serde(serialize_with = "rational::as_string::q")]
    pub volume: Q,
    #[serde(serialize_with = "rational::as_string::vec")]
    pub barycenter: QVec,
    pub vfield: Vec<f64>,
    pub weighted_volume: f64,
    pub weighted_barycenter: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub err_estimate: f64,
}

pub fn moment_report(mesh: &SimplexMesh, v: &[f64]) -> Result<MomentReport> {
    let float = FloatMesh::from(mesh);
    let t = tilted_moments(&float, v, true)?;
    let weighted_volume = t.volume();
    if !weighted_volume.is_finite() {
        return Err(MomentError::Range { exponent: t.log_volume, limit: MAX_EXPONENT });
    }
    Ok(MomentReport {
        volume: volume(mesh),
        barycenter: barycenter(mesh),
        vfield: v.to_vec(),
        weighted_volume,
        weighted_barycenter: t.mean,
        covariance: t.covariance.expect("requested"),
        err_estimate: t.rel_err,
    })
}
