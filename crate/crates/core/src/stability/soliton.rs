use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::{Decomposition, Result, StabilityError};
use crate::moments::{self, Tilted};

/// `Σ_i A_{P_i}(V_i)`.
pub fn soliton_residual(d: &Decomposition, vs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if vs.len() != d.k() {
        return Err(StabilityError::FieldCount { expected: d.k(), got: vs.len() });
    }
    let mut total = vec![0.0; d.dim()];
    for (mesh, v) in d.float_meshes().iter().zip(vs) {
        let a = moments::weighted_barycenter(mesh, v)?;
        for (t, x) in total.iter_mut().zip(&a) {
            *t += x;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub start: Option<Vec<f64>>,
}

impl Default for SolitonOptions {
    fn default() -> Self {
        SolitonOptions { tol: 1e-10, max_iter: 50, start: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolitonSolution {
    pub v: Vec<f64>,
    pub residual_norm: f64,
    /// Number of gradient evaluations (the start counts as one).
    pub iterations: usize,
    /// Ratio of extreme Hessian eigenvalues at the returned iterate.
    pub hessian_condition: f64,
    pub per_polytope_a: Vec<Vec<f64>>,
}

struct Sample {
    objective: f64,
    gradient: Vec<f64>,
    hessian: DMatrix<f64>,
    per_polytope: Vec<Vec<f64>>,
}

fn sample(d: &Decomposition, v: &[f64]) -> Result<Sample> {
    let n = d.dim();
    let mut objective = 0.0;
    let mut gradient = vec![0.0; n];
    let mut hessian = DMatrix::zeros(n, n);
    let mut per_polytope = Vec::with_capacity(d.k());
    for mesh in d.float_meshes() {
        let Tilted { log_volume, mean, covariance, .. } = moments::tilted_moments(mesh, v, true)?;
        objective += log_volume;
        let cov = covariance.expect("requested");
        for r in 0..n {
            gradient[r] += mean[r];
            for c in 0..n {
                hessian[(r, c)] += cov[r][c];
            }
        }
        per_polytope.push(mean);
    }
    Ok(Sample { objective, gradient, hessian, per_polytope })
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn solution(v: Vec<f64>, s: &Sample, iterations: usize) -> SolitonSolution {
    let eig = SymmetricEigen::new(s.hessian.clone()).eigenvalues;
    let hessian_condition = eig.max() / eig.min();
    SolitonSolution {
        v,
        residual_norm: norm(&s.gradient),
        iterations,
        hessian_condition,
        per_polytope_a: s.per_polytope.clone(),
    }
}

const MAX_HALVINGS: usize = 60;

/// Damped Newton on the strictly convex `F(V) = Σ_i log Vol_V(P_i)`, whose
/// gradient is `Σ_i A_{P_i}(V)` and Hessian the summed tilted covariance.
/// Each step is halved until `F` decreases.
pub fn solve_soliton(d: &Decomposition, opts: &SolitonOptions) -> Result<SolitonSolution> {
    let n = d.dim();
    let mut v = opts.start.clone().unwrap_or_else(|| vec![0.0; n]);
    if v.len() != n {
        return Err(StabilityError::FieldDimension { expected: n, got: v.len() });
    }
    let mut current = sample(d, &v)?;
    let mut iterations = 1;
    loop {
        if norm(&current.gradient) <= opts.tol {
            return Ok(solution(v, &current, iterations));
        }
        if iterations >= opts.max_iter {
            return Err(StabilityError::NonConvergence(Box::new(solution(v, &current, iterations))));
        }
        let eig = SymmetricEigen::new(current.hessian.clone()).eigenvalues;
        if !(eig.min() > 0.0) {
            return Err(StabilityError::SingularHessian { min_eigenvalue: eig.min() });
        }
        let g = DVector::from_column_slice(&current.gradient);
        let step = current.hessian.clone().cholesky().expect("positive definite").solve(&-g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            if iterations >= opts.max_iter {
                break;
            }
            let trial: Vec<f64> = v.iter().zip(step.iter()).map(|(x, s)| x + alpha * s).collect();
            if let Ok(next) = sample(d, &trial) {
                iterations += 1;
                let slack = 4.0 * f64::EPSILON * current.objective.abs().max(1.0);
                let decreased = next.objective < current.objective
                    || (next.objective <= current.objective + slack && norm(&next.gradient) < norm(&current.gradient));
                if decreased {
                    accepted = Some((trial, next));
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((trial, next)) => {
                v = trial;
                current = next;
            }
            None => return Err(StabilityError::NonConvergence(Box::new(solution(v, &current, iterations)))),
        }
    }
}
