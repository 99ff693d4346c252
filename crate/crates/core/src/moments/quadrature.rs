//! Conical-product (collapsed coordinate) Gauss–Jacobi rules on simplices.
//!
//! Independent of the divided-difference kernel; used to cross-check it and
//! as the brute-force oracle for weighted second moments.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

/// Node/weight pairs on `[0, 1]` for the weight `(1 - u)^alpha`.
#[derive(Debug, Clone)]
pub struct GaussJacobi {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussJacobi {
    /// Golub–Welsch on the Jacobi matrix of the `(alpha, 0)` Jacobi polynomials.
    pub fn new(points: usize, alpha: u32) -> Self {
        assert!(points > 0);
        let a = f64::from(alpha);
        let b = 0.0;
        let mut jacobi = DMatrix::<f64>::zeros(points, points);
        for k in 0..points {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            jacobi[(k, k)] = if k == 0 { (b - a) / (a + b + 2.0) } else { (b * b - a * a) / (s * (s + 2.0)) };
            if k + 1 < points {
                let k1 = kf + 1.0;
                let s1 = 2.0 * k1 + a + b;
                let off = (4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + a + b) / (s1 * s1 * (s1 + 1.0) * (s1 - 1.0))).sqrt();
                jacobi[(k, k + 1)] = off;
                jacobi[(k + 1, k)] = off;
            }
        }
        let eig = SymmetricEigen::new(jacobi);
        // mu_0 = ∫_{-1}^{1} (1-x)^alpha dx = 2^{alpha+1}/(alpha+1); map to [0,1].
        let mu0 = 2f64.powi(alpha as i32 + 1) / (a + 1.0);
        let to_unit = 2f64.powi(-(alpha as i32) - 1);
        let mut pairs: Vec<(f64, f64)> = (0..points)
            .map(|i| {
                let x = eig.eigenvalues[i];
                let v0 = eig.eigenvectors[(0, i)];
                ((1.0 + x) / 2.0, mu0 * v0 * v0 * to_unit)
            })
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        GaussJacobi { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
    }
}

/// Tensor rule on the reference simplex: points in barycentric form
/// `(t_1, ..., t_n)` with weights summing to `1/n!`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SimplexRule {
    pub fn new(dim: usize, points_per_axis: usize) -> Self {
        let rules: Vec<GaussJacobi> = (1..=dim).map(|k| GaussJacobi::new(points_per_axis, (dim - k) as u32)).collect();
        let mut points = vec![Vec::with_capacity(dim)];
        let mut weights = vec![1.0];
        // Collapsed coordinates: t_k = u_k · Π_{l<k} (1 - u_l).
        let mut remaining = vec![1.0];
        for rule in &rules {
            let mut np = Vec::with_capacity(points.len() * points_per_axis);
            let mut nw = Vec::with_capacity(np.capacity());
            let mut nr = Vec::with_capacity(np.capacity());
            for ((p, w), r) in points.iter().zip(&weights).zip(&remaining) {
                for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
                    let mut q = p.clone();
                    q.push(u * r);
                    np.push(q);
                    nw.push(w * wu);
                    nr.push(r * (1.0 - u));
                }
            }
            points = np;
            weights = nw;
            remaining = nr;
        }
        SimplexRule { dim, points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `∫_Δ g` over a concrete simplex, given its vertices.
    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, simplex: &[Vec<f64>], mut g: F) -> f64 {
        let n = self.dim;
        let jac = super::kernel::scaled_volume_f64(simplex);
        let mut x = vec![0.0; n];
        let mut sum = 0.0;
        for (t, w) in self.points.iter().zip(&self.weights) {
            for c in 0..n {
                x[c] = simplex[0][c] + (0..n).map(|k| t[k] * (simplex[k + 1][c] - simplex[0][c])).sum::<f64>();
            }
            sum += w * g(&x);
        }
        jac * sum
    }
}

/// Sequence of points-per-axis tried by the adaptive driver.
pub const ADAPTIVE_ORDERS: [usize; 9] = [4, 8, 12, 16, 24, 32, 48, 64, 96];

/// Cache of rules keyed by (dimension, points per axis).
#[derive(Debug, Default)]
pub struct RuleCache {
    rules: HashMap<(usize, usize), SimplexRule>,
}

impl RuleCache {
    pub fn get(&mut self, dim: usize, points: usize) -> &SimplexRule {
        self.rules.entry((dim, points)).or_insert_with(|| SimplexRule::new(dim, points))
    }
}

/// Raises the order until two successive estimates of the vector-valued
/// integral (`out_len` components) agree to `rel_tol`, measured against the
/// first component. Returns the estimate and the last observed change.
pub fn adaptive<F>(
    cache: &mut RuleCache,
    simplex: &[Vec<f64>],
    out_len: usize,
    rel_tol: f64,
    max_points: usize,
    mut g: F,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let dim = simplex.len() - 1;
    let jac = super::kernel::scaled_volume_f64(simplex);
    let mut previous: Option<Vec<f64>> = None;
    let mut change = f64::INFINITY;
    let mut buf = vec![0.0; out_len];
    let mut x = vec![0.0; dim];
    for &q in &ADAPTIVE_ORDERS {
        if previous.is_some() && q.pow(dim as u32) > max_points {
            break;
        }
        let rule = cache.get(dim, q);
        let mut acc = vec![0.0; out_len];
        for (t, w) in rule.points.iter().zip(&rule.weights) {
            for c in 0..dim {
                x[c] = simplex[0][c] + (0..dim).map(|k| t[k] * (simplex[k + 1][c] - simplex[0][c])).sum::<f64>();
            }
            g(&x, &mut buf);
            for (a, b) in acc.iter_mut().zip(&buf) {
                *a += w * b;
            }
        }
        for a in acc.iter_mut() {
            *a *= jac;
        }
        if let Some(prev) = &previous {
            let scale = acc[0].abs().max(f64::MIN_POSITIVE);
            change = acc.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            if change <= rel_tol {
                return (acc, change);
            }
        }
        previous = Some(acc);
    }
    (previous.unwrap_or_default(), change)
}
