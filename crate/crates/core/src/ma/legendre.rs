use serde::Serialize;

use super::{MaError, Result};

/// Samples of `u(p) = sup_x (p x - f(x))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualPotential {
    pub p: Vec<f64>,
    pub u: Vec<f64>,
}

/// Discrete Legendre transform of samples `f` on the uniform grid `xs`,
/// evaluated at the nondecreasing slopes `ps`.
///
/// The maximizing node moves monotonically with `p`, so one pass suffices;
/// the maximum is then refined by the parabola through its neighbours.
pub fn legendre_dual(xs: &[f64], f: &[f64], ps: &[f64]) -> Result<DualPotential> {
    let n = xs.len();
    if n != f.len() || n < 3 {
        return Err(MaError::Length);
    }
    let lo = (f[1] - f[0]) / (xs[1] - xs[0]);
    let hi = (f[n - 1] - f[n - 2]) / (xs[n - 1] - xs[n - 2]);
    let mut u = Vec::with_capacity(ps.len());
    let mut j = 0;
    for &p in ps {
        if !(lo..=hi).contains(&p) {
            return Err(MaError::DomainMismatch { p, lo, hi });
        }
        let g = |k: usize| p * xs[k] - f[k];
        while j + 1 < n && g(j + 1) >= g(j) {
            j += 1;
        }
        let mut value = g(j);
        if j > 0 && j + 1 < n {
            let (l, c, r) = (g(j - 1), g(j), g(j + 1));
            let curvature = 2.0 * c - l - r;
            if curvature > 0.0 {
                value = c + (r - l) * (r - l) / (8.0 * curvature);
            }
        }
        u.push(value);
    }
    Ok(DualPotential { p: ps.to_vec(), u })
}
