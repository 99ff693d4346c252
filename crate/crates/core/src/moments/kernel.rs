//! Divided differences of `exp`, the kernel behind every weighted moment.
//!
//! For a simplex `Δ` with vertices `v_j` and nodes `a_j = <V, v_j>`,
//! `∫_Δ e^{<V,x>} dx = n! Vol(Δ) · exp[a_0, ..., a_n]`. Repeating node `a_j`
//! once gives the barycentric first moment and repeating two nodes the second.

/// Nodes closer than this are evaluated by the symmetric-function series.
pub const CLUSTER_SPREAD: f64 = 0.25;

/// Largest node magnitude accepted before `exp` would overflow.
pub const MAX_EXPONENT: f64 = 700.0;

const SERIES_TERMS: usize = 40;

/// Divided difference with a first-order bound on its absolute rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

/// `exp[x_0..x_m]` for nodes of small spread via
/// `e^c Σ_k h_k(x - c) / (m + k)!`, with `h_k` the complete homogeneous
/// symmetric polynomials and `c` the mean node.
fn series(nodes: &[f64]) -> Estimate {
    let m = nodes.len() - 1;
    let c = nodes.iter().sum::<f64>() / nodes.len() as f64;
    let mut h = [0.0f64; SERIES_TERMS];
    h[0] = 1.0;
    for &x in nodes {
        let z = x - c;
        for k in 1..SERIES_TERMS {
            h[k] += z * h[k - 1];
        }
    }
    let radius = nodes.iter().map(|x| (x - c).abs()).fold(0.0, f64::max);
    // 1/m!
    let mut inv_fact = (1..=m).fold(1.0, |acc, k| acc / k as f64);
    // |h_k| / (m+k)! <= r^k / (m! k!); individual terms can vanish by symmetry
    let mut bound = inv_fact;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for (k, hk) in h.iter().enumerate() {
        if k > 0 {
            inv_fact /= (m + k) as f64;
            bound *= radius / k as f64;
        }
        let term = hk * inv_fact;
        sum += term;
        abs_sum += term.abs();
        if bound < 1e-20 * sum.abs() {
            break;
        }
    }
    let scale = c.exp();
    let value = scale * sum;
    Estimate { value, abs_err: 4.0 * f64::EPSILON * scale * abs_sum * (m + 2) as f64 }
}

/// `exp[x_0, ..., x_m]` for arbitrary (possibly repeated) nodes.
///
/// Nodes are sorted; each contiguous range is either summed by the series
/// (spread below [`CLUSTER_SPREAD`]) or built from the recurrence
/// `(f[x_{i+1}..x_j] - f[x_i..x_{j-1}]) / (x_j - x_i)`.
pub fn exp_divided_difference(nodes: &[f64]) -> Estimate {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let mut x = nodes.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    // table[i] holds f[x_i .. x_{i+len-1}] for the current len
    let mut table: Vec<Estimate> = x
        .iter()
        .map(|&xi| {
            let value = xi.exp();
            Estimate { value, abs_err: f64::EPSILON * value }
        })
        .collect();
    for len in 2..=n {
        let next: Vec<Estimate> = (0..=n - len)
            .map(|i| {
                let j = i + len - 1;
                let spread = x[j] - x[i];
                if spread < CLUSTER_SPREAD {
                    series(&x[i..=j])
                } else {
                    let hi = table[i + 1];
                    let lo = table[i];
                    let value = (hi.value - lo.value) / spread;
                    let abs_err = (hi.abs_err + lo.abs_err) / spread + 2.0 * f64::EPSILON * value.abs();
                    Estimate { value, abs_err }
                }
            })
            .collect();
        table = next;
    }
    table[0]
}

/// `n!`·volume of the simplex, i.e. `|det(v_1 - v_0, ..., v_n - v_0)|`.
pub fn scaled_volume_f64(simplex: &[Vec<f64>]) -> f64 {
    let n = simplex.len() - 1;
    let m = nalgebra::DMatrix::from_fn(n, n, |r, c| simplex[r + 1][c] - simplex[0][c]);
    m.determinant().abs()
}
