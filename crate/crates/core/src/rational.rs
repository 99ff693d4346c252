//! Exact rational scalars and the small dense linear algebra the polytope code
//! needs (determinants, solves, ranks, null vectors) over `BigRational`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Exact rational scalar used for all combinatorial and affine work.
pub type Q = BigRational;

/// A point or direction with exact coordinates.
pub type QVec = Vec<Q>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"p"` or a finite decimal such as `"-0.125"`; all exact.
pub fn parse(s: &str) -> Result<Q, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| ParseRationalError::Malformed(s.into()))?;
        let q: BigInt = q.trim().parse().map_err(|_| ParseRationalError::Malformed(s.into()))?;
        if q.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.into()));
        }
        return Ok(Q::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let digits_ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !digits_ok(frac) || !digits_ok(whole_digits) {
            return Err(ParseRationalError::Malformed(s.into()));
        }
        let mantissa: BigInt =
            format!("{whole_digits}{frac}").parse().map_err(|_| ParseRationalError::Malformed(s.into()))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Q::new(mantissa, scale);
        return Ok(if negative { -value } else { value });
    }
    let p: BigInt = s.parse().map_err(|_| ParseRationalError::Malformed(s.into()))?;
    Ok(Q::from_integer(p))
}

/// The exact binary value of a finite float.
pub fn from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

pub fn to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Quotients of very large integers; fall back on a scaled division.
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn vec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn add(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> QVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[Q], s: &Q) -> QVec {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero_vec(a: &[Q]) -> bool {
    a.iter().all(Zero::is_zero)
}

pub fn factorial(n: usize) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * int(k))
}

/// Determinant by fraction-carrying Gaussian elimination.
pub fn det(rows: &[QVec]) -> Q {
    let n = rows.len();
    let mut m: Vec<QVec> = rows.to_vec();
    let mut sign = Q::one();
    let mut acc = Q::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            sign = -sign;
        }
        let p = m[col][col].clone();
        acc *= &p;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &p;
            for c in col..n {
                let delta = &f * &m[col][c];
                m[r][c] -= delta;
            }
        }
    }
    sign * acc
}

/// Reduced row echelon form in place; returns pivot columns.
fn rref(m: &mut [QVec]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[QVec]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve(a: &[QVec], b: &[Q]) -> Option<QVec> {
    let n = a.len();
    let mut m: Vec<QVec> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
        return None;
    }
    Some(m.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// A basis of the right null space `{x : a x = 0}`, with `dim` columns.
pub fn null_space(a: &[QVec], dim: usize) -> Vec<QVec> {
    if a.is_empty() {
        return (0..dim).map(|i| (0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    }
    let mut m = a.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..dim).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Q::zero(); dim];
            x[f] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -m[row][f].clone();
            }
            x
        })
        .collect()
}

/// Dimension of the affine hull of a point set (−1 for the empty set).
pub fn affine_dim(points: &[&QVec]) -> isize {
    let Some((first, rest)) = points.split_first() else {
        return -1;
    };
    let diffs: Vec<QVec> = rest.iter().map(|p| sub(p, first)).collect();
    rank(&diffs) as isize
}

pub fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| num_integer::gcd(g, x))
}

/// Display adapter printing a rational vector as `(a, b, c)`.
pub struct ShowVec<'a>(pub &'a [Q]);

impl fmt::Display for ShowVec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

pub fn abs(q: &Q) -> Q {
    q.abs()
}

/// Serde helpers writing rationals as `"p/q"` strings (integers as `"p"`).
pub mod as_string {
    use super::{QVec, Q};
    use serde::ser::{SerializeSeq, Serializer};

    pub fn q<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn vec<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn mat<S: Serializer>(m: &[QVec], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(m.len()))?;
        for row in m {
            seq.serialize_element(&row.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(v: &[i64]) -> QVec {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert_eq!(parse("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse("1.5").unwrap(), ratio(3, 2));
        assert!(matches!(parse("1/0"), Err(ParseRationalError::ZeroDenominator(_))));
        assert!(matches!(parse("x"), Err(ParseRationalError::Malformed(_))));
        assert!(matches!(parse(""), Err(ParseRationalError::Empty)));
    }

    #[test]
    fn determinant_and_solve() {
        let a = vec![qv(&[2, 1]), qv(&[1, 3])];
        assert_eq!(det(&a), int(5));
        let x = solve(&a, &qv(&[3, 5])).unwrap();
        assert_eq!(x, vec![ratio(4, 5), ratio(7, 5)]);
        let singular = vec![qv(&[1, 2]), qv(&[2, 4])];
        assert_eq!(det(&singular), Q::zero());
        assert!(solve(&singular, &qv(&[1, 1])).is_none());
        assert_eq!(rank(&singular), 1);
    }

    #[test]
    fn null_space_of_plane() {
        let a = vec![qv(&[1, 1, 1])];
        let ns = null_space(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(&a[0], v).is_zero());
        }
    }

    #[test]
    fn float_round_trip_is_exact() {
        let x = 0.1f64;
        let q = from_f64(x).unwrap();
        assert_eq!(to_f64(&q), x);
        assert_ne!(q, ratio(1, 10));
    }
}
