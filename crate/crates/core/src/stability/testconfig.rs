use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{sum_barycenter, Decomposition, Result, StabilityError};
use crate::moments;
use crate::rational::{self, as_string, QVec, Q};
use crate::toric::{polytope_from_halfspaces, triangulate, Halfspace, Polytope, Provenance};

/// Donaldson–Futaki invariant of the product test configuration induced by a
/// toric vector field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfReport {
    #[serde(serialize_with = "as_string::vec")]
    pub v: QVec,
    #[serde(serialize_with = "as_string::vec")]
    pub barycenter_sum: QVec,
    #[serde(serialize_with = "as_string::q")]
    pub df_value: Q,
    pub destabilizing: bool,
}

/// `DF = <V, Σ_i b(P_i)>`.
pub fn df_invariant(d: &Decomposition, v: &[Q]) -> Result<DfReport> {
    if v.len() != d.dim() {
        return Err(StabilityError::FieldDimension { expected: d.dim(), got: v.len() });
    }
    let barycenter_sum = sum_barycenter(d);
    let df_value = rational::dot(v, &barycenter_sum);
    Ok(DfReport { v: v.to_vec(), destabilizing: df_value.is_negative(), barycenter_sum, df_value })
}

/// `-Σ b(P_i)` when the sum is nonzero; its DF value is `-|Σb|²`.
pub fn destabilizer(d: &Decomposition) -> Option<QVec> {
    let sum = sum_barycenter(d);
    (!rational::is_zero_vec(&sum)).then(|| sum.iter().map(|x| -x).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftedConfig {
    #[serde(skip)]
    pub base: Polytope,
    #[serde(serialize_with = "as_string::vec")]
    pub v: QVec,
    #[serde(serialize_with = "as_string::q")]
    pub cap: Q,
    #[serde(skip)]
    pub lifted: Polytope,
    /// Volume of the lifted polytope from its own triangulation.
    #[serde(serialize_with = "as_string::q")]
    pub lifted_volume: Q,
    /// `Vol(P) (C + <V, b(P)>)`.
    #[serde(serialize_with = "as_string::q")]
    pub predicted_volume: Q,
    pub identity_holds: bool,
}

/// `{(p, s) : p ∈ P, -<V, p> <= s <= C}` in dimension `n + 1`, with the
/// lifted volume checked against `Vol(P) (C + <V, b(P)>)`.
pub fn lifted_config(base: &Polytope, v: &[Q], cap: Q) -> Result<LiftedConfig> {
    let n = base.dim();
    if v.len() != n {
        return Err(StabilityError::FieldDimension { expected: n, got: v.len() });
    }
    let floor = base.vertices().iter().map(|p| -rational::dot(v, p)).max().expect("polytope has vertices");
    // At equality the slab pinches only along a face of P.
    if cap < floor || (cap == floor && rational::is_zero_vec(v)) {
        return Err(StabilityError::DegenerateLift { cap: cap.to_string(), floor: floor.to_string() });
    }
    let mut halfspaces: Vec<Halfspace> = base
        .halfspaces()
        .iter()
        .map(|h| {
            let mut normal = h.normal.clone();
            normal.push(Q::zero());
            Halfspace::new(normal, h.offset.clone())
        })
        .collect();
    let mut bottom = v.to_vec();
    bottom.push(rational::int(1));
    halfspaces.push(Halfspace::new(bottom, Q::zero()));
    let mut top = vec![Q::zero(); n];
    top.push(rational::int(-1));
    halfspaces.push(Halfspace::new(top, cap.clone()));
    let lifted = polytope_from_halfspaces(n + 1, halfspaces)?.with_provenance(Provenance::Lifted);
    let lifted_volume = moments::volume(&triangulate(&lifted)?);
    let base_mesh = triangulate(base)?;
    let predicted_volume = moments::volume(&base_mesh) * (&cap + rational::dot(v, &moments::barycenter(&base_mesh)));
    Ok(LiftedConfig {
        base: base.clone(),
        v: v.to_vec(),
        cap,
        identity_holds: lifted_volume == predicted_volume,
        lifted,
        lifted_volume,
        predicted_volume,
    })
}
