//! Existence criteria for coupled Kähler–Einstein metrics and coupled
//! Kähler–Ricci solitons on smooth toric Fano manifolds, computed from
//! polytope data.
//!
//! * [`toric`]: fans, support numbers, exact polytopes and triangulations.
//! * [`moments`]: exact volumes/barycenters and exponentially weighted moments.
//! * [`stability`]: decompositions, the barycenter verdict, the soliton
//!   Newton solve and Donaldson–Futaki invariants of toric test configurations.
//! * [`ma`]: a one-dimensional solver for the coupled real Monge–Ampère
//!   continuity path.
//! * [`cli`]: problem documents, the built-in example registry and reports.

// `!(x > 0.0)` is used on purpose so that NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod ma;
pub mod moments;
pub mod rational;
pub mod stability;
pub mod toric;
