//! One-dimensional coupled real Monge–Ampère continuity path
//!
//! `f_i'' e^{V_i f_i'} / Vol_{V_i}(P_i) = e^{-t Σ f - (1-t) Σ h}` on `[-R, R]`,
//! with `f_i'` mapping onto the interval `P_i`. Each step rebuilds every
//! slope by monotone rearrangement of the current density, blends with the
//! previous iterate and renormalizes the common constant so the density has
//! unit mass. Mass outside the box is modelled by the exponential tails that
//! follow from linear growth of the potentials.

mod legendre;

pub use legendre::{legendre_dual, DualPotential};

use serde::Serialize;

use crate::moments::{self, FloatMesh};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaError {
    #[error("grid step {step} exceeds the maximum of {max}")]
    GridTooCoarse { step: f64, max: f64 },
    #[error("grid [-{radius}, {radius}] with step {step} does not have 0 as a node")]
    GridMisaligned { radius: f64, step: f64 },
    #[error("intervals do not decompose [-1, 1]: {0}")]
    InvalidDecomposition(String),
    #[error("expected {expected} vector fields, got {got}")]
    FieldCount { expected: usize, got: usize },
    #[error("t schedule must be nondecreasing values in [0, 1] ending at 1")]
    Schedule,
    #[error("density does not decay on the {side} side of the box")]
    TailGrowth { side: Side },
    #[error("slope {p} outside the discrete slope range [{lo}, {hi}]")]
    DomainMismatch { p: f64, lo: f64, hi: f64 },
    #[error("potential samples and grid differ in length")]
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

pub type Result<T, E = MaError> = std::result::Result<T, E>;

pub const MAX_STEP: f64 = 0.05;

/// Uniform grid on `[-R, R]` with `0` as a node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub radius: f64,
    pub step: f64,
    #[serde(skip)]
    pub x: Vec<f64>,
}

impl Grid {
    pub fn new(radius: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || step > MAX_STEP {
            return Err(MaError::GridTooCoarse { step, max: MAX_STEP });
        }
        let half = (radius / step).round();
        if !(radius > 0.0) || ((half * step - radius).abs() > 1e-9 * radius.max(1.0)) {
            return Err(MaError::GridMisaligned { radius, step });
        }
        let half = half as i64;
        let x = (-half..=half).map(|j| j as f64 * step).collect();
        Ok(Grid { radius, step, x })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the node at `0`.
    pub fn center(&self) -> usize {
        self.x.len() / 2
    }
}

impl Default for Grid {
    fn default() -> Self {
        Grid::new(8.0, 0.004).expect("default grid is valid")
    }
}

/// `log((1/N) Σ_y e^{<y, x>})` over the vertices `y`, in log-sum-exp form.
pub fn reference_potential(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
    assert!(!vertices.is_empty());
    let e: Vec<f64> = vertices.iter().map(|y| y.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
    let top = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + (e.iter().map(|v| (v - top).exp()).sum::<f64>() / vertices.len() as f64).ln()
}

/// Gradient of [`reference_potential`]: the softmax-weighted vertex average.
pub fn reference_gradient(vertices: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = vertices.iter().map(|y| y.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
    let top = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().map(|v| (v - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut g = vec![0.0; x.len()];
    for (y, wy) in vertices.iter().zip(&w) {
        for (gc, yc) in g.iter_mut().zip(y) {
            *gc += wy * yc / total;
        }
    }
    g
}

/// `h`, `h'`, `h''` of the reference potential of `[a, b]`.
fn interval_reference(a: f64, b: f64, x: f64) -> (f64, f64, f64) {
    let h = reference_potential(&[vec![a], vec![b]], &[x]);
    // weight on the upper endpoint
    let sigma = 1.0 / (1.0 + ((a - b) * x).exp());
    (h, a + (b - a) * sigma, (b - a) * (b - a) * sigma * (1.0 - sigma))
}

/// The 1-D problem: intervals `P_i`, fields `V_i` and the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaProblem {
    pub intervals: Vec<(f64, f64)>,
    pub vs: Vec<f64>,
    pub grid: Grid,
}

impl MaProblem {
    pub fn new(intervals: Vec<(f64, f64)>, vs: Vec<f64>, grid: Grid) -> Result<Self> {
        if vs.len() != intervals.len() {
            return Err(MaError::FieldCount { expected: intervals.len(), got: vs.len() });
        }
        if intervals.is_empty() || intervals.iter().any(|&(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(MaError::InvalidDecomposition("every interval must be finite and nonempty".into()));
        }
        let lo: f64 = intervals.iter().map(|p| p.0).sum();
        let hi: f64 = intervals.iter().map(|p| p.1).sum();
        if (lo + 1.0).abs() > 1e-12 || (hi - 1.0).abs() > 1e-12 {
            return Err(MaError::InvalidDecomposition(format!("endpoints sum to [{lo}, {hi}]")));
        }
        Ok(MaProblem { intervals, vs, grid })
    }

    pub fn k(&self) -> usize {
        self.intervals.len()
    }

    /// `Vol_{V_i}(P_i)`.
    pub fn weighted_volume(&self, i: usize) -> f64 {
        let (a, b) = self.intervals[i];
        let v = self.vs[i];
        if v == 0.0 {
            b - a
        } else {
            // e^{va} (e^{v(b-a)} - 1) / v
            (v * a).exp() * (v * (b - a)).exp_m1() / v
        }
    }

    /// `G_i^{-1}(y)` for `G_i(p) = ∫_{a_i}^p e^{V_i s} ds`.
    fn inverse_g(&self, i: usize, y: f64) -> f64 {
        let (a, _) = self.intervals[i];
        let v = self.vs[i];
        if v == 0.0 {
            a + y
        } else {
            a + (v * y * (-v * a).exp()).ln_1p() / v
        }
    }

    /// `Σ_i A_{P_i}(V_i)` from the moments module.
    pub fn closed_form_residual(&self) -> f64 {
        self.intervals
            .iter()
            .zip(&self.vs)
            .map(|(&(a, b), &v)| {
                let mesh = FloatMesh {
                    dim: 1,
                    simplices: vec![vec![vec![a], vec![b]]],
                    scaled_volumes: vec![b - a],
                    center: vec![0.5 * (a + b)],
                };
                moments::weighted_barycenter(&mesh, &[v]).expect("finite field")[0]
            })
            .sum()
    }
}

/// Discretized potentials and diagnostics at one value of `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MAState {
    pub t: f64,
    #[serde(skip)]
    pub problem: MaProblem,
    pub f: Vec<Vec<f64>>,
    /// `f_i'` at the nodes.
    pub slopes: Vec<Vec<f64>>,
    /// `f_i''` at the nodes.
    pub curvature: Vec<Vec<f64>>,
    pub h_ref: Vec<Vec<f64>>,
    #[serde(skip)]
    pub h_slopes: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    /// `∫ rho` including the modelled tails beyond `±R`.
    pub mass: f64,
    pub tails: (f64, f64),
    pub m: f64,
    pub x_w: f64,
    pub update_norm: f64,
}

/// Cumulative integral from the left node, trapezoid with the endpoint
/// derivative correction applied cell by cell.
fn cumulative(step: f64, g: &[f64], dg: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    let mut carry = 0.0;
    out.push(0.0);
    for j in 1..g.len() {
        let cell = 0.5 * step * (g[j - 1] + g[j]) - step * step / 12.0 * (dg[j] - dg[j - 1]);
        // Kahan summation keeps long cumulative sums symmetric to round-off.
        let y = cell - carry;
        let t = acc + y;
        carry = (t - acc) - y;
        acc = t;
        out.push(acc);
    }
    out
}

impl MAState {
    /// Starting state `f_i = h_ref,i` at the given `t`.
    pub fn initial(problem: MaProblem, t: f64) -> Result<Self> {
        let intervals = problem.intervals.clone();
        Self::from_fn(problem, t, |i, x| interval_reference(intervals[i].0, intervals[i].1, x))
    }

    /// State from closed-form potentials `(f_i, f_i', f_i'')`, without any
    /// renormalization.
    pub fn from_fn<F: Fn(usize, f64) -> (f64, f64, f64)>(problem: MaProblem, t: f64, potential: F) -> Result<Self> {
        let k = problem.k();
        let mut f = Vec::with_capacity(k);
        let mut slopes = Vec::with_capacity(k);
        let mut curvature = Vec::with_capacity(k);
        let mut h_ref = Vec::with_capacity(k);
        let mut h_slopes = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = problem.intervals[i];
            let (mut fi, mut si, mut ci, mut hi, mut hs) = (vec![], vec![], vec![], vec![], vec![]);
            for &x in &problem.grid.x {
                let (v, d, dd) = potential(i, x);
                fi.push(v);
                si.push(d);
                ci.push(dd);
                let (h, hd, _) = interval_reference(a, b, x);
                hi.push(h);
                hs.push(hd);
            }
            f.push(fi);
            slopes.push(si);
            curvature.push(ci);
            h_ref.push(hi);
            h_slopes.push(hs);
        }
        let mut state = MAState {
            t,
            problem,
            f,
            slopes,
            curvature,
            h_ref,
            h_slopes,
            rho: vec![],
            mass: 0.0,
            tails: (0.0, 0.0),
            m: 0.0,
            x_w: 0.0,
            update_norm: f64::INFINITY,
        };
        state.refresh()?;
        Ok(state)
    }

    pub fn grid(&self) -> &Grid {
        &self.problem.grid
    }

    pub fn k(&self) -> usize {
        self.problem.k()
    }

    /// `Σ_i (t f_i + (1 - t) h_i)` at node `j`.
    fn w_at(&self, j: usize) -> f64 {
        (0..self.k()).map(|i| self.t * self.f[i][j] + (1.0 - self.t) * self.h_ref[i][j]).sum()
    }

    /// Derivative of `w` at node `j`, the decay rate of `rho`.
    fn kappa(&self, j: usize) -> f64 {
        (0..self.k()).map(|i| self.t * self.slopes[i][j] + (1.0 - self.t) * self.h_slopes[i][j]).sum()
    }

    /// Recomputes `rho`, the tails, the mass and the `w` diagnostics.
    fn refresh(&mut self) -> Result<()> {
        let n = self.grid().len();
        let w: Vec<f64> = (0..n).map(|j| self.w_at(j)).collect();
        self.rho = w.iter().map(|v| (-v).exp()).collect();
        let left = -self.kappa(0);
        let right = self.kappa(n - 1);
        if !(left > 0.0) {
            return Err(MaError::TailGrowth { side: Side::Left });
        }
        if !(right > 0.0) {
            return Err(MaError::TailGrowth { side: Side::Right });
        }
        self.tails = (self.rho[0] / left, self.rho[n - 1] / right);
        let drho: Vec<f64> = (0..n).map(|j| -self.rho[j] * self.kappa(j)).collect();
        let inner = *cumulative(self.grid().step, &self.rho, &drho).last().expect("grid nonempty");
        self.mass = self.tails.0 + inner + self.tails.1;
        let (jmin, &m) = w.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("grid nonempty");
        self.m = m;
        self.x_w = self.grid().x[jmin];
        Ok(())
    }

    /// Adds the common constant that makes the total mass one (`t > 0`).
    fn normalize_mass(&mut self) -> Result<()> {
        if self.t > 0.0 {
            let shift = self.mass.ln() / (self.t * self.k() as f64);
            for fi in &mut self.f {
                for v in fi.iter_mut() {
                    *v += shift;
                }
            }
            self.refresh()?;
        }
        Ok(())
    }

    /// Moves to a new `t`, keeping the potentials and renormalizing.
    pub fn with_t(mut self, t: f64) -> Result<Self> {
        self.t = t;
        self.refresh()?;
        self.normalize_mass()?;
        Ok(self)
    }

    /// `∫_{-R}^{R} f_i'' e^{V_i f_i'} dx / Vol_{V_i}(P_i)` by telescoping `G_i`,
    /// to compare with the share of `rho` inside the box.
    pub fn transport_mass(&self, i: usize) -> f64 {
        let (a, _) = self.problem.intervals[i];
        let v = self.problem.vs[i];
        let g = |p: f64| if v == 0.0 { p - a } else { ((v * p).exp() - (v * a).exp()) / v };
        let s = &self.slopes[i];
        (g(s[s.len() - 1]) - g(s[0])) / self.problem.weighted_volume(i)
    }

    /// Fraction of the mass that lies inside `[-R, R]`.
    pub fn inner_mass_fraction(&self) -> f64 {
        (self.mass - self.tails.0 - self.tails.1) / self.mass
    }
}

/// One relaxed rearrangement step at the state's `t`.
pub fn ma_step_1d(state: &MAState, relaxation: f64) -> Result<MAState> {
    let grid = state.grid();
    let n = grid.len();
    let center = grid.center();
    let drho: Vec<f64> = (0..n).map(|j| -state.rho[j] * state.kappa(j)).collect();
    let cum = cumulative(grid.step, &state.rho, &drho);
    let mass = state.mass;
    let mut next = state.clone();
    for i in 0..state.k() {
        let vol = state.problem.weighted_volume(i);
        let v = state.problem.vs[i];
        let (a, b) = state.problem.intervals[i];
        let mut slope = Vec::with_capacity(n);
        let mut curv = Vec::with_capacity(n);
        for j in 0..n {
            let phi = (state.tails.0 + cum[j]) / mass;
            let s = state.problem.inverse_g(i, vol * phi).clamp(a, b);
            assert!(s.is_finite(), "rearrangement produced a non-finite slope");
            slope.push(s);
            curv.push(vol * state.rho[j] / (mass * (v * s).exp()));
        }
        let raw = cumulative(grid.step, &slope, &curv);
        let pin = raw[center];
        for j in 0..n {
            let candidate = raw[j] - pin;
            next.f[i][j] = (1.0 - relaxation) * state.f[i][j] + relaxation * candidate;
            next.slopes[i][j] = (1.0 - relaxation) * state.slopes[i][j] + relaxation * slope[j];
            next.curvature[i][j] = (1.0 - relaxation) * state.curvature[i][j] + relaxation * curv[j];
        }
    }
    next.refresh()?;
    next.normalize_mass()?;
    next.update_norm =
        next.f.iter().zip(&state.f).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
    Ok(next)
}

/// `∫ (Σ f_i') e^{-Σ f_i} dx` over the line, tails included.
pub fn obstruction_residual(state: &MAState) -> f64 {
    let n = state.grid().len();
    let k = state.k();
    let sum = |arr: &Vec<Vec<f64>>, j: usize| (0..k).map(|i| arr[i][j]).sum::<f64>();
    let e: Vec<f64> = (0..n).map(|j| (-sum(&state.f, j)).exp()).collect();
    let g: Vec<f64> = (0..n).map(|j| sum(&state.slopes, j) * e[j]).collect();
    let dg: Vec<f64> = (0..n)
        .map(|j| {
            let s = sum(&state.slopes, j);
            (sum(&state.curvature, j) - s * s) * e[j]
        })
        .collect();
    let inner = *cumulative(state.grid().step, &g, &dg).last().expect("grid nonempty");
    // Beyond the box e^{-Σf} decays at the rate Σ f_i', so each tail of
    // (Σ f_i') e^{-Σf} integrates to ±e^{-Σf} at the boundary node.
    inner + e[n - 1] - e[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WDiagnostics {
    pub m: f64,
    pub x_w: f64,
    pub growth_eps: f64,
}

/// Minimum of `w`, its location, and the largest `ε` with
/// `w(x) >= ε |x - x_w| + m - 0.1` on the grid.
pub fn w_diagnostics(state: &MAState) -> WDiagnostics {
    let grid = state.grid();
    let growth_eps = (0..grid.len())
        .filter(|&j| grid.x[j] != state.x_w)
        .map(|j| (state.w_at(j) - state.m + 0.1) / (grid.x[j] - state.x_w).abs())
        .fold(f64::INFINITY, f64::min);
    WDiagnostics { m: state.m, x_w: state.x_w, growth_eps }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaOptions {
    pub t_schedule: Vec<f64>,
    pub tol: f64,
    /// Iteration cap per value of `t`.
    pub max_iter: usize,
    pub relaxation: f64,
    pub stall_window: usize,
    pub stall_ratio: f64,
}

pub const DEFAULT_T_SCHEDULE: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];

impl Default for MaOptions {
    fn default() -> Self {
        MaOptions {
            t_schedule: DEFAULT_T_SCHEDULE.to_vec(),
            tol: 1e-10,
            max_iter: 5000,
            relaxation: 0.5,
            stall_window: 50,
            stall_ratio: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstructionReason {
    /// `update_norm` fell by less than the stall ratio over the window.
    Stall,
    /// The minimizer of `w` left `[-R/2, R/2]` or the density stopped decaying.
    Escape,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Obstruction {
    pub t: f64,
    pub reason: ObstructionReason,
    pub iterations: usize,
    pub update_norm: f64,
    pub x_w: f64,
    /// `Σ_i A_{P_i}(V_i)` computed from the intervals.
    pub closed_form_residual: f64,
    /// The detection rule is numerical; the theorem concerns exact solutions.
    pub heuristic: bool,
    #[serde(skip)]
    pub last_state: Option<Box<MAState>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged(Box<MAState>),
    Obstructed(Box<Obstruction>),
}

/// Per-`t` record handed to the snapshot callback.
#[derive(Debug, Clone, Serialize)]
pub struct Snapshot<'a> {
    pub t: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grid: &'a [f64],
    pub f: &'a [Vec<f64>],
    pub rho: &'a [f64],
    pub mass: f64,
    pub m: f64,
    pub x_w: f64,
    pub update_norm: f64,
}

fn snapshot(state: &MAState, iterations: usize, converged: bool) -> Snapshot<'_> {
    Snapshot {
        t: state.t,
        iterations,
        converged,
        grid: &state.problem.grid.x,
        f: &state.f,
        rho: &state.rho,
        mass: state.mass,
        m: state.m,
        x_w: state.x_w,
        update_norm: state.update_norm,
    }
}

/// Warm-started sweep over `t_schedule`.
pub fn solve_continuity_1d(
    problem: MaProblem,
    opts: &MaOptions,
    mut on_snapshot: Option<&mut dyn FnMut(&Snapshot<'_>)>,
) -> Result<Outcome> {
    let schedule = &opts.t_schedule;
    let ordered = schedule.windows(2).all(|w| w[0] <= w[1]);
    if schedule.is_empty() || !ordered || schedule[0] < 0.0 || *schedule.last().expect("nonempty") != 1.0 {
        return Err(MaError::Schedule);
    }
    let residual = problem.closed_form_residual();
    let half_box = problem.grid.radius / 2.0;
    let obstructed = |t: f64, reason, iterations, state: Option<&MAState>| {
        Outcome::Obstructed(Box::new(Obstruction {
            t,
            reason,
            iterations,
            update_norm: state.map_or(f64::NAN, |s| s.update_norm),
            x_w: state.map_or(f64::NAN, |s| s.x_w),
            closed_form_residual: residual,
            heuristic: true,
            last_state: state.map(|s| Box::new(s.clone())),
        }))
    };
    let mut state = match MAState::initial(problem, schedule[0]).and_then(|s| s.with_t(schedule[0])) {
        Ok(s) => s,
        Err(MaError::TailGrowth { .. }) => return Ok(obstructed(schedule[0], ObstructionReason::Escape, 0, None)),
        Err(e) => return Err(e),
    };
    for &t in schedule {
        state = match state.clone().with_t(t) {
            Ok(s) => s,
            Err(MaError::TailGrowth { .. }) => return Ok(obstructed(t, ObstructionReason::Escape, 0, Some(&state))),
            Err(e) => return Err(e),
        };
        let mut history = Vec::with_capacity(opts.max_iter);
        let mut converged = false;
        for iter in 1..=opts.max_iter {
            state = match ma_step_1d(&state, opts.relaxation) {
                Ok(s) => s,
                Err(MaError::TailGrowth { .. }) => {
                    return Ok(obstructed(t, ObstructionReason::Escape, iter, Some(&state)));
                }
                Err(e) => return Err(e),
            };
            history.push(state.update_norm);
            if state.update_norm < opts.tol {
                converged = true;
                break;
            }
            if state.x_w.abs() > half_box {
                return Ok(obstructed(t, ObstructionReason::Escape, iter, Some(&state)));
            }
            if iter > opts.stall_window && state.update_norm > opts.stall_ratio * history[iter - 1 - opts.stall_window]
            {
                return Ok(obstructed(t, ObstructionReason::Stall, iter, Some(&state)));
            }
        }
        if let Some(cb) = on_snapshot.as_deref_mut() {
            cb(&snapshot(&state, history.len(), converged));
        }
        if !converged {
            return Ok(obstructed(t, ObstructionReason::MaxIter, history.len(), Some(&state)));
        }
    }
    Ok(Outcome::Converged(Box::new(state)))
}
