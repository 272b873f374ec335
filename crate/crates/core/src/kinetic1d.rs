//! Two-speed kinetic model on the line.
//!
//! ```text
//! p⁺_t + a p⁺_x = (p⁻ - p⁺)/(2τε) + F(ρ)/ε
//! p⁻_t - a p⁻_x = (p⁺ - p⁻)/(2τε) + F(ρ)/ε,    ρ = (p⁺ + p⁻)/2,  a = 1/√τ
//! ```
//!
//! with `F(ρ) = ρ(1-ρ)` or `ρ(1-ρ)₊`; `ε = 1` is the unscaled model. Each
//! step applies upwind transport, the exact decay of the flux mode
//! `j = (p⁺ - p⁻)/2`, then the exact logistic flow of `ρ`.

use crate::error::{domain, Error, Result};
use crate::fit::fit_line;

/// Threshold defining the edge of the support of `ρ`.
pub const SUPPORT_LEVEL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    /// `ρ(1-ρ)`
    Logistic,
    /// `ρ(1-ρ)₊`
    LogisticPlus,
}

impl Nonlinearity {
    pub fn rate(self, rho: f64) -> f64 {
        match self {
            Nonlinearity::Logistic => rho * (1.0 - rho),
            Nonlinearity::LogisticPlus => rho * (1.0 - rho).max(0.0),
        }
    }
}

/// Exact flow of `ρ' = F(ρ)` over a time `h`.
pub fn logistic_flow(rho: f64, h: f64, nonlinearity: Nonlinearity) -> f64 {
    if nonlinearity == Nonlinearity::LogisticPlus && rho >= 1.0 {
        return rho;
    }
    let g = h.exp_m1();
    rho * (1.0 + g) / (1.0 + rho * g)
}

/// A priori bound `M_τ` on the kinetic densities for data in `[0, 1]`.
pub fn upper_bound(tau: f64) -> f64 {
    if tau <= 1.0 {
        1.0
    } else {
        (1.0 + tau).powi(2) / (4.0 * tau)
    }
}

/// Uniform cell-centred grid with a transport-limited time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub dx: f64,
    pub dt: f64,
    pub cfl: f64,
}

impl Grid1D {
    /// `dt = cfl·dx/speed`.
    pub fn new(x_min: f64, x_max: f64, nx: usize, cfl: f64, speed: f64) -> Result<Self> {
        if nx < 8 {
            return domain(format!("need at least 8 cells, got {nx}"));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return domain(format!("invalid interval [{x_min}, {x_max}]"));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return domain(format!("CFL number must lie in (0, 1], got {cfl}"));
        }
        if !(speed > 0.0) || !speed.is_finite() {
            return domain(format!("transport speed must be positive, got {speed}"));
        }
        let dx = (x_max - x_min) / nx as f64;
        Ok(Grid1D { x_min, x_max, nx, dx, dt: cfl * dx / speed, cfl })
    }

    /// Grid for the kinetic model with relaxation time `tau`.
    pub fn for_tau(x_min: f64, x_max: f64, nx: usize, cfl: f64, tau: f64) -> Result<Self> {
        Self::new(x_min, x_max, nx, cfl, 1.0 / tau.sqrt())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticState1D {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub t: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl KineticState1D {
    /// Both velocity densities equal to `rho0`.
    pub fn from_density(rho0: &[f64], tau: f64, epsilon: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("relaxation time must be positive, got {tau}"));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return domain(format!("scaling parameter must lie in (0, 1], got {epsilon}"));
        }
        Ok(KineticState1D { p_plus: rho0.to_vec(), p_minus: rho0.to_vec(), t: 0.0, tau, epsilon })
    }

    /// `ρ = 1` on cells with centre `<= x_edge`, zero elsewhere.
    pub fn indicator(grid: &Grid1D, x_edge: f64, tau: f64, epsilon: f64) -> Result<Self> {
        let rho0: Vec<f64> = (0..grid.nx).map(|i| if grid.x(i) <= x_edge { 1.0 } else { 0.0 }).collect();
        Self::from_density(&rho0, tau, epsilon)
    }

    pub fn transport_speed(&self) -> f64 {
        1.0 / self.tau.sqrt()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.p_plus.iter().zip(&self.p_minus).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.p_plus.iter().chain(&self.p_minus).copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.p_plus.iter().chain(&self.p_minus).copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Advances `state` by one time step `grid.dt`.
pub fn step(state: &mut KineticState1D, grid: &Grid1D, nonlinearity: Nonlinearity) -> Result<()> {
    let nx = grid.nx;
    if state.p_plus.len() != nx || state.p_minus.len() != nx {
        return domain("state and grid sizes differ");
    }
    let speed = state.transport_speed();
    let limit = grid.dx / speed;
    if grid.dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt: grid.dt, limit });
    }
    let nu = speed * grid.dt / grid.dx;

    // Upwind transport with zero-gradient ghosts. At unit Courant number
    // upwinding is an exact shift; doing it as a copy keeps cells ahead of
    // the support exactly zero.
    let pp = &mut state.p_plus;
    let pm = &mut state.p_minus;
    if (nu - 1.0).abs() <= 1e-12 {
        pp.copy_within(0..nx - 1, 1);
        pm.copy_within(1..nx, 0);
    } else {
        for i in (1..nx).rev() {
            pp[i] -= nu * (pp[i] - pp[i - 1]);
        }
        for i in 0..nx - 1 {
            pm[i] += nu * (pm[i + 1] - pm[i]);
        }
    }

    let decay = (-grid.dt / (state.tau * state.epsilon)).exp();
    let h = grid.dt / state.epsilon;
    for i in 0..nx {
        let rho = 0.5 * (state.p_plus[i] + state.p_minus[i]);
        let j = 0.5 * (state.p_plus[i] - state.p_minus[i]) * decay;
        let rho_new = logistic_flow(rho, h, nonlinearity);
        state.p_plus[i] = rho_new + j;
        state.p_minus[i] = rho_new - j;
        if !(state.p_plus[i].is_finite() && state.p_minus[i].is_finite()) {
            return Err(Error::NotFinite { field: "p", index: i, t: state.t + grid.dt });
        }
    }
    state.t += grid.dt;
    Ok(())
}

/// Rightmost point where `rho` crosses `level` from above, linearly
/// interpolated between cell centres.
pub fn level_position(rho: &[f64], grid: &Grid1D, level: f64) -> Option<f64> {
    let i = rho.iter().rposition(|&r| r >= level)?;
    if i + 1 == rho.len() {
        return Some(grid.x(i));
    }
    let (r0, r1) = (rho[i], rho[i + 1]);
    let frac = if r0 > r1 { (r0 - level) / (r0 - r1) } else { 0.0 };
    Some(grid.x(i) + frac * grid.dx)
}

/// Right face of the rightmost cell with `ρ > SUPPORT_LEVEL`.
pub fn support_edge(rho: &[f64], grid: &Grid1D) -> Option<f64> {
    rho.iter().rposition(|&r| r > SUPPORT_LEVEL).map(|i| grid.x(i) + 0.5 * grid.dx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProfile {
    pub support_edge: f64,
    pub front_pos: f64,
    pub gap: f64,
}

/// Support edge, half-level front and the gap between them. Both default
/// to the left end of the grid when `ρ` has no such point.
pub fn tail_profile(state: &KineticState1D, grid: &Grid1D) -> TailProfile {
    let rho = state.rho();
    let support_edge = support_edge(&rho, grid).unwrap_or(grid.x_min);
    let front_pos = level_position(&rho, grid, 0.5).unwrap_or(grid.x_min);
    TailProfile { support_edge, front_pos, gap: support_edge - front_pos }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    pub support_edges: Vec<f64>,
    pub level: f64,
    /// Least-squares slope of the positions over the last half of the run.
    pub fitted_speed: f64,
    /// RMS residual of that fit.
    pub fit_residual: f64,
    /// Smallest and largest density seen in any cell at any step.
    pub min_value: f64,
    pub max_value: f64,
}

impl FrontTrace {
    pub fn gaps(&self) -> Vec<f64> {
        self.support_edges.iter().zip(&self.positions).map(|(s, f)| s - f).collect()
    }

    /// Least-squares slope of `support_edge - front` over the last half.
    pub fn gap_growth_rate(&self) -> f64 {
        let start = self.times.len() / 2;
        fit_line(&self.times[start..], &self.gaps()[start..]).map_or(f64::NAN, |f| f.0)
    }
}

/// Options for [`run_and_track`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    pub t_end: f64,
    pub level: f64,
    pub output_interval: f64,
    pub nonlinearity: Nonlinearity,
}

impl TrackOptions {
    pub fn new(t_end: f64) -> Self {
        TrackOptions { t_end, level: 0.5, output_interval: 0.25, nonlinearity: Nonlinearity::LogisticPlus }
    }
}

/// Integrates to `t_end`, recording the front every output interval.
pub fn run_and_track(state: &mut KineticState1D, grid: &Grid1D, opts: &TrackOptions) -> Result<FrontTrace> {
    run_and_track_with(state, grid, opts, |_| Ok(()))
}

/// As [`run_and_track`], calling `observe` at every recorded output.
pub fn run_and_track_with<O>(
    state: &mut KineticState1D,
    grid: &Grid1D,
    opts: &TrackOptions,
    mut observe: O,
) -> Result<FrontTrace>
where
    O: FnMut(&KineticState1D) -> Result<()>,
{
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return domain(format!("front level must lie in (0, 1), got {}", opts.level));
    }
    if !(opts.t_end > 0.0) || !(opts.output_interval > 0.0) {
        return domain("t_end and output interval must be positive");
    }
    let guard = 5.0 * state.tau.sqrt() * state.epsilon;
    let mut trace = FrontTrace {
        times: Vec::new(),
        positions: Vec::new(),
        support_edges: Vec::new(),
        level: opts.level,
        fitted_speed: f64::NAN,
        fit_residual: f64::NAN,
        min_value: state.min_value(),
        max_value: state.max_value(),
    };
    let mut record = |state: &KineticState1D, trace: &mut FrontTrace| -> Result<()> {
        let rho = state.rho();
        let front = level_position(&rho, grid, opts.level).unwrap_or(grid.x_min);
        if front > grid.x_max - guard {
            return Err(Error::DomainTooSmall(format!(
                "front at x = {front} is within {guard} of the right boundary at t = {}",
                state.t
            )));
        }
        trace.times.push(state.t);
        trace.positions.push(front);
        trace.support_edges.push(support_edge(&rho, grid).unwrap_or(grid.x_min));
        observe(state)
    };
    record(state, &mut trace)?;
    let steps = (opts.t_end / grid.dt).round() as usize;
    let every = ((opts.output_interval / grid.dt).round() as usize).max(1);
    for k in 1..=steps {
        step(state, grid, opts.nonlinearity)?;
        trace.min_value = trace.min_value.min(state.min_value());
        trace.max_value = trace.max_value.max(state.max_value());
        if k % every == 0 || k == steps {
            record(state, &mut trace)?;
        }
    }
    let start = trace.times.len() / 2;
    if let Some((slope, _, resid)) = fit_line(&trace.times[start..], &trace.positions[start..]) {
        trace.fitted_speed = slope;
        trace.fit_residual = resid;
    }
    Ok(trace)
}

/// Extremes of `ρ` over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphRun {
    pub rho: Vec<f64>,
    pub min_rho: f64,
    pub max_rho: f64,
}

/// Solves the reactive-telegraph equation on the line through the kinetic
/// system with `p⁺ = p⁻ = ρ₀` and logistic reaction, checking `0 <= ρ <= 2`.
pub fn telegraph_via_kinetic(rho0: &[f64], grid: &Grid1D, tau: f64, t_end: f64) -> Result<TelegraphRun> {
    const TOL: f64 = 1e-8;
    if rho0.len() != grid.nx {
        return domain("initial density and grid sizes differ");
    }
    if rho0.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return domain("initial density must lie in [0, 1]");
    }
    let mut state = KineticState1D::from_density(rho0, tau, 1.0)?;
    let mut min_rho = f64::INFINITY;
    let mut max_rho = f64::NEG_INFINITY;
    let steps = (t_end / grid.dt).round() as usize;
    for _ in 0..steps {
        step(&mut state, grid, Nonlinearity::Logistic)?;
        for (a, b) in state.p_plus.iter().zip(&state.p_minus) {
            let r = 0.5 * (a + b);
            min_rho = min_rho.min(r);
            max_rho = max_rho.max(r);
        }
        if min_rho < -TOL || max_rho > 2.0 + TOL {
            return Err(Error::Bound(format!(
                "rho left [0, 2] at t = {}: min {min_rho}, max {max_rho}",
                state.t
            )));
        }
    }
    let rho = state.rho();
    if steps == 0 {
        min_rho = rho.iter().copied().fold(f64::INFINITY, f64::min);
        max_rho = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(TelegraphRun { rho, min_rho, max_rho })
}
