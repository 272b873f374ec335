//! Reactive-telegraph equation
//!
//! ```text
//! τ ρ_tt + (1 - τ + 2τρ) ρ_t = Δρ + ρ(1-ρ)
//! ```
//!
//! solved as the first-order system `ρ_t = w`,
//! `τ w_t = Δρ + ρ(1-ρ) - (1 - τ + 2τρ) w` with a kick-drift-kick step:
//! half kick on `w`, full drift of `ρ`, half kick with the damping taken at
//! the new time (a pointwise division, no linear solve).

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kinetic1d::{self, Grid1D, Nonlinearity};
use crate::quadrature::integrate;

/// Largest admissible CFL number `dt/(dx√τ)`.
pub const MAX_CFL: f64 = 0.5;

/// Cell-centred grid on `[-L, L]` or `[-L, L]²` with centres `(i - c)·dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelegraphGrid {
    pub dim: usize,
    pub n: usize,
    pub dx: f64,
}

impl TelegraphGrid {
    pub fn new(dim: usize, n: usize, dx: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return domain(format!("dimension must be 1 or 2, got {dim}"));
        }
        if n < 9 || n % 2 == 0 {
            return domain(format!("grid size must be odd and at least 9, got {n}"));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return domain(format!("cell size must be positive, got {dx}"));
        }
        Ok(TelegraphGrid { dim, n, dx })
    }

    /// Smallest odd grid covering `[-half_width, half_width]`.
    pub fn covering(dim: usize, half_width: f64, dx: f64) -> Result<Self> {
        let c = (half_width / dx).ceil().max(4.0) as usize;
        Self::new(dim, 2 * c + 1, dx)
    }

    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.dx
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Squared distance of cell `k` from the origin.
    pub fn r2(&self, k: usize) -> f64 {
        if self.dim == 1 {
            self.coord(k).powi(2)
        } else {
            self.coord(k % self.n).powi(2) + self.coord(k / self.n).powi(2)
        }
    }

    pub fn origin(&self) -> usize {
        let c = self.center();
        if self.dim == 1 {
            c
        } else {
            c * self.n + c
        }
    }

    /// `dt = cfl·dx·√τ`.
    pub fn time_step(&self, tau: f64, cfl: f64) -> f64 {
        cfl * self.dx * tau.sqrt()
    }
}

/// Second-order Laplacian with zero-gradient boundaries.
pub fn laplacian(grid: &TelegraphGrid, u: &[f64], out: &mut [f64]) {
    let n = grid.n;
    let h2 = 1.0 / (grid.dx * grid.dx);
    if grid.dim == 1 {
        for i in 0..n {
            let l = u[i.saturating_sub(1)];
            let r = u[(i + 1).min(n - 1)];
            out[i] = (l - 2.0 * u[i] + r) * h2;
        }
        return;
    }
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        let up = j.saturating_sub(1) * n;
        let down = (j + 1).min(n - 1) * n;
        let mid = j * n;
        for i in 0..n {
            let l = u[mid + i.saturating_sub(1)];
            let r = u[mid + (i + 1).min(n - 1)];
            row[i] = (l + r + u[up + i] + u[down + i] - 4.0 * u[mid + i]) * h2;
        }
    });
}

/// Damping coefficient in front of `ρ_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// `1 - τ + 2τρ`
    Full,
    /// A fixed coefficient.
    Frozen(f64),
}

/// Terms kept in the equation. The default is the full model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physics {
    pub reaction: bool,
    pub damping: Damping,
}

impl Default for Physics {
    fn default() -> Self {
        Physics { reaction: true, damping: Damping::Full }
    }
}

impl Physics {
    /// `τ ρ_tt = Δρ`.
    pub fn wave() -> Self {
        Physics { reaction: false, damping: Damping::Frozen(0.0) }
    }

    fn damping(&self, tau: f64, rho: f64) -> f64 {
        match self.damping {
            Damping::Full => 1.0 - tau + 2.0 * tau * rho,
            Damping::Frozen(d) => d,
        }
    }

    fn source(&self, rho: f64) -> f64 {
        if self.reaction {
            rho * (1.0 - rho)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphState {
    pub rho: Vec<f64>,
    pub rho_t: Vec<f64>,
    pub t: f64,
    pub tau: f64,
}

impl TelegraphState {
    /// `ρ = rho0`, `ρ_t = 0`.
    pub fn at_rest(rho0: Vec<f64>, tau: f64) -> Result<Self> {
        let w = vec![0.0; rho0.len()];
        Self::new(rho0, w, tau)
    }

    pub fn new(rho: Vec<f64>, rho_t: Vec<f64>, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("relaxation time must be positive, got {tau}"));
        }
        if rho.len() != rho_t.len() {
            return domain("rho and rho_t differ in length");
        }
        Ok(TelegraphState { rho, rho_t, t: 0.0, tau })
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One step of the full equation.
pub fn step(state: &mut TelegraphState, grid: &TelegraphGrid, dt: f64) -> Result<()> {
    step_with(state, grid, dt, &Physics::default())
}

pub fn step_with(state: &mut TelegraphState, grid: &TelegraphGrid, dt: f64, physics: &Physics) -> Result<()> {
    if state.rho.len() != grid.len() {
        return domain("state and grid sizes differ");
    }
    let limit = grid.time_step(state.tau, MAX_CFL);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let tau = state.tau;
    let h = 0.5 * dt / tau;
    let mut lap = vec![0.0; grid.len()];

    laplacian(grid, &state.rho, &mut lap);
    for ((w, &r), &l) in state.rho_t.iter_mut().zip(&state.rho).zip(&lap) {
        *w += h * (l + physics.source(r) - physics.damping(tau, r) * *w);
    }
    for (r, &w) in state.rho.iter_mut().zip(&state.rho_t) {
        *r += dt * w;
    }
    laplacian(grid, &state.rho, &mut lap);
    for (k, ((w, &r), &l)) in state.rho_t.iter_mut().zip(&state.rho).zip(&lap).enumerate() {
        let denom = 1.0 + h * physics.damping(tau, r);
        *w = (*w + h * (l + physics.source(r))) / denom;
        if !(denom > 0.0) || !w.is_finite() || !r.is_finite() {
            return Err(Error::NotFinite { field: "rho", index: k, t: state.t + dt });
        }
    }
    state.t += dt;
    Ok(())
}

/// Discrete energy `½τ|w|² + ½⟨ρ, -Δρ⟩ - (dt²/8τ)|Δρ|²` (cell-volume
/// weighted), conserved by the undamped step and non-increasing under
/// nonnegative frozen damping.
pub fn energy(state: &TelegraphState, grid: &TelegraphGrid, dt: f64) -> f64 {
    let mut lap = vec![0.0; grid.len()];
    laplacian(grid, &state.rho, &mut lap);
    let vol = grid.dx.powi(grid.dim as i32);
    let tau = state.tau;
    let mut e = 0.0;
    for k in 0..grid.len() {
        e += 0.5 * tau * state.rho_t[k].powi(2) - 0.5 * state.rho[k] * lap[k]
            - dt * dt / (8.0 * tau) * lap[k].powi(2);
    }
    e * vol
}

/// Initial bump `ε exp(-|x|²/δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub epsilon: f64,
    pub delta: f64,
}

impl GaussianBump {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return domain(format!("need 0 <= epsilon < 1 and 0 < delta < 1, got ({epsilon}, {delta})"));
        }
        Ok(GaussianBump { epsilon, delta })
    }

    /// `ε = δ^{5/4}`.
    pub fn proof_scaled(delta: f64) -> Result<Self> {
        Self::new(delta.powf(1.25), delta)
    }

    pub fn in_proof_regime(&self) -> bool {
        self.epsilon <= self.delta.powf(1.25) * (1.0 + 1e-12)
    }

    pub fn warning(&self) -> Option<String> {
        (!self.in_proof_regime()).then(|| {
            format!(
                "epsilon = {} exceeds delta^(5/4) = {}; outside the regime of the negativity argument",
                self.epsilon,
                self.delta.powf(1.25)
            )
        })
    }

    pub fn sample(&self, grid: &TelegraphGrid) -> Vec<f64> {
        (0..grid.len()).map(|k| self.epsilon * (-grid.r2(k) / self.delta).exp()).collect()
    }
}

/// Dawson's integral `e^{-x²} ∫₀ˣ e^{s²} ds`.
pub fn dawson(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let v = integrate(|s| (s * s - x * x).exp(), 0.0, x.abs(), 1e-15, 1e-13)?.value;
    Ok(v.copysign(x))
}

/// Value at the origin of `τ ρ_tt = Δρ` in the plane with data
/// `ε exp(-|x|²/δ)` at rest: `ε(1 - 2z D(z))`, `z = t/√(τδ)`.
pub fn wave_center_2d(bump: &GaussianBump, tau: f64, t: f64) -> Result<f64> {
    let z = t / (tau * bump.delta).sqrt();
    Ok(bump.epsilon * (1.0 - 2.0 * z * dawson(z)?))
}

/// Extremes of `ρ` over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaTrace {
    pub times: Vec<f64>,
    pub min_rho: Vec<f64>,
    pub max_rho: Vec<f64>,
}

impl ExtremaTrace {
    pub fn overall_min(&self) -> (f64, f64) {
        self.times.iter().zip(&self.min_rho).fold((f64::INFINITY, 0.0), |best, (&t, &m)| {
            if m < best.0 {
                (m, t)
            } else {
                best
            }
        })
    }

    pub fn overall_max(&self) -> f64 {
        self.max_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Steps to `t_end`, recording the extremes of `ρ` after every step and
/// calling `observe` as it goes.
pub fn run<O>(
    state: &mut TelegraphState,
    grid: &TelegraphGrid,
    dt: f64,
    t_end: f64,
    physics: &Physics,
    mut observe: O,
) -> Result<ExtremaTrace>
where
    O: FnMut(&TelegraphState),
{
    let mut trace = ExtremaTrace { times: vec![state.t], min_rho: vec![state.min_rho()], max_rho: vec![state.max_rho()] };
    observe(state);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        step_with(state, grid, dt, physics)?;
        trace.times.push(state.t);
        trace.min_rho.push(state.min_rho());
        trace.max_rho.push(state.max_rho());
        observe(state);
    }
    Ok(trace)
}

/// Resolution of a bump run: `dx = √δ / cells_per_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpResolution {
    pub cells_per_width: f64,
    pub cfl: f64,
}

impl Default for BumpResolution {
    fn default() -> Self {
        BumpResolution { cells_per_width: 16.0, cfl: 0.5 }
    }
}

impl BumpResolution {
    pub fn refined(self) -> Self {
        BumpResolution { cells_per_width: 2.0 * self.cells_per_width, ..self }
    }

    /// Grid holding `4√δ + t_end/√τ` plus a margin on each side.
    pub fn grid(&self, dim: usize, bump: &GaussianBump, tau: f64, t_end: f64) -> Result<TelegraphGrid> {
        let w = bump.delta.sqrt();
        let dx = w / self.cells_per_width;
        TelegraphGrid::covering(dim, 4.0 * w + t_end / tau.sqrt() + 0.5, dx)
    }
}

/// Outcome of a 2-D bump run.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpRecord {
    pub epsilon: f64,
    pub delta: f64,
    pub min_rho: f64,
    pub t_min: f64,
    /// Largest error of the wave-only reference run against its exact centre value.
    pub scheme_error: f64,
    /// `-10 · scheme_error`.
    pub threshold: f64,
    /// Longest run of consecutive steps with `min ρ` below the threshold.
    pub negative_steps: usize,
    pub n: usize,
    pub dx: f64,
    pub extrema: ExtremaTrace,
}

impl BumpRecord {
    pub fn is_negative(&self) -> bool {
        self.min_rho < self.threshold && self.negative_steps >= 10
    }
}

/// Runs the 2-D equation from a bump at rest, together with the wave-only
/// reference run on the same grid that calibrates the detection threshold.
pub fn bump_run_2d(bump: &GaussianBump, tau: f64, t_end: f64, res: &BumpResolution) -> Result<BumpRecord> {
    if !(t_end > 0.0) {
        return domain(format!("t_end must be positive, got {t_end}"));
    }
    let grid = res.grid(2, bump, tau, t_end)?;
    let dt = grid.time_step(tau, res.cfl);
    let o = grid.origin();

    let mut reference = TelegraphState::at_rest(bump.sample(&grid), tau)?;
    let mut scheme_error: f64 = 0.0;
    let mut failure = None;
    run(&mut reference, &grid, dt, t_end, &Physics::wave(), |s| {
        match wave_center_2d(bump, tau, s.t) {
            Ok(exact) => scheme_error = scheme_error.max((s.rho[o] - exact).abs()),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    let mut state = TelegraphState::at_rest(bump.sample(&grid), tau)?;
    let extrema = run(&mut state, &grid, dt, t_end, &Physics::default(), |_| {})?;
    let threshold = -10.0 * scheme_error;
    let (min_rho, t_min) = extrema.overall_min();
    let mut negative_steps = 0;
    let mut streak = 0;
    for &m in &extrema.min_rho {
        streak = if m < threshold { streak + 1 } else { 0 };
        negative_steps = negative_steps.max(streak);
    }
    Ok(BumpRecord {
        epsilon: bump.epsilon,
        delta: bump.delta,
        min_rho,
        t_min,
        scheme_error,
        threshold,
        negative_steps,
        n: grid.n,
        dx: grid.dx,
        extrema,
    })
}

/// All runs of a sweep and the index of the most negative one.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub records: Vec<BumpRecord>,
    pub best: usize,
}

impl SearchResult {
    pub fn best(&self) -> &BumpRecord {
        &self.records[self.best]
    }
}

/// Sweeps `(ε, δ)` pairs in parallel and returns the most negative run.
/// Fails when no run passes the detection rule.
pub fn negativity_search_2d(
    tau: f64,
    pairs: &[(f64, f64)],
    t_end: f64,
    res: &BumpResolution,
) -> Result<SearchResult> {
    if pairs.is_empty() {
        return domain("empty parameter sweep");
    }
    let bumps = pairs.iter().map(|&(e, d)| GaussianBump::new(e, d)).collect::<Result<Vec<_>>>()?;
    let records = bumps
        .par_iter()
        .map(|b| bump_run_2d(b, tau, t_end, res))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..records.len())
        .min_by(|&i, &j| records[i].min_rho.total_cmp(&records[j].min_rho))
        .unwrap_or(0);
    if !records.iter().any(BumpRecord::is_negative) {
        let r = &records[best];
        return Err(Error::Unresolved(format!(
            "no pair passed the negativity rule; most negative min rho = {} at (eps, delta) = ({}, {}), threshold {}, dx = {}, {} cells per side",
            r.min_rho, r.epsilon, r.delta, r.threshold, r.dx, r.n
        )));
    }
    Ok(SearchResult { records, best })
}

/// `[(δ^{5/4}, δ)]` for each `δ`.
pub fn proof_scaled_pairs(deltas: &[f64]) -> Vec<(f64, f64)> {
    deltas.iter().map(|&d| (d.powf(1.25), d)).collect()
}

/// Extremes of 1-D runs and the agreement with the kinetic solver.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    /// Extremes of `ρ` started at rest, `ρ_t(0) = 0`.
    pub min_rho: f64,
    pub max_rho: f64,
    /// Extremes of `ρ` started with `ρ_t(0) = ρ₀(1-ρ₀)`, the data of the
    /// kinetic system with `p⁺ = p⁻ = ρ₀`.
    pub matched_min: f64,
    pub matched_max: f64,
    /// L∞ distance at the final time between the matched run and the
    /// kinetic solver.
    pub kinetic_gap: f64,
    pub tolerance: f64,
}

/// Multiple of `dx` allowed between the telegraph and kinetic solutions.
pub const KINETIC_GAP_PER_DX: f64 = 0.5;

/// Runs `ρ₀` on the line at rest and with kinetic-matched `ρ_t(0)`,
/// recording the extremes of `ρ`, and cross-checks the matched run
/// against the kinetic system on the same cells.
pub fn bound_check_1d(rho0: &[f64], grid: &TelegraphGrid, tau: f64, t_end: f64, cfl: f64) -> Result<BoundCheck> {
    if grid.dim != 1 || rho0.len() != grid.n {
        return domain("bound check needs a 1-D grid matching the data");
    }
    if rho0.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
        return domain("initial density must lie in [0, 1]");
    }
    let dt = grid.time_step(tau, cfl);
    let mut state = TelegraphState::at_rest(rho0.to_vec(), tau)?;
    let ext = run(&mut state, grid, dt, t_end, &Physics::default(), |_| {})?;

    let half = grid.center() as f64 * grid.dx + 0.5 * grid.dx;
    let kgrid = Grid1D::for_tau(-half, half, grid.n, 1.0, tau)?;
    let t_match = (t_end / kgrid.dt).round() * kgrid.dt;
    let kin = kinetic1d::telegraph_via_kinetic(rho0, &kgrid, tau, t_match)?;
    let w0: Vec<f64> = rho0.iter().map(|&r| Nonlinearity::Logistic.rate(r)).collect();
    let mut matched = TelegraphState::new(rho0.to_vec(), w0, tau)?;
    let m = (t_match / dt).ceil().max(1.0);
    let matched_ext = run(&mut matched, grid, t_match / m, t_match, &Physics::default(), |_| {})?;
    let kinetic_gap = matched.rho.iter().zip(&kin.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let tolerance = KINETIC_GAP_PER_DX * grid.dx;
    if kinetic_gap > tolerance {
        return Err(Error::Bound(format!(
            "telegraph and kinetic solutions differ by {kinetic_gap} > {tolerance} at t = {t_match}"
        )));
    }
    Ok(BoundCheck {
        min_rho: ext.overall_min().0,
        max_rho: ext.overall_max(),
        matched_min: matched_ext.overall_min().0,
        matched_max: matched_ext.overall_max(),
        kinetic_gap,
        tolerance,
    })
}

/// Named initial densities in `[0, 1]` on a 1-D grid: two wide profiles,
/// two bumps, and the bumps `δ^{5/4} exp(-x²/δ)` of the 2-D sweep.
pub fn canned_profiles_1d(grid: &TelegraphGrid) -> Vec<(String, Vec<f64>)> {
    let xs: Vec<f64> = (0..grid.n).map(|i| grid.coord(i)).collect();
    let map = |f: &dyn Fn(f64) -> f64| xs.iter().map(|&x| f(x)).collect::<Vec<_>>();
    let mut out = vec![
        ("gaussian".to_string(), map(&|x| (-x * x).exp())),
        ("plateau".to_string(), map(&|x| 0.5 * ((x + 3.0).tanh() - (x - 3.0).tanh()))),
        (
            "two_bumps".to_string(),
            map(&|x| 0.8 * (-(x - 2.0).powi(2)).exp() + 0.6 * (-4.0 * (x + 2.5).powi(2)).exp()),
        ),
    ];
    for (eps, delta) in proof_scaled_pairs(&SWEEP_DELTAS) {
        out.push((format!("bump_delta_{delta}"), map(&|x| eps * (-x * x / delta).exp())));
    }
    out
}

/// Widths of the canned `(ε, δ)` sweep.
pub const SWEEP_DELTAS: [f64; 3] = [0.05, 0.1, 0.2];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equilibria_are_fixed() {
        for dim in [1, 2] {
            let g = TelegraphGrid::new(dim, 21, 0.1).unwrap();
            for v in [0.0, 1.0] {
                let mut s = TelegraphState::at_rest(vec![v; g.len()], 2.0).unwrap();
                let dt = g.time_step(2.0, 0.5);
                for _ in 0..20 {
                    step(&mut s, &g, dt).unwrap();
                }
                assert!(s.rho.iter().all(|&r| r == v));
                assert!(s.rho_t.iter().all(|&w| w == 0.0));
            }
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let g = TelegraphGrid::new(1, 21, 0.1).unwrap();
        let mut s = TelegraphState::at_rest(vec![0.5; 21], 1.0).unwrap();
        assert!(matches!(step(&mut s, &g, 0.06), Err(Error::Cfl { .. })));
        assert!(step(&mut s, &g, 0.05).is_ok());
    }

    #[test]
    fn laplacian_of_quadratic() {
        let g = TelegraphGrid::new(2, 11, 0.1).unwrap();
        let u: Vec<f64> = (0..g.len()).map(|k| g.r2(k)).collect();
        let mut out = vec![0.0; g.len()];
        laplacian(&g, &u, &mut out);
        let k = g.origin();
        assert_abs_diff_eq!(out[k], 4.0, epsilon = 1e-10);
    }

    #[test]
    fn dawson_values() {
        assert_abs_diff_eq!(dawson(1.0).unwrap(), 0.538_079_506_912_768_4, epsilon = 1e-13);
        assert_abs_diff_eq!(dawson(-0.5).unwrap(), -0.424_436_383_502_022_3, epsilon = 1e-13);
        assert_abs_diff_eq!(dawson(0.924_138_873_5).unwrap(), 0.541_044_224_5, epsilon = 1e-9);
    }

    #[test]
    fn bump_regime_flag() {
        assert!(GaussianBump::proof_scaled(0.1).unwrap().in_proof_regime());
        assert!(GaussianBump::new(0.5, 0.1).unwrap().warning().is_some());
        assert!(GaussianBump::new(1.5, 0.1).is_err());
    }
}
