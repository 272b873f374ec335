//! Four-velocity kinetic model in the plane.
//!
//! ```text
//! p_t + a v·∇p = (ρ - p)/τ + R,    v ∈ {e₁, e₂, -e₁, -e₂},  ρ = mean of the four p,  a = √(2/τ)
//! ```
//!
//! Each step applies upwind transport to the four fields, the exact
//! relaxation towards `ρ`, then the exact flow of the reaction `R`.

use crate::error::{domain, Error, Result};
use crate::kinetic1d::{logistic_flow, Nonlinearity};

/// Reaction term of the four-velocity model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reaction {
    /// `ρ(1-ρ)` added to every field. Loses positivity for cone data.
    Logistic,
    /// `ρ(1-ρ)₊` added to every field.
    LogisticPlus,
    /// `p(1-p)` applied to each field separately.
    PerVelocity,
}

impl Reaction {
    pub fn as_str(self) -> &'static str {
        match self {
            Reaction::Logistic => "local",
            Reaction::LogisticPlus => "nonlocal-plus",
            Reaction::PerVelocity => "per-velocity",
        }
    }
}

/// `a = √(2/τ)`.
pub fn transport_speed(tau: f64) -> f64 {
    (2.0 / tau).sqrt()
}

/// Amplitude `4(1 - 3/τ)` of the cone data.
pub fn cone_amplitude(tau: f64) -> f64 {
    4.0 * (1.0 - 3.0 / tau)
}

/// Right-hand side `ρ/τ + ρ(1-ρ)` seen by the `e₂` field along its
/// characteristic while it vanishes.
pub fn probe_source(rho: f64, tau: f64) -> f64 {
    rho / tau + rho * (1.0 - rho)
}

/// Square grid of `n × n` cells with centres at `(i - c)·dx`, `c = (n-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub cfl: f64,
}

impl Grid2D {
    pub fn new(n: usize, dx: f64, cfl: f64, speed: f64) -> Result<Self> {
        if n < 9 || n % 2 == 0 {
            return domain(format!("grid size must be odd and at least 9, got {n}"));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return domain(format!("cell size must be positive, got {dx}"));
        }
        if !(cfl > 0.0 && cfl <= 1.0) {
            return domain(format!("CFL number must lie in (0, 1], got {cfl}"));
        }
        if !(speed > 0.0) || !speed.is_finite() {
            return domain(format!("transport speed must be positive, got {speed}"));
        }
        Ok(Grid2D { n, dx, dt: cfl * dx / speed, cfl })
    }

    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.center() as f64) * self.dx
    }

    /// Index of the cell whose centre is nearest to `x`, if inside.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let k = (x / self.dx).round() + self.center() as f64;
        (k >= 0.0 && k < self.n as f64).then_some(k as usize)
    }

    pub fn half_width(&self) -> f64 {
        (self.center() as f64 + 0.5) * self.dx
    }
}

/// Densities per velocity, row-major with index `j·n + i` for the cell at
/// `(coord(i), coord(j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKineticState2D {
    pub p_e1: Vec<f64>,
    pub p_e2: Vec<f64>,
    pub p_me1: Vec<f64>,
    pub p_me2: Vec<f64>,
    pub t: f64,
    pub tau: f64,
    pub a: f64,
}

impl DiscreteKineticState2D {
    pub fn uniform(grid: &Grid2D, value: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return domain(format!("relaxation time must be positive, got {tau}"));
        }
        let v = vec![value; grid.n * grid.n];
        Ok(DiscreteKineticState2D {
            p_e1: v.clone(),
            p_e2: v.clone(),
            p_me1: v.clone(),
            p_me2: v,
            t: 0.0,
            tau,
            a: transport_speed(tau),
        })
    }

    pub fn fields(&self) -> [&Vec<f64>; 4] {
        [&self.p_e1, &self.p_e2, &self.p_me1, &self.p_me2]
    }

    pub fn rho_at(&self, k: usize) -> f64 {
        0.25 * (self.p_e1[k] + self.p_e2[k] + self.p_me1[k] + self.p_me2[k])
    }

    pub fn rho(&self) -> Vec<f64> {
        (0..self.p_e1.len()).map(|k| self.rho_at(k)).collect()
    }

    /// Smallest value over all cells and velocities, with its flat index.
    pub fn min_value(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for f in self.fields() {
            for (k, &p) in f.iter().enumerate() {
                if p < best.0 {
                    best = (p, k);
                }
            }
        }
        best
    }
}

/// Cone data: `p(e₁) = A` on `|x₂| < -x₁`, `p(-e₂) = A` on `|x₁| < x₂`,
/// `p(-e₁) = A` on `|x₂| < x₁`, `p(e₂) = 0`, with `A = 4(1 - 3/τ)`.
pub fn init_cones(grid: &Grid2D, tau: f64) -> Result<DiscreteKineticState2D> {
    if !(tau > 3.0) || !tau.is_finite() {
        return domain(format!("cone data needs tau > 3, got {tau}"));
    }
    let amp = cone_amplitude(tau);
    let mut s = DiscreteKineticState2D::uniform(grid, 0.0, tau)?;
    let n = grid.n;
    for j in 0..n {
        let y = grid.coord(j);
        for i in 0..n {
            let x = grid.coord(i);
            let k = j * n + i;
            if y.abs() < -x {
                s.p_e1[k] = amp;
            }
            if x.abs() < y {
                s.p_me2[k] = amp;
            }
            if y.abs() < x {
                s.p_me1[k] = amp;
            }
        }
    }
    if let Some(k) = (0..n * n).find(|&k| !(0.0..=1.0).contains(&s.rho_at(k))) {
        return Err(Error::Bound(format!("initial rho = {} at cell {k} outside [0, 1]", s.rho_at(k))));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    PlusX,
    PlusY,
    MinusX,
    MinusY,
}

/// Upwind transport with zero-gradient inflow. Unit Courant number is
/// done as an exact shift.
fn transport(p: &mut [f64], n: usize, nu: f64, dir: Dir) {
    let exact = (nu - 1.0).abs() <= 1e-12;
    match dir {
        Dir::PlusX => {
            for row in p.chunks_exact_mut(n) {
                if exact {
                    row.copy_within(0..n - 1, 1);
                } else {
                    for i in (1..n).rev() {
                        row[i] -= nu * (row[i] - row[i - 1]);
                    }
                }
            }
        }
        Dir::MinusX => {
            for row in p.chunks_exact_mut(n) {
                if exact {
                    row.copy_within(1..n, 0);
                } else {
                    for i in 0..n - 1 {
                        row[i] += nu * (row[i + 1] - row[i]);
                    }
                }
            }
        }
        Dir::PlusY => {
            if exact {
                p.copy_within(0..(n - 1) * n, n);
            } else {
                for j in (1..n).rev() {
                    for i in 0..n {
                        p[j * n + i] -= nu * (p[j * n + i] - p[(j - 1) * n + i]);
                    }
                }
            }
        }
        Dir::MinusY => {
            if exact {
                p.copy_within(n..n * n, 0);
            } else {
                for j in 0..n - 1 {
                    for i in 0..n {
                        p[j * n + i] += nu * (p[(j + 1) * n + i] - p[j * n + i]);
                    }
                }
            }
        }
    }
}

/// Advances `state` by `grid.dt` with the given reaction.
pub fn step(state: &mut DiscreteKineticState2D, grid: &Grid2D, reaction: Reaction) -> Result<()> {
    let n = grid.n;
    if state.p_e1.len() != n * n
        || state.p_e2.len() != n * n
        || state.p_me1.len() != n * n
        || state.p_me2.len() != n * n
    {
        return domain("state and grid sizes differ");
    }
    let limit = grid.dx / state.a;
    if grid.dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt: grid.dt, limit });
    }
    let nu = state.a * grid.dt / grid.dx;
    {
        let DiscreteKineticState2D { p_e1, p_e2, p_me1, p_me2, .. } = state;
        rayon::join(
            || rayon::join(|| transport(p_e1, n, nu, Dir::PlusX), || transport(p_e2, n, nu, Dir::PlusY)),
            || rayon::join(|| transport(p_me1, n, nu, Dir::MinusX), || transport(p_me2, n, nu, Dir::MinusY)),
        );
    }

    let decay = (-grid.dt / state.tau).exp();
    let h = grid.dt;
    for k in 0..n * n {
        let rho = state.rho_at(k);
        let mut p = [state.p_e1[k], state.p_e2[k], state.p_me1[k], state.p_me2[k]];
        for v in p.iter_mut() {
            *v = rho + (*v - rho) * decay;
        }
        match reaction {
            Reaction::Logistic | Reaction::LogisticPlus => {
                let nl = if reaction == Reaction::Logistic {
                    Nonlinearity::Logistic
                } else {
                    Nonlinearity::LogisticPlus
                };
                let d = logistic_flow(rho, h, nl) - rho;
                for v in p.iter_mut() {
                    *v += d;
                }
            }
            Reaction::PerVelocity => {
                for v in p.iter_mut() {
                    *v = logistic_flow(*v, h, Nonlinearity::Logistic);
                }
            }
        }
        if let Some(bad) = p.iter().position(|v| !v.is_finite()) {
            let field = ["p_e1", "p_e2", "p_me1", "p_me2"][bad];
            return Err(Error::NotFinite { field, index: k, t: state.t + grid.dt });
        }
        state.p_e1[k] = p[0];
        state.p_e2[k] = p[1];
        state.p_me1[k] = p[2];
        state.p_me2[k] = p[3];
    }
    state.t += grid.dt;
    Ok(())
}

/// One step with reaction `ρ(1-ρ)`.
pub fn step_local(state: &mut DiscreteKineticState2D, grid: &Grid2D) -> Result<()> {
    step(state, grid, Reaction::Logistic)
}

/// One step with reaction `ρ(1-ρ)₊`.
pub fn step_nonlocal_plus(state: &mut DiscreteKineticState2D, grid: &Grid2D) -> Result<()> {
    step(state, grid, Reaction::LogisticPlus)
}

/// Setup of a cone collision run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub tau: f64,
    pub delta: f64,
    pub t_end: f64,
    pub dx: f64,
    pub cfl: f64,
    pub reaction: Reaction,
}

impl ProbeConfig {
    /// Defaults: `dx = δ/40`, unit Courant number, reaction `ρ(1-ρ)`.
    pub fn new(tau: f64, delta: f64, t_end: f64) -> Self {
        ProbeConfig { tau, delta, t_end, dx: delta / 40.0, cfl: 1.0, reaction: Reaction::Logistic }
    }

    /// Time at which the three cones first cover the moving probe.
    pub fn collision_time(&self) -> f64 {
        self.delta / (2.0 * transport_speed(self.tau))
    }

    /// Overlap density `3(1-ε)(1-3/τ)` expected at the probe, `ε = 0.1`.
    pub fn overlap_target(&self) -> f64 {
        3.0 * 0.9 * (1.0 - 3.0 / self.tau)
    }

    pub fn grid(&self) -> Result<Grid2D> {
        let a = transport_speed(self.tau);
        let half = 2.0 * (a * self.t_end + self.delta);
        let c = (half / self.dx).ceil() as usize;
        Grid2D::new(2 * c + 1, self.dx, self.cfl, a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    pub t: f64,
    pub p_e2: f64,
    pub rho: f64,
    pub global_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    /// Most negative `p(e₂)` seen at the moving probe `(aτ - δ)e₂`.
    pub min_value: f64,
    pub location: (f64, f64),
    pub time: f64,
    /// Longest run of consecutive steps with a negative probe value.
    pub negative_steps: usize,
    /// Probe minimum up to the collision time.
    pub pre_collision_min: f64,
    /// Largest probe density after the collision time.
    pub max_overlap_rho: f64,
    /// Minimum over all cells and velocities over the whole run.
    pub global_min: f64,
    pub global_min_location: (f64, f64),
    pub global_min_time: f64,
    pub trace: Vec<ProbeSample>,
    pub grid: Grid2D,
    pub state: DiscreteKineticState2D,
}

/// Runs the cone collision and follows `p(e₂)` along `(a t - δ)e₂`.
pub fn negativity_probe(cfg: &ProbeConfig) -> Result<ProbeResult> {
    if !(cfg.tau > 4.0) || !cfg.tau.is_finite() {
        return domain(format!("negativity probe needs tau > 4, got {}", cfg.tau));
    }
    if !(cfg.delta > 0.0) || !(cfg.t_end > 0.0) {
        return domain("delta and t_end must be positive");
    }
    let m = (cfg.delta / cfg.dx).round();
    if m < 1.0 || (m * cfg.dx - cfg.delta).abs() > 1e-9 * cfg.delta {
        return domain(format!("delta = {} is not a multiple of dx = {}", cfg.delta, cfg.dx));
    }
    let grid = cfg.grid()?;
    let mut state = init_cones(&grid, cfg.tau)?;
    let n = grid.n;
    let ic = grid.center();
    let t_c = cfg.collision_time();
    let coords = |k: usize| (grid.coord(k % n), grid.coord(k / n));

    let probe = |state: &DiscreteKineticState2D| -> Result<(usize, ProbeSample)> {
        let y = state.a * state.t - cfg.delta;
        let j = grid.index_of(y).ok_or_else(|| {
            Error::DomainTooSmall(format!("probe at y = {y} left the grid at t = {}", state.t))
        })?;
        let k = j * n + ic;
        let global_min = state.min_value().0;
        Ok((k, ProbeSample { t: state.t, p_e2: state.p_e2[k], rho: state.rho_at(k), global_min }))
    };

    let (k0, s0) = probe(&state)?;
    let mut res = ProbeResult {
        min_value: s0.p_e2,
        location: coords(k0),
        time: 0.0,
        negative_steps: 0,
        pre_collision_min: s0.p_e2,
        max_overlap_rho: f64::NEG_INFINITY,
        global_min: s0.global_min,
        global_min_location: coords(state.min_value().1),
        global_min_time: 0.0,
        trace: vec![s0],
        grid,
        state: state.clone(),
    };
    let steps = (cfg.t_end / grid.dt).round() as usize;
    let mut run = 0usize;
    for _ in 0..steps {
        step(&mut state, &grid, cfg.reaction)?;
        let (k, s) = probe(&state)?;
        if s.p_e2 < res.min_value {
            res.min_value = s.p_e2;
            res.location = coords(k);
            res.time = s.t;
        }
        run = if s.p_e2 < 0.0 { run + 1 } else { 0 };
        res.negative_steps = res.negative_steps.max(run);
        if s.t <= t_c {
            res.pre_collision_min = res.pre_collision_min.min(s.p_e2);
        } else {
            res.max_overlap_rho = res.max_overlap_rho.max(s.rho);
        }
        if s.global_min < res.global_min {
            res.global_min = s.global_min;
            res.global_min_location = coords(state.min_value().1);
            res.global_min_time = s.t;
        }
        res.trace.push(s);
    }
    if cfg.t_end > t_c && res.min_value >= 0.0 && res.max_overlap_rho < cfg.overlap_target() {
        return Err(Error::Unresolved(format!(
            "probe density peaked at {} below the overlap level {} (dx = {}, t_end = {}); refine the grid or extend the run",
            res.max_overlap_rho,
            cfg.overlap_target(),
            cfg.dx,
            cfg.t_end
        )));
    }
    res.state = state;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_grid(tau: f64) -> Grid2D {
        Grid2D::new(41, 0.05, 1.0, transport_speed(tau)).unwrap()
    }

    #[test]
    fn uniform_equilibria_are_fixed() {
        for reaction in [Reaction::Logistic, Reaction::LogisticPlus, Reaction::PerVelocity] {
            for v in [0.0, 1.0] {
                let g = small_grid(2.0);
                let mut s = DiscreteKineticState2D::uniform(&g, v, 2.0).unwrap();
                for _ in 0..10 {
                    step(&mut s, &g, reaction).unwrap();
                }
                assert!(s.fields().iter().all(|f| f.iter().all(|&p| p == v)));
            }
        }
    }

    #[test]
    fn cone_data() {
        assert!(init_cones(&small_grid(8.0), 3.0).is_err());
        let g = small_grid(8.0);
        let s = init_cones(&g, 8.0).unwrap();
        assert_abs_diff_eq!(cone_amplitude(8.0), 2.5);
        let at = |x: f64, y: f64| g.index_of(y).unwrap() * g.n + g.index_of(x).unwrap();
        assert_abs_diff_eq!(s.rho_at(at(-0.5, 0.0)), 0.625);
        assert_abs_diff_eq!(s.rho_at(at(0.0, -0.5)), 0.0);
        assert!(s.p_e2.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn cone_interior_is_quasi_stationary() {
        let tau = 8.0;
        let g = small_grid(tau);
        let mut s = init_cones(&g, tau).unwrap();
        step_local(&mut s, &g).unwrap();
        let k = g.index_of(0.0).unwrap() * g.n + g.index_of(-0.6).unwrap();
        let dt = g.dt;
        assert!((s.p_e1[k] - 2.5).abs() < dt * dt, "{} {}", s.p_e1[k], dt);
    }

    #[test]
    fn probe_source_decreases_past_threshold() {
        for tau in [1.5, 4.0, 8.0, 20.0] {
            let start = (tau + 1.0) / (2.0 * tau);
            let mut prev = probe_source(start, tau);
            for k in 1..200 {
                let r = start + 0.01 * k as f64;
                let cur = probe_source(r, tau);
                assert!(cur < prev);
                prev = cur;
            }
        }
    }

    #[test]
    fn delta_must_sit_on_the_grid() {
        let mut cfg = ProbeConfig::new(8.0, 0.2, 0.3);
        cfg.dx = 0.03;
        assert!(negativity_probe(&cfg).is_err());
        assert!(negativity_probe(&ProbeConfig::new(4.0, 0.2, 0.3)).is_err());
    }
}
