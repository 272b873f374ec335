//! Subcommands: flags, validation and the runs themselves.
//!
//! Every subcommand resolves its flags into a plan in `validate`, which
//! checks all module preconditions without allocating simulation state;
//! `run` then produces tables, checks and a JSON summary.

use clap::{Args, Subcommand, ValueEnum};
use kinfront::discrete2d::{self, ProbeConfig, Reaction};
use kinfront::hamiltonian::{hamiltonian_radial, hydro_limit_residual, ModelParams};
use kinfront::kinetic1d::{self, Grid1D, KineticState1D, Nonlinearity, TrackOptions};
use kinfront::speed::{closed_form_speed, speed};
use kinfront::sphere::{phi, phi_power};
use kinfront::telegraph::{self, BumpResolution, GaussianBump, Physics, TelegraphState};
use kinfront::{Extended, SphereDim};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{config_error, ConfigError, Globals};
use crate::criteria::{self, is_known_deviation, Status, SuiteOptions};
use crate::output::Check;
use crate::row;
use crate::table::Table;

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Sphere averages Φ(s) and ⨍(s + v₁)^-μ.
    Integrals(IntegralsArgs),
    /// H(p) along a ray.
    Hamiltonian(HamiltonianArgs),
    /// Front speed c against transport speed a.
    Speed(SpeedArgs),
    /// 1-D two-speed kinetic front run.
    #[command(name = "simulate-1d")]
    Simulate1d(Simulate1dArgs),
    /// Four-velocity cone collision run.
    #[command(name = "simulate-2d-discrete")]
    Simulate2dDiscrete(Simulate2dArgs),
    /// Reactive-telegraph run from a Gaussian bump at rest.
    SimulateTelegraph(TelegraphArgs),
    /// Residual |H(p) + |p|² + 1| as τ -> 0.
    HydroLimit(HydroArgs),
    /// Every acceptance criterion.
    ReproduceAll(ReproduceArgs),
}

impl Command {
    pub const NAMES: [&'static str; 8] = [
        "integrals",
        "hamiltonian",
        "speed",
        "simulate-1d",
        "simulate-2d-discrete",
        "simulate-telegraph",
        "hydro-limit",
        "reproduce-all",
    ];

    pub fn name(&self) -> &'static str {
        let i = match self {
            Command::Integrals(_) => 0,
            Command::Hamiltonian(_) => 1,
            Command::Speed(_) => 2,
            Command::Simulate1d(_) => 3,
            Command::Simulate2dDiscrete(_) => 4,
            Command::SimulateTelegraph(_) => 5,
            Command::HydroLimit(_) => 6,
            Command::ReproduceAll(_) => 7,
        };
        Self::NAMES[i]
    }
}

/// What a run hands back for writing.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub results: Value,
}

impl Outcome {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

/// A validated subcommand, ready to run.
pub trait Plan {
    /// Echo of the resolved parameters for the manifest.
    fn echo(&self) -> Value;
    fn run(&self, globals: &Globals, progress: &mut dyn FnMut(&str)) -> Result<Outcome, String>;
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn cfg<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, ConfigError> {
    r.map_err(|e| ConfigError(e.to_string()))
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        config_error(format!("--{name} must be positive and finite, got {v}"))
    }
}

fn in_unit(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        config_error(format!("--{name} must lie in (0, 1], got {v}"))
    }
}

fn required<T: Copy>(name: &str, v: Option<T>) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError(format!("--{name} is required")))
}

// integrals -----------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct IntegralsArgs {
    /// Sphere dimension n (integration over S^{n-1}).
    #[arg(long)]
    pub n: Option<u32>,
    /// Arguments s >= 1, comma separated.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub s: Option<Vec<f64>>,
    /// Exponent μ > 0.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
}

struct IntegralsPlan {
    n: SphereDim,
    s: Vec<f64>,
    mu: f64,
}

impl IntegralsArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let n = cfg(SphereDim::new(required("n", self.n)?))?;
        let s = self.s.clone().unwrap_or_else(|| vec![1.0, 1.1, 1.5, 2.0, 5.0, 10.0]);
        if s.is_empty() || s.iter().any(|&x| !(x >= 1.0) || !x.is_finite()) {
            return config_error("--s values must be finite and >= 1");
        }
        let mu = positive("mu", self.mu.unwrap_or(1.0))?;
        Ok(Box::new(IntegralsPlan { n, s, mu }))
    }
}

impl Plan for IntegralsPlan {
    fn echo(&self) -> Value {
        json!({ "n": self.n.get(), "s": self.s, "mu": self.mu })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let mut t = Table::new("integrals", &["n", "s", "mu", "value", "method"]);
        for &s in &self.s {
            let (value, method) = if self.mu == 1.0 {
                let e = phi(self.n, s).map_err(err)?;
                (e.value, e.method.as_str())
            } else {
                let v = phi_power(self.n, s, self.mu).map_err(err)?;
                (v, if self.n.get() == 1 { "closed_form_1d" } else { "quadrature" })
            };
            let method = if value == Extended::PosInfinity { "divergent" } else { method };
            t.push(row![self.n.get(), s, self.mu, value.to_f64(), method]);
        }
        Ok(Outcome { tables: vec![t], ..Default::default() })
    }
}

// hamiltonian ---------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct HamiltonianArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pmax: Option<f64>,
    /// Number of intervals between pmin and pmax.
    #[arg(long)]
    pub steps: Option<usize>,
}

struct HamiltonianPlan {
    params: ModelParams,
    pmin: f64,
    pmax: f64,
    steps: usize,
}

impl HamiltonianArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let params = cfg(ModelParams::new(required("n", self.n)?, required("tau", self.tau)?))?;
        let pmin = self.pmin.unwrap_or(0.0);
        let pmax = self.pmax.unwrap_or(5.0);
        let steps = self.steps.unwrap_or(100);
        if !(pmin >= 0.0 && pmax >= pmin && pmax.is_finite()) {
            return config_error(format!("need 0 <= pmin <= pmax < inf, got [{pmin}, {pmax}]"));
        }
        if steps == 0 || steps > 10_000_000 {
            return config_error("--steps must lie in 1..=1e7");
        }
        Ok(Box::new(HamiltonianPlan { params, pmin, pmax, steps }))
    }
}

impl Plan for HamiltonianPlan {
    fn echo(&self) -> Value {
        json!({ "n": self.params.n(), "tau": self.params.tau(), "pmin": self.pmin, "pmax": self.pmax, "steps": self.steps })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let mut t = Table::new("hamiltonian", &["p_norm", "H", "branch", "residual"]);
        for k in 0..=self.steps {
            let p = self.pmin + (self.pmax - self.pmin) * k as f64 / self.steps as f64;
            let h = hamiltonian_radial(&self.params, p).map_err(err)?;
            t.push(row![p, h.value, h.branch.as_str(), h.residual]);
        }
        Ok(Outcome { tables: vec![t], ..Default::default() })
    }
}

// speed ---------------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SpeedArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "tau_grid")]
    pub tau: Option<f64>,
    /// Several relaxation times, comma separated.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub tau_grid: Option<Vec<f64>>,
}

struct SpeedPlan {
    params: Vec<ModelParams>,
}

impl SpeedArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let n = required("n", self.n)?;
        let taus = match (&self.tau, &self.tau_grid) {
            (Some(_), Some(_)) => return config_error("give --tau or --tau-grid, not both"),
            (Some(t), None) => vec![*t],
            (None, Some(g)) if !g.is_empty() => g.clone(),
            _ => return config_error("--tau or --tau-grid is required"),
        };
        let params = taus.iter().map(|&t| cfg(ModelParams::new(n, t))).collect::<Result<_, _>>()?;
        Ok(Box::new(SpeedPlan { params }))
    }
}

impl Plan for SpeedPlan {
    fn echo(&self) -> Value {
        json!({ "n": self.params[0].n(), "tau": self.params.iter().map(|p| p.tau()).collect::<Vec<_>>() })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let mut t = Table::new("speed", &["n", "tau", "c", "a", "p_star", "is_hyperbolic"]);
        let mut results = Vec::new();
        for p in &self.params {
            let s = speed(p).map_err(err)?;
            t.push(row![p.n(), p.tau(), s.c, s.a, s.p_star.to_f64(), s.is_hyperbolic]);
            results.push(json!({
                "n": p.n(),
                "tau": p.tau(),
                "c": s.c,
                "a": s.a,
                "is_hyperbolic": s.is_hyperbolic,
                "closed_form": closed_form_speed(p.n(), p.tau()),
            }));
        }
        let results = if results.len() == 1 { results.remove(0) } else { Value::Array(results) };
        Ok(Outcome { tables: vec![t], results, ..Default::default() })
    }
}

// simulate-1d ---------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonlinearityArg {
    Logistic,
    LogisticPlus,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Simulate1dArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Hyperbolic scaling parameter in (0, 1].
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Number of cells.
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    /// Courant number in (0, 1]; 1 makes transport an exact shift.
    #[arg(long, allow_negative_numbers = true)]
    pub cfl: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long, value_enum)]
    pub nonlinearity: Option<NonlinearityArg>,
    /// Times at which to write profile_<t>.csv (default: the final time).
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub profile_times: Option<Vec<f64>>,
}

struct Simulate1dPlan {
    grid: Grid1D,
    tau: f64,
    epsilon: f64,
    t_end: f64,
    nonlinearity: Nonlinearity,
    profile_times: Vec<f64>,
}

impl Simulate1dArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let tau = positive("tau", required("tau", self.tau)?)?;
        let epsilon = in_unit("epsilon", self.epsilon.unwrap_or(1.0))?;
        let t_end = positive("t-end", self.t_end.unwrap_or(criteria::FRONT_T_END))?;
        let cfl = in_unit("cfl", self.cfl.unwrap_or(1.0))?;
        let nx = self.nx.unwrap_or(criteria::FRONT_NX);
        if nx > 50_000_000 {
            return config_error("--nx above 5e7 cells");
        }
        let x_min = self.x_min.unwrap_or(criteria::FRONT_DOMAIN.0);
        let x_max = self.x_max.unwrap_or(criteria::FRONT_DOMAIN.1);
        if !(x_min < 0.0 && x_max > 0.0) {
            return config_error("the domain must contain the initial front at x = 0");
        }
        let grid = cfg(Grid1D::for_tau(x_min, x_max, nx, cfl, tau))?;
        if t_end / grid.dt > 1e9 {
            return config_error("more than 1e9 time steps");
        }
        let profile_times = self.profile_times.clone().unwrap_or_else(|| vec![t_end]);
        if profile_times.iter().any(|&t| !(0.0..=t_end).contains(&t)) {
            return config_error("--profile-times must lie in [0, t-end]");
        }
        let nonlinearity = match self.nonlinearity.unwrap_or(NonlinearityArg::LogisticPlus) {
            NonlinearityArg::Logistic => Nonlinearity::Logistic,
            NonlinearityArg::LogisticPlus => Nonlinearity::LogisticPlus,
        };
        Ok(Box::new(Simulate1dPlan { grid, tau, epsilon, t_end, nonlinearity, profile_times }))
    }
}

impl Plan for Simulate1dPlan {
    fn echo(&self) -> Value {
        json!({
            "tau": self.tau, "epsilon": self.epsilon, "nx": self.grid.nx, "t_end": self.t_end,
            "cfl": self.grid.cfl, "x_min": self.grid.x_min, "x_max": self.grid.x_max, "dx": self.grid.dx,
            "dt": self.grid.dt, "nonlinearity": match self.nonlinearity {
                Nonlinearity::Logistic => "logistic",
                Nonlinearity::LogisticPlus => "logistic-plus",
            }, "profile_times": self.profile_times,
        })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let g = &self.grid;
        let mut state = KineticState1D::indicator(g, 0.0, self.tau, self.epsilon).map_err(err)?;
        let opts = TrackOptions { nonlinearity: self.nonlinearity, ..TrackOptions::new(self.t_end) };
        let mut pending: Vec<f64> = self.profile_times.clone();
        pending.sort_by(f64::total_cmp);
        pending.dedup();
        let mut profiles = Vec::new();
        let half_step = 0.5 * g.dt;
        let profile = |want: f64, s: &KineticState1D| {
            let mut t = Table::new(format!("profile_{want}"), &["x", "p_plus", "p_minus", "rho"]);
            for i in 0..g.nx {
                t.push(row![g.x(i), s.p_plus[i], s.p_minus[i], 0.5 * (s.p_plus[i] + s.p_minus[i])]);
            }
            t
        };
        let trace = kinetic1d::run_and_track_with(&mut state, g, &opts, |s| {
            while let Some(&want) = pending.first() {
                if s.t + half_step < want {
                    break;
                }
                profiles.push(profile(want, s));
                pending.remove(0);
            }
            Ok(())
        })
        .map_err(err)?;
        for want in pending {
            // requested between the last output and t_end
            profiles.push(profile(want, &state));
        }

        let mut front = Table::new("front", &["t", "front_pos", "support_edge"]);
        for ((t, f), s) in trace.times.iter().zip(&trace.positions).zip(&trace.support_edges) {
            front.push(row![*t, *f, *s]);
        }
        let mut out = Outcome::default();
        let m = kinetic1d::upper_bound(self.tau);
        out.check(
            "a priori bounds: min >= -1e-12, max <= M_tau (1 + 1e-6)",
            trace.min_value >= -1e-12 && trace.max_value <= m * (1.0 + 1e-6),
            format!("range [{:e}, {}], M_tau = {m}", trace.min_value, trace.max_value),
        );
        let c = closed_form_speed(1, self.tau).unwrap_or(f64::NAN);
        out.results = json!({
            "fitted_speed": trace.fitted_speed,
            "fit_residual": trace.fit_residual,
            "predicted_speed": c,
            "relative_error": (trace.fitted_speed - c).abs() / c,
            "gap_growth_rate": trace.gap_growth_rate(),
            "min_value": trace.min_value,
            "max_value": trace.max_value,
        });
        out.tables.push(front);
        out.tables.extend(profiles);
        Ok(out)
    }
}

// simulate-2d-discrete ------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReactionArg {
    Local,
    NonlocalPlus,
    PerVelocity,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Simulate2dArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Cone offset δ.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Cells per δ (dx = δ/nx).
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub cfl: Option<f64>,
    #[arg(long, value_enum)]
    pub reaction: Option<ReactionArg>,
    /// Also write the final fields as snapshot.csv.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub snapshot: Option<bool>,
}

struct Simulate2dPlan {
    cfg: ProbeConfig,
    cells_per_delta: usize,
    snapshot: bool,
}

impl Simulate2dArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let tau = self.tau.unwrap_or(criteria::WITNESS_TAU);
        if !(tau > 4.0 && tau.is_finite()) {
            return config_error(format!("--tau must exceed 4 for cone data, got {tau}"));
        }
        let delta = positive("delta", self.delta.unwrap_or(criteria::WITNESS_DELTA))?;
        let t_end = positive("t-end", self.t_end.unwrap_or(criteria::WITNESS_T_END))?;
        let cells = self.nx.unwrap_or(40);
        if cells == 0 {
            return config_error("--nx must be at least 1");
        }
        let reaction = match self.reaction.unwrap_or(ReactionArg::Local) {
            ReactionArg::Local => Reaction::Logistic,
            ReactionArg::NonlocalPlus => Reaction::LogisticPlus,
            ReactionArg::PerVelocity => Reaction::PerVelocity,
        };
        let cfg = ProbeConfig {
            dx: delta / cells as f64,
            cfl: in_unit("cfl", self.cfl.unwrap_or(1.0))?,
            reaction,
            ..ProbeConfig::new(tau, delta, t_end)
        };
        let grid = cfg_grid(&cfg)?;
        if (grid.n as f64).powi(2) > 1e8 {
            return config_error(format!("grid of {0} x {0} cells is too large", grid.n));
        }
        Ok(Box::new(Simulate2dPlan { cfg, cells_per_delta: cells, snapshot: self.snapshot.unwrap_or(false) }))
    }
}

fn cfg_grid(c: &ProbeConfig) -> Result<discrete2d::Grid2D, ConfigError> {
    cfg(c.grid())
}

impl Plan for Simulate2dPlan {
    fn echo(&self) -> Value {
        let c = &self.cfg;
        json!({
            "tau": c.tau, "delta": c.delta, "nx": self.cells_per_delta, "dx": c.dx, "t_end": c.t_end,
            "cfl": c.cfl, "reaction": c.reaction.as_str(), "snapshot": self.snapshot,
        })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let r = discrete2d::negativity_probe(&self.cfg).map_err(err)?;
        let mut out = Outcome::default();
        let mut probe = Table::new("probe", &["t", "p_e2_at_probe", "rho_at_probe", "global_min"]);
        for s in &r.trace {
            probe.push(row![s.t, s.p_e2, s.rho, s.global_min]);
        }
        out.tables.push(probe);
        if self.snapshot {
            let g = &r.grid;
            let mut snap = Table::new("snapshot", &["i", "j", "x", "y", "p_e1", "p_e2", "p_me1", "p_me2", "rho"]);
            snap.meta = format!("nx: {}, ny: {}, dx: {}", g.n, g.n, crate::table::float(g.dx));
            let st = &r.state;
            for j in 0..g.n {
                for i in 0..g.n {
                    let k = j * g.n + i;
                    snap.push(row![
                        i, j, g.coord(i), g.coord(j),
                        st.p_e1[k], st.p_e2[k], st.p_me1[k], st.p_me2[k], st.rho_at(k)
                    ]);
                }
            }
            out.tables.push(snap);
        }
        if self.cfg.reaction != Reaction::Logistic {
            out.check(
                format!("{} model stays >= -1e-12", self.cfg.reaction.as_str()),
                r.global_min >= -1e-12,
                format!("global min {:e}", r.global_min),
            );
        }
        out.results = json!({
            "reaction": self.cfg.reaction.as_str(),
            "probe_min": r.min_value,
            "probe_min_location": [r.location.0, r.location.1],
            "probe_min_time": r.time,
            "negative_steps": r.negative_steps,
            "pre_collision_min": r.pre_collision_min,
            "max_overlap_rho": r.max_overlap_rho,
            "overlap_target": self.cfg.overlap_target(),
            "collision_time": self.cfg.collision_time(),
            "global_min": r.global_min,
            "global_min_location": [r.global_min_location.0, r.global_min_location.1],
            "global_min_time": r.global_min_time,
            "grid_cells_per_side": r.grid.n,
        });
        Ok(out)
    }
}

// simulate-telegraph --------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TelegraphArgs {
    /// Spatial dimension, 1 or 2.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Bump amplitude ε (default δ^{5/4}).
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Bump width δ.
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Run the canned sweep ε = δ^{5/4} over --deltas instead of one bump.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", conflicts_with_all = ["epsilon", "delta"])]
    pub sweep: Option<bool>,
    /// Widths for --sweep, comma separated.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Cells per √δ.
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub cfl: Option<f64>,
}

struct TelegraphPlan {
    dim: usize,
    tau: f64,
    bumps: Vec<GaussianBump>,
    sweep: bool,
    res: BumpResolution,
    t_end: f64,
}

impl TelegraphArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let dim = self.dim.unwrap_or(2);
        if dim != 1 && dim != 2 {
            return config_error(format!("--dim must be 1 or 2, got {dim}"));
        }
        let tau = positive("tau", self.tau.unwrap_or(criteria::SWEEP_TAU))?;
        let t_end = positive("t-end", self.t_end.unwrap_or(criteria::SWEEP_T_END))?;
        let cfl = self.cfl.unwrap_or(0.5);
        if !(cfl > 0.0 && cfl <= telegraph::MAX_CFL) {
            return config_error(format!("--cfl must lie in (0, {}], got {cfl}", telegraph::MAX_CFL));
        }
        let cells = self.nx.unwrap_or(16);
        if cells < 2 {
            return config_error("--nx must be at least 2 cells per width");
        }
        let sweep = self.sweep.unwrap_or(false);
        let bumps = if sweep {
            if self.epsilon.is_some() || self.delta.is_some() {
                return config_error("--sweep replaces --epsilon and --delta");
            }
            let deltas = self.deltas.clone().unwrap_or_else(|| telegraph::SWEEP_DELTAS.to_vec());
            if deltas.is_empty() {
                return config_error("--deltas is empty");
            }
            telegraph::proof_scaled_pairs(&deltas)
                .into_iter()
                .map(|(e, d)| cfg(GaussianBump::new(e, d)))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            if self.deltas.is_some() {
                return config_error("--deltas needs --sweep");
            }
            let delta = self.delta.unwrap_or(0.2);
            let eps = self.epsilon.unwrap_or(delta.powf(1.25));
            vec![cfg(GaussianBump::new(eps, delta))?]
        };
        let res = BumpResolution { cells_per_width: cells as f64, cfl };
        for b in &bumps {
            let g = cfg(res.grid(dim, b, tau, t_end))?;
            if g.len() > 100_000_000 {
                return config_error(format!("grid of {} cells is too large", g.len()));
            }
        }
        Ok(Box::new(TelegraphPlan { dim, tau, bumps, sweep, res, t_end }))
    }
}

fn extrema_table(ext: &telegraph::ExtremaTrace) -> Table {
    let mut t = Table::new("extrema", &["t", "min_rho", "max_rho"]);
    for ((t_, lo), hi) in ext.times.iter().zip(&ext.min_rho).zip(&ext.max_rho) {
        t.push(row![*t_, *lo, *hi]);
    }
    t
}

fn record_json(r: &telegraph::BumpRecord) -> Value {
    json!({
        "epsilon": r.epsilon, "delta": r.delta, "min_rho": r.min_rho, "t_min": r.t_min,
        "scheme_error": r.scheme_error, "threshold": r.threshold, "negative_steps": r.negative_steps,
        "is_negative": r.is_negative(), "dx": r.dx, "cells_per_side": r.n,
    })
}

impl TelegraphPlan {
    fn run_1d(&self, b: &GaussianBump) -> kinfront::Result<(f64, f64, f64, telegraph::ExtremaTrace)> {
        let g = self.res.grid(1, b, self.tau, self.t_end)?;
        let dt = g.time_step(self.tau, self.res.cfl);
        let mut s = TelegraphState::at_rest(b.sample(&g), self.tau)?;
        let ext = telegraph::run(&mut s, &g, dt, self.t_end, &Physics::default(), |_| {})?;
        let (lo, t_lo) = ext.overall_min();
        Ok((lo, t_lo, ext.overall_max(), ext))
    }
}

impl Plan for TelegraphPlan {
    fn echo(&self) -> Value {
        json!({
            "dim": self.dim, "tau": self.tau, "sweep": self.sweep, "t_end": self.t_end,
            "nx": self.res.cells_per_width, "cfl": self.res.cfl,
            "bumps": self.bumps.iter().map(|b| json!({ "epsilon": b.epsilon, "delta": b.delta })).collect::<Vec<_>>(),
        })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let mut out = Outcome::default();
        out.warnings.extend(self.bumps.iter().filter_map(|b| b.warning()));
        if self.dim == 1 {
            let mut sweep = Table::new("sweep", &["epsilon", "delta", "min_rho", "t_min", "max_rho"]);
            let mut summary = Vec::new();
            let mut worst: Option<(f64, telegraph::ExtremaTrace)> = None;
            for b in &self.bumps {
                let (lo, t_lo, hi, ext) = self.run_1d(b).map_err(err)?;
                sweep.push(row![b.epsilon, b.delta, lo, t_lo, hi]);
                out.check(
                    format!("1-D bound [-1e-6, 2 + 1e-6], eps = {}, delta = {}", b.epsilon, b.delta),
                    lo >= -1e-6 && hi <= 2.0 + 1e-6,
                    format!("range [{lo:e}, {hi}]"),
                );
                summary.push(json!({ "epsilon": b.epsilon, "delta": b.delta, "min_rho": lo, "t_min": t_lo, "max_rho": hi }));
                if worst.as_ref().is_none_or(|w| lo < w.0) {
                    worst = Some((lo, ext));
                }
            }
            if let Some((_, ext)) = worst {
                out.tables.push(extrema_table(&ext));
            }
            if self.sweep {
                out.tables.push(sweep);
            }
            out.results = if summary.len() == 1 { summary.remove(0) } else { Value::Array(summary) };
            return Ok(out);
        }

        if !self.sweep {
            let r = telegraph::bump_run_2d(&self.bumps[0], self.tau, self.t_end, &self.res).map_err(err)?;
            out.tables.push(extrema_table(&r.extrema));
            out.results = record_json(&r);
            return Ok(out);
        }
        let pairs: Vec<(f64, f64)> = self.bumps.iter().map(|b| (b.epsilon, b.delta)).collect();
        match telegraph::negativity_search_2d(self.tau, &pairs, self.t_end, &self.res) {
            Ok(s) => {
                let mut sweep = Table::new(
                    "sweep",
                    &["epsilon", "delta", "min_rho", "t_min", "threshold", "negative_steps", "is_negative", "dx"],
                );
                for r in &s.records {
                    sweep.push(row![r.epsilon, r.delta, r.min_rho, r.t_min, r.threshold, r.negative_steps, r.is_negative(), r.dx]);
                }
                let best = s.best();
                out.check(
                    "2-D sweep finds min rho below the detection threshold",
                    true,
                    format!("eps = {}, delta = {}, min {:e}", best.epsilon, best.delta, best.min_rho),
                );
                out.tables.push(extrema_table(&best.extrema));
                out.tables.push(sweep);
                out.results = json!({
                    "best": record_json(best),
                    "records": s.records.iter().map(record_json).collect::<Vec<_>>(),
                });
            }
            Err(kinfront::Error::Unresolved(msg)) => {
                out.check("2-D sweep finds min rho below the detection threshold", false, msg);
            }
            Err(e) => return Err(e.to_string()),
        }
        Ok(out)
    }
}

// hydro-limit ---------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct HydroArgs {
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u32>>,
    /// Momentum norms |p|, comma separated.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Relaxation times, comma separated.
    #[arg(long, allow_negative_numbers = true, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
}

struct HydroPlan {
    dims: Vec<SphereDim>,
    p: Vec<f64>,
    taus: Vec<f64>,
}

impl HydroArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        let dims = self
            .n
            .clone()
            .unwrap_or_else(|| vec![1, 2, 3])
            .into_iter()
            .map(|n| cfg(SphereDim::new(n)))
            .collect::<Result<Vec<_>, _>>()?;
        let p = self.p.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
        let taus = self.taus.clone().unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5]);
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return config_error("--p values must be finite and >= 0");
        }
        for &t in &taus {
            positive("taus", t)?;
        }
        if dims.is_empty() || p.is_empty() || taus.len() < 2 {
            return config_error("need at least one n, one p and two taus");
        }
        Ok(Box::new(HydroPlan { dims, p, taus }))
    }
}

impl Plan for HydroPlan {
    fn echo(&self) -> Value {
        json!({ "n": self.dims.iter().map(|d| d.get()).collect::<Vec<_>>(), "p": self.p, "taus": self.taus })
    }

    fn run(&self, _: &Globals, _: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let mut out = Outcome::default();
        let mut t = Table::new("hydro_limit", &["n", "p", "tau", "residual"]);
        let mut orders = Table::new("hydro_order", &["n", "p", "fitted_order"]);
        for &d in &self.dims {
            for &p in &self.p {
                let mut q = vec![0.0; d.get() as usize];
                q[0] = p;
                let r = hydro_limit_residual(d, &q, &self.taus).map_err(err)?;
                for (tau, e) in self.taus.iter().zip(&r) {
                    t.push(row![d.get(), p, *tau, *e]);
                }
                let xs: Vec<f64> = self.taus.iter().map(|x| x.ln()).collect();
                let ys: Vec<f64> = r.iter().map(|x| x.ln()).collect();
                let order = kinfront::fit::fit_line(&xs, &ys).map_or(f64::NAN, |f| f.0);
                orders.push(row![d.get(), p, order]);
                out.check(format!("fitted order >= 0.9 at n = {}, p = {p}", d.get()), order >= 0.9, format!("{order}"));
            }
        }
        out.tables.extend([t, orders]);
        Ok(out)
    }
}

// reproduce-all -------------------------------------------------------------

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ReproduceArgs {
    /// Formula-level criteria only; skips every simulation.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub quick: Option<bool>,
}

struct ReproducePlan {
    quick: bool,
}

impl ReproduceArgs {
    pub fn validate(&self) -> Result<Box<dyn Plan>, ConfigError> {
        Ok(Box::new(ReproducePlan { quick: self.quick.unwrap_or(false) }))
    }
}

impl Plan for ReproducePlan {
    fn echo(&self) -> Value {
        json!({ "quick": self.quick })
    }

    fn run(&self, globals: &Globals, progress: &mut dyn FnMut(&str)) -> Result<Outcome, String> {
        let opts = SuiteOptions { quick: self.quick, seed: globals.seed };
        let reports = criteria::run_suite(&opts, |r| progress(&r.line()));
        let mut out = Outcome::default();
        let mut summary = Table::new("criteria", &["id", "title", "status", "seconds", "part", "passed", "known_deviation", "detail"]);
        for r in &reports {
            if r.status == Status::Skipped {
                summary.push(row![r.id, r.title, "skipped", 0.0, "", true, false, ""]);
                continue;
            }
            for p in &r.parts {
                let known = is_known_deviation(r.id, &p.name);
                summary.push(row![r.id, r.title, r.status.as_str(), r.seconds, p.name.as_str(), p.passed, known, p.detail.as_str()]);
                out.check(format!("{} {}: {}", r.id, r.title, p.name), p.passed, p.detail.clone());
            }
        }
        out.tables.push(summary);
        for r in reports.iter() {
            out.tables.extend(r.tables.iter().cloned());
        }
        out.results = json!({
            "criteria": reports.iter().map(|r| json!({
                "id": r.id, "title": r.title, "status": r.status, "seconds": r.seconds, "parts": r.parts,
            })).collect::<Vec<_>>(),
            "known_deviations": criteria::KNOWN_DEVIATIONS.iter().map(|(i, p)| json!({ "id": i, "part": p })).collect::<Vec<_>>(),
        });
        Ok(out)
    }
}
