//! The acceptance suite: ten numbered criteria with pinned tolerances.
//!
//! Each criterion is split into named parts so that a known deviation can
//! be pinned to the exact part that fails, not to the whole criterion.

use std::time::Instant;

use kinfront::discrete2d::{self, ProbeConfig, Reaction};
use kinfront::hamiltonian::{
    hamiltonian, hamiltonian_implicit, hamiltonian_radial, hydro_limit_residual, ModelParams,
};
use kinfront::kinetic1d::{self, FrontTrace, Grid1D, KineticState1D, Nonlinearity, TrackOptions};
use kinfront::speed::{closed_form_speed, legendre_1d_closed, legendre_radial, negative_set_boundary, phase_diagram, speed};
use kinfront::sphere::{phi, phi_power, phi_quadrature, second_moment};
use kinfront::telegraph::{self, BumpResolution, TelegraphGrid};
use kinfront::{Extended, SphereDim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::row;
use crate::table::Table;

/// Parts that fail on purpose: the check is run as specified and the
/// failure is a finding, not a defect. `(criterion, part name)`.
pub const KNOWN_DEVIATIONS: &[(u32, &str)] = &[(9, "1-D rest data in [-1e-6, 2+1e-6], tau = 2")];

pub fn is_known_deviation(id: u32, part: &str) -> bool {
    KNOWN_DEVIATIONS.iter().any(|&(i, p)| i == id && p == part)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub title: &'static str,
    pub status: Status,
    pub seconds: f64,
    pub parts: Vec<Part>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl CriterionReport {
    pub fn failed_parts(&self) -> impl Iterator<Item = &Part> {
        self.parts.iter().filter(|p| !p.passed)
    }

    /// One summary line, e.g. `PASS  4 Legendre duality (0.12 s)`.
    pub fn line(&self) -> String {
        let mut s = format!("{} {:>2} {} ({:.2} s)", self.status.as_str(), self.id, self.title, self.seconds);
        for p in self.failed_parts() {
            let tag = if is_known_deviation(self.id, &p.name) { "known deviation" } else { "failed" };
            s.push_str(&format!("\n       {tag}: {}: {}", p.name, p.detail));
        }
        s
    }

    /// Every part with its outcome, one per line.
    pub fn part_lines(&self) -> Vec<String> {
        self.parts
            .iter()
            .map(|p| format!("       [{}] {}: {}", if p.passed { "ok" } else { "FAIL" }, p.name, p.detail))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteOptions {
    /// Formula-level criteria only (1-5 and 10).
    pub quick: bool,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { quick: false, seed: 20_240_611 }
    }
}

pub const TITLES: [&str; 10] = [
    "closed-form speeds",
    "phase transition",
    "Hamiltonian consistency",
    "Legendre duality",
    "hydrodynamic limit",
    "1-D front simulation",
    "a priori bounds",
    "discrete 2-D negativity",
    "telegraph positivity dichotomy",
    "sphere identities",
];

const FORMULA_LEVEL: [u32; 6] = [1, 2, 3, 4, 5, 10];

/// Runs the suite in order; criteria 6 and 7 share the front runs.
pub fn run_suite(opts: &SuiteOptions, mut progress: impl FnMut(&CriterionReport)) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let mut fronts: Option<Vec<(f64, FrontTrace)>> = None;
    for id in 1..=10u32 {
        let report = if opts.quick && !FORMULA_LEVEL.contains(&id) {
            CriterionReport {
                id,
                title: TITLES[id as usize - 1],
                status: Status::Skipped,
                seconds: 0.0,
                parts: Vec::new(),
                tables: Vec::new(),
            }
        } else {
            run_one(id, opts, &mut fronts)
        };
        progress(&report);
        out.push(report);
    }
    out
}

pub fn run_criterion(id: u32, opts: &SuiteOptions) -> CriterionReport {
    run_one(id, opts, &mut None)
}

fn run_one(id: u32, opts: &SuiteOptions, fronts: &mut Option<Vec<(f64, FrontTrace)>>) -> CriterionReport {
    let start = Instant::now();
    let mut ck = Checks::default();
    let outcome = match id {
        1 => closed_form_speeds(&mut ck),
        2 => phase_transition(&mut ck),
        3 => hamiltonian_consistency(&mut ck, opts.seed),
        4 => legendre_duality(&mut ck),
        5 => hydro_limit(&mut ck),
        6 => front_simulation(&mut ck).map(|f| *fronts = Some(f)),
        7 => a_priori_bounds(&mut ck, fronts, opts.seed),
        8 => discrete_negativity(&mut ck),
        9 => telegraph_dichotomy(&mut ck),
        10 => sphere_identities(&mut ck, opts.seed),
        _ => Err(format!("no criterion {id}")),
    };
    if let Err(e) = outcome {
        ck.part("completed without error", false, e);
    }
    let seconds = start.elapsed().as_secs_f64();
    if let Some(limit) = budget(id) {
        ck.part(format!("runtime < {limit} s"), seconds < limit, format!("{seconds:.2} s"));
    }
    let status = if ck.parts.iter().all(|p| p.passed) { Status::Pass } else { Status::Fail };
    CriterionReport { id, title: TITLES[id as usize - 1], status, seconds, parts: ck.parts, tables: ck.tables }
}

fn budget(id: u32) -> Option<f64> {
    match id {
        1 => Some(1.0),
        2 | 5 => Some(5.0),
        3 => Some(10.0),
        6 => Some(60.0),
        8 => Some(120.0),
        9 => Some(300.0),
        _ => None,
    }
}

#[derive(Default)]
struct Checks {
    parts: Vec<Part>,
    tables: Vec<Table>,
}

impl Checks {
    fn part(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.parts.push(Part { name: name.into(), passed, detail: detail.into() });
    }
}

type Outcome = Result<(), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn params(n: u32, tau: f64) -> Result<ModelParams, String> {
    ModelParams::new(n, tau).map_err(err)
}

/// Tracks the worst value of a tolerance check together with its location.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, at: String::from("-") }
    }

    fn see(&mut self, v: f64, at: impl FnOnce() -> String) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = at();
        }
    }

    fn within(&self, tol: f64) -> bool {
        self.value <= tol
    }

    fn detail(&self) -> String {
        format!("worst {:.3e} at {}", self.value, self.at)
    }
}

// 1 -------------------------------------------------------------------------

const SPEED_TAUS_PARABOLIC: [f64; 4] = [0.1, 0.25, 0.5, 1.0];
const SPEED_TAUS_HYPERBOLIC: [f64; 4] = [1.0, 2.0, 4.0, 10.0];

fn closed_form_speeds(ck: &mut Checks) -> Outcome {
    let mut table = Table::new("speeds", &["n", "tau", "c", "closed_form", "abs_error"]);
    let mut run = |n: u32, taus: &[f64], formula: &dyn Fn(f64) -> f64| -> Result<Worst, String> {
        let mut w = Worst::new();
        for &tau in taus {
            let c = speed(&params(n, tau)?).map_err(err)?.c;
            let want = formula(tau);
            table.push(row![n, tau, c, want, (c - want).abs()]);
            w.see((c - want).abs(), || format!("n = {n}, tau = {tau}"));
        }
        Ok(w)
    };
    let w = run(1, &SPEED_TAUS_PARABOLIC, &|t| 2.0 / (1.0 + t))?;
    ck.part("n = 1, 2/(1+tau) within 1e-8", w.within(1e-8), w.detail());
    let w = run(1, &SPEED_TAUS_HYPERBOLIC, &|t| 1.0 / t.sqrt())?;
    ck.part("n = 1, 1/sqrt(tau) within 1e-8", w.within(1e-8), w.detail());
    let mut taus = SPEED_TAUS_PARABOLIC.to_vec();
    taus.extend_from_slice(&SPEED_TAUS_HYPERBOLIC[1..]);
    let w = run(2, &taus, &|t| (2.0 * (2.0 + t)).sqrt() / (1.0 + t))?;
    ck.part("n = 2, sqrt(2(2+tau))/(1+tau) within 1e-8", w.within(1e-8), w.detail());
    ck.tables.push(table);
    Ok(())
}

// 2 -------------------------------------------------------------------------

const PHASE_TAUS: [f64; 6] = [0.5, 0.9, 1.0, 1.1, 2.0, 4.0];

fn phase_transition(ck: &mut Checks) -> Outcome {
    let mut table = Table::new("phase_diagram", &["n", "tau", "c", "a", "is_hyperbolic"]);
    let mut wrong_flags = Vec::new();
    let mut gap = f64::INFINITY;
    for n in 1..=3u32 {
        let pts = phase_diagram(SphereDim::new(n).map_err(err)?, &PHASE_TAUS).map_err(err)?;
        for p in pts {
            table.push(row![n, p.tau, p.c, p.a, p.is_hyperbolic]);
            if p.is_hyperbolic != (n == 1 && p.tau >= 1.0) {
                wrong_flags.push(format!("n = {n}, tau = {}", p.tau));
            }
            if n > 1 {
                gap = gap.min(p.a - p.c);
            }
        }
    }
    ck.part(
        "hyperbolic exactly for n = 1, tau >= 1",
        wrong_flags.is_empty(),
        if wrong_flags.is_empty() { "all flags as expected".into() } else { wrong_flags.join("; ") },
    );
    ck.part("c < a - 1e-6 for n = 2, 3", gap > 1e-6, format!("smallest a - c = {gap:.6e}"));
    ck.tables.push(table);
    Ok(())
}

// 3 -------------------------------------------------------------------------

const CONSISTENCY_PAIRS: [(f64, f64); 12] = [
    (0.1, 0.2),
    (0.1, 3.0),
    (0.25, 1.0),
    (0.5, 0.05),
    (0.5, 2.0),
    (1.0, 0.5),
    (1.0, 10.0),
    (2.0, 0.3),
    (2.0, 4.0),
    (4.0, 1.0),
    (10.0, 0.1),
    (10.0, 25.0),
];

pub(crate) fn random_rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    q
}

fn hamiltonian_consistency(ck: &mut Checks, seed: u64) -> Outcome {
    let mut w = Worst::new();
    for n in 1..=3u32 {
        for (tau, p) in CONSISTENCY_PAIRS {
            let pr = params(n, tau)?;
            let closed = hamiltonian_radial(&pr, p).map_err(err)?.value;
            let root = hamiltonian_implicit(&pr, p).map_err(err)?.value;
            w.see((closed - root).abs(), || format!("n = {n}, tau = {tau}, |p| = {p}"));
        }
    }
    ck.part("closed form vs root solve within 1e-8", w.within(1e-8), w.detail());

    let mut w = Worst::new();
    for n in 1..=5u32 {
        for tau in [0.1, 1.0, 10.0] {
            let h0 = hamiltonian(&params(n, tau)?, &vec![0.0; n as usize]).map_err(err)?.value;
            w.see((h0 + 1.0).abs(), || format!("n = {n}, tau = {tau}"));
        }
    }
    ck.part("H(0) = -1 within 1e-12", w.within(1e-12), w.detail());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [1u32, 2, 3, 5];
    let mut concave_fail = Worst::new();
    let mut rot = Worst::new();
    for k in 0..1000 {
        let n = dims[k % dims.len()];
        let tau = 10f64.powf(rng.random_range(-1.0..1.0));
        let pr = params(n, tau)?;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(-4.0..4.0)).collect() };
        let (p, q) = (draw(&mut rng), draw(&mut rng));
        let mid: Vec<f64> = p.iter().zip(&q).map(|(a, b)| 0.5 * (a + b)).collect();
        let h = |v: &[f64]| hamiltonian(&pr, v).map(|e| e.value).map_err(err);
        let (hp, hq, hm) = (h(&p)?, h(&q)?, h(&mid)?);
        // violation of H(mid) >= (H(p) + H(q))/2, relative to the values
        let viol = (0.5 * (hp + hq) - hm) / (1.0 + hm.abs());
        concave_fail.see(viol, || format!("n = {n}, tau = {tau:.4}"));

        let r = random_rotation(n as usize, &mut rng);
        let rp: Vec<f64> = r.iter().map(|row| row.iter().zip(&p).map(|(a, b)| a * b).sum()).collect();
        let hr = h(&rp)?;
        rot.see((hr - hp).abs() / (1.0 + hp.abs()), || format!("n = {n}, tau = {tau:.4}"));
    }
    ck.part(
        "midpoint concavity on 1000 samples",
        concave_fail.within(1e-10),
        format!("largest relative violation {:.3e} ({})", concave_fail.value, concave_fail.at),
    );
    ck.part("rotation invariance on 1000 samples within 1e-10", rot.within(1e-10), rot.detail());
    Ok(())
}

// 4 -------------------------------------------------------------------------

fn legendre_duality(ck: &mut Checks) -> Outcome {
    let mut table = Table::new("legendre_zero", &["n", "tau", "c", "L_at_c"]);
    let mut w = Worst::new();
    for (n, tau) in [(1, 0.5), (2, 0.5), (2, 2.0), (3, 0.5), (3, 2.0)] {
        let pr = params(n, tau)?;
        let c = speed(&pr).map_err(err)?.c;
        let l = legendre_radial(&pr, c).map_err(err)?;
        table.push(row![n, tau, c, l.to_f64()]);
        w.see(l.to_f64().abs(), || format!("n = {n}, tau = {tau}"));
    }
    ck.part("|L(c e)| <= 1e-7", w.within(1e-7), w.detail());

    let mut w = Worst::new();
    let mut markers_agree = true;
    for tau in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let pr = params(1, tau)?;
        let a = pr.transport_speed();
        for k in 0..=50 {
            let q = 1.2 * a * k as f64 / 50.0;
            let num = legendre_radial(&pr, q).map_err(err)?;
            match (legendre_1d_closed(tau, q), num) {
                (Extended::Finite(x), Extended::Finite(y)) => {
                    w.see((x - y).abs(), || format!("tau = {tau}, q = {q:.4}"))
                }
                (x, y) => markers_agree &= x == y,
            }
        }
    }
    ck.part(
        "1-D closed-form L vs numerical dual within 1e-8",
        w.within(1e-8) && markers_agree,
        format!("{}; -inf markers agree: {markers_agree}", w.detail()),
    );

    let b = negative_set_boundary(&params(1, 4.0)?).map_err(err)?;
    ck.part(
        "n = 1, tau = 4: boundary of {L < 0} at 0.5 +- 1e-6",
        (b - 0.5).abs() <= 1e-6,
        format!("boundary at {b:.12}"),
    );
    ck.tables.push(table);
    Ok(())
}

// 5 -------------------------------------------------------------------------

const HYDRO_TAUS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

fn hydro_limit(ck: &mut Checks) -> Outcome {
    let mut table = Table::new("hydro_limit", &["n", "p", "tau", "residual"]);
    let mut worst_order = f64::INFINITY;
    let mut at = String::new();
    for n in 1..=3u32 {
        for p in [0.5, 1.0, 2.0] {
            let mut q = vec![0.0; n as usize];
            q[0] = p;
            let r = hydro_limit_residual(SphereDim::new(n).map_err(err)?, &q, &HYDRO_TAUS).map_err(err)?;
            for (t, e) in HYDRO_TAUS.iter().zip(&r) {
                table.push(row![n, p, *t, *e]);
            }
            let xs: Vec<f64> = HYDRO_TAUS.iter().map(|t| t.ln()).collect();
            let ys: Vec<f64> = r.iter().map(|e| e.ln()).collect();
            let order = kinfront::fit::fit_line(&xs, &ys).map_or(f64::NAN, |f| f.0);
            if !(order >= worst_order) {
                worst_order = order;
                at = format!("n = {n}, |p| = {p}");
            }
        }
    }
    ck.part(
        "fitted order >= 0.9",
        worst_order >= 0.9,
        format!("lowest order {worst_order:.4} at {at}"),
    );
    ck.tables.push(table);
    Ok(())
}

// 6 -------------------------------------------------------------------------

pub const FRONT_TAUS: [f64; 3] = [0.25, 1.0, 4.0];
pub const FRONT_NX: usize = 4000;
pub const FRONT_T_END: f64 = 40.0;
pub const FRONT_DOMAIN: (f64, f64) = (-5.0, 105.0);
const CONVERGENCE_NX: [usize; 4] = [1000, 2000, 4000, 8000];
const CONVERGENCE_CFL: f64 = 0.5;

pub fn front_run(tau: f64, nx: usize, cfl: f64) -> kinfront::Result<FrontTrace> {
    let g = Grid1D::for_tau(FRONT_DOMAIN.0, FRONT_DOMAIN.1, nx, cfl, tau)?;
    let mut s = KineticState1D::indicator(&g, 0.0, tau, 1.0)?;
    kinetic1d::run_and_track(&mut s, &g, &TrackOptions::new(FRONT_T_END))
}

fn front_simulation(ck: &mut Checks) -> Result<Vec<(f64, FrontTrace)>, String> {
    let traces: Vec<(f64, FrontTrace)> = FRONT_TAUS
        .par_iter()
        .map(|&tau| front_run(tau, FRONT_NX, 1.0).map(|t| (tau, t)))
        .collect::<kinfront::Result<_>>()
        .map_err(err)?;

    let mut fronts = Table::new("fronts_1d", &["tau", "t", "front", "support_edge", "gap"]);
    let mut speeds = Table::new("front_speeds_1d", &["tau", "fitted_speed", "c", "rel_error", "gap_rate"]);
    let mut w = Worst::new();
    for (tau, tr) in &traces {
        let c = closed_form_speed(1, *tau).ok_or("no closed form")?;
        let rel = (tr.fitted_speed - c).abs() / c;
        w.see(rel, || format!("tau = {tau}"));
        speeds.push(row![*tau, tr.fitted_speed, c, rel, tr.gap_growth_rate()]);
        for ((t, f), s) in tr.times.iter().zip(&tr.positions).zip(&tr.support_edges) {
            fronts.push(row![*tau, *t, *f, *s, s - f]);
        }
    }
    ck.part("fitted speed within 5% of c (nx = 4000, t_end = 40)", w.within(0.05), w.detail());

    let get = |tau: f64| traces.iter().find(|(t, _)| *t == tau).map(|(_, tr)| tr).ok_or("missing run");
    let rate = get(0.25)?.gap_growth_rate();
    ck.part(
        "tau = 0.25: tail gap grows at 0.4 +- 20%",
        (0.32..=0.48).contains(&rate),
        format!("rate {rate:.4}"),
    );
    let hyper = get(4.0)?;
    let max_gap = hyper.gaps().iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let hrate = hyper.gap_growth_rate();
    ck.part(
        "tau = 4: tail gap bounded (|gap| <= 0.1, rate <= 0.01)",
        max_gap <= 0.1 && hrate.abs() <= 0.01,
        format!("max |gap| {max_gap:.4e}, rate {hrate:.3e}"),
    );

    let mut conv = Table::new("front_convergence_1d", &["tau", "nx", "cfl", "fitted_speed"]);
    let jobs: Vec<(f64, usize)> =
        [0.25, 1.0].iter().flat_map(|&t| CONVERGENCE_NX.iter().map(move |&n| (t, n))).collect();
    let runs: Vec<(f64, usize, f64)> = jobs
        .par_iter()
        .map(|&(tau, nx)| front_run(tau, nx, CONVERGENCE_CFL).map(|tr| (tau, nx, tr.fitted_speed)))
        .collect::<kinfront::Result<_>>()
        .map_err(err)?;
    for tau in [0.25, 1.0] {
        let s: Vec<f64> = runs.iter().filter(|r| r.0 == tau).map(|r| r.2).collect();
        for (nx, v) in CONVERGENCE_NX.iter().zip(&s) {
            conv.push(row![tau, *nx, CONVERGENCE_CFL, *v]);
        }
        let ratios: Vec<f64> = s.windows(3).map(|w| (w[0] - w[1]) / (w[1] - w[2])).collect();
        let ok = ratios.iter().all(|r| (1.4..=2.6).contains(r));
        ck.part(
            format!("tau = {tau}: first-order convergence, ratio of speed differences in [1.4, 2.6]"),
            ok,
            format!("speeds {s:.5?}, ratios {ratios:.3?}"),
        );
    }
    ck.tables.extend([fronts, speeds, conv]);
    Ok(traces)
}

// 7 -------------------------------------------------------------------------

fn bound_ok(min: f64, max: f64, tau: f64) -> bool {
    min >= -1e-12 && max <= kinetic1d::upper_bound(tau) * (1.0 + 1e-6)
}

fn a_priori_bounds(ck: &mut Checks, fronts: &mut Option<Vec<(f64, FrontTrace)>>, seed: u64) -> Outcome {
    let mut table = Table::new("bounds_1d", &["run", "tau", "nonlinearity", "min", "max", "bound"]);
    let mut bad = Vec::new();
    if fronts.is_none() {
        let traces = FRONT_TAUS
            .par_iter()
            .map(|&tau| front_run(tau, FRONT_NX, 1.0).map(|t| (tau, t)))
            .collect::<kinfront::Result<Vec<_>>>()
            .map_err(err)?;
        *fronts = Some(traces);
    }
    for (tau, tr) in fronts.as_ref().into_iter().flatten() {
        table.push(row!["front", *tau, "logistic_plus", tr.min_value, tr.max_value, kinetic1d::upper_bound(*tau)]);
        if !bound_ok(tr.min_value, tr.max_value, *tau) {
            bad.push(format!("front tau = {tau}: [{:.3e}, {:.6}]", tr.min_value, tr.max_value));
        }
    }

    // Canned and random data, both nonlinearities, every step.
    let tg = TelegraphGrid::covering(1, 30.0, 0.05).map_err(err)?;
    let mut profiles = telegraph::canned_profiles_1d(&tg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..3 {
        profiles.push((format!("random_{k}"), (0..tg.n).map(|_| rng.random_range(0.0..=1.0)).collect()));
    }
    let half = tg.center() as f64 * tg.dx + 0.5 * tg.dx;
    let jobs: Vec<(usize, f64, Nonlinearity)> = (0..profiles.len())
        .flat_map(|i| {
            [0.5, 1.0, 2.0, 4.0].into_iter().flat_map(move |tau| {
                [Nonlinearity::Logistic, Nonlinearity::LogisticPlus].into_iter().map(move |nl| (i, tau, nl))
            })
        })
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, tau, nl)| -> kinfront::Result<(f64, f64)> {
            let g = Grid1D::for_tau(-half, half, tg.n, 0.9, tau)?;
            let mut s = KineticState1D::from_density(&profiles[i].1, tau, 1.0)?;
            let (mut lo, mut hi) = (s.min_value(), s.max_value());
            let steps = (10.0 / g.dt).round() as usize;
            for _ in 0..steps {
                kinetic1d::step(&mut s, &g, nl)?;
                lo = lo.min(s.min_value());
                hi = hi.max(s.max_value());
            }
            Ok((lo, hi))
        })
        .collect::<kinfront::Result<Vec<_>>>()
        .map_err(err)?;
    for (&(i, tau, nl), &(lo, hi)) in jobs.iter().zip(&results) {
        let name = match nl {
            Nonlinearity::Logistic => "logistic",
            Nonlinearity::LogisticPlus => "logistic_plus",
        };
        table.push(row![profiles[i].0.as_str(), tau, name, lo, hi, kinetic1d::upper_bound(tau)]);
        if !bound_ok(lo, hi, tau) {
            bad.push(format!("{} tau = {tau} {name}: [{lo:.3e}, {hi:.6}]", profiles[i].0));
        }
    }
    let runs = table.rows.len();
    let global_min = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    ck.part(
        "min >= -1e-12 and max <= M_tau (1 + 1e-6) on every 1-D run",
        bad.is_empty(),
        if bad.is_empty() { format!("{runs} runs, smallest value {global_min:.3e}") } else { bad.join("; ") },
    );
    ck.tables.push(table);
    Ok(())
}

// 8 -------------------------------------------------------------------------

pub const WITNESS_TAU: f64 = 8.0;
pub const WITNESS_DELTA: f64 = 0.2;
pub const WITNESS_T_END: f64 = 0.6;

fn discrete_negativity(ck: &mut Checks) -> Outcome {
    let cfg = ProbeConfig::new(WITNESS_TAU, WITNESS_DELTA, WITNESS_T_END);
    let plus_cfg = ProbeConfig { reaction: Reaction::LogisticPlus, ..cfg };
    let (local, plus) = rayon::join(|| discrete2d::negativity_probe(&cfg), || discrete2d::negativity_probe(&plus_cfg));
    let local = local.map_err(err)?;
    let plus = plus.map_err(err)?;
    ck.part(
        "local model: probe minimum < 0, negative for >= 10 consecutive steps",
        local.min_value < 0.0 && local.negative_steps >= 10,
        format!(
            "min {:.4e} at t = {:.4} ({} steps), dx = {}, overlap density {:.4} (target {:.4})",
            local.min_value,
            local.time,
            local.negative_steps,
            cfg.dx,
            local.max_overlap_rho,
            cfg.overlap_target()
        ),
    );
    ck.part(
        "nonlocal-plus model stays >= -1e-12",
        plus.global_min >= -1e-12,
        format!("global min {:.3e}", plus.global_min),
    );
    let mut table = Table::new("probe", &["t", "p_e2_at_probe", "rho_at_probe", "global_min"]);
    for s in &local.trace {
        table.push(row![s.t, s.p_e2, s.rho, s.global_min]);
    }
    ck.tables.push(table);
    Ok(())
}

// 9 -------------------------------------------------------------------------

pub const SWEEP_TAU: f64 = 1.0;
pub const SWEEP_T_END: f64 = 1.5;
const BOUND_T_END: f64 = 10.0;

fn telegraph_dichotomy(ck: &mut Checks) -> Outcome {
    let tg = TelegraphGrid::covering(1, 30.0, 0.025).map_err(err)?;
    let profiles = telegraph::canned_profiles_1d(&tg);
    let mut table = Table::new(
        "telegraph_bounds_1d",
        &["profile", "tau", "min_rho", "max_rho", "matched_min", "matched_max", "kinetic_gap", "tolerance"],
    );
    let taus = [0.5, 2.0];
    let jobs: Vec<(usize, f64)> = (0..profiles.len()).flat_map(|i| taus.map(|t| (i, t))).collect();
    let checks: Vec<kinfront::Result<telegraph::BoundCheck>> = jobs
        .par_iter()
        .map(|&(i, tau)| telegraph::bound_check_1d(&profiles[i].1, &tg, tau, BOUND_T_END, 0.5))
        .collect();
    let mut cross_errors = Vec::new();
    for tau in taus {
        let mut bad = Vec::new();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut mlo, mut mhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&(i, t), res) in jobs.iter().zip(&checks) {
            if t != tau {
                continue;
            }
            let name = &profiles[i].0;
            match res {
                Ok(b) => {
                    table.push(row![
                        name.as_str(),
                        tau,
                        b.min_rho,
                        b.max_rho,
                        b.matched_min,
                        b.matched_max,
                        b.kinetic_gap,
                        b.tolerance
                    ]);
                    lo = lo.min(b.min_rho);
                    hi = hi.max(b.max_rho);
                    mlo = mlo.min(b.matched_min);
                    mhi = mhi.max(b.matched_max);
                    if b.min_rho < -1e-6 || b.max_rho > 2.0 + 1e-6 {
                        bad.push(format!("{name}: [{:.3e}, {:.6}]", b.min_rho, b.max_rho));
                    }
                }
                Err(e) => cross_errors.push(format!("{name}, tau = {tau}: {e}")),
            }
        }
        ck.part(
            format!("1-D rest data in [-1e-6, 2+1e-6], tau = {tau}"),
            bad.is_empty() && lo.is_finite(),
            format!(
                "range [{lo:.4e}, {hi:.6}]{}; with rho_t(0) = rho0(1-rho0): [{mlo:.4e}, {mhi:.6}]",
                if bad.is_empty() { String::new() } else { format!(", out of bounds: {}", bad.join("; ")) }
            ),
        );
    }
    ck.part(
        "1-D telegraph agrees with the kinetic solver within 0.5 dx",
        cross_errors.is_empty(),
        if cross_errors.is_empty() { "all profiles".into() } else { cross_errors.join("; ") },
    );
    ck.tables.push(table);

    let pairs = telegraph::proof_scaled_pairs(&telegraph::SWEEP_DELTAS);
    let res = BumpResolution::default();
    let search = telegraph::negativity_search_2d(SWEEP_TAU, &pairs, SWEEP_T_END, &res);
    let mut sweep = Table::new(
        "telegraph_sweep_2d",
        &["epsilon", "delta", "min_rho", "t_min", "threshold", "negative_steps", "dx", "n"],
    );
    let search = match search {
        Ok(s) => s,
        Err(e) => {
            ck.part("2-D sweep finds min rho below the detection threshold", false, e.to_string());
            return Ok(());
        }
    };
    for r in &search.records {
        sweep.push(row![r.epsilon, r.delta, r.min_rho, r.t_min, r.threshold, r.negative_steps, r.dx, r.n]);
    }
    let best = search.best();
    let found = search.records.iter().filter(|r| r.is_negative()).count();
    ck.part(
        "2-D sweep finds min rho below the detection threshold",
        found > 0,
        format!(
            "{found} of {} pairs; most negative: eps = {:.4e}, delta = {}, min {:.4e} at t = {:.4}, threshold {:.3e}",
            search.records.len(),
            best.epsilon,
            best.delta,
            best.min_rho,
            best.t_min,
            best.threshold
        ),
    );
    let bump = telegraph::GaussianBump::new(best.epsilon, best.delta).map_err(err)?;
    let fine = telegraph::bump_run_2d(&bump, SWEEP_TAU, SWEEP_T_END, &res.refined()).map_err(err)?;
    sweep.push(row![fine.epsilon, fine.delta, fine.min_rho, fine.t_min, fine.threshold, fine.negative_steps, fine.dx, fine.n]);
    let stable = fine.is_negative() && fine.min_rho <= best.min_rho + 0.1 * best.min_rho.abs();
    ck.part(
        "witness resolution-stable under dx halving (within 10%)",
        stable,
        format!("min {:.5e} at dx = {:.4e} vs {:.5e} at dx = {:.4e}", fine.min_rho, fine.dx, best.min_rho, best.dx),
    );
    ck.tables.push(sweep);
    Ok(())
}

// 10 ------------------------------------------------------------------------

pub const MONTE_CARLO_SAMPLES: usize = 1_000_000;

/// Sample mean and standard error of `n (v·w)²` for uniform `v` on the sphere.
pub fn monte_carlo_second_moment(w: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let n = w.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut v = vec![0.0; n];
    for _ in 0..samples {
        v.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
        let r2: f64 = v.iter().map(|x| x * x).sum();
        let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
        let f = n as f64 * d * d / r2;
        sum += f;
        sum2 += f * f;
    }
    let m = samples as f64;
    let mean = sum / m;
    (mean, ((sum2 / m - mean * mean) / m).sqrt())
}

fn sphere_identities(ck: &mut Checks, seed: u64) -> Outcome {
    let mut w = Worst::new();
    for n in [2u32, 3] {
        let dim = SphereDim::new(n).map_err(err)?;
        for s in [1.001, 1.01, 1.1, 1.5, 2.0, 5.0, 50.0, 1e3] {
            let closed = phi(dim, s).map_err(err)?.value.to_f64();
            let quad = phi_quadrature(dim, s, 1.0).map_err(err)?;
            w.see((closed - quad).abs() / closed.max(1.0), || format!("n = {n}, s = {s}"));
        }
    }
    ck.part("Phi closed forms vs quadrature within 1e-9", w.within(1e-9), w.detail());

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut w = Worst::new();
    let mut dirs = Vec::new();
    for n in 1..=8u32 {
        let raw: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let u: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let m = second_moment(SphereDim::new(n).map_err(err)?, &u).map_err(err)?;
        w.see((m - 1.0).abs(), || format!("n = {n}"));
        dirs.push(u);
    }
    ck.part("second moment = 1 within 1e-10", w.within(1e-10), w.detail());

    let mut worst_z = 0.0f64;
    let mut details = Vec::new();
    for n in [3usize, 7] {
        let (mean, se) = monte_carlo_second_moment(&dirs[n - 1], MONTE_CARLO_SAMPLES, seed.wrapping_add(n as u64));
        let z = (mean - 1.0).abs() / se;
        worst_z = worst_z.max(z);
        details.push(format!("n = {n}: {mean:.6} +- {se:.2e}"));
    }
    ck.part(
        "second moment within 3 sigma of Monte Carlo (1e6 samples)",
        worst_z <= 3.0,
        format!("{}; worst |z| = {worst_z:.2}", details.join(", ")),
    );

    let mut mismatches = Vec::new();
    let mut cells = 0;
    for n in 1..=7u32 {
        for k in 1..=16 {
            let mu = 0.25 * k as f64;
            let infinite = phi_power(SphereDim::new(n).map_err(err)?, 1.0, mu).map_err(err)? == Extended::PosInfinity;
            cells += 1;
            if infinite != (mu >= 0.5 * (n as f64 - 1.0)) {
                mismatches.push(format!("n = {n}, mu = {mu}"));
            }
        }
    }
    ck.part(
        "phi_power diverges at s = 1 exactly when mu >= (n-1)/2",
        mismatches.is_empty(),
        if mismatches.is_empty() { format!("{cells} (n, mu) cells") } else { mismatches.join("; ") },
    );
    Ok(())
}
