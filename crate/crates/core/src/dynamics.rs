//! Spin systems in continuous time via the graphical representation.
//!
//! Every interior site carries a Poisson clock of rate `λ_max` (the largest
//! flip rate over all sites and neighbourhoods). At each arrival the site's
//! own stream supplies two uniforms `(U, U')`; the site flips iff
//! `U < C(s, σ) / λ_max`. A site's stream is consumed in the fixed order
//! `gap, U, U', gap, U, U', ...`, so a run is a pure function of
//! `(seed, graph, spec, horizon)`.
//!
//! Configurations are `Vec<bool>` over interior sites: `true` is spin +1
//! for Glauber rates and "occupied" for contact rates.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exact::{gibbs_measure, ExactMeasure};
use crate::lattice::SiteGraph;
use crate::rng::{derive_seed, stream_rng, Stream};

pub const MAX_BALANCE_SITES: usize = 14;
pub const MAX_GENERATOR_SITES: usize = 12;
pub const DEFAULT_BURNIN: f64 = 200.0;

/// Flip-rate families. Every family is nearest-neighbour and depends only on
/// the site's own state and the number of occupied (+1) neighbours, with
/// boundary neighbours contributing their fixed spin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RateSpec {
    /// `exp(-β σ(s) Σ_t σ(t) - h σ(s))`.
    Glauber { beta: f64, h: f64 },
    /// Recovery at rate 1, infection at rate `λ k`.
    Contact { lambda: f64 },
    /// Recovery at rate `a`, infection at rate `b k`.
    ScaledContact { a: f64, b: f64 },
    /// `up_rates[k]`: rate of `0 -> 1` with `k` occupied neighbours;
    /// `down_rates[k]`: rate of `1 -> 0`.
    Custom { up_rates: Vec<f64>, down_rates: Vec<f64> },
}

impl RateSpec {
    /// Rate at a site in state `on` with `up` occupied neighbours out of `deg`.
    pub fn rate_from_counts(&self, on: bool, up: usize, deg: usize) -> f64 {
        match self {
            RateSpec::Glauber { beta, h } => {
                let s = if on { 1.0 } else { -1.0 };
                let field = 2.0 * up as f64 - deg as f64;
                (-beta * s * field - h * s).exp()
            }
            RateSpec::Contact { lambda } => {
                if on { 1.0 } else { lambda * up as f64 }
            }
            RateSpec::ScaledContact { a, b } => {
                if on { *a } else { b * up as f64 }
            }
            RateSpec::Custom { up_rates, down_rates } => {
                let table = if on { down_rates } else { up_rates };
                table.get(up).copied().unwrap_or(f64::NAN)
            }
        }
    }

    /// Whether the state space is `{-1,+1}` (as opposed to `{0,1}`).
    pub fn is_spin(&self) -> bool {
        matches!(self, RateSpec::Glauber { .. })
    }

    pub fn validate(&self, graph: &SiteGraph) -> Result<()> {
        match self {
            RateSpec::Glauber { beta, h } if !(beta.is_finite() && h.is_finite()) => {
                return Err(param("glauber parameters must be finite"));
            }
            RateSpec::Contact { lambda } if !(lambda.is_finite() && *lambda >= 0.0) => {
                return Err(param(format!("contact rate {lambda} must be finite and >= 0")));
            }
            RateSpec::ScaledContact { a, b } if !(a.is_finite() && b.is_finite() && *a >= 0.0 && *b >= 0.0) => {
                return Err(param("scaled contact rates must be finite and >= 0"));
            }
            RateSpec::Custom { up_rates, down_rates } => {
                let need = graph.degree_bound() + 1;
                if up_rates.len() < need || down_rates.len() < need {
                    return Err(param(format!("custom rate tables need {need} entries")));
                }
                if up_rates.iter().chain(down_rates).any(|r| !(r.is_finite() && *r >= 0.0)) {
                    return Err(param("custom rates must be finite and >= 0"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn degrees(graph: &SiteGraph) -> Vec<usize> {
        let mut d: Vec<usize> = graph.adjacency().iter().map(Vec::len).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// `sup_{s,σ} C(s,σ)` over the sites of `graph`.
    pub fn lambda_max(&self, graph: &SiteGraph) -> f64 {
        self.extreme(graph, None, f64::max, f64::NEG_INFINITY).max(0.0)
    }

    /// `sup` of the rate over sites in state `on`.
    pub fn sup_rate(&self, graph: &SiteGraph, on: bool) -> f64 {
        self.extreme(graph, Some(on), f64::max, f64::NEG_INFINITY)
    }

    /// `inf` of the rate over sites in state `on`.
    pub fn inf_rate(&self, graph: &SiteGraph, on: bool) -> f64 {
        self.extreme(graph, Some(on), f64::min, f64::INFINITY)
    }

    fn extreme(&self, graph: &SiteGraph, state: Option<bool>, pick: fn(f64, f64) -> f64, init: f64) -> f64 {
        let mut acc = init;
        for deg in Self::degrees(graph) {
            for up in 0..=deg {
                for on in [false, true] {
                    if state.is_none_or(|s| s == on) {
                        acc = pick(acc, self.rate_from_counts(on, up, deg));
                    }
                }
            }
        }
        acc
    }

    /// Positive supremum in both states at every site.
    pub fn nondegenerate(&self, graph: &SiteGraph) -> bool {
        self.sup_rate(graph, false) > 0.0 && self.sup_rate(graph, true) > 0.0
    }

    /// Custom table reproducing Glauber rates for sites of degree `deg`.
    pub fn glauber_table(beta: f64, h: f64, deg: usize) -> RateSpec {
        let g = RateSpec::Glauber { beta, h };
        RateSpec::Custom {
            up_rates: (0..=deg).map(|k| g.rate_from_counts(false, k, deg)).collect(),
            down_rates: (0..=deg).map(|k| g.rate_from_counts(true, k, deg)).collect(),
        }
    }
}

/// Number of occupied neighbours of `s` and its degree.
#[inline]
pub fn neighbour_counts(graph: &SiteGraph, s: usize, config: &[bool]) -> (usize, usize) {
    let nbrs = graph.neighbors(s);
    (nbrs.iter().filter(|&&t| graph.state(config, t)).count(), nbrs.len())
}

/// `C(s, σ)` for an interior site.
pub fn rate_eval(spec: &RateSpec, graph: &SiteGraph, s: usize, config: &[bool]) -> f64 {
    let (up, deg) = neighbour_counts(graph, s, config);
    spec.rate_from_counts(config[s], up, deg)
}

pub(crate) fn mask_to_config(x: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| x >> i & 1 == 1).collect()
}

pub fn config_to_mask(config: &[bool]) -> usize {
    config.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as usize) << i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailedBalanceReport {
    pub holds: bool,
    pub max_relative_error: f64,
    /// The Glauber-form condition, evaluated for Glauber specs.
    pub eq11: Option<bool>,
}

const BALANCE_TOL: f64 = 1e-10;

/// `C(s,σ) μ(σ) = C(s,σ^s) μ(σ^s)` for every site and configuration.
pub fn detailed_balance_check(spec: &RateSpec, graph: &SiteGraph, mu: &ExactMeasure) -> Result<DetailedBalanceReport> {
    let n = graph.n_sites();
    if n > MAX_BALANCE_SITES {
        return Err(Error::SizeCap { what: "detailed balance sites", size: n, cap: MAX_BALANCE_SITES });
    }
    if mu.n_vars() != n {
        return Err(Error::VariableMismatch(format!("measure has {} variables, graph {n} sites", mu.n_vars())));
    }
    spec.validate(graph)?;
    let mut worst: f64 = 0.0;
    let mut config = vec![false; n];
    for x in 0..1usize << n {
        for (i, c) in config.iter_mut().enumerate() {
            *c = x >> i & 1 == 1;
        }
        for s in (0..n).filter(|s| x >> s & 1 == 0) {
            let a = rate_eval(spec, graph, s, &config) * mu.prob(x);
            config[s] = true;
            let b = rate_eval(spec, graph, s, &config) * mu.prob(x | 1 << s);
            config[s] = false;
            let scale = a.abs().max(b.abs());
            if scale > 0.0 {
                worst = worst.max((a - b).abs() / scale);
            }
        }
    }
    let eq11 = match spec {
        RateSpec::Glauber { beta, h } => Some(eq11_check(spec, graph, *beta, *h)?),
        _ => None,
    };
    Ok(DetailedBalanceReport { holds: worst <= BALANCE_TOL, max_relative_error: worst, eq11 })
}

/// `C(s,σ) exp(β Σ_t σ(t)σ(s) + h σ(s))` does not depend on `σ(s)`.
pub fn eq11_check(spec: &RateSpec, graph: &SiteGraph, beta: f64, h: f64) -> Result<bool> {
    spec.validate(graph)?;
    for deg in RateSpec::degrees(graph) {
        for up in 0..=deg {
            let field = 2.0 * up as f64 - deg as f64;
            let plus = spec.rate_from_counts(true, up, deg) * (beta * field + h).exp();
            let minus = spec.rate_from_counts(false, up, deg) * (-beta * field - h).exp();
            if (plus - minus).abs() > BALANCE_TOL * plus.abs().max(minus.abs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sparse generator: `Q[x][y] = C(s, x)` for `y = x` with bit `s` flipped.
#[derive(Clone, Debug)]
pub struct Generator {
    pub n_sites: usize,
    pub off_diagonal: Vec<Vec<(usize, f64)>>,
}

impl Generator {
    pub fn size(&self) -> usize {
        self.off_diagonal.len()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        if x == y {
            -self.exit_rate(x)
        } else {
            self.off_diagonal[x].iter().find(|(t, _)| *t == y).map_or(0.0, |(_, r)| *r)
        }
    }

    pub fn exit_rate(&self, x: usize) -> f64 {
        self.off_diagonal[x].iter().map(|(_, r)| r).sum()
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        self.off_diagonal[x].iter().map(|(_, r)| r).sum::<f64>() - self.exit_rate(x)
    }

    /// `(μQ)(y) = Σ_x μ(x) Q[x][y]`.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.size()];
        for (x, row) in self.off_diagonal.iter().enumerate() {
            let mut exit = 0.0;
            for &(y, r) in row {
                out[y] += mu[x] * r;
                exit += r;
            }
            out[x] -= mu[x] * exit;
        }
        out
    }
}

pub fn generator_matrix(spec: &RateSpec, graph: &SiteGraph) -> Result<Generator> {
    let n = graph.n_sites();
    if n > MAX_GENERATOR_SITES {
        return Err(Error::SizeCap { what: "generator sites", size: n, cap: MAX_GENERATOR_SITES });
    }
    spec.validate(graph)?;
    let off_diagonal = (0..1usize << n)
        .map(|x| {
            let config = mask_to_config(x, n);
            (0..n)
                .filter_map(|s| {
                    let r = rate_eval(spec, graph, s, &config);
                    (r > 0.0).then_some((x ^ 1 << s, r))
                })
                .collect()
        })
        .collect();
    Ok(Generator { n_sites: n, off_diagonal })
}

/// A clock arrival with its two marks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub t: f64,
    pub site: usize,
    pub u: f64,
    pub u2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending {
    t: f64,
    site: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t.total_cmp(&other.t).then(self.site.cmp(&other.site))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Merged per-site Poisson clocks over `[0, horizon]`, yielded in time order.
pub struct Clocks {
    heap: BinaryHeap<Reverse<Pending>>,
    rngs: Vec<ChaCha8Rng>,
    rate: f64,
    horizon: f64,
}

impl Clocks {
    pub fn new(n_sites: usize, rate: f64, horizon: f64, seed: u64) -> Self {
        let mut rngs: Vec<ChaCha8Rng> = (0..n_sites).map(|s| stream_rng(seed, Stream::SiteClock, s as u64)).collect();
        let mut heap = BinaryHeap::new();
        if rate > 0.0 {
            for (site, rng) in rngs.iter_mut().enumerate() {
                let t = exp_gap(rng, rate);
                if t <= horizon {
                    heap.push(Reverse(Pending { t, site }));
                }
            }
        }
        Clocks { heap, rngs, rate, horizon }
    }
}

fn exp_gap(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

impl Iterator for Clocks {
    type Item = Arrival;

    fn next(&mut self) -> Option<Arrival> {
        let Reverse(Pending { t, site }) = self.heap.pop()?;
        let rng = &mut self.rngs[site];
        let u: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let next = t + exp_gap(rng, self.rate);
        if next <= self.horizon {
            self.heap.push(Reverse(Pending { t: next, site }));
        }
        Some(Arrival { t, site, u, u2 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub site: usize,
    /// State of the site after the arrival.
    pub state: bool,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub init: Vec<bool>,
    pub events: Vec<Event>,
    pub horizon: f64,
    pub seed: u64,
    pub lambda_max: f64,
    /// Whether rejected arrivals are kept in `events`.
    pub all_arrivals: bool,
}

impl Trajectory {
    pub fn accepted(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.accepted)
    }

    pub fn n_accepted(&self) -> usize {
        self.accepted().count()
    }

    /// Configuration at time `t` (right-continuous).
    pub fn config_at(&self, t: f64) -> Vec<bool> {
        let mut c = self.init.clone();
        for e in self.accepted().take_while(|e| e.t <= t) {
            c[e.site] = e.state;
        }
        c
    }

    pub fn final_config(&self) -> Vec<bool> {
        self.config_at(self.horizon)
    }
}

/// Runs the graphical representation from `init` on `[0, horizon]`,
/// recording accepted flips only.
pub fn simulate(spec: &RateSpec, graph: &SiteGraph, init: &[bool], horizon: f64, seed: u64) -> Result<Trajectory> {
    run(spec, graph, init, horizon, seed, false)
}

/// As [`simulate`], keeping rejected arrivals too.
pub fn simulate_full(spec: &RateSpec, graph: &SiteGraph, init: &[bool], horizon: f64, seed: u64) -> Result<Trajectory> {
    run(spec, graph, init, horizon, seed, true)
}

fn run(spec: &RateSpec, graph: &SiteGraph, init: &[bool], horizon: f64, seed: u64, all: bool) -> Result<Trajectory> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(param(format!("horizon {horizon} must be positive and finite")));
    }
    if init.len() != graph.n_sites() {
        return Err(param(format!("initial configuration has {} sites, graph {}", init.len(), graph.n_sites())));
    }
    spec.validate(graph)?;
    let lambda = spec.lambda_max(graph);
    let mut config = init.to_vec();
    let mut events = Vec::new();
    for a in Clocks::new(graph.n_sites(), lambda, horizon, seed) {
        let c = rate_eval(spec, graph, a.site, &config);
        let flip = a.u < c / lambda;
        if flip {
            config[a.site] = !config[a.site];
        }
        if flip || all {
            events.push(Event { t: a.t, site: a.site, state: config[a.site], accepted: flip });
        }
    }
    Ok(Trajectory { init: init.to_vec(), events, horizon, seed, lambda_max: lambda, all_arrivals: all })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitMode {
    Exact,
    Burnin { t_b: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryInit {
    pub config: Vec<bool>,
    /// Burn-in draws only approximate the stationary law.
    pub approximate: bool,
}

/// Draws an initial configuration from (an approximation of) the stationary
/// law. Exact mode samples the Gibbs vector of a Glauber spec; burn-in runs
/// the dynamics from all-ones for `t_b`.
pub fn sample_stationary_init(spec: &RateSpec, graph: &SiteGraph, mode: InitMode, seed: u64) -> Result<StationaryInit> {
    match mode {
        InitMode::Exact => {
            let RateSpec::Glauber { beta, h } = spec else {
                return Err(Error::Precondition("exact stationary draws exist only for glauber rates".into()));
            };
            let mu = gibbs_measure(graph, *beta, *h)?;
            Ok(StationaryInit { config: sample_config(&mu, graph.n_sites(), seed), approximate: false })
        }
        InitMode::Burnin { t_b } => {
            let ones = graph.constant(true);
            if t_b < 0.0 || !t_b.is_finite() {
                return Err(param(format!("burn-in time {t_b} must be finite and >= 0")));
            }
            if t_b == 0.0 {
                return Ok(StationaryInit { config: ones, approximate: true });
            }
            let traj = simulate(spec, graph, &ones, t_b, derive_seed(seed, Stream::Init, 0))?;
            Ok(StationaryInit { config: traj.final_config(), approximate: true })
        }
    }
}

/// Draws from an exact measure with the `Init` stream of `seed`.
pub fn sample_config(mu: &ExactMeasure, n: usize, seed: u64) -> Vec<bool> {
    let mut rng = stream_rng(seed, Stream::Init, 1);
    mask_to_config(mu.sample(&mut rng), n)
}

/// Sitewise `(inf, sup)` of the trajectory over `[t0, t0 + delta]`.
pub fn traj_extrema(traj: &Trajectory, t0: f64, delta: f64) -> Result<(Vec<bool>, Vec<bool>)> {
    let t1 = t0 + delta;
    if !(t0 >= 0.0 && delta >= 0.0 && t1 <= traj.horizon * (1.0 + 1e-12)) {
        return Err(param(format!("window [{t0}, {t1}] outside [0, {}]", traj.horizon)));
    }
    let mut c = traj.config_at(t0);
    let mut lo = c.clone();
    let mut hi = c.clone();
    for e in traj.accepted().filter(|e| e.t > t0 && e.t <= t1) {
        c[e.site] = e.state;
        lo[e.site] &= e.state;
        hi[e.site] |= e.state;
    }
    Ok((lo, hi))
}
