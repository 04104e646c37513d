//! Peierls machinery on the 2-D dual lattice: disagreement edges, the
//! Peierls series, the window bound for dual edges turning on, and the
//! flip-map energy identity.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, RateSpec};
use crate::error::{param, Error, Result};
use crate::lattice::{enumerate_contours, Contour, DualLattice, SiteGraph};
use crate::percolation::{first_time, Crossing, CrossingKind, CrossingQuery};
use crate::rng::{derive_seed, replica_seed, stream_rng, Stream};
use crate::stats::Proportion;

/// Partial-sum cutoff used when the Peierls series diverges.
pub const PEIERLS_CUTOFF: usize = 200;

/// `Y(e) = 1` iff the two sites associated to dual edge `e` disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualEdgeConfig {
    pub present: Vec<bool>,
}

impl DualEdgeConfig {
    pub fn n_present(&self) -> usize {
        self.present.iter().filter(|&&b| b).count()
    }

    /// Number of present edges at dual vertex `v`.
    pub fn degree_at(&self, dual: &DualLattice, v: usize) -> usize {
        dual.incident(v).iter().filter(|&&(_, e)| self.present[e]).count()
    }
}

pub fn dual_config(config: &[bool], dual: &DualLattice) -> Result<DualEdgeConfig> {
    let g = dual.primal();
    if config.len() != g.n_sites() {
        return Err(param(format!("configuration has {} sites, box {}", config.len(), g.n_sites())));
    }
    let present = dual
        .edges()
        .iter()
        .map(|e| g.state(config, e.sites.0) != g.state(config, e.sites.1))
        .collect();
    Ok(DualEdgeConfig { present })
}

/// `inf{β : Σ l 3^(l-1) e^(-2βl) < ∞} = ln 3 / 2`.
pub fn beta_p(d: usize) -> Result<f64> {
    if d != 2 {
        return Err(Error::InvalidDimension(d, "2"));
    }
    Ok(3f64.ln() / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsSum {
    pub value: f64,
    pub converges: bool,
}

/// `Σ_{l >= L} l 3^(l-1) e^(-2βl)`. With `y = 3e^(-2β) < 1` this is
/// `y^L (L - (L-1) y) / (3 (1-y)^2)`; otherwise the partial sum up to
/// [`PEIERLS_CUTOFF`] is returned with `converges = false`.
pub fn peierls_sum(beta: f64, l_start: usize) -> PeierlsSum {
    let l0 = l_start.max(1);
    let y = 3.0 * (-2.0 * beta).exp();
    if y < 1.0 {
        let l = l0 as f64;
        let value = y.powf(l) * (l - (l - 1.0) * y) / (3.0 * (1.0 - y) * (1.0 - y));
        PeierlsSum { value, converges: true }
    } else {
        PeierlsSum { value: peierls_partial(beta, l0, PEIERLS_CUTOFF), converges: false }
    }
}

/// `Σ_{l=L}^{l_max} l 3^(l-1) e^(-2βl)` term by term.
pub fn peierls_partial(beta: f64, l_start: usize, l_max: usize) -> f64 {
    (l_start.max(1)..=l_max)
        .map(|l| l as f64 * ((l as f64 - 1.0) * 3f64.ln() - 2.0 * beta * l as f64).exp())
        .sum()
}

/// `min(1, (4 (1 - e^(-λτ))^(1/4))^k)`.
pub fn lemma81_bound(lambda: f64, tau: f64, k: usize) -> Result<f64> {
    if !(lambda >= 0.0 && tau >= 0.0) {
        return Err(param("lambda and tau must be >= 0"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let q = -(-lambda * tau).exp_m1();
    Ok((4.0 * q.powf(0.25)).powi(k as i32).min(1.0))
}

/// Window length with `4 (1 - e^(-λτ))^(1/4) = ε`.
pub fn window_for_epsilon(eps: f64, lambda: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 4.0 && lambda > 0.0) {
        return Err(param("need 0 < eps < 4 and lambda > 0"));
    }
    Ok(-(-(eps / 4.0).powi(4)).ln_1p() / lambda)
}

/// Parity constraint `X(a) == X(b)` (`equal`) or `X(a) != X(b)`.
#[derive(Clone, Copy, Debug)]
struct Constraint {
    a: usize,
    b: usize,
    equal: bool,
}

/// Modifies `base` minimally per constraint component so that every
/// constraint holds. A component containing a boundary site is forced by
/// it; otherwise its smallest site keeps its value in `base`.
fn solve_constraints(graph: &SiteGraph, base: &[bool], constraints: &[Constraint]) -> Result<Vec<bool>> {
    let n_total = graph.n_total();
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n_total];
    for c in constraints {
        adj[c.a].push((c.b, c.equal));
        adj[c.b].push((c.a, c.equal));
    }
    let mut value: Vec<Option<bool>> = vec![None; n_total];
    let mut out = base.to_vec();
    let mut queue = VecDeque::new();
    // boundary-rooted components first, then the rest in site order
    let roots: Vec<usize> = (graph.n_sites()..n_total).chain(0..graph.n_sites()).collect();
    for r in roots {
        if value[r].is_some() || adj[r].is_empty() {
            continue;
        }
        value[r] = Some(graph.state(base, r));
        queue.push_back(r);
        while let Some(u) = queue.pop_front() {
            let vu = value[u].expect("queued sites are assigned");
            for &(w, equal) in &adj[u] {
                let want = if equal { vu } else { !vu };
                match value[w] {
                    None => {
                        if graph.is_boundary(w) && graph.boundary_spin(w) != Some(want) {
                            return Err(Error::Infeasible("boundary spins contradict the dual-edge pattern".into()));
                        }
                        value[w] = Some(want);
                        queue.push_back(w);
                    }
                    Some(v) if v != want => {
                        return Err(Error::Infeasible("the dual-edge pattern has an odd constraint cycle".into()));
                    }
                    _ => {}
                }
            }
        }
    }
    for s in 0..graph.n_sites() {
        if let Some(v) = value[s] {
            out[s] = v;
        }
    }
    Ok(out)
}

/// A spin configuration with `Y(e) = 0` on `absent` and `Y(e) = 1` on the
/// other edges of `gamma`: the interior of `gamma` is flipped from all-plus,
/// then the remaining constraints are repaired site by site.
pub fn conditioned_init(dual: &DualLattice, gamma: &Contour, absent: &[usize]) -> Result<Vec<bool>> {
    let g = dual.primal();
    let mut base = g.constant(true);
    for s in gamma.enclosed_sites(dual) {
        base[s] = false;
    }
    let constraints = pattern_constraints(dual, gamma, absent)?;
    let x = solve_constraints(g, &base, &constraints)?;
    debug_assert!(check_pattern(dual, &x, gamma, absent));
    Ok(x)
}

fn pattern_constraints(dual: &DualLattice, gamma: &Contour, absent: &[usize]) -> Result<Vec<Constraint>> {
    for e in absent {
        if !gamma.edges.contains(e) {
            return Err(param(format!("dual edge {e} is not on the contour")));
        }
    }
    Ok(gamma
        .edges
        .iter()
        .map(|&e| {
            let (a, b) = dual.edges()[e].sites;
            Constraint { a, b, equal: absent.contains(&e) }
        })
        .collect())
}

fn check_pattern(dual: &DualLattice, x: &[bool], gamma: &Contour, absent: &[usize]) -> bool {
    let g = dual.primal();
    gamma.edges.iter().all(|&e| {
        let (a, b) = dual.edges()[e].sites;
        (g.state(x, a) != g.state(x, b)) != absent.contains(&e)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma81Report {
    pub empirical: Proportion,
    pub bound: f64,
    pub lambda: f64,
    pub tau: f64,
    pub pass: bool,
}

/// Starting from [`conditioned_init`], estimates the probability that every
/// edge of `gamma_prime` is present at some time in `[0, τ]` (each edge at
/// its own time).
pub fn lemma81_mc_check(
    spec: &RateSpec,
    dual: &DualLattice,
    gamma: &Contour,
    gamma_prime: &[usize],
    tau: f64,
    replicas: usize,
    seed: u64,
) -> Result<Lemma81Report> {
    if replicas == 0 {
        return Err(param("replicas must be positive"));
    }
    let g = dual.primal();
    spec.validate(g)?;
    let lambda = spec.lambda_max(g);
    let bound = lemma81_bound(lambda, tau, gamma_prime.len())?;
    let init = conditioned_init(dual, gamma, gamma_prime)?;
    let pairs: Vec<(usize, usize)> = gamma_prime.iter().map(|&e| dual.edges()[e].sites).collect();
    let hits: Vec<bool> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<bool> {
            if pairs.is_empty() {
                return Ok(true);
            }
            if tau == 0.0 {
                return Ok(false);
            }
            let traj = simulate(spec, g, &init, tau, replica_seed(seed, r))?;
            let mut x = init.clone();
            let mut seen = vec![false; pairs.len()];
            let mut remaining = pairs.len();
            for ev in traj.accepted() {
                x[ev.site] = ev.state;
                for (k, &(a, b)) in pairs.iter().enumerate() {
                    if !seen[k] && g.state(&x, a) != g.state(&x, b) {
                        seen[k] = true;
                        remaining -= 1;
                    }
                }
                if remaining == 0 {
                    return Ok(true);
                }
            }
            Ok(false)
        })
        .collect::<Result<_>>()?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    let empirical = Proportion::new(k, replicas as u64);
    let pass = empirical.estimate <= bound + 3.0 * empirical.sigma;
    Ok(Lemma81Report { empirical, bound, lambda, tau, pass })
}

/// `H(σ) = -β Σ_{edges} σ(t)σ(t') - h Σ σ(t)` over a configuration vector.
pub fn hamiltonian(graph: &SiteGraph, config: &[bool], beta: f64, h: f64) -> f64 {
    let spin = |i: usize| if graph.state(config, i) { 1.0 } else { -1.0 };
    let bonds: f64 = graph.edges().iter().map(|&(u, v)| spin(u) * spin(v)).sum();
    let field: f64 = (0..graph.n_sites()).map(spin).sum();
    -beta * bonds - h * field
}

/// The flip map: spins enclosed by `gamma` are reversed.
pub fn flip_inside(dual: &DualLattice, gamma: &Contour, config: &[bool]) -> Vec<bool> {
    let mut out = config.to_vec();
    for s in gamma.enclosed_sites(dual) {
        out[s] = !out[s];
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipMapRow {
    pub k: usize,
    pub samples: usize,
    pub max_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipMapReport {
    pub rows: Vec<FlipMapRow>,
    pub pass: bool,
}

/// For each `k <= |γ|`, draws `samples` configurations with exactly `k`
/// edges of `gamma` absent and checks
/// `H(Tσ) - H(σ) = -2β|γ| + 4βk` by direct evaluation.
pub fn flip_map_energy_check(dual: &DualLattice, gamma: &Contour, beta: f64, samples: usize, seed: u64) -> Result<FlipMapReport> {
    let g = dual.primal();
    if g.n_boundary() == 0 || g.boundary_spins().iter().any(|&b| !b) {
        return Err(Error::Precondition("flip map check needs a plus-boundary box".into()));
    }
    let l = gamma.len();
    let mut rows = Vec::with_capacity(l + 1);
    for k in 0..=l {
        let mut rng = stream_rng(seed, Stream::Aux, k as u64);
        let mut max_error = 0.0f64;
        for _ in 0..samples {
            let mut edges = gamma.edges.clone();
            edges.shuffle(&mut rng);
            let absent = &edges[..k];
            let base: Vec<bool> = (0..g.n_sites()).map(|_| rng.gen::<bool>()).collect();
            let constraints = pattern_constraints(dual, gamma, absent)?;
            let sigma = solve_constraints(g, &base, &constraints)
                .map_err(|e| Error::Infeasible(format!("cannot realise k = {k}: {e}")))?;
            let t_sigma = flip_inside(dual, gamma, &sigma);
            let lhs = hamiltonian(g, &t_sigma, beta, 0.0) - hamiltonian(g, &sigma, beta, 0.0);
            let rhs = -2.0 * beta * l as f64 + 4.0 * beta * k as f64;
            max_error = max_error.max((lhs - rhs).abs());
        }
        rows.push(FlipMapRow { k, samples, max_error });
    }
    let pass = rows.iter().all(|r| r.max_error < 1e-9);
    Ok(FlipMapReport { rows, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourCountRow {
    pub l: usize,
    pub count: usize,
    pub bound: f64,
}

/// Circuit counts around the origin for even `l <= l_max` against `l 3^(l-1)`.
pub fn contour_count_check(dual: &DualLattice, l_max: usize) -> Result<Vec<ContourCountRow>> {
    let set = enumerate_contours(dual, l_max)?;
    if set.truncated {
        return Err(param(format!("box too small for contours of length {l_max}")));
    }
    let counts = set.count_by_length();
    let rows: Vec<ContourCountRow> = (4..=l_max)
        .step_by(2)
        .map(|l| ContourCountRow { l, count: counts[l], bound: l as f64 * 3f64.powi(l as i32 - 1) })
        .collect();
    if let Some(r) = rows.iter().find(|r| r.count as f64 > r.bound) {
        return Err(Error::Precondition(format!("{} contours of length {} exceed the bound", r.count, r.l)));
    }
    Ok(rows)
}

/// Parameters of the window experiment for a plus-boundary Glauber box:
/// `β' = β(2 - δ1)/2`, `N = ⌈4/δ1⌉`, `ε = e^(-Nβ(2-δ1))`,
/// `τ` with `ε = 4(1 - e^(-λτ))^(1/4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsRecipe {
    pub beta: f64,
    pub delta1: f64,
    pub beta_prime: f64,
    pub n: usize,
    pub eps: f64,
    pub lambda: f64,
    pub tau: f64,
}

impl PeierlsRecipe {
    pub fn new(beta: f64, lambda: f64, delta1: f64) -> Result<Self> {
        let bp = beta_p(2)?;
        if beta <= bp {
            return Err(param(format!("beta = {beta} must exceed {bp}")));
        }
        let beta_prime = beta * (2.0 - delta1) / 2.0;
        if !(delta1 > 0.0 && beta_prime > bp) {
            return Err(param(format!("delta1 = {delta1} must be positive with beta' > beta_p")));
        }
        let n = (4.0 / delta1).ceil() as usize;
        let eps = (-(n as f64) * beta * (2.0 - delta1)).exp();
        let tau = window_for_epsilon(eps, lambda)?;
        Ok(PeierlsRecipe { beta, delta1, beta_prime, n, eps, lambda, tau })
    }

    /// `3 Σ_{l >= L} l 3^(l-1) e^(-2β'l)`.
    pub fn bound(&self, l: usize) -> f64 {
        3.0 * peierls_sum(self.beta_prime, l).value
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCrossingRow {
    pub l: usize,
    pub estimate: Proportion,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCrossingReport {
    pub recipe: PeierlsRecipe,
    pub burnin: f64,
    pub replicas: usize,
    pub seed: u64,
    pub rows: Vec<WindowCrossingRow>,
}

/// Monte Carlo of "the origin is joined to `∂Λ_L` by minus sites at some
/// time of `[0, τ]`" for a plus-boundary Glauber box at `h = 0`, with τ from
/// [`PeierlsRecipe`]. Each replica burns in from all-plus for `burnin`.
pub fn peierls_window_experiment(
    graph: &SiteGraph,
    beta: f64,
    delta1: f64,
    ls: &[usize],
    replicas: usize,
    burnin: f64,
    seed: u64,
) -> Result<WindowCrossingReport> {
    if replicas == 0 {
        return Err(param("replicas must be positive"));
    }
    if graph.n_boundary() == 0 || graph.boundary_spins().iter().any(|&b| !b) {
        return Err(Error::Precondition("needs a plus-boundary box".into()));
    }
    let spec = RateSpec::Glauber { beta, h: 0.0 };
    let recipe = PeierlsRecipe::new(beta, spec.lambda_max(graph), delta1)?;
    let queries = ls
        .iter()
        .map(|&l| CrossingQuery::new(graph, Crossing { state: false, kind: CrossingKind::OriginToBoundary { l } }))
        .collect::<Result<Vec<_>>>()?;
    let outcomes: Vec<Vec<bool>> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<Vec<bool>> {
            let rs = replica_seed(seed, r);
            let start = if burnin > 0.0 {
                simulate(&spec, graph, &graph.constant(true), burnin, derive_seed(rs, Stream::Init, 0))?.final_config()
            } else {
                graph.constant(true)
            };
            let traj = simulate(&spec, graph, &start, recipe.tau, derive_seed(rs, Stream::Aux, 0))?;
            queries
                .iter()
                .map(|q| Ok(first_time(&traj, graph, q, recipe.tau, true)?.is_some()))
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows = ls
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let k = outcomes.iter().filter(|o| o[i]).count() as u64;
            let estimate = Proportion::new(k, replicas as u64);
            let bound = recipe.bound(l);
            WindowCrossingRow { l, estimate, bound, pass: estimate.estimate <= bound + 3.0 * estimate.sigma }
        })
        .collect();
    Ok(WindowCrossingReport { recipe, burnin, replicas, seed, rows })
}
