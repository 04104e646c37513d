//! Wired random-cluster model (q = 2) and its Edwards–Sokal coupling with
//! the plus-boundary Ising model; product-measure domination formulas for
//! measures with high conditional densities; site- versus edge-thinning.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exact::{dominates, rc_free_edges, rc_wired_measure, ExactMeasure, MAX_VARS};
use crate::lattice::SiteGraph;
use crate::movability::{thin, Direction};
use crate::rng::{replica_seed, stream_rng, Stream};
use crate::stats::Proportion;
use crate::unionfind::UnionFind;

pub const MAX_ENUM_EDGES: usize = 12;
pub const MIN_ACCEPTANCE: f64 = 1e-6;
pub const MAX_REJECTION_ATTEMPTS: u64 = 10_000_000;
pub const DEFAULT_SWEEPS: usize = 200;

/// Spins on the interior sites and states of the free edges (in
/// `graph.edges()` order). Ring sites are `+1` and ring edges open.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinEdgePair {
    pub x: Vec<bool>,
    pub y: Vec<bool>,
}

impl SpinEdgePair {
    /// No open edge joins two sites of different spin.
    pub fn is_consistent(&self, graph: &SiteGraph) -> bool {
        graph
            .edges()
            .iter()
            .zip(&self.y)
            .all(|(&(a, b), &open)| !open || graph.state(&self.x, a) == graph.state(&self.x, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EsMode {
    ExactEnum,
    Rejection,
    Gibbs { sweeps: usize },
}

fn require_wired(graph: &SiteGraph) -> Result<()> {
    if graph.n_boundary() == 0 || graph.boundary_spins().iter().any(|&b| !b) {
        return Err(Error::Precondition("needs a plus (wired) boundary".into()));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(param(format!("edge density {p} outside [0,1]")));
    }
    Ok(())
}

/// `β = -ln(1-p)/2`.
pub fn es_beta(p: f64) -> f64 {
    -(-p).ln_1p() / 2.0
}

/// Joint law on interior spins (bits `0..n`) and free edges (bits `n..n+m`).
pub fn es_joint_measure(graph: &SiteGraph, p: f64) -> Result<ExactMeasure> {
    require_wired(graph)?;
    check_p(p)?;
    let edges = rc_free_edges(graph);
    let (n, m) = (graph.n_sites(), edges.len());
    if m > MAX_ENUM_EDGES || n + m > MAX_VARS {
        return Err(Error::SizeCap { what: "edwards-sokal free edges", size: m, cap: MAX_ENUM_EDGES });
    }
    let mut w = vec![0.0; 1usize << (n + m)];
    for xm in 0..1usize << n {
        let x: Vec<bool> = (0..n).map(|i| xm >> i & 1 == 1).collect();
        for ym in 0..1usize << m {
            let mut weight = 1.0;
            for (k, &(a, b)) in edges.iter().enumerate() {
                let open = ym >> k & 1 == 1;
                if open && graph.state(&x, a) != graph.state(&x, b) {
                    weight = 0.0;
                    break;
                }
                weight *= if open { p } else { 1.0 - p };
            }
            w[xm | ym << n] = weight;
        }
    }
    let mut labels = ExactMeasure::default_labels("s", n);
    labels.extend(edges.iter().map(|(a, b)| format!("e{a}-{b}")));
    ExactMeasure::from_weights(labels, w)
}

pub fn es_sample(graph: &SiteGraph, p: f64, mode: EsMode, seed: u64) -> Result<SpinEdgePair> {
    require_wired(graph)?;
    check_p(p)?;
    let mut rng = stream_rng(seed, Stream::Aux, 0);
    let edges = rc_free_edges(graph);
    let n = graph.n_sites();
    match mode {
        EsMode::ExactEnum => {
            let mu = es_joint_measure(graph, p)?;
            let z = mu.sample(&mut rng);
            Ok(SpinEdgePair {
                x: (0..n).map(|i| z >> i & 1 == 1).collect(),
                y: (0..edges.len()).map(|k| z >> (n + k) & 1 == 1).collect(),
            })
        }
        EsMode::Rejection => {
            for _ in 0..MAX_REJECTION_ATTEMPTS {
                let pair = SpinEdgePair {
                    x: (0..n).map(|_| rng.gen::<bool>()).collect(),
                    y: (0..edges.len()).map(|_| rng.gen::<f64>() < p).collect(),
                };
                if pair.is_consistent(graph) {
                    return Ok(pair);
                }
            }
            Err(Error::Precondition(format!(
                "rejection sampler: no acceptance in {MAX_REJECTION_ATTEMPTS} attempts (rate below {MIN_ACCEPTANCE})"
            )))
        }
        EsMode::Gibbs { sweeps } => {
            let mut pair = SpinEdgePair { x: vec![true; n], y: vec![false; edges.len()] };
            let incident = incident_edges(graph, &edges);
            for _ in 0..sweeps {
                es_gibbs_sweep(graph, &edges, &incident, p, &mut pair, &mut rng);
            }
            Ok(pair)
        }
    }
}

fn incident_edges(graph: &SiteGraph, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut inc = vec![Vec::new(); graph.n_sites()];
    for (k, &(a, b)) in edges.iter().enumerate() {
        for s in [a, b] {
            if s < graph.n_sites() {
                inc[s].push(k);
            }
        }
    }
    inc
}

/// One systematic scan: every site given the rest, then every edge.
fn es_gibbs_sweep(
    graph: &SiteGraph,
    edges: &[(usize, usize)],
    incident: &[Vec<usize>],
    p: f64,
    pair: &mut SpinEdgePair,
    rng: &mut ChaCha8Rng,
) {
    for s in 0..graph.n_sites() {
        let u: f64 = rng.gen();
        let forced = incident[s].iter().find(|&&k| pair.y[k]).map(|&k| {
            let (a, b) = edges[k];
            let other = if a == s { b } else { a };
            graph.state(&pair.x, other)
        });
        pair.x[s] = forced.unwrap_or(u < 0.5);
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        let u: f64 = rng.gen();
        pair.y[k] = graph.state(&pair.x, a) == graph.state(&pair.x, b) && u < p;
    }
}

/// `ν̃(η(e) = 1 | rest)`: `p` if the endpoints of `e` are joined by open
/// edges other than `e` (ring edges always open), else `p/(2-p)`.
pub fn rc_edge_conditional(y: &[bool], e: usize, p: f64, graph: &SiteGraph) -> Result<f64> {
    let edges = rc_free_edges(graph);
    if y.len() != edges.len() || e >= edges.len() {
        return Err(param("edge configuration does not match the free edges"));
    }
    let mut uf = UnionFind::new(graph.n_total());
    Ok(edge_conditional(&edges, &graph.ring_edges(), y, e, p, &mut uf))
}

fn edge_conditional(edges: &[(usize, usize)], ring: &[(usize, usize)], y: &[bool], e: usize, p: f64, uf: &mut UnionFind) -> f64 {
    uf.reset();
    for &(a, b) in ring {
        uf.union(a, b);
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        if k != e && y[k] {
            uf.union(a, b);
        }
    }
    let (a, b) = edges[e];
    if uf.connected(a, b) { p } else { p / (2.0 - p) }
}

/// Heat-bath over the free edges in fixed order, from all edges open.
pub fn rc_gibbs_sampler(graph: &SiteGraph, p: f64, sweeps: usize, seed: u64) -> Result<Vec<bool>> {
    require_wired(graph)?;
    check_p(p)?;
    let edges = rc_free_edges(graph);
    let ring = graph.ring_edges();
    let mut uf = UnionFind::new(graph.n_total());
    let mut rng = stream_rng(seed, Stream::Aux, 1);
    let mut y = vec![true; edges.len()];
    for _ in 0..sweeps {
        for e in 0..edges.len() {
            let q = edge_conditional(&edges, &ring, &y, e, p, &mut uf);
            y[e] = rng.gen::<f64>() < q;
        }
    }
    Ok(y)
}

fn lss_threshold(delta: usize) -> f64 {
    let d = delta as f64;
    (d - 1.0).powf(d - 1.0) / d.powf(d)
}

/// `ρ = (1 - q^(1/Δ)/(Δ-1)^((Δ-1)/Δ)) (1 - (q(Δ-1))^(1/Δ))`, valid for
/// `q <= (Δ-1)^(Δ-1)/Δ^Δ`.
pub fn lss_rho(q: f64, delta: usize) -> Result<f64> {
    if delta == 0 {
        return Err(param("degree must be >= 1"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(param(format!("q = {q} outside [0,1]")));
    }
    let thr = lss_threshold(delta);
    if q > thr * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!("q = {q} above the threshold {thr} for degree {delta}")));
    }
    let d = delta as f64;
    let a = 1.0 - q.powf(1.0 / d) / (d - 1.0).powf((d - 1.0) / d);
    let b = 1.0 - (q * (d - 1.0)).powf(1.0 / d);
    Ok(a * b)
}

/// `(1-α)(1-r)^(Δ-1) >= q` and `(1-α)α^(Δ-1) >= q`.
pub fn lss_feasible(alpha: f64, r: f64, q: f64, delta: usize) -> bool {
    let k = delta.saturating_sub(1) as i32;
    (1.0 - alpha) * (1.0 - r).powi(k) >= q && (1.0 - alpha) * alpha.powi(k) >= q
}

/// Smallest `p` (within 1e-9) with `lss_rho(1-p, Δ) >= ρ`.
pub fn cor92_p(rho_target: f64, delta: usize) -> Result<f64> {
    if !(rho_target > 0.0 && rho_target < 1.0) {
        return Err(param(format!("target density {rho_target} outside (0,1)")));
    }
    let thr = lss_threshold(delta);
    let p_min = 1.0 - thr;
    if lss_rho(thr, delta)? >= rho_target {
        return Ok(p_min);
    }
    let (mut lo, mut hi) = (p_min, 1.0);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if lss_rho(1.0 - mid, delta)? >= rho_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `ε' = 1 - √p` with `p = cor92_p(1-ε, 2(Δ-1))`, so that an edge survives
/// both endpoints with probability `(1-ε')^2 = p`.
pub fn lemma93_epsilon_prime(eps: f64, delta_graph: usize) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon {eps} outside (0,1)")));
    }
    if delta_graph < 2 {
        return Err(param("graph degree must be >= 2"));
    }
    let p = cor92_p(1.0 - eps, 2 * (delta_graph - 1))?;
    Ok(1.0 - p.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThinnedPair {
    /// Open edges closed independently with probability ε.
    pub a: Vec<bool>,
    /// Sites set to -1 independently with probability ε'.
    pub b_x: Vec<bool>,
    /// Edges kept only when neither endpoint was selected.
    pub b_y: Vec<bool>,
}

pub fn lemma93_transform(graph: &SiteGraph, pair: &SpinEdgePair, eps: f64, eps_prime: f64, seed: u64) -> Result<ThinnedPair> {
    if !(0.0..=1.0).contains(&eps) || !(0.0..=1.0).contains(&eps_prime) {
        return Err(param("epsilon values must lie in [0,1]"));
    }
    let edges = rc_free_edges(graph);
    let mut rng = stream_rng(seed, Stream::Aux, 2);
    let a = pair.y.iter().map(|&o| o && rng.gen::<f64>() >= eps).collect();
    let selected: Vec<bool> = (0..graph.n_sites()).map(|_| rng.gen::<f64>() < eps_prime).collect();
    let b_x = pair.x.iter().zip(&selected).map(|(&x, &s)| x && !s).collect();
    let hit = |s: usize| s < graph.n_sites() && selected[s];
    let b_y = edges.iter().zip(&pair.y).map(|(&(u, v), &o)| o && !hit(u) && !hit(v)).collect();
    Ok(ThinnedPair { a, b_x, b_y })
}

/// Exact law of the site-thinned edge process `Y ∧ M(S)` where each
/// interior site is kept with probability `1-ε'`.
pub fn site_thinned_edge_law(graph: &SiteGraph, nu: &ExactMeasure, eps_prime: f64) -> Result<ExactMeasure> {
    let edges = rc_free_edges(graph);
    let (n, m) = (graph.n_sites(), edges.len());
    if nu.n_vars() != m {
        return Err(Error::VariableMismatch("edge law does not match the free edges".into()));
    }
    if n > MAX_VARS {
        return Err(Error::SizeCap { what: "sites", size: n, cap: MAX_VARS });
    }
    let mut out = vec![0.0; 1usize << m];
    for kept in 0..1usize << n {
        let k = kept.count_ones() as i32;
        let w = (1.0 - eps_prime).powi(k) * eps_prime.powi(n as i32 - k);
        if w == 0.0 {
            continue;
        }
        let alive = |s: usize| s >= n || kept >> s & 1 == 1;
        let mask = edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| alive(a) && alive(b))
            .fold(0usize, |acc, (k, _)| acc | 1 << k);
        for (y, &py) in nu.probs().iter().enumerate() {
            out[y & mask] += w * py;
        }
    }
    ExactMeasure::from_probs(nu.labels().to_vec(), out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Lemma93Details {
    Exact { witness: Option<Vec<usize>>, witness_gap: Option<f64> },
    Statistical { edge_thinned: Proportion, site_thinned: Proportion, sweeps: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma93Report {
    pub pass: bool,
    pub eps: f64,
    pub eps_prime: f64,
    pub details: Lemma93Details,
}

/// Whether the edge-thinned law is dominated by the site-thinned one.
/// Exact on the edge state space for at most [`MAX_ENUM_EDGES`] free edges;
/// otherwise compares `P(0 <-> ring)` under both on shared samples.
pub fn lemma93_check(graph: &SiteGraph, p: f64, eps: f64, eps_prime: f64, replicas: usize, seed: u64) -> Result<Lemma93Report> {
    require_wired(graph)?;
    let m = rc_free_edges(graph).len();
    if m <= MAX_ENUM_EDGES {
        let nu = rc_wired_measure(graph, p)?;
        let a = thin(&nu, eps, Direction::Down)?;
        let b = site_thinned_edge_law(graph, &nu, eps_prime)?;
        let cert = dominates(&a, &b)?;
        return Ok(Lemma93Report {
            pass: cert.holds,
            eps,
            eps_prime,
            details: Lemma93Details::Exact { witness: cert.witness, witness_gap: cert.witness_gap },
        });
    }
    if replicas == 0 {
        return Err(param("replicas must be positive"));
    }
    let origin = graph.origin().ok_or_else(|| param("box does not contain the origin"))?;
    let edges = rc_free_edges(graph);
    let ring = graph.ring_edges();
    let connected = |y: &[bool]| {
        let mut uf = UnionFind::new(graph.n_total());
        for &(a, b) in &ring {
            uf.union(a, b);
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            if y[k] {
                uf.union(a, b);
            }
        }
        uf.connected(origin, graph.n_sites())
    };
    let sweeps = DEFAULT_SWEEPS;
    let hits: Vec<(bool, bool)> = (0..replicas)
        .into_par_iter()
        .map(|r| -> Result<(bool, bool)> {
            let rs = replica_seed(seed, r);
            let pair = es_sample(graph, p, EsMode::Gibbs { sweeps }, rs)?;
            let t = lemma93_transform(graph, &pair, eps, eps_prime, rs)?;
            Ok((connected(&t.a), connected(&t.b_y)))
        })
        .collect::<Result<_>>()?;
    let n = replicas as u64;
    let ka = hits.iter().filter(|h| h.0).count() as u64;
    let kb = hits.iter().filter(|h| h.1).count() as u64;
    let (pa, pb) = (Proportion::new(ka, n), Proportion::new(kb, n));
    let slack = 3.0 * (pa.sigma.powi(2) + pb.sigma.powi(2)).sqrt();
    Ok(Lemma93Report {
        pass: pb.estimate >= pa.estimate - slack,
        eps,
        eps_prime,
        details: Lemma93Details::Statistical { edge_thinned: pa, site_thinned: pb, sweeps },
    })
}
