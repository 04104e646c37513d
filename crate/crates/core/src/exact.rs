//! Dense measures on `{0,1}^n`, `n <= 20`.
//!
//! Configuration `x` is a bitmask: bit `i` set means variable `i` is 1 (or
//! spin +1). `x ⪯ y` is bitwise inclusion.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::flow::FlowNetwork;
use crate::lattice::SiteGraph;
use crate::rng::{stream_rng, Stream};
use crate::unionfind::UnionFind;

pub const MAX_VARS: usize = 20;
pub const MAX_DOMINATION_VARS: usize = 14;
/// Largest `n` for the exhaustive up-set pair scan.
pub const MAX_UPSET_VARS: usize = 4;

pub const SUM_TOL: f64 = 1e-12;
pub const CHECK_TOL: f64 = 1e-12;
pub const DOMINATION_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMeasure {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl ExactMeasure {
    pub fn from_probs(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        if n > MAX_VARS {
            return Err(Error::SizeCap { what: "measure variables", size: n, cap: MAX_VARS });
        }
        if probs.len() != 1 << n {
            return Err(param(format!("{} probabilities for {n} variables", probs.len())));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(param(format!("probability entry {p} is not a finite non-negative number")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL * (1 << n) as f64 {
            return Err(param(format!("probabilities sum to {total}, not 1")));
        }
        Ok(ExactMeasure { labels, probs })
    }

    /// Normalises non-negative weights.
    pub fn from_weights(labels: Vec<String>, mut weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(param("weights must have a finite positive sum"));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::from_probs(labels, weights)
    }

    /// Normalises log-weights without overflow.
    pub fn from_log_weights(labels: Vec<String>, mut logw: Vec<f64>) -> Result<Self> {
        let max = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        logw.iter_mut().for_each(|w| *w = (*w - max).exp());
        Self::from_weights(labels, logw)
    }

    pub fn default_labels(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    pub fn n_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: usize) -> f64 {
        self.probs[x]
    }

    pub fn full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }

    /// Probability of the set of configurations selected by `event`.
    pub fn prob_of(&self, event: impl Fn(usize) -> bool) -> f64 {
        self.probs.iter().enumerate().filter(|(x, _)| event(*x)).map(|(_, p)| p).sum()
    }

    pub fn expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.probs.iter().enumerate().map(|(x, p)| p * f(x)).sum()
    }

    /// `P(variable i = 1)` for every `i`.
    pub fn one_marginals(&self) -> Vec<f64> {
        (0..self.n_vars()).map(|i| self.prob_of(|x| x >> i & 1 == 1)).collect()
    }

    /// Law of the sub-vector `(x_{vars[0]}, x_{vars[1]}, ...)`.
    pub fn marginal(&self, vars: &[usize]) -> Result<ExactMeasure> {
        if let Some(v) = vars.iter().find(|&&v| v >= self.n_vars()) {
            return Err(param(format!("variable {v} out of range")));
        }
        let mut out = vec![0.0; 1 << vars.len()];
        for (x, &p) in self.probs.iter().enumerate() {
            out[project(x, vars)] += p;
        }
        let labels = vars.iter().map(|&v| self.labels[v].clone()).collect();
        ExactMeasure::from_probs(labels, out)
    }

    /// Image under the global flip `x -> !x`.
    pub fn flipped(&self) -> ExactMeasure {
        let mask = (1usize << self.n_vars()) - 1;
        let probs = (0..self.probs.len()).map(|x| self.probs[x ^ mask]).collect();
        ExactMeasure { labels: self.labels.clone(), probs }
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (x, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return x;
            }
        }
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: ExactMeasure = serde_json::from_str(s)?;
        ExactMeasure::from_probs(raw.labels, raw.probs)
    }
}

/// Packs bits `vars` of `x` into a new bitmask.
pub fn project(x: usize, vars: &[usize]) -> usize {
    vars.iter().enumerate().fold(0, |acc, (k, &v)| acc | ((x >> v & 1) << k))
}

fn check_same_vars(a: &ExactMeasure, b: &ExactMeasure) -> Result<()> {
    if a.n_vars() != b.n_vars() {
        return Err(Error::VariableMismatch(format!("{} vs {} variables", a.n_vars(), b.n_vars())));
    }
    Ok(())
}

fn require_full_support(mu: &ExactMeasure, what: &str) -> Result<()> {
    if mu.full_support() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("{what} requires a measure with full support")))
    }
}

/// Ising measure on the interior sites of `graph` with the Hamiltonian
/// `-β Σ σ(t)σ(t') - h Σ σ(t)`, boundary neighbours entering with their
/// fixed spin.
pub fn gibbs_measure(graph: &SiteGraph, beta: f64, h: f64) -> Result<ExactMeasure> {
    let n = graph.n_sites();
    if n > MAX_VARS {
        return Err(Error::SizeCap { what: "gibbs sites", size: n, cap: MAX_VARS });
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(param(format!("beta = {beta} must be finite and >= 0")));
    }
    if !h.is_finite() {
        return Err(param("h must be finite"));
    }
    let edges = graph.edges();
    let logw = (0..1usize << n).map(|x| -ising_energy(graph, &edges, x, beta, h)).collect();
    ExactMeasure::from_log_weights(ExactMeasure::default_labels("s", n), logw)
}

/// `H(σ)` of the bitmask configuration `x` on `graph`.
pub fn ising_energy(graph: &SiteGraph, edges: &[(usize, usize)], x: usize, beta: f64, h: f64) -> f64 {
    let spin = |i: usize| -> f64 {
        let up = if i < graph.n_sites() { x >> i & 1 == 1 } else { graph.boundary_spin(i) == Some(true) };
        if up { 1.0 } else { -1.0 }
    };
    let bonds: f64 = edges.iter().map(|&(u, v)| spin(u) * spin(v)).sum();
    let field: f64 = (0..graph.n_sites()).map(spin).sum();
    -beta * bonds - h * field
}

pub fn product_measure(n_vars: usize, p: f64) -> Result<ExactMeasure> {
    if n_vars > MAX_VARS {
        return Err(Error::SizeCap { what: "product variables", size: n_vars, cap: MAX_VARS });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(param(format!("density {p} outside [0,1]")));
    }
    let probs = (0..1usize << n_vars)
        .map(|x| {
            let k = x.count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(n_vars as i32 - k)
        })
        .collect();
    Ok(ExactMeasure { labels: ExactMeasure::default_labels("v", n_vars), probs })
}

/// Edges of the wired random-cluster model on `graph`: the free (random)
/// edges are `graph.edges()`, in that order; the ring edges are always open.
pub fn rc_free_edges(graph: &SiteGraph) -> Vec<(usize, usize)> {
    graph.edges()
}

/// Number of connected components of `(all sites, ring edges + open free edges)`.
pub fn rc_components(free: &[(usize, usize)], ring: &[(usize, usize)], eta: usize, uf: &mut UnionFind) -> usize {
    uf.reset();
    for &(a, b) in ring {
        uf.union(a, b);
    }
    for (k, &(a, b)) in free.iter().enumerate() {
        if eta >> k & 1 == 1 {
            uf.union(a, b);
        }
    }
    uf.components()
}

/// Wired random-cluster measure (q = 2) on the free edges of `graph`,
/// conditioned on every boundary-ring edge being open.
pub fn rc_wired_measure(graph: &SiteGraph, p: f64) -> Result<ExactMeasure> {
    if !(p > 0.0 && p < 1.0) {
        return Err(param(format!("edge density {p} outside (0,1)")));
    }
    let free = rc_free_edges(graph);
    let m = free.len();
    if m > MAX_VARS {
        return Err(Error::SizeCap { what: "random-cluster free edges", size: m, cap: MAX_VARS });
    }
    let ring = graph.ring_edges();
    let mut uf = UnionFind::new(graph.n_total());
    let (lp, lq, l2) = (p.ln(), (1.0 - p).ln(), std::f64::consts::LN_2);
    let logw = (0..1usize << m)
        .map(|eta| {
            let open = eta.count_ones() as f64;
            let k = rc_components(&free, &ring, eta, &mut uf) as f64;
            k * l2 + open * lp + (m as f64 - open) * lq
        })
        .collect();
    let labels = free.iter().enumerate().map(|(k, (a, b))| format!("e{k}:{a}-{b}")).collect();
    ExactMeasure::from_log_weights(labels, logw)
}

/// `μ(x_s = 1 | x_rest = ξ)`; bit `s` of `xi` is ignored.
pub fn site_conditional(mu: &ExactMeasure, s: usize, xi: usize) -> Result<f64> {
    if s >= mu.n_vars() {
        return Err(param(format!("variable {s} out of range")));
    }
    let bit = 1usize << s;
    let (p0, p1) = (mu.probs[xi & !bit], mu.probs[xi | bit]);
    if p0 + p1 <= 0.0 {
        return Err(Error::ZeroProbability(format!("variable {s}, context {xi:#b}")));
    }
    Ok(p1 / (p0 + p1))
}

#[inline]
fn cond(probs: &[f64], bit: usize, x: usize) -> f64 {
    let (p0, p1) = (probs[x & !bit], probs[x | bit]);
    p1 / (p0 + p1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneWitness {
    pub site: usize,
    /// `xi ⪯ xi_prime` differing in one coordinate, with
    /// `μ(1 | xi) > μ(1 | xi_prime)`.
    pub xi: usize,
    pub xi_prime: usize,
    pub gap: f64,
}

/// Monotonicity via single-coordinate increases of the context.
pub fn is_monotone(mu: &ExactMeasure) -> Result<Option<MonotoneWitness>> {
    require_full_support(mu, "is_monotone")?;
    let n = mu.n_vars();
    let probs = &mu.probs;
    for s in 0..n {
        let bs = 1usize << s;
        for j in (0..n).filter(|&j| j != s) {
            let bj = 1usize << j;
            for x in (0..1usize << n).filter(|x| x & (bs | bj) == 0) {
                let (lo, hi) = (cond(probs, bs, x), cond(probs, bs, x | bj));
                if lo > hi + CHECK_TOL {
                    return Ok(Some(MonotoneWitness { site: s, xi: x, xi_prime: x | bj, gap: lo - hi }));
                }
            }
        }
    }
    Ok(None)
}

/// FKG lattice condition over incomparable pairs differing in two
/// coordinates. The slack is relative to the product compared against.
pub fn fkg_lattice_check(mu: &ExactMeasure) -> Result<bool> {
    require_full_support(mu, "fkg_lattice_check")?;
    let n = mu.n_vars();
    let p = &mu.probs;
    for i in 0..n {
        for j in i + 1..n {
            let (bi, bj) = (1usize << i, 1usize << j);
            for x in (0..1usize << n).filter(|x| x & (bi | bj) == 0) {
                let lhs = p[x | bi | bj] * p[x];
                let rhs = p[x | bi] * p[x | bj];
                if lhs < rhs * (1.0 - CHECK_TOL) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Holley's condition `μ1(1 | ξ) <= μ2(1 | ξ')` for all `s` and `ξ ⪯ ξ'`.
///
/// For each site the running maximum of `μ1(1 | ξ)` over subsets is built
/// with a sum-over-subsets pass, so the scan is `O(n^2 2^n)`.
pub fn holley_check(mu1: &ExactMeasure, mu2: &ExactMeasure) -> Result<bool> {
    check_same_vars(mu1, mu2)?;
    require_full_support(mu1, "holley_check")?;
    require_full_support(mu2, "holley_check")?;
    let n = mu1.n_vars();
    let size = 1usize << n;
    let mut best = vec![0.0f64; size];
    for s in 0..n {
        let bs = 1usize << s;
        for x in 0..size {
            best[x] = if x & bs == 0 { cond(&mu1.probs, bs, x) } else { f64::NEG_INFINITY };
        }
        for j in (0..n).filter(|&j| j != s) {
            let bj = 1usize << j;
            for x in 0..size {
                if x & bj != 0 && x & bs == 0 {
                    best[x] = best[x].max(best[x ^ bj]);
                }
            }
        }
        for x in (0..size).filter(|x| x & bs == 0) {
            if best[x] > cond(&mu2.probs, bs, x) + CHECK_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationCertificate {
    pub holds: bool,
    /// Minimal elements of an up-set `U` with `μ1(U) > μ2(U)` (only when
    /// `holds` is false).
    pub witness: Option<Vec<usize>>,
    /// `μ1(U) - μ2(U)` for the witness.
    pub witness_gap: Option<f64>,
    /// Max-flow value (the mass of the best ordered coupling).
    pub coupling_mass: f64,
}

/// Decides `μ1 ⪯ μ2` with a max-flow through the hypercube: source to `x`
/// with capacity `μ1(x)`, `x` to sink with capacity `μ2(x)`, and unbounded
/// arcs `x -> x + e_i`. A unit of flow entering at `x` can only leave at
/// some `y ⪰ x`, so the max flow is the largest ordered coupling mass.
pub fn dominates(mu1: &ExactMeasure, mu2: &ExactMeasure) -> Result<DominationCertificate> {
    check_same_vars(mu1, mu2)?;
    let n = mu1.n_vars();
    if n > MAX_DOMINATION_VARS {
        return Err(Error::SizeCap { what: "domination variables", size: n, cap: MAX_DOMINATION_VARS });
    }
    let size = 1usize << n;
    let (src, sink) = (size, size + 1);
    let mut net = FlowNetwork::new(size + 2);
    for x in 0..size {
        if mu1.probs[x] > 0.0 {
            net.add_edge(src, x, mu1.probs[x]);
        }
        if mu2.probs[x] > 0.0 {
            net.add_edge(x, sink, mu2.probs[x]);
        }
        for i in 0..n {
            if x >> i & 1 == 0 {
                net.add_edge(x, x | 1 << i, f64::INFINITY);
            }
        }
    }
    let flow = net.max_flow(src, sink);
    if flow >= 1.0 - DOMINATION_SLACK {
        return Ok(DominationCertificate { holds: true, witness: None, witness_gap: None, coupling_mass: flow });
    }
    let side = net.residual_reachable(src);
    let in_u = |x: usize| side[x];
    let gap = mu1.prob_of(in_u) - mu2.prob_of(in_u);
    let minimal = (0..size)
        .filter(|&x| in_u(x) && (0..n).all(|i| x >> i & 1 == 0 || !in_u(x ^ 1 << i)))
        .collect();
    Ok(DominationCertificate { holds: false, witness: Some(minimal), witness_gap: Some(gap), coupling_mass: flow })
}

/// All up-sets of `{0,1}^n` as membership bitmasks over the `2^n` points.
pub fn up_sets(n: usize) -> Result<Vec<u64>> {
    if n > MAX_UPSET_VARS {
        return Err(Error::SizeCap { what: "up-set enumeration variables", size: n, cap: MAX_UPSET_VARS });
    }
    let size = 1usize << n;
    let up_closed = |set: u64| {
        (0..size).all(|x| set >> x & 1 == 0 || (0..n).all(|i| set >> (x | 1 << i) & 1 == 1))
    };
    Ok((0..1u64 << size).filter(|&s| up_closed(s)).collect())
}

fn covariance_of_sets(probs: &[f64], u: u64, v: u64) -> f64 {
    let mass = |set: u64| -> f64 { probs.iter().enumerate().filter(|(x, _)| set >> x & 1 == 1).map(|(_, p)| p).sum() };
    mass(u & v) - mass(u) * mass(v)
}

/// `Cov(1_U, 1_V) >= 0` for every pair of up-sets (exhaustive, `n <= 4`).
pub fn positive_correlations_check(mu: &ExactMeasure) -> Result<bool> {
    let sets = up_sets(mu.n_vars())?;
    for (a, &u) in sets.iter().enumerate() {
        for &v in &sets[a..] {
            if covariance_of_sets(&mu.probs, u, v) < -CHECK_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sampled variant for larger `n`: random up-sets generated as up-closures
/// of a few random points.
pub fn positive_correlations_sampled(mu: &ExactMeasure, pairs: usize, seed: u64) -> bool {
    let n = mu.n_vars();
    let size = 1usize << n;
    let mut rng = stream_rng(seed, Stream::Aux, 0);
    let random_up_set = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<bool> {
        let mut member = vec![false; size];
        for _ in 0..rng.gen_range(1..=3) {
            let g = rng.gen_range(0..size);
            // y ⪰ g  iff  y & g == g
            for (y, m) in member.iter_mut().enumerate() {
                if y & g == g {
                    *m = true;
                }
            }
        }
        member
    };
    for _ in 0..pairs {
        let u = random_up_set(&mut rng);
        let v = random_up_set(&mut rng);
        let (mut pu, mut pv, mut puv) = (0.0, 0.0, 0.0);
        for x in 0..size {
            let p = mu.probs[x];
            if u[x] {
                pu += p;
            }
            if v[x] {
                pv += p;
            }
            if u[x] && v[x] {
                puv += p;
            }
        }
        if puv - pu * pv < -CHECK_TOL {
            return false;
        }
    }
    true
}

pub fn tv_distance(mu: &ExactMeasure, nu: &ExactMeasure) -> Result<f64> {
    check_same_vars(mu, nu)?;
    Ok(0.5 * mu.probs.iter().zip(&nu.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Empirical law of bitmask samples on `n` variables.
pub fn empirical_measure(n: usize, samples: &[usize]) -> Result<ExactMeasure> {
    if n > MAX_VARS {
        return Err(Error::SizeCap { what: "empirical variables", size: n, cap: MAX_VARS });
    }
    if samples.is_empty() {
        return Err(param("no samples"));
    }
    let mut counts = vec![0.0; 1 << n];
    for &x in samples {
        counts[x] += 1.0;
    }
    ExactMeasure::from_weights(ExactMeasure::default_labels("v", n), counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, build_rect, Boundary};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn product_examples() {
        let m = product_measure(3, 0.5).unwrap();
        assert!(m.probs().iter().all(|&p| close(p, 0.125, 1e-15)));
        let m = product_measure(1, 0.3).unwrap();
        assert!(close(m.prob(0), 0.7, 1e-15) && close(m.prob(1), 0.3, 1e-15));
        let m = product_measure(2, 0.0).unwrap();
        assert_eq!(m.probs(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(product_measure(2, 1.5).is_err());
    }

    #[test]
    fn single_site_gibbs() {
        let g = SiteGraph::from_adjacency(vec![vec![]], vec![]).unwrap();
        let h: f64 = 0.7;
        let m = gibbs_measure(&g, 2.0, h).unwrap();
        assert!(close(m.prob(1), h.exp() / (h.exp() + (-h).exp()), 1e-14));
        assert!(gibbs_measure(&g, -1.0, 0.0).is_err());
    }

    #[test]
    fn beta_zero_is_product() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        let h: f64 = 0.3;
        let m = gibbs_measure(&g, 0.0, h).unwrap();
        let p = h.exp() / (h.exp() + (-h).exp());
        assert!(tv_distance(&m, &product_measure(9, p).unwrap()).unwrap() < 1e-13);
    }

    #[test]
    fn glauber_conditional_closed_form() {
        let g = build_box(2, 0, Boundary::Plus).unwrap();
        let m = gibbs_measure(&g, 0.5, 0.0).unwrap();
        let c = site_conditional(&m, 0, 0).unwrap();
        assert!(close(c, 1.0 / (1.0 + (-4.0f64).exp()), 1e-14));
        assert!(close(c, 0.98201, 1e-5));
    }

    #[test]
    fn rc_small_cases() {
        // two isolated sites joined by one free edge
        let g = SiteGraph::from_adjacency(vec![vec![1], vec![0]], vec![]).unwrap();
        let p = 0.6;
        let m = rc_wired_measure(&g, p).unwrap();
        assert!(close(m.prob(1), p / (2.0 - p), 1e-14));
        // 1x1 box: four edges to the wired ring
        let g = build_rect(&[1, 1], Boundary::Plus).unwrap();
        assert_eq!(rc_free_edges(&g).len(), 4);
        assert_eq!(build_rect(&[1, 2], Boundary::Plus).unwrap().edges().len(), 7);
        assert_eq!(build_rect(&[2, 2], Boundary::Plus).unwrap().edges().len(), 12);
        assert!(rc_wired_measure(&g, 1.0).is_err());
    }

    #[test]
    fn antiferromagnetic_pair_is_not_monotone() {
        // weights exp(-J σ1 σ2) with J > 0 penalise agreement
        let j: f64 = 0.8;
        let w = vec![(-j).exp(), j.exp(), j.exp(), (-j).exp()];
        let m = ExactMeasure::from_weights(ExactMeasure::default_labels("s", 2), w).unwrap();
        let wit = is_monotone(&m).unwrap().expect("not monotone");
        assert!(wit.gap > 0.0);
        assert!(!fkg_lattice_check(&m).unwrap());
        assert!(!positive_correlations_check(&m).unwrap());
    }

    #[test]
    fn domination_products() {
        let a = product_measure(3, 0.3).unwrap();
        let b = product_measure(3, 0.5).unwrap();
        let yes = dominates(&a, &b).unwrap();
        assert!(yes.holds && yes.witness.is_none());
        let no = dominates(&b, &a).unwrap();
        assert!(!no.holds);
        assert!(no.witness_gap.unwrap() > 0.0);
        assert!(holley_check(&a, &b).unwrap());
        assert!(!holley_check(&b, &a).unwrap());
    }

    #[test]
    fn up_set_counts() {
        // Dedekind numbers
        let counts: Vec<usize> = (0..=4).map(|n| up_sets(n).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 3, 6, 20, 168]);
    }

    #[test]
    fn tv_examples() {
        let a = product_measure(1, 0.5).unwrap();
        let b = product_measure(1, 0.6).unwrap();
        assert!(close(tv_distance(&a, &b).unwrap(), 0.1, 1e-15));
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        let z = product_measure(1, 0.0).unwrap();
        let o = product_measure(1, 1.0).unwrap();
        assert_eq!(tv_distance(&z, &o).unwrap(), 1.0);
        assert!(tv_distance(&a, &product_measure(2, 0.5).unwrap()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = product_measure(2, 0.25).unwrap();
        let back = ExactMeasure::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
        assert!(ExactMeasure::from_json(r#"{"labels":["a"],"probs":[0.5,0.6]}"#).is_err());
    }
}
