//! Same-state clusters, crossing events and their persistence over a time
//! window of a trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_stationary_init, simulate, InitMode, RateSpec, Trajectory};
use crate::error::{param, Result};
use crate::lattice::{Geometry, SiteGraph};
use crate::rng::{derive_seed, replica_seed, Stream};
use crate::stats::Proportion;
use crate::unionfind::UnionFind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabels {
    /// Cluster id of each interior site in the target state. Ids are
    /// numbered by the smallest site of each cluster, in increasing order.
    pub labels: Vec<Option<usize>>,
    pub sizes: Vec<usize>,
    /// Whether the cluster reaches a boundary site of the same state.
    pub touches_boundary: Vec<bool>,
}

impl ClusterLabels {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }
}

fn same_state_union(config: &[bool], graph: &SiteGraph, state: bool, uf: &mut UnionFind, skip: impl Fn(usize, usize) -> bool) {
    uf.reset();
    for (u, v) in graph.edges() {
        if graph.state(config, u) == state && graph.state(config, v) == state && !skip(u, v) {
            uf.union(u, v);
        }
    }
}

/// Connected components of the sites in `state`.
pub fn clusters(config: &[bool], graph: &SiteGraph, state: bool) -> ClusterLabels {
    let mut uf = UnionFind::new(graph.n_total());
    same_state_union(config, graph, state, &mut uf, |_, _| false);
    let n = graph.n_sites();
    let mut id_of_root = vec![usize::MAX; graph.n_total()];
    let mut labels = vec![None; n];
    let mut sizes = Vec::new();
    for s in (0..n).filter(|&s| config[s] == state) {
        let r = uf.find(s);
        if id_of_root[r] == usize::MAX {
            id_of_root[r] = sizes.len();
            sizes.push(0);
        }
        labels[s] = Some(id_of_root[r]);
        sizes[id_of_root[r]] += 1;
    }
    let mut touches_boundary = vec![false; sizes.len()];
    for b in n..graph.n_total() {
        if graph.state(config, b) == state {
            let id = id_of_root[uf.find(b)];
            if id != usize::MAX {
                touches_boundary[id] = true;
            }
        }
    }
    ClusterLabels { labels, sizes, touches_boundary }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossingKind {
    /// The origin is joined to `Λ_{L+1} \ Λ_L` (boundary ring sites count).
    OriginToBoundary { l: usize },
    /// The first-coordinate minimum face is joined to the maximum face.
    /// On a torus only non-wrapping edges are used.
    SideToSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    /// Spin `+1` / occupied when true.
    pub state: bool,
    pub kind: CrossingKind,
}

fn sup_norm(c: &[i32]) -> i32 {
    c.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Precomputed source/target sets for repeated crossing queries.
#[derive(Clone, Debug)]
pub struct CrossingQuery {
    crossing: Crossing,
    sources: Vec<usize>,
    targets: Vec<usize>,
    torus_side: Option<i32>,
}

impl CrossingQuery {
    pub fn new(graph: &SiteGraph, crossing: Crossing) -> Result<Self> {
        let coord = |s: usize| graph.coords(s).ok_or_else(|| param("crossing needs coordinates"));
        let mut torus_side = None;
        let (sources, targets) = match (crossing.kind, graph.geometry()) {
            (CrossingKind::OriginToBoundary { l }, Geometry::Box { .. }) => {
                let radius = graph.box_radius().unwrap_or(0);
                if l as i64 > radius as i64 {
                    return Err(param(format!("L = {l} exceeds the box radius {radius}")));
                }
                let origin = graph.origin().ok_or_else(|| param("box does not contain the origin"))?;
                let mut targets = Vec::new();
                for s in 0..graph.n_total() {
                    if sup_norm(coord(s)?) == l as i32 + 1 {
                        targets.push(s);
                    }
                }
                (vec![origin], targets)
            }
            (CrossingKind::SideToSide, geom @ (Geometry::Box { .. } | Geometry::Torus { .. })) => {
                let (lo0, hi0) = match geom {
                    Geometry::Box { lo, hi } => (lo[0], hi[0]),
                    Geometry::Torus { side, .. } => {
                        torus_side = Some(*side as i32);
                        (0, *side as i32 - 1)
                    }
                    _ => unreachable!(),
                };
                let mut s_set = Vec::new();
                let mut t_set = Vec::new();
                for s in 0..graph.n_sites() {
                    let x = coord(s)?[0];
                    if x == lo0 {
                        s_set.push(s);
                    }
                    if x == hi0 {
                        t_set.push(s);
                    }
                }
                (s_set, t_set)
            }
            (CrossingKind::SideToSide, _) => return Err(param("side-to-side crossing needs a box or torus")),
            (CrossingKind::OriginToBoundary { .. }, _) => return Err(param("origin crossing needs a box")),
        };
        Ok(CrossingQuery { crossing, sources, targets, torus_side })
    }

    pub fn evaluate(&self, graph: &SiteGraph, config: &[bool], uf: &mut UnionFind) -> bool {
        let state = self.crossing.state;
        let wrap = |u: usize, v: usize| -> bool {
            match (self.torus_side, graph.coords(u), graph.coords(v)) {
                (Some(_), Some(a), Some(b)) => a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1),
                _ => false,
            }
        };
        same_state_union(config, graph, state, uf, wrap);
        let mut roots: Vec<usize> = self
            .sources
            .iter()
            .filter(|&&s| graph.state(config, s) == state)
            .map(|&s| uf.find(s))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        self.targets
            .iter()
            .any(|&t| graph.state(config, t) == state && roots.binary_search(&uf.find(t)).is_ok())
    }
}

pub fn crossing(config: &[bool], graph: &SiteGraph, crossing: Crossing) -> Result<bool> {
    let q = CrossingQuery::new(graph, crossing)?;
    Ok(q.evaluate(graph, config, &mut UnionFind::new(graph.n_total())))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Persistence {
    HoldsThroughout,
    FirstViolation { t: f64 },
}

impl Persistence {
    pub fn holds(&self) -> bool {
        matches!(self, Persistence::HoldsThroughout)
    }
}

/// First time in `[0, tau]` at which the predicate equals `target`, checking
/// time 0 and the state after every accepted event.
pub fn first_time(traj: &Trajectory, graph: &SiteGraph, query: &CrossingQuery, tau: f64, target: bool) -> Result<Option<f64>> {
    if !(tau >= 0.0 && tau <= traj.horizon * (1.0 + 1e-12)) {
        return Err(param(format!("window [0, {tau}] outside [0, {}]", traj.horizon)));
    }
    let mut uf = UnionFind::new(graph.n_total());
    let mut config = traj.init.clone();
    if query.evaluate(graph, &config, &mut uf) == target {
        return Ok(Some(0.0));
    }
    for e in traj.accepted().take_while(|e| e.t <= tau) {
        config[e.site] = e.state;
        if query.evaluate(graph, &config, &mut uf) == target {
            return Ok(Some(e.t));
        }
    }
    Ok(None)
}

/// Whether the crossing holds at every time of `[0, tau]`.
pub fn persistence(traj: &Trajectory, graph: &SiteGraph, crossing: Crossing, tau: f64) -> Result<Persistence> {
    let q = CrossingQuery::new(graph, crossing)?;
    Ok(match first_time(traj, graph, &q, tau, false)? {
        None => Persistence::HoldsThroughout,
        Some(t) => Persistence::FirstViolation { t },
    })
}

/// Whether the crossing occurs at some time of `[0, tau]`.
pub fn occurs_in_window(traj: &Trajectory, graph: &SiteGraph, crossing: Crossing, tau: f64) -> Result<Option<f64>> {
    let q = CrossingQuery::new(graph, crossing)?;
    first_time(traj, graph, &q, tau, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowEvent {
    /// The crossing holds at every time of the window.
    Always,
    /// The crossing holds at some time of the window.
    Ever,
    /// The crossing holds at time 0.
    AtStart,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceExperiment {
    pub spec: RateSpec,
    pub crossing: Crossing,
    pub event: WindowEvent,
    pub tau: f64,
    pub replicas: usize,
    pub seed: u64,
    pub init: InitMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceEstimate {
    pub estimate: Proportion,
    pub outcomes: Vec<bool>,
    pub approximate_init: bool,
}

/// One replica: stationary draw, then a run on `[0, tau]` from seeds
/// derived from the replica index.
pub fn replica_trajectory(spec: &RateSpec, graph: &SiteGraph, init: InitMode, tau: f64, seed: u64, r: usize) -> Result<(Trajectory, bool)> {
    let rs = replica_seed(seed, r);
    let start = sample_stationary_init(spec, graph, init, rs)?;
    let traj = simulate(spec, graph, &start.config, tau, derive_seed(rs, Stream::Aux, 0))?;
    Ok((traj, start.approximate))
}

/// Monte Carlo estimate of the window event with Wilson interval.
/// Replicas run in parallel and are merged in replica order.
pub fn persistence_probability(graph: &SiteGraph, exp: &PersistenceExperiment) -> Result<PersistenceEstimate> {
    if exp.replicas == 0 {
        return Err(param("replicas must be positive"));
    }
    let q = CrossingQuery::new(graph, exp.crossing)?;
    let results: Vec<(bool, bool)> = (0..exp.replicas)
        .into_par_iter()
        .map(|r| {
            let (traj, approx) = replica_trajectory(&exp.spec, graph, exp.init, exp.tau, exp.seed, r)?;
            let hit = match exp.event {
                WindowEvent::Always => first_time(&traj, graph, &q, exp.tau, false)?.is_none(),
                WindowEvent::Ever => first_time(&traj, graph, &q, exp.tau, true)?.is_some(),
                WindowEvent::AtStart => q.evaluate(graph, &traj.init, &mut UnionFind::new(graph.n_total())),
            };
            Ok((hit, approx))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<bool> = results.iter().map(|r| r.0).collect();
    let k = outcomes.iter().filter(|&&b| b).count() as u64;
    Ok(PersistenceEstimate {
        estimate: Proportion::new(k, exp.replicas as u64),
        outcomes,
        approximate_init: results.iter().any(|r| r.1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_box, build_torus, Boundary};

    #[test]
    fn cluster_examples() {
        let g = build_box(2, 2, Boundary::Free).unwrap();
        let all = clusters(&vec![true; 25], &g, true);
        assert_eq!(all.sizes, vec![25]);
        let checker: Vec<bool> = (0..25).map(|s| {
            let c = g.coords(s).unwrap();
            (c[0] + c[1]).rem_euclid(2) == 0
        }).collect();
        let cl = clusters(&checker, &g, true);
        assert!(cl.sizes.iter().all(|&k| k == 1));
        assert_eq!(cl.count(), 13);
    }

    #[test]
    fn boundary_touching() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        let cl = clusters(&vec![true; 9], &g, true);
        assert_eq!(cl.touches_boundary, vec![true]);
        let cl = clusters(&vec![false; 9], &g, false);
        assert_eq!(cl.touches_boundary, vec![false]);
    }

    #[test]
    fn crossing_examples() {
        let g = build_box(2, 3, Boundary::Plus).unwrap();
        let minus = Crossing { state: false, kind: CrossingKind::OriginToBoundary { l: 2 } };
        assert!(crossing(&vec![false; 49], &g, minus).unwrap());
        assert!(!crossing(&vec![true; 49], &g, minus).unwrap());
        // the ring is plus, so a minus path never reaches ∂Λ_3
        let to_ring = Crossing { state: false, kind: CrossingKind::OriginToBoundary { l: 3 } };
        assert!(!crossing(&vec![false; 49], &g, to_ring).unwrap());
        assert!(crossing(&vec![false; 49], &g, Crossing { state: false, kind: CrossingKind::OriginToBoundary { l: 4 } }).is_err());
        let plus0 = Crossing { state: true, kind: CrossingKind::OriginToBoundary { l: 0 } };
        assert!(crossing(&vec![true; 49], &g, plus0).unwrap());
    }

    #[test]
    fn torus_side_crossing_ignores_wrap() {
        let g = build_torus(2, 4).unwrap();
        let q = Crossing { state: true, kind: CrossingKind::SideToSide };
        assert!(crossing(&vec![true; 16], &g, q).unwrap());
        // only the column x = 0 and x = 3 occupied: adjacent through the wrap only
        let cfg: Vec<bool> = (0..16).map(|s| { let x = g.coords(s).unwrap()[0]; x == 0 || x == 3 }).collect();
        assert!(!crossing(&cfg, &g, q).unwrap());
    }
}
