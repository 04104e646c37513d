//! Brute-force reference implementations used to cross-check the library.
//! Each one is written from the definitions, without going through the
//! code path it checks.
#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use dynperc::lattice::SiteGraph;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `μ1 ⪯ μ2` by checking `μ1(U) <= μ2(U) + slack` over every subset `U` of
/// `{0,1}^n` that is upward closed.
pub fn dominates_by_upsets(p1: &[f64], p2: &[f64], slack: f64) -> bool {
    let size = p1.len();
    let n = size.trailing_zeros() as usize;
    assert!(n <= 4, "brute force up-set scan is limited to n <= 4");
    let sets: u64 = 1 << size;
    (0..sets).filter(|&u| is_up_set(u, n)).all(|u| {
        let m = |p: &[f64]| (0..size).filter(|&x| u >> x & 1 == 1).map(|x| p[x]).sum::<f64>();
        m(p1) <= m(p2) + slack
    })
}

fn is_up_set(u: u64, n: usize) -> bool {
    (0..1usize << n).all(|x| u >> x & 1 == 0 || (0..n).all(|i| u >> (x | 1 << i) & 1 == 1))
}

/// Random strictly positive probability vector on `{0,1}^n`.
pub fn random_measure(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Product Bernoulli(p) vector.
pub fn product(n: usize, p: f64) -> Vec<f64> {
    (0..1usize << n)
        .map(|x| {
            let k = (x as u32).count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(n as i32 - k)
        })
        .collect()
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Whether two coordinate vectors are lattice neighbours (unit `l1` step).
fn adjacent(a: &[i32], b: &[i32]) -> bool {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<i32>() == 1
}

fn sup_norm(c: &[i32]) -> i32 {
    c.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Breadth-first search from the origin through sites in `state` using
/// coordinates only; true when a site with sup-norm `l + 1` is reached.
pub fn flood_origin_to_boundary(graph: &SiteGraph, config: &[bool], state: bool, l: i32) -> bool {
    let all: Vec<(usize, Vec<i32>)> = (0..graph.n_total()).map(|i| (i, graph.coords(i).unwrap().to_vec())).collect();
    let value = |i: usize| if i < graph.n_sites() { config[i] } else { graph.boundary_spins()[i - graph.n_sites()] };
    let origin = all.iter().find(|(_, c)| c.iter().all(|&x| x == 0)).unwrap().0;
    if value(origin) != state {
        return false;
    }
    let mut seen = vec![false; all.len()];
    let mut queue = VecDeque::from([origin]);
    seen[origin] = true;
    while let Some(u) = queue.pop_front() {
        if sup_norm(&all[u].1) == l + 1 {
            return true;
        }
        if sup_norm(&all[u].1) > l {
            continue;
        }
        for (v, c) in &all {
            if !seen[*v] && value(*v) == state && adjacent(&all[u].1, c) {
                seen[*v] = true;
                queue.push_back(*v);
            }
        }
    }
    false
}

/// Ising energy `-β Σ σ(u)σ(v) - h Σ σ(s)` summed over coordinate-adjacent
/// pairs with at least one interior site.
pub fn ising_energy(graph: &SiteGraph, config: &[bool], beta: f64, h: f64) -> f64 {
    let n = graph.n_sites();
    let spin = |i: usize| -> f64 {
        let on = if i < n { config[i] } else { graph.boundary_spins()[i - n] };
        if on { 1.0 } else { -1.0 }
    };
    let mut e = 0.0;
    for u in 0..graph.n_total() {
        for v in u + 1..graph.n_total() {
            if (u < n || v < n) && adjacent(graph.coords(u).unwrap(), graph.coords(v).unwrap()) {
                e -= beta * spin(u) * spin(v);
            }
        }
    }
    e - h * (0..n).map(spin).sum::<f64>()
}

/// Number of simple cycles of length `l` on the dual square lattice (vertices
/// at odd doubled coordinates) that wind around the origin.
///
/// Every such cycle crosses the ray `{(x, 0) : x > 0}`. For each crossing
/// edge `(x,-1)-(x,1)` the paths from `(x,1)` back to `(x,-1)` are walked;
/// a cycle with `k` crossings is found `k` times and weighted `1/k`.
pub fn polygons_around_origin(l: usize) -> usize {
    let mut total = 0.0f64;
    for x in (1..l as i32).step_by(2) {
        let start = (x, 1);
        let goal = (x, -1);
        let mut path = vec![start];
        let mut on_path = HashSet::from([start]);
        walk(&mut path, &mut on_path, goal, l - 1, &mut total);
    }
    total.round() as usize
}

fn walk(path: &mut Vec<(i32, i32)>, on_path: &mut HashSet<(i32, i32)>, goal: (i32, i32), left: usize, total: &mut f64) {
    let cur = *path.last().unwrap();
    if left == 0 {
        return;
    }
    let dist = ((cur.0 - goal.0).abs() + (cur.1 - goal.1).abs()) as usize / 2;
    if dist > left {
        return;
    }
    for (dx, dy) in [(2, 0), (-2, 0), (0, 2), (0, -2)] {
        let next = (cur.0 + dx, cur.1 + dy);
        if next == goal && left == 1 {
            if path.len() == 1 {
                continue;
            }
            let mut cycle = path.clone();
            cycle.push(goal);
            let k = ray_crossings(&cycle);
            if k % 2 == 1 {
                *total += 1.0 / k as f64;
            }
            continue;
        }
        if next == goal || on_path.contains(&next) {
            continue;
        }
        path.push(next);
        on_path.insert(next);
        walk(path, on_path, goal, left - 1, total);
        on_path.remove(&next);
        path.pop();
    }
}

/// Vertical edges of the closed cycle crossing the positive x-axis.
fn ray_crossings(cycle: &[(i32, i32)]) -> usize {
    let m = cycle.len();
    (0..m)
        .filter(|&i| {
            let (a, b) = (cycle[i], cycle[(i + 1) % m]);
            a.0 == b.0 && a.0 > 0 && a.1.min(b.1) == -1 && a.1.max(b.1) == 1
        })
        .count()
}
