//! Finite graphs: boxes with fixed-spin boundary rings, tori, truncated
//! regular trees, the planar dual of a 2-D box, and enumeration of dual
//! circuits around the origin.
//!
//! Interior sites are indexed row-major over their coordinates (first
//! coordinate slowest). Boundary sites follow the interior, also row-major,
//! so interior site `i` is bit `i` of a configuration bitmask.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Hard cap on the number of sites any generator will build.
pub const MAX_SITES: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Plus,
    Minus,
    Free,
}

impl Boundary {
    fn spin(self) -> Option<bool> {
        match self {
            Boundary::Plus => Some(true),
            Boundary::Minus => Some(false),
            Boundary::Free => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    /// Interior `{lo_i..=hi_i}` in every coordinate.
    Box { lo: Vec<i32>, hi: Vec<i32> },
    Torus { dim: usize, side: usize },
    Tree { branching: usize, depth: usize },
    Explicit,
}

/// A finite graph whose interior sites carry dynamics and whose boundary
/// sites are frozen at a fixed spin. Boundary sites appear only as
/// neighbours of interior sites.
#[derive(Clone, Debug)]
pub struct SiteGraph {
    n_sites: usize,
    adjacency: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    degree_bound: usize,
    geometry: Geometry,
    coords: Vec<Vec<i32>>,
    index: HashMap<Vec<i32>, usize>,
}

impl SiteGraph {
    /// Builds a graph from explicit interior adjacency lists. Neighbour
    /// indices `>= adjacency.len()` refer to boundary site
    /// `index - adjacency.len()` whose spin is `boundary[..]` (`true` = +1).
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>, boundary: Vec<bool>) -> Result<Self> {
        Self::assemble(adjacency, boundary, Geometry::Explicit, Vec::new())
    }

    fn assemble(
        adjacency: Vec<Vec<usize>>,
        boundary: Vec<bool>,
        geometry: Geometry,
        coords: Vec<Vec<i32>>,
    ) -> Result<Self> {
        let n = adjacency.len();
        let total = n + boundary.len();
        for (s, nbrs) in adjacency.iter().enumerate() {
            for (k, &t) in nbrs.iter().enumerate() {
                if t >= total {
                    return Err(param(format!("site {s}: neighbour {t} out of range")));
                }
                if t == s {
                    return Err(param(format!("site {s}: self-loop")));
                }
                if nbrs[..k].contains(&t) {
                    return Err(param(format!("site {s}: repeated neighbour {t}")));
                }
                if t < n && !adjacency[t].contains(&s) {
                    return Err(param(format!("adjacency not symmetric at {{{s},{t}}}")));
                }
            }
        }
        let degree_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let index = coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(SiteGraph {
            n_sites: n,
            adjacency,
            boundary,
            degree_bound,
            geometry,
            coords,
            index,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_total(&self) -> usize {
        self.n_sites + self.boundary.len()
    }

    pub fn neighbors(&self, s: usize) -> &[usize] {
        &self.adjacency[s]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        idx >= self.n_sites
    }

    /// Fixed spin of a boundary site (`true` = +1); `None` for interior sites.
    pub fn boundary_spin(&self, idx: usize) -> Option<bool> {
        idx.checked_sub(self.n_sites).map(|b| self.boundary[b])
    }

    pub fn boundary_spins(&self) -> &[bool] {
        &self.boundary
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Box { lo, .. } => Some(lo.len()),
            Geometry::Torus { dim, .. } => Some(*dim),
            _ => None,
        }
    }

    pub fn coords(&self, idx: usize) -> Option<&[i32]> {
        self.coords.get(idx).map(Vec::as_slice)
    }

    pub fn site_at(&self, c: &[i32]) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Index of the interior site at the coordinate origin (the root for trees).
    pub fn origin(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Box { lo, .. } => self.site_at(&vec![0; lo.len()]).filter(|&s| s < self.n_sites),
            Geometry::Torus { dim, .. } => self.site_at(&vec![0; *dim]),
            Geometry::Tree { .. } => Some(0),
            Geometry::Explicit => None,
        }
    }

    /// Every edge with at least one interior endpoint, once, as `(u, v)` with
    /// `u` interior. Interior-interior edges satisfy `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, nbrs) in self.adjacency.iter().enumerate() {
            for &v in nbrs {
                if v >= self.n_sites || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn degree_sum(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Edges between two boundary sites of a box (the wired ring of a
    /// random-cluster box). In one dimension the two end sites are joined
    /// directly. Empty for other geometries.
    pub fn ring_edges(&self) -> Vec<(usize, usize)> {
        let Geometry::Box { lo, .. } = &self.geometry else {
            return Vec::new();
        };
        if lo.len() == 1 {
            return if self.n_boundary() == 2 { vec![(self.n_sites, self.n_sites + 1)] } else { Vec::new() };
        }
        let mut out = Vec::new();
        for a in self.n_sites..self.n_total() {
            let ca = &self.coords[a];
            for k in 0..ca.len() {
                let mut cb = ca.clone();
                cb[k] += 1;
                if let Some(b) = self.site_at(&cb) {
                    if b >= self.n_sites {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }

    /// Interior radius `min_k min(-lo_k, hi_k)` of a box around the origin.
    pub fn box_radius(&self) -> Option<i32> {
        match &self.geometry {
            Geometry::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| (-l).min(*h)).min(),
            _ => None,
        }
    }

    /// Configuration with every interior site set to `value`.
    pub fn constant(&self, value: bool) -> Vec<bool> {
        vec![value; self.n_sites]
    }

    /// State of any site (interior from `config`, boundary from its fixed spin).
    #[inline]
    pub fn state(&self, config: &[bool], idx: usize) -> bool {
        if idx < self.n_sites {
            config[idx]
        } else {
            self.boundary[idx - self.n_sites]
        }
    }
}

/// Box `{-n..=n}^d`; for plus/minus boundary the ring `Λ_{n+1} \ Λ_n` is
/// attached as fixed-spin sites.
pub fn build_box(d: usize, n: usize, boundary: Boundary) -> Result<SiteGraph> {
    let side = n
        .checked_mul(2)
        .and_then(|x| x.checked_add(1))
        .ok_or(Error::SizeCap { what: "box side", size: usize::MAX, cap: MAX_SITES })?;
    build_rect(&vec![side; d], boundary)
}

/// Rectangular box with the given side lengths, placed so that coordinate
/// `k` runs over `-(side_k/2) ..= -(side_k/2) + side_k - 1`. Odd sides give
/// the symmetric box; even sides put the origin just above the centre.
pub fn build_rect(sides: &[usize], boundary: Boundary) -> Result<SiteGraph> {
    let d = sides.len();
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidDimension(d, "1, 2, 3"));
    }
    if sides.iter().any(|&s| s == 0) {
        return Err(param("box sides must be positive"));
    }
    let interior = checked_product(sides.iter().copied())?;
    let outer = checked_product(sides.iter().map(|s| s + 2))?;
    if interior > MAX_SITES || outer > MAX_SITES {
        return Err(Error::SizeCap { what: "box sites", size: outer.max(interior), cap: MAX_SITES });
    }
    let lo: Vec<i32> = sides.iter().map(|&s| -((s / 2) as i32)).collect();
    let hi: Vec<i32> = sides.iter().zip(&lo).map(|(&s, &l)| l + s as i32 - 1).collect();
    let inside = |c: &[i32]| c.iter().zip(lo.iter().zip(&hi)).all(|(x, (l, h))| l <= x && x <= h);

    let mut coords = Vec::with_capacity(outer);
    for_each_point(&lo, &hi, |c| coords.push(c.to_vec()));
    let mut boundary_spins = Vec::new();
    if let Some(spin) = boundary.spin() {
        let olo: Vec<i32> = lo.iter().map(|x| x - 1).collect();
        let ohi: Vec<i32> = hi.iter().map(|x| x + 1).collect();
        for_each_point(&olo, &ohi, |c| {
            if !inside(c) {
                coords.push(c.to_vec());
                boundary_spins.push(spin);
            }
        });
    }
    let index: HashMap<Vec<i32>, usize> = coords.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
    let mut adjacency = vec![Vec::with_capacity(2 * d); interior];
    for (s, nbrs) in adjacency.iter_mut().enumerate() {
        let c = &coords[s];
        for k in 0..d {
            for delta in [-1, 1] {
                let mut t = c.clone();
                t[k] += delta;
                if let Some(&idx) = index.get(&t) {
                    nbrs.push(idx);
                }
            }
        }
    }
    SiteGraph::assemble(adjacency, boundary_spins, Geometry::Box { lo, hi }, coords)
}

/// Periodic box `(Z/LZ)^d`; every site has degree `2d`.
pub fn build_torus(d: usize, side: usize) -> Result<SiteGraph> {
    if !(1..=3).contains(&d) {
        return Err(Error::InvalidDimension(d, "1, 2, 3"));
    }
    if side < 3 {
        return Err(param(format!("torus side {side} < 3 creates self or double edges")));
    }
    let n = checked_product(std::iter::repeat(side).take(d))?;
    if n > MAX_SITES {
        return Err(Error::SizeCap { what: "torus sites", size: n, cap: MAX_SITES });
    }
    let l = side as i32;
    let mut coords = Vec::with_capacity(n);
    for_each_point(&vec![0; d], &vec![l - 1; d], |c| coords.push(c.to_vec()));
    let stride = |c: &[i32]| c.iter().fold(0usize, |acc, &x| acc * side + x as usize);
    let adjacency = coords
        .iter()
        .map(|c| {
            let mut nbrs = Vec::with_capacity(2 * d);
            for k in 0..d {
                for delta in [l - 1, 1] {
                    let mut t = c.clone();
                    t[k] = (t[k] + delta) % l;
                    nbrs.push(stride(&t));
                }
            }
            nbrs
        })
        .collect();
    SiteGraph::assemble(adjacency, Vec::new(), Geometry::Torus { dim: d, side }, coords)
}

/// Finite truncation of the homogeneous tree of order `d`: the root and
/// every internal vertex have `d + 1` neighbours, leaves at `depth` have one.
pub fn build_tree(d: usize, depth: usize) -> Result<SiteGraph> {
    if d < 2 || depth < 1 {
        return Err(param(format!("tree needs branching >= 2 and depth >= 1 (got {d}, {depth})")));
    }
    let overflow = || Error::SizeCap { what: "tree sites", size: usize::MAX, cap: MAX_SITES };
    let mut total: usize = 1;
    let mut level: usize = d + 1;
    for _ in 0..depth {
        total = total.checked_add(level).ok_or_else(overflow)?;
        if total > MAX_SITES {
            return Err(Error::SizeCap { what: "tree sites", size: total, cap: MAX_SITES });
        }
        level = level.checked_mul(d).ok_or_else(overflow)?;
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for lvl in 0..depth {
        let mut next = Vec::new();
        for &parent in &frontier {
            let children = if lvl == 0 { d + 1 } else { d };
            for _ in 0..children {
                let child = adjacency.len();
                adjacency.push(vec![parent]);
                adjacency[parent].push(child);
                next.push(child);
            }
        }
        frontier = next;
    }
    SiteGraph::assemble(adjacency, Vec::new(), Geometry::Tree { branching: d, depth }, Vec::new())
}

fn checked_product(mut it: impl Iterator<Item = usize>) -> Result<usize> {
    it.try_fold(1usize, |acc, x| acc.checked_mul(x))
        .ok_or(Error::SizeCap { what: "site count", size: usize::MAX, cap: MAX_SITES })
}

/// Visits every integer point of `[lo, hi]` in row-major order.
fn for_each_point(lo: &[i32], hi: &[i32], mut f: impl FnMut(&[i32])) {
    let d = lo.len();
    let mut c = lo.to_vec();
    loop {
        f(&c);
        let mut k = d;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if c[k] < hi[k] {
                c[k] += 1;
                c[k + 1..].copy_from_slice(&lo[k + 1..]);
                break;
            }
        }
    }
}

/// Graph description as used in experiment configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum GraphSpec {
    Box {
        d: usize,
        /// Radius `n` of `{-n..=n}^d`; ignored when `sides` is given.
        #[serde(default)]
        size: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sides: Option<Vec<usize>>,
        boundary: Boundary,
    },
    Torus {
        d: usize,
        size: usize,
    },
    Tree {
        d: usize,
        size: usize,
    },
    Adjacency {
        adjacency: Vec<Vec<usize>>,
        #[serde(default)]
        boundary_spins: Vec<i8>,
    },
}

impl GraphSpec {
    pub fn build(&self) -> Result<SiteGraph> {
        match self {
            GraphSpec::Box { d, size, sides: Some(sides), boundary } => {
                if sides.len() != *d {
                    return Err(param(format!("box: {} sides given for d = {d} (size {size})", sides.len())));
                }
                build_rect(sides, *boundary)
            }
            GraphSpec::Box { d, size, sides: None, boundary } => build_box(*d, *size, *boundary),
            GraphSpec::Torus { d, size } => build_torus(*d, *size),
            GraphSpec::Tree { d, size } => build_tree(*d, *size),
            GraphSpec::Adjacency { adjacency, boundary_spins } => {
                let spins = boundary_spins
                    .iter()
                    .map(|&s| match s {
                        1 => Ok(true),
                        -1 => Ok(false),
                        other => Err(param(format!("boundary spin {other} not in {{-1, +1}}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                SiteGraph::from_adjacency(adjacency.clone(), spins)
            }
        }
    }
}

/// A point of the dual lattice or a primal site in doubled coordinates:
/// primal sites have even coordinates, dual sites odd ones.
pub type Doubled = (i32, i32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualEdge {
    /// End points in doubled coordinates, lexicographically ordered.
    pub ends: [Doubled; 2],
    /// The two primal sites associated to the edge (endpoints of the primal
    /// edge it crosses), interior site first.
    pub sites: (usize, usize),
    /// Index of the crossed edge in `primal.edges()`.
    pub primal_edge: usize,
}

/// The planar dual of a 2-D box: one dual edge per primal edge.
#[derive(Clone, Debug)]
pub struct DualLattice {
    primal: SiteGraph,
    edges: Vec<DualEdge>,
    by_ends: HashMap<[Doubled; 2], usize>,
    vertices: Vec<Doubled>,
    vertex_index: HashMap<Doubled, usize>,
    incident: Vec<Vec<(usize, usize)>>,
}

impl DualLattice {
    pub fn primal(&self) -> &SiteGraph {
        &self.primal
    }

    pub fn edges(&self) -> &[DualEdge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Dual vertices in lexicographic order.
    pub fn vertices(&self) -> &[Doubled] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: Doubled) -> Option<usize> {
        self.vertex_index.get(&v).copied()
    }

    /// `(neighbour vertex, dual edge)` pairs of a dual vertex.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.incident[v]
    }

    pub fn edge_between(&self, a: Doubled, b: Doubled) -> Option<usize> {
        let key = if a <= b { [a, b] } else { [b, a] };
        self.by_ends.get(&key).copied()
    }

    /// Largest doubled coordinate magnitude reachable in each direction,
    /// `[min x, max x, min y, max y]` over dual vertices.
    fn extent(&self) -> [i32; 4] {
        let mut e = [i32::MAX, i32::MIN, i32::MAX, i32::MIN];
        for &(x, y) in &self.vertices {
            e[0] = e[0].min(x);
            e[1] = e[1].max(x);
            e[2] = e[2].min(y);
            e[3] = e[3].max(y);
        }
        e
    }

    /// Primal site at doubled coordinates, if any.
    pub fn site_at_doubled(&self, p: Doubled) -> Option<usize> {
        if p.0 % 2 != 0 || p.1 % 2 != 0 {
            return None;
        }
        self.primal.site_at(&[p.0 / 2, p.1 / 2])
    }
}

/// Dual lattice of a 2-D box. The dual edge crossing primal edge `{s, t}`
/// joins the two dual sites at distance 1/2 on either side of its midpoint.
pub fn dual_graph(primal: &SiteGraph) -> Result<DualLattice> {
    match primal.geometry() {
        Geometry::Box { lo, .. } if lo.len() == 2 => {}
        _ => return Err(param("dual lattice needs a 2-D box")),
    }
    let mut edges = Vec::new();
    let mut by_ends = HashMap::new();
    for (k, (s, t)) in primal.edges().into_iter().enumerate() {
        let cs = primal.coords(s).expect("box sites carry coordinates");
        let ct = primal.coords(t).expect("box sites carry coordinates");
        // midpoint in doubled coordinates
        let m = (cs[0] + ct[0], cs[1] + ct[1]);
        let ends = if cs[0] != ct[0] {
            // horizontal primal edge, vertical dual edge
            [(m.0, m.1 - 1), (m.0, m.1 + 1)]
        } else {
            [(m.0 - 1, m.1), (m.0 + 1, m.1)]
        };
        by_ends.insert(ends, edges.len());
        edges.push(DualEdge { ends, sites: (s, t), primal_edge: k });
    }
    let mut vertices: Vec<Doubled> = edges.iter().flat_map(|e| e.ends).collect();
    vertices.sort_unstable();
    vertices.dedup();
    let vertex_index: HashMap<Doubled, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut incident = vec![Vec::new(); vertices.len()];
    for (k, e) in edges.iter().enumerate() {
        let a = vertex_index[&e.ends[0]];
        let b = vertex_index[&e.ends[1]];
        incident[a].push((b, k));
        incident[b].push((a, k));
    }
    Ok(DualLattice { primal: primal.clone(), edges, by_ends, vertices, vertex_index, incident })
}

/// A simple closed circuit of dual edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Contour {
    /// Dual edge indices in cyclic order, canonicalised to the
    /// lexicographically smallest rotation over both orientations.
    pub edges: Vec<usize>,
    /// Dual vertices in the same cyclic order (`vertices[i]` is the start of
    /// `edges[i]`).
    pub vertices: Vec<Doubled>,
}

impl Contour {
    /// Builds a contour from a closed vertex cycle (first vertex not repeated).
    pub fn from_vertices(dual: &DualLattice, cycle: &[Doubled]) -> Result<Self> {
        let n = cycle.len();
        if n < 4 {
            return Err(param("a circuit needs at least 4 edges"));
        }
        let mut seen = std::collections::HashSet::new();
        if !cycle.iter().all(|v| seen.insert(*v)) {
            return Err(param("circuit revisits a vertex"));
        }
        let edges = (0..n)
            .map(|i| {
                dual.edge_between(cycle[i], cycle[(i + 1) % n])
                    .ok_or_else(|| param(format!("no dual edge {:?}-{:?}", cycle[i], cycle[(i + 1) % n])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(canonical(edges, cycle.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Ray-casting enclosure test for a point in doubled coordinates with
    /// both coordinates even (a primal site). Exact in integers.
    pub fn encloses(&self, p: Doubled) -> bool {
        encloses(&self.vertices, p)
    }

    /// Interior sites of the primal box lying inside the circuit.
    pub fn enclosed_sites(&self, dual: &DualLattice) -> Vec<usize> {
        let g = dual.primal();
        (0..g.n_sites())
            .filter(|&s| {
                let c = g.coords(s).expect("box coordinates");
                self.encloses((2 * c[0], 2 * c[1]))
            })
            .collect()
    }
}

pub(crate) fn encloses(vertices: &[Doubled], p: Doubled) -> bool {
    debug_assert!(p.0 % 2 == 0 && p.1 % 2 == 0);
    let n = vertices.len();
    let mut crossings = 0;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        // only vertical segments can cross the horizontal ray y = p.1
        if a.0 == b.0 && a.0 > p.0 {
            let (y0, y1) = if a.1 < b.1 { (a.1, b.1) } else { (b.1, a.1) };
            if y0 < p.1 && p.1 < y1 {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

fn canonical(edges: Vec<usize>, vertices: Vec<Doubled>) -> Contour {
    let n = edges.len();
    // forward orientation: vertex i starts edge i. Reversed: the cycle
    // v0, v_{n-1}, ..., v1 with edges e_{n-1}, ..., e_0.
    let rev_edges: Vec<usize> = edges.iter().rev().copied().collect();
    let mut rev_vertices: Vec<Doubled> = Vec::with_capacity(n);
    rev_vertices.push(vertices[0]);
    rev_vertices.extend(vertices[1..].iter().rev());
    let mut best: Option<(Vec<usize>, Vec<Doubled>)> = None;
    for (es, vs) in [(&edges, &vertices), (&rev_edges, &rev_vertices)] {
        for r in 0..n {
            let cand: Vec<usize> = es[r..].iter().chain(&es[..r]).copied().collect();
            if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                let cv: Vec<Doubled> = vs[r..].iter().chain(&vs[..r]).copied().collect();
                best = Some((cand, cv));
            }
        }
    }
    let (edges, vertices) = best.expect("non-empty contour");
    Contour { edges, vertices }
}

#[derive(Clone, Debug)]
pub struct ContourSet {
    pub contours: Vec<Contour>,
    pub max_len: usize,
    /// True when the dual box is too small to hold every circuit of length
    /// `<= max_len` around the origin, so the enumeration is incomplete.
    pub truncated: bool,
}

impl ContourSet {
    pub fn count_by_length(&self) -> Vec<usize> {
        let mut counts = vec![0; self.max_len + 1];
        for c in &self.contours {
            counts[c.len()] += 1;
        }
        counts
    }
}

/// All simple dual circuits of length `<= max_len` enclosing the origin.
///
/// Each circuit is rooted at its lexicographically smallest vertex and grown
/// by depth-first search through larger vertices only; the two traversal
/// directions are told apart by comparing the second and last vertices.
pub fn enumerate_contours(dual: &DualLattice, max_len: usize) -> Result<ContourSet> {
    if max_len < 4 || max_len % 2 != 0 {
        return Err(param(format!("max_len must be even and >= 4 (got {max_len})")));
    }
    if dual.primal().origin().is_none() {
        return Err(param("box does not contain the origin"));
    }
    let ext = dual.extent();
    // a straight strip of l/2 - 1 cells starting at the origin reaches
    // doubled coordinate l - 3 on its far side
    let reach = max_len as i32 - 3;
    let truncated = -ext[0] < reach || ext[1] < reach || -ext[2] < reach || ext[3] < reach;

    let origin = (0, 0);
    let nv = dual.vertices.len();
    let mut contours = Vec::new();
    let mut on_path = vec![false; nv];
    let mut path_v = Vec::with_capacity(max_len);
    let mut path_e = Vec::with_capacity(max_len);
    for root in 0..nv {
        let rv = dual.vertices[root];
        // the smallest vertex of a circuit around the origin lies to its left
        if rv.0 >= 0 || -rv.0 > reach {
            continue;
        }
        on_path[root] = true;
        path_v.push(root);
        extend_circuits(dual, root, max_len, origin, &mut on_path, &mut path_v, &mut path_e, &mut contours);
        path_v.pop();
        on_path[root] = false;
    }
    contours.sort_by(|a, b| (a.len(), &a.edges).cmp(&(b.len(), &b.edges)));
    Ok(ContourSet { contours, max_len, truncated })
}

#[allow(clippy::too_many_arguments)]
fn extend_circuits(
    dual: &DualLattice,
    root: usize,
    max_len: usize,
    origin: Doubled,
    on_path: &mut [bool],
    path_v: &mut Vec<usize>,
    path_e: &mut Vec<usize>,
    out: &mut Vec<Contour>,
) {
    let cur = *path_v.last().expect("path starts at root");
    let rv = dual.vertices[root];
    for &(w, e) in dual.incident(cur) {
        let len = path_e.len() + 1;
        if w == root {
            if len >= 4 && path_v[1] < cur {
                let vertices: Vec<Doubled> = path_v.iter().map(|&i| dual.vertices[i]).collect();
                if encloses(&vertices, origin) {
                    let mut edges = path_e.clone();
                    edges.push(e);
                    out.push(canonical(edges, vertices));
                }
            }
            continue;
        }
        if w < root || on_path[w] || len >= max_len {
            continue;
        }
        let wv = dual.vertices[w];
        let back = (((wv.0 - rv.0).abs() + (wv.1 - rv.1).abs()) / 2) as usize;
        if back > max_len - len {
            continue;
        }
        on_path[w] = true;
        path_v.push(w);
        path_e.push(e);
        extend_circuits(dual, root, max_len, origin, on_path, path_v, path_e, out);
        path_e.pop();
        path_v.pop();
        on_path[w] = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_examples() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        assert_eq!(g.n_sites(), 9);
        assert_eq!(g.n_boundary(), 16);
        assert!(g.boundary_spins().iter().all(|&s| s));
        assert_eq!(g.degree_bound(), 4);

        let p = build_box(1, 2, Boundary::Free).unwrap();
        assert_eq!(p.n_sites(), 5);
        assert_eq!(p.n_boundary(), 0);
        assert_eq!(p.edges().len(), 4);

        let o = build_box(2, 0, Boundary::Plus).unwrap();
        assert_eq!(o.n_sites(), 1);
        assert_eq!(o.neighbors(0).len(), 4);
        assert!(o.neighbors(0).iter().all(|&t| o.boundary_spin(t) == Some(true)));

        let m = build_box(2, 1, Boundary::Minus).unwrap();
        assert!(m.boundary_spins().iter().all(|&s| !s));
    }

    #[test]
    fn box_indexing_is_row_major() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        assert_eq!(g.coords(0), Some(&[-1, -1][..]));
        assert_eq!(g.coords(1), Some(&[-1, 0][..]));
        assert_eq!(g.coords(3), Some(&[0, -1][..]));
        assert_eq!(g.origin(), Some(4));
        assert!(g.is_boundary(9));
        assert_eq!(g.coords(9), Some(&[-2, -2][..]));
    }

    #[test]
    fn rect_even_sides() {
        let g = build_rect(&[2, 2], Boundary::Plus).unwrap();
        assert_eq!(g.n_sites(), 4);
        assert_eq!(g.n_boundary(), 12);
        assert_eq!(g.origin(), Some(3));
        assert_eq!(g.ring_edges().len(), 12);
        let g = build_rect(&[40, 40], Boundary::Plus).unwrap();
        assert_eq!(g.n_sites(), 1600);
        assert_eq!(g.box_radius(), Some(19));
    }

    #[test]
    fn torus_examples() {
        for (d, l, n) in [(2, 4, 16), (1, 5, 5), (2, 3, 9)] {
            let g = build_torus(d, l).unwrap();
            assert_eq!(g.n_sites(), n);
            assert!(g.adjacency().iter().all(|a| a.len() == 2 * d));
        }
        assert!(build_torus(2, 2).is_err());
    }

    #[test]
    fn tree_examples() {
        let t = build_tree(2, 1).unwrap();
        assert_eq!(t.n_sites(), 4);
        assert_eq!(t.neighbors(0).len(), 3);
        let t = build_tree(2, 2).unwrap();
        assert_eq!(t.n_sites(), 10);
        assert!(t.adjacency()[1..4].iter().all(|a| a.len() == 3));
        assert!(t.adjacency()[4..].iter().all(|a| a.len() == 1));
        assert_eq!(build_tree(3, 1).unwrap().n_sites(), 5);
        assert!(build_tree(1, 3).is_err());
        assert!(build_tree(2, 200).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(build_box(4, 1, Boundary::Free), Err(Error::InvalidDimension(4, _))));
        assert!(build_box(3, 1000, Boundary::Plus).is_err());
        assert!(SiteGraph::from_adjacency(vec![vec![1], vec![]], vec![]).is_err());
        assert!(SiteGraph::from_adjacency(vec![vec![0]], vec![]).is_err());
        assert!(SiteGraph::from_adjacency(vec![vec![2]], vec![true]).is_err());
        let g = SiteGraph::from_adjacency(vec![vec![1, 2], vec![0]], vec![true]).unwrap();
        assert_eq!(g.degree_bound(), 2);
        assert_eq!(g.edges(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn dual_of_small_box() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        let dual = dual_graph(&g).unwrap();
        assert_eq!(dual.n_edges(), g.edges().len());
        assert_eq!(dual.n_edges(), 24);
        // dual sites {-3/2..3/2}^2
        assert_eq!(dual.vertices().len(), 16);
        assert_eq!(dual.vertices()[0], (-3, -3));
        assert_eq!(*dual.vertices().last().unwrap(), (3, 3));
        // (-1/2, 1/2)-(1/2, 1/2) crosses {(0,0),(0,1)}
        let e = dual.edge_between((-1, 1), (1, 1)).unwrap();
        let (s, t) = dual.edges()[e].sites;
        let mut pair = [g.coords(s).unwrap().to_vec(), g.coords(t).unwrap().to_vec()];
        pair.sort();
        assert_eq!(pair, [vec![0, 0], vec![0, 1]]);
        assert!(dual_graph(&build_box(1, 2, Boundary::Plus).unwrap()).is_err());
    }

    #[test]
    fn unit_square_is_the_only_4_circuit() {
        let g = build_box(2, 3, Boundary::Plus).unwrap();
        let dual = dual_graph(&g).unwrap();
        let set = enumerate_contours(&dual, 4).unwrap();
        assert_eq!(set.contours.len(), 1);
        assert!(!set.truncated);
        let c = &set.contours[0];
        assert_eq!(c.enclosed_sites(&dual), vec![g.origin().unwrap()]);
        let six = enumerate_contours(&dual, 6).unwrap().count_by_length();
        assert_eq!(six[6], 4);
        assert!(enumerate_contours(&dual, 5).is_err());
    }

    #[test]
    fn truncation_is_flagged() {
        let g = build_box(2, 1, Boundary::Plus).unwrap();
        let dual = dual_graph(&g).unwrap();
        assert!(!enumerate_contours(&dual, 6).unwrap().truncated);
        assert!(enumerate_contours(&dual, 8).unwrap().truncated);
    }
}
