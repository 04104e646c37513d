mod common;

use dynperc::exact::{gibbs_measure, rc_free_edges, rc_wired_measure, tv_distance};
use dynperc::lattice::{build_box, build_rect, Boundary, SiteGraph};
use dynperc::rc_es::{
    cor92_p, es_beta, es_joint_measure, es_sample, lemma93_epsilon_prime, lemma93_transform, lss_feasible,
    lss_rho, rc_edge_conditional, rc_gibbs_sampler, EsMode,
};
use proptest::prelude::*;

/// Components of the interior sites plus one merged boundary vertex.
fn wired_components(g: &SiteGraph, edges: &[(usize, usize)], eta: usize) -> usize {
    let n = g.n_sites();
    let node = |s: usize| s.min(n);
    let mut adj = vec![Vec::new(); n + 1];
    for (k, &(a, b)) in edges.iter().enumerate() {
        if eta >> k & 1 == 1 {
            adj[node(a)].push(node(b));
            adj[node(b)].push(node(a));
        }
    }
    let mut seen = vec![false; n + 1];
    let mut count = 0;
    for s in 0..=n {
        if seen[s] {
            continue;
        }
        count += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

fn rc_oracle(g: &SiteGraph, p: f64) -> Vec<f64> {
    let edges = rc_free_edges(g);
    let m = edges.len();
    let w: Vec<f64> = (0..1usize << m)
        .map(|eta| {
            let k = (eta as u32).count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(m as i32 - k) * 2f64.powi(wired_components(g, &edges, eta) as i32)
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn small_boxes() -> Vec<SiteGraph> {
    vec![
        build_rect(&[2, 2], Boundary::Plus).unwrap(),
        build_rect(&[1, 3], Boundary::Plus).unwrap(),
        build_box(1, 2, Boundary::Plus).unwrap(),
    ]
}

#[test]
fn wired_measure_matches_component_oracle() {
    for g in small_boxes() {
        for p in [0.2, 0.5, 0.9] {
            let mu = rc_wired_measure(&g, p).unwrap();
            assert!(common::tv(mu.probs(), &rc_oracle(&g, p)) < 1e-12);
        }
    }
}

#[test]
fn heat_bath_conditional_is_reversible() {
    for g in small_boxes() {
        let p = 0.55;
        let pi = rc_oracle(&g, p);
        let m = rc_free_edges(&g).len();
        for eta in 0..1usize << m {
            for e in 0..m {
                if eta >> e & 1 == 1 {
                    continue;
                }
                let y: Vec<bool> = (0..m).map(|k| eta >> k & 1 == 1).collect();
                let q = rc_edge_conditional(&y, e, p, &g).unwrap();
                let open = pi[eta | 1 << e];
                let closed = pi[eta];
                assert!((q * (open + closed) - open).abs() < 1e-10, "edge {e} config {eta}");
            }
        }
    }
}

#[test]
fn gibbs_sampler_edge_marginals() {
    let g = build_rect(&[2, 2], Boundary::Plus).unwrap();
    let p = 0.4;
    let exact = rc_wired_measure(&g, p).unwrap().one_marginals();
    let reps = 4000;
    let mut counts = vec![0usize; exact.len()];
    for r in 0..reps {
        for (k, open) in rc_gibbs_sampler(&g, p, 20, r as u64).unwrap().into_iter().enumerate() {
            counts[k] += open as usize;
        }
    }
    for (k, &c) in counts.iter().enumerate() {
        let f = c as f64 / reps as f64;
        let sd = (exact[k] * (1.0 - exact[k]) / reps as f64).sqrt();
        assert!((f - exact[k]).abs() < 4.0 * sd, "edge {k}: {f} vs {}", exact[k]);
    }
}

#[test]
fn closed_and_open_extremes() {
    let g = build_box(2, 2, Boundary::Plus).unwrap();
    let m = rc_free_edges(&g).len();
    assert_eq!(rc_gibbs_sampler(&g, 1.0, 2, 0).unwrap(), vec![true; m]);
    assert_eq!(rc_gibbs_sampler(&g, 0.0, 2, 0).unwrap(), vec![false; m]);
    assert!(rc_gibbs_sampler(&build_box(2, 1, Boundary::Free).unwrap(), 0.5, 1, 0).is_err());
}

#[test]
fn joint_spin_marginal_is_ising() {
    let g = build_rect(&[1, 3], Boundary::Plus).unwrap();
    let p = 0.6;
    let joint = es_joint_measure(&g, p).unwrap();
    let n = g.n_sites();
    let spins = joint.marginal(&(0..n).collect::<Vec<_>>()).unwrap();
    assert!(tv_distance(&spins, &gibbs_measure(&g, es_beta(p), 0.0).unwrap()).unwrap() < 1e-12);
}

#[test]
fn es_gibbs_sampler_matches_exact_spin_law() {
    let g = build_rect(&[2, 2], Boundary::Plus).unwrap();
    let p = 0.5;
    let joint = es_joint_measure(&g, p).unwrap();
    let exact_up = joint.one_marginals()[0];
    let reps = 4000;
    let mut up = 0;
    for seed in 0..reps {
        let pair = es_sample(&g, p, EsMode::Gibbs { sweeps: 20 }, seed).unwrap();
        assert!(pair.is_consistent(&g));
        up += pair.x[0] as usize;
    }
    let f = up as f64 / reps as f64;
    let sd = (exact_up * (1.0 - exact_up) / reps as f64).sqrt();
    assert!((f - exact_up).abs() < 4.0 * sd, "{f} vs {exact_up}");
}

#[test]
fn transform_thins_consistently() {
    let g = build_box(2, 2, Boundary::Plus).unwrap();
    let edges = rc_free_edges(&g);
    for seed in 0..20 {
        let pair = es_sample(&g, 0.7, EsMode::Gibbs { sweeps: 5 }, seed).unwrap();
        let t = lemma93_transform(&g, &pair, 0.2, 0.3, seed).unwrap();
        for k in 0..edges.len() {
            assert!(!t.a[k] || pair.y[k]);
            assert!(!t.b_y[k] || pair.y[k]);
        }
        for s in 0..g.n_sites() {
            assert!(!t.b_x[s] || pair.x[s]);
        }
    }
}

#[test]
fn epsilon_prime_defining_property() {
    for (eps, delta) in [(0.1, 4), (0.3, 3), (0.5, 2)] {
        let ep = lemma93_epsilon_prime(eps, delta).unwrap();
        assert!(ep > 0.0 && ep < 1.0);
        let p = (1.0 - ep).powi(2);
        assert!(lss_rho(1.0 - p, 2 * (delta - 1)).unwrap() >= 1.0 - eps - 1e-6);
    }
    assert!(lemma93_epsilon_prime(0.1, 1).is_err());
}

proptest! {
    #[test]
    fn lss_rho_decreasing_and_bounded(delta in 2usize..8, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let d = delta as f64;
        let thr = (d - 1.0).powf(d - 1.0) / d.powf(d);
        let (q1, q2) = if a < b { (a * thr, b * thr) } else { (b * thr, a * thr) };
        let (r1, r2) = (lss_rho(q1, delta).unwrap(), lss_rho(q2, delta).unwrap());
        prop_assert!((0.0..=1.0).contains(&r2));
        prop_assert!(r1 >= r2 - 1e-12);
        prop_assert!(lss_rho(thr * 1.01, delta).is_err());
    }

    #[test]
    fn lss_feasible_grid_point_exists(delta in 2usize..6, frac in 0.05f64..0.95) {
        let d = delta as f64;
        let thr = (d - 1.0).powf(d - 1.0) / d.powf(d);
        let q = frac * thr;
        let grid = 400;
        let found = (1..grid).any(|i| (1..grid).any(|j| lss_feasible(i as f64 / grid as f64, j as f64 / grid as f64, q, delta)));
        prop_assert!(found);
        prop_assert!(!lss_feasible(0.5, 0.5, 1.0, delta));
    }

    #[test]
    fn threshold_density_is_monotone_and_minimal(delta in 2usize..8, a in 0.05f64..0.95, b in 0.05f64..0.95) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (cor92_p(lo, delta).unwrap(), cor92_p(hi, delta).unwrap());
        prop_assert!(p_lo <= p_hi + 1e-9);
        prop_assert!(lss_rho(1.0 - p_hi, delta).unwrap() >= hi - 1e-6);
        let below = p_hi - 1e-6;
        let d = delta as f64;
        let thr = (d - 1.0).powf(d - 1.0) / d.powf(d);
        if 1.0 - below <= thr {
            prop_assert!(lss_rho(1.0 - below, delta).unwrap() < hi + 1e-6);
        }
    }
}
