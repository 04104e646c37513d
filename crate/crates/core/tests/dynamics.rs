mod common;

use dynperc::dynamics::{
    config_to_mask, generator_matrix, sample_config, sample_stationary_init, simulate, traj_extrema, InitMode,
    RateSpec,
};
use dynperc::exact::{empirical_measure, gibbs_measure, tv_distance};
use dynperc::lattice::{build_rect, build_torus, Boundary, SiteGraph};
use dynperc::rng::replica_seed;
use proptest::prelude::*;

fn spec_strategy() -> impl Strategy<Value = RateSpec> {
    prop_oneof![
        (0.0f64..1.2, -1.0f64..1.0).prop_map(|(beta, h)| RateSpec::Glauber { beta, h }),
        (0.1f64..3.0).prop_map(|lambda| RateSpec::Contact { lambda }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn replay_is_exact(spec in spec_strategy(), seed in any::<u64>()) {
        let g = build_torus(2, 3).unwrap();
        let init = g.constant(true);
        let a = simulate(&spec, &g, &init, 1.5, seed).unwrap();
        let b = simulate(&spec, &g, &init, 1.5, seed).unwrap();
        prop_assert_eq!(&a, &b);
    }

    #[test]
    fn events_are_ordered_flips(spec in spec_strategy(), seed in any::<u64>()) {
        let g = build_rect(&[2, 3], Boundary::Plus).unwrap();
        let init = g.constant(false);
        let traj = simulate(&spec, &g, &init, 2.0, seed).unwrap();
        let mut state = init.clone();
        let mut last = 0.0;
        for e in traj.accepted() {
            prop_assert!(e.t >= last && e.t <= 2.0);
            prop_assert_ne!(state[e.site], e.state);
            state[e.site] = e.state;
            last = e.t;
        }
        prop_assert_eq!(state, traj.final_config());
    }

    #[test]
    fn window_extrema_bracket_the_path(seed in any::<u64>(), t0 in 0.0f64..1.0, delta in 0.0f64..1.0) {
        let g = build_torus(2, 3).unwrap();
        let traj = simulate(&RateSpec::Contact { lambda: 1.5 }, &g, &g.constant(true), 2.0, seed).unwrap();
        let (lo, hi) = traj_extrema(&traj, t0, delta).unwrap();
        for k in 0..=50 {
            let c = traj.config_at(t0 + delta * k as f64 / 50.0);
            for s in 0..c.len() {
                prop_assert!(lo[s] <= c[s] && c[s] <= hi[s]);
            }
        }
    }
}

/// Generator built from the rate definition alone.
fn dense_generator(spec: &RateSpec, g: &SiteGraph) -> Vec<Vec<f64>> {
    let n = g.n_sites();
    let size = 1usize << n;
    let mut q = vec![vec![0.0; size]; size];
    for x in 0..size {
        let config: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
        for s in 0..n {
            let nbrs = g.neighbors(s);
            let up = nbrs.iter().filter(|&&t| g.state(&config, t)).count();
            let r = spec.rate_from_counts(config[s], up, nbrs.len());
            q[x][x ^ 1 << s] += r;
            q[x][x] -= r;
        }
    }
    q
}

/// `e^{tQ}` row for `x0` by uniformisation.
fn transient_law(q: &[Vec<f64>], x0: usize, t: f64) -> Vec<f64> {
    let size = q.len();
    let lam = (0..size).map(|x| -q[x][x]).fold(0.0, f64::max);
    let mut v = vec![0.0; size];
    v[x0] = 1.0;
    let mut out = vec![0.0; size];
    let mut weight = (-lam * t).exp();
    for k in 0..400 {
        for x in 0..size {
            out[x] += weight * v[x];
        }
        let mut next = vec![0.0; size];
        for x in 0..size {
            for y in 0..size {
                let p = if x == y { 1.0 + q[x][y] / lam } else { q[x][y] / lam };
                next[y] += v[x] * p;
            }
        }
        v = next;
        weight *= lam * t / (k + 1) as f64;
    }
    out
}

#[test]
fn transient_law_matches_uniformisation() {
    let g = build_rect(&[1, 3], Boundary::Plus).unwrap();
    let spec = RateSpec::Glauber { beta: 0.4, h: -0.2 };
    let q = dense_generator(&spec, &g);
    let lib = generator_matrix(&spec, &g).unwrap();
    for x in 0..q.len() {
        for y in 0..q.len() {
            assert!((lib.get(x, y) - q[x][y]).abs() < 1e-12);
        }
    }
    let exact = transient_law(&q, 0, 0.4);
    let reps = 40_000;
    let samples: Vec<usize> = (0..reps)
        .map(|r| config_to_mask(&simulate(&spec, &g, &g.constant(false), 0.4, replica_seed(9, r)).unwrap().final_config()))
        .collect();
    let emp = empirical_measure(g.n_sites(), &samples).unwrap();
    let tv = common::tv(emp.probs(), &exact);
    assert!(tv < 0.02, "tv {tv}");
}

#[test]
fn gibbs_is_stationary() {
    let g = build_rect(&[2, 2], Boundary::Plus).unwrap();
    let (beta, h) = (0.5, 0.1);
    let mu = gibbs_measure(&g, beta, h).unwrap();
    let gen = generator_matrix(&RateSpec::Glauber { beta, h }, &g).unwrap();
    let flow = gen.left_apply(mu.probs());
    assert!(flow.iter().all(|v| v.abs() < 1e-12));

    let reps = 30_000;
    let samples: Vec<usize> = (0..reps)
        .map(|r| {
            let rs = replica_seed(3, r);
            let init = sample_config(&mu, g.n_sites(), rs);
            config_to_mask(&simulate(&RateSpec::Glauber { beta, h }, &g, &init, 0.7, rs).unwrap().final_config())
        })
        .collect();
    let tv = tv_distance(&empirical_measure(g.n_sites(), &samples).unwrap(), &mu).unwrap();
    assert!(tv < 0.02, "tv {tv}");
}

#[test]
fn exact_init_is_flagged_exact() {
    let g = build_rect(&[2, 2], Boundary::Free).unwrap();
    let spec = RateSpec::Glauber { beta: 0.3, h: 0.0 };
    let s = sample_stationary_init(&spec, &g, InitMode::Exact, 1).unwrap();
    assert!(!s.approximate);
    let b = sample_stationary_init(&spec, &g, InitMode::Burnin { t_b: 1.0 }, 1).unwrap();
    assert!(b.approximate);
}
