mod common;

use dynperc::dynamics::{simulate, RateSpec};
use dynperc::lattice::{build_box, build_rect, build_torus, Boundary};
use dynperc::percolation::{
    clusters, crossing, first_time, occurs_in_window, persistence, Crossing, CrossingKind, CrossingQuery,
    Persistence,
};
use proptest::prelude::*;

fn config(n: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn origin_crossing_matches_flood_fill(c in config(49), state in any::<bool>(), l in 0usize..=3, plus in any::<bool>()) {
        let g = build_box(2, 3, if plus { Boundary::Plus } else { Boundary::Minus }).unwrap();
        let kind = CrossingKind::OriginToBoundary { l };
        let fast = crossing(&c, &g, Crossing { state, kind }).unwrap();
        prop_assert_eq!(fast, common::flood_origin_to_boundary(&g, &c, state, l as i32));
    }

    #[test]
    fn cluster_sizes_partition_the_state_class(c in config(25), state in any::<bool>()) {
        let g = build_box(2, 2, Boundary::Free).unwrap();
        let cl = clusters(&c, &g, state);
        let members = c.iter().filter(|&&b| b == state).count();
        prop_assert_eq!(cl.sizes.iter().sum::<usize>(), members);
        for (i, lab) in cl.labels.iter().enumerate().take(g.n_sites()) {
            prop_assert_eq!(lab.is_some(), c[i] == state);
        }
    }

    #[test]
    fn crossing_is_monotone(c in config(25), flip in 0usize..25) {
        let g = build_box(2, 2, Boundary::Free).unwrap();
        let q = Crossing { state: true, kind: CrossingKind::SideToSide };
        let mut more = c.clone();
        more[flip] = true;
        if crossing(&c, &g, q).unwrap() {
            prop_assert!(crossing(&more, &g, q).unwrap());
        }
    }

    #[test]
    fn persistence_agrees_with_dense_grid(seed in any::<u64>(), beta in 0.0f64..0.8) {
        let g = build_box(2, 2, Boundary::Plus).unwrap();
        let spec = RateSpec::Glauber { beta, h: 0.0 };
        let tau = 0.3;
        let traj = simulate(&spec, &g, &g.constant(true), tau, seed).unwrap();
        let cr = Crossing { state: true, kind: CrossingKind::OriginToBoundary { l: 2 } };
        let grid: Vec<f64> = (0..=2000).map(|k| tau * k as f64 / 2000.0).collect();
        let holds_at = |t: f64| common::flood_origin_to_boundary(&g, &traj.config_at(t), true, 2);
        match persistence(&traj, &g, cr, tau).unwrap() {
            Persistence::HoldsThroughout => {
                prop_assert!(grid.iter().all(|&t| holds_at(t)));
                prop_assert!(traj.accepted().all(|e| holds_at(e.t)));
            }
            Persistence::FirstViolation { t } => {
                prop_assert!(!holds_at(t));
                prop_assert!(grid.iter().filter(|&&s| s < t).all(|&s| holds_at(s)));
            }
        }
        if let Some(t) = occurs_in_window(&traj, &g, cr, tau).unwrap() {
            prop_assert!(holds_at(t));
            prop_assert!(grid.iter().filter(|&&s| s < t).all(|&s| !holds_at(s)));
        }
    }
}

#[test]
fn window_beyond_horizon_is_an_error() {
    let g = build_torus(2, 3).unwrap();
    let traj = simulate(&RateSpec::Contact { lambda: 1.0 }, &g, &g.constant(true), 1.0, 0).unwrap();
    let q = CrossingQuery::new(&g, Crossing { state: true, kind: CrossingKind::SideToSide }).unwrap();
    assert!(first_time(&traj, &g, &q, 2.0, true).is_err());
}

#[test]
fn target_radius_must_fit_the_box() {
    let g = build_box(2, 2, Boundary::Plus).unwrap();
    let q = Crossing { state: true, kind: CrossingKind::OriginToBoundary { l: 3 } };
    assert!(crossing(&g.constant(true), &g, q).is_err());
}

#[test]
fn rectangle_side_crossing() {
    let g = build_rect(&[3, 4], Boundary::Free).unwrap();
    let mut c = g.constant(false);
    let first_column: Vec<usize> = (0..g.n_sites()).filter(|&i| g.coords(i).unwrap()[1] == g.coords(0).unwrap()[1]).collect();
    for &i in &first_column {
        c[i] = true;
    }
    let side = Crossing { state: true, kind: CrossingKind::SideToSide };
    assert!(crossing(&c, &g, side).unwrap());
    c[first_column[1]] = false;
    assert!(!crossing(&c, &g, side).unwrap());
}
