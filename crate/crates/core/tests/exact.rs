mod common;

use dynperc::exact::{
    dominates, fkg_lattice_check, gibbs_measure, holley_check, is_monotone, positive_correlations_check,
    product_measure, rc_wired_measure, ExactMeasure, DOMINATION_SLACK,
};
use dynperc::lattice::{build_rect, Boundary};
use dynperc::movability::{thin, Direction};
use proptest::prelude::*;

fn measure(probs: Vec<f64>) -> ExactMeasure {
    let n = probs.len().trailing_zeros() as usize;
    ExactMeasure::from_probs(ExactMeasure::default_labels("v", n), probs).unwrap()
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 1 << n).prop_map(|w| {
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    })
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|n| (weights(n), weights(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_oracle_matches_up_set_scan((a, b) in pair()) {
        let fast = dominates(&measure(a.clone()), &measure(b.clone())).unwrap().holds;
        prop_assert_eq!(fast, common::dominates_by_upsets(&a, &b, DOMINATION_SLACK));
    }

    #[test]
    fn boosting_dominates((a, _) in pair(), eps in 0.0f64..1.0) {
        let mu = measure(a);
        let up = thin(&mu, eps, Direction::Up).unwrap();
        let down = thin(&mu, eps, Direction::Down).unwrap();
        prop_assert!(dominates(&mu, &up).unwrap().holds);
        prop_assert!(dominates(&down, &mu).unwrap().holds);
    }

    #[test]
    fn failed_domination_has_a_witness((a, b) in pair()) {
        let cert = dominates(&measure(a.clone()), &measure(b.clone())).unwrap();
        if !cert.holds {
            prop_assert!(cert.witness_gap.unwrap() > DOMINATION_SLACK);
        }
    }

    #[test]
    fn holley_implies_domination((a, b) in pair()) {
        let (mu1, mu2) = (measure(a), measure(b));
        if holley_check(&mu1, &mu2).unwrap() {
            prop_assert!(dominates(&mu1, &mu2).unwrap().holds);
        }
    }

    #[test]
    fn fkg_lattice_implies_positive_correlations(a in (1usize..=4).prop_flat_map(weights)) {
        let mu = measure(a);
        if fkg_lattice_check(&mu).unwrap() {
            prop_assert!(is_monotone(&mu).unwrap().is_none());
            prop_assert!(positive_correlations_check(&mu).unwrap());
        }
    }
}

#[test]
fn gibbs_weights_match_direct_energy() {
    for boundary in [Boundary::Plus, Boundary::Minus, Boundary::Free] {
        let g = build_rect(&[2, 3], boundary).unwrap();
        let (beta, h) = (0.6, -0.25);
        let mu = gibbs_measure(&g, beta, h).unwrap();
        let n = g.n_sites();
        let w: Vec<f64> = (0..1usize << n)
            .map(|x| {
                let config: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
                (-common::ising_energy(&g, &config, beta, h)).exp()
            })
            .collect();
        let z: f64 = w.iter().sum();
        for (x, wx) in w.iter().enumerate() {
            assert!((mu.prob(x) - wx / z).abs() < 1e-13);
        }
    }
}

#[test]
fn ferromagnetic_gibbs_is_fkg_and_ordered_in_h() {
    let g = build_rect(&[2, 2], Boundary::Free).unwrap();
    let lo = gibbs_measure(&g, 0.4, -0.2).unwrap();
    let hi = gibbs_measure(&g, 0.4, 0.3).unwrap();
    assert!(fkg_lattice_check(&lo).unwrap());
    assert!(holley_check(&lo, &hi).unwrap());
    assert!(dominates(&lo, &hi).unwrap().holds);
    assert!(!dominates(&hi, &lo).unwrap().holds);
}

#[test]
fn product_family_is_ordered_in_p() {
    for n in 1..=4 {
        for (p, q) in [(0.2, 0.3), (0.5, 0.5), (0.7, 0.6)] {
            let d = dominates(&product_measure(n, p).unwrap(), &product_measure(n, q).unwrap()).unwrap();
            assert_eq!(d.holds, p <= q, "n={n} p={p} q={q}");
        }
    }
}

#[test]
fn wired_rc_is_monotone_in_p() {
    let g = build_rect(&[1, 2], Boundary::Plus).unwrap();
    let a = rc_wired_measure(&g, 0.3).unwrap();
    let b = rc_wired_measure(&g, 0.6).unwrap();
    assert!(fkg_lattice_check(&a).unwrap());
    assert!(dominates(&a, &b).unwrap().holds);
}
