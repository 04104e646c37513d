//! Bernoulli thinning/boosting of exact measures and the search for the
//! largest ε keeping a domination `μ1 ⪯ μ2` intact.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::exact::{dominates, is_monotone, ExactMeasure, CHECK_TOL};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const MAX_BISECTION_STEPS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[serde(alias = "downward")]
    Down,
    #[serde(alias = "upward")]
    Up,
}

/// Law of `min(X, Z)` (down, `Z ~ π_{1-ε}`) or `max(X, Z)` (up, `Z ~ π_ε`)
/// for `X ~ μ`, computed one variable at a time.
pub fn thin(mu: &ExactMeasure, eps: f64, direction: Direction) -> Result<ExactMeasure> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(param(format!("epsilon {eps} outside [0,1]")));
    }
    let mut p = mu.probs().to_vec();
    for i in 0..mu.n_vars() {
        let bit = 1usize << i;
        for x in 0..p.len() {
            let from_one = x & bit != 0;
            if from_one == (direction == Direction::Down) {
                let moved = eps * p[x];
                p[x] -= moved;
                p[x ^ bit] += moved;
            }
        }
    }
    ExactMeasure::from_probs(mu.labels().to_vec(), p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MovabilityReport {
    pub direction: Direction,
    pub eps_max: f64,
    pub tol: f64,
    /// `inf_{s,ξ} [μ2(1|ξ) - μ1(1|ξ)]`, when both measures have full support.
    pub lemma33_a: Option<f64>,
    /// `A/(1+A)` for `A > 0`, else 0.
    pub lemma33_bound: Option<f64>,
    /// Bisection trace `(ε, predicate holds)`.
    pub samples: Vec<(f64, bool)>,
}

/// Largest ε with `μ1 ⪯ thin(μ2, ε, down)`.
pub fn max_downward_epsilon(mu1: &ExactMeasure, mu2: &ExactMeasure, tol: f64) -> Result<MovabilityReport> {
    search(mu1, mu2, tol, Direction::Down, |eps| {
        Ok(dominates(mu1, &thin(mu2, eps, Direction::Down)?)?.holds)
    })
}

/// Largest ε with `thin(μ1, ε, up) ⪯ μ2`.
pub fn max_upward_epsilon(mu1: &ExactMeasure, mu2: &ExactMeasure, tol: f64) -> Result<MovabilityReport> {
    search(mu1, mu2, tol, Direction::Up, |eps| {
        Ok(dominates(&thin(mu1, eps, Direction::Up)?, mu2)?.holds)
    })
}

fn search(
    mu1: &ExactMeasure,
    mu2: &ExactMeasure,
    tol: f64,
    direction: Direction,
    pred: impl Fn(f64) -> Result<bool>,
) -> Result<MovabilityReport> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(param(format!("tolerance {tol} outside (0,1)")));
    }
    if !dominates(mu1, mu2)?.holds {
        return Err(Error::Precondition("mu1 is not dominated by mu2".into()));
    }
    let mut samples = vec![(0.0, true)];
    let at_one = pred(1.0)?;
    samples.push((1.0, at_one));
    let eps_max = if at_one {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..MAX_BISECTION_STEPS {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let ok = pred(mid)?;
            samples.push((mid, ok));
            if ok {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let eps = 0.5 * (lo + hi);
        // the feasible set must be an interval [0, ε*]
        let below = (eps - tol).max(0.0);
        if !pred(below)? || pred((eps + tol).min(1.0))? {
            return Err(Error::Precondition(format!(
                "domination predicate is not interval-feasible around {eps}"
            )));
        }
        eps
    };
    let (lemma33_a, lemma33_bound) = if mu1.full_support() && mu2.full_support() {
        let a = lemma33_gap(mu1, mu2)?;
        (Some(a), Some(if a > 0.0 { a / (1.0 + a) } else { 0.0 }))
    } else {
        (None, None)
    };
    Ok(MovabilityReport { direction, eps_max, tol, lemma33_a, lemma33_bound, samples })
}

/// `A = inf_{s, ξ} [μ2(σ(s)=1 | ξ) - μ1(σ(s)=1 | ξ)]`.
pub fn lemma33_gap(mu1: &ExactMeasure, mu2: &ExactMeasure) -> Result<f64> {
    if mu1.n_vars() != mu2.n_vars() {
        return Err(Error::VariableMismatch(format!("{} vs {} variables", mu1.n_vars(), mu2.n_vars())));
    }
    if !(mu1.full_support() && mu2.full_support()) {
        return Err(Error::Precondition("lemma33_gap requires full support".into()));
    }
    let (p1, p2) = (mu1.probs(), mu2.probs());
    let mut a = f64::INFINITY;
    for s in 0..mu1.n_vars() {
        let bit = 1usize << s;
        for x in (0..p1.len()).filter(|x| x & bit == 0) {
            let c1 = p1[x | bit] / (p1[x] + p1[x | bit]);
            let c2 = p2[x | bit] / (p2[x] + p2[x | bit]);
            a = a.min(c2 - c1);
        }
    }
    Ok(if a.is_finite() { a } else { 0.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Report {
    pub holds: bool,
    /// Whether the input passed the monotonicity check (the lemma's hypothesis).
    pub input_monotone: bool,
    /// Smallest slack `μ^(-,ε)(1|ξ) - (1-ε)μ(1|ξ)` over `s, ξ`.
    pub min_slack_down: f64,
    /// Smallest slack `μ^(+,ε)(0|ξ) - (1-ε)μ(0|ξ)`.
    pub min_slack_up: f64,
}

/// Checks `μ^(-,ε)(1|ξ) >= (1-ε)μ(1|ξ)` and `μ^(+,ε)(0|ξ) >= (1-ε)μ(0|ξ)`
/// for every site and context with positive probability.
pub fn lemma31_check(mu: &ExactMeasure, eps: f64) -> Result<Lemma31Report> {
    if !mu.full_support() {
        return Err(Error::Precondition("lemma31_check requires full support".into()));
    }
    let input_monotone = is_monotone(mu)?.is_none();
    let down = thin(mu, eps, Direction::Down)?;
    let up = thin(mu, eps, Direction::Up)?;
    let (p, pd, pu) = (mu.probs(), down.probs(), up.probs());
    let (mut slack_down, mut slack_up) = (f64::INFINITY, f64::INFINITY);
    for s in 0..mu.n_vars() {
        let bit = 1usize << s;
        for x in (0..p.len()).filter(|x| x & bit == 0) {
            let one = p[x | bit] / (p[x] + p[x | bit]);
            let zd = pd[x] + pd[x | bit];
            if zd > 0.0 {
                slack_down = slack_down.min(pd[x | bit] / zd - (1.0 - eps) * one);
            }
            let zu = pu[x] + pu[x | bit];
            if zu > 0.0 {
                slack_up = slack_up.min(pu[x] / zu - (1.0 - eps) * (1.0 - one));
            }
        }
    }
    Ok(Lemma31Report {
        holds: slack_down >= -CHECK_TOL && slack_up >= -CHECK_TOL,
        input_monotone,
        min_slack_down: slack_down,
        min_slack_up: slack_up,
    })
}

/// Whether `thin(μ, ε, down)` is still monotone (`ε < 1`).
pub fn lemma32_check(mu: &ExactMeasure, eps: f64) -> Result<bool> {
    if !(0.0..1.0).contains(&eps) {
        return Err(param(format!("epsilon {eps} outside [0,1)")));
    }
    Ok(is_monotone(&thin(mu, eps, Direction::Down)?)?.is_none())
}
