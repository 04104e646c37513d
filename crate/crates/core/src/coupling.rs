//! Order-preserving couplings driven by one shared set of per-site clocks.
//!
//! * [`couple_lemma51`]: `X²` is zeroed at every arrival, so after time `τ`
//!   it is `X₀` thinned with `ε = 1 - e^{-λτ}` and lies below `X¹_inf,τ`.
//! * [`couple_lemma52`]: `X²` is zeroed at arrivals with `U <= λ₁/λ`, so it
//!   lies above `X¹_inf,τ` for `τ = -log(1-ε)/λ₁`.
//! * [`couple_prop41`]: the nine-row transition table keeping `X¹ ⪯ X²`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{rate_eval, traj_extrema, Clocks, Event, RateSpec, Trajectory};
use crate::error::{param, Error, Result};
use crate::lattice::SiteGraph;

pub const MAX_JOINT_SITES: usize = 6;
const GENERATOR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guarantee {
    /// `X²_τ ⪯ X¹_inf,τ`.
    Lemma51,
    /// `X¹_inf,τ ⪯ X²_τ`.
    Lemma52,
    /// `X¹_t ⪯ X²_t` for all `t`.
    Prop41,
    /// No coupling; used as a negative control.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledTrajectory {
    pub traj1: Trajectory,
    pub traj2: Trajectory,
    pub guarantee: Guarantee,
    pub epsilon: Option<f64>,
    /// Length of the window the guarantee refers to.
    pub tau: f64,
    /// Final state of the `X^ε` shadow process, when ε is given.
    pub shadow: Option<Vec<bool>>,
    /// Arrivals where `U' >= 1 - ε` left `X¹(s) = 1` (must be zero).
    pub shadow_violations: usize,
}

fn check_init(graph: &SiteGraph, init: &[bool]) -> Result<()> {
    if init.len() != graph.n_sites() {
        return Err(param(format!("initial configuration has {} sites, graph {}", init.len(), graph.n_sites())));
    }
    Ok(())
}

fn positive_time(t: f64, what: &str) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(param(format!("{what} = {t} must be positive and finite")));
    }
    Ok(())
}

fn trajectory(init: &[bool], events: Vec<Event>, horizon: f64, seed: u64, lambda: f64) -> Trajectory {
    Trajectory { init: init.to_vec(), events, horizon, seed, lambda_max: lambda, all_arrivals: false }
}

/// `X¹` follows `spec` from `init`; `X²` starts at `init` and is set to 0
/// at every arrival of its site's clock.
pub fn couple_lemma51(spec: &RateSpec, graph: &SiteGraph, init: &[bool], tau: f64, seed: u64) -> Result<CoupledTrajectory> {
    check_init(graph, init)?;
    positive_time(tau, "tau")?;
    spec.validate(graph)?;
    let lambda = spec.lambda_max(graph);
    let (mut x1, mut x2) = (init.to_vec(), init.to_vec());
    let (mut ev1, mut ev2) = (Vec::new(), Vec::new());
    for a in Clocks::new(graph.n_sites(), lambda, tau, seed) {
        let s = a.site;
        if a.u < rate_eval(spec, graph, s, &x1) / lambda {
            x1[s] = !x1[s];
            ev1.push(Event { t: a.t, site: s, state: x1[s], accepted: true });
        }
        if x2[s] {
            x2[s] = false;
            ev2.push(Event { t: a.t, site: s, state: false, accepted: true });
        }
    }
    Ok(CoupledTrajectory {
        traj1: trajectory(init, ev1, tau, seed, lambda),
        traj2: trajectory(init, ev2, tau, seed, lambda),
        guarantee: Guarantee::Lemma51,
        epsilon: Some(lemma51_epsilon(lambda, tau)),
        tau,
        shadow: None,
        shadow_violations: 0,
    })
}

/// `ε = 1 - e^{-λτ}`.
pub fn lemma51_epsilon(lambda: f64, tau: f64) -> f64 {
    -(-lambda * tau).exp_m1()
}

/// `τ = -log(1-ε)/λ₁`.
pub fn lemma52_tau(eps: f64, lambda1: f64) -> f64 {
    -(-eps).ln_1p() / lambda1
}

/// `X¹` follows `spec`; `X²` starts at `init` and is set to 0 at arrivals
/// with `U <= λ₁/λ`, where `λ₁ = inf_{σ(s)=1} C(s,σ)`.
pub fn couple_lemma52(spec: &RateSpec, graph: &SiteGraph, init: &[bool], eps: f64, seed: u64) -> Result<CoupledTrajectory> {
    check_init(graph, init)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("epsilon {eps} outside (0,1)")));
    }
    spec.validate(graph)?;
    let lambda1 = spec.inf_rate(graph, true);
    if lambda1 <= 0.0 {
        return Err(Error::Precondition(
            "lambda_1 = inf of the 1 -> 0 rates is zero; the construction needs it positive".into(),
        ));
    }
    let lambda = spec.lambda_max(graph);
    let tau = lemma52_tau(eps, lambda1);
    let (mut x1, mut x2) = (init.to_vec(), init.to_vec());
    let (mut ev1, mut ev2) = (Vec::new(), Vec::new());
    for a in Clocks::new(graph.n_sites(), lambda, tau, seed) {
        let s = a.site;
        if a.u < rate_eval(spec, graph, s, &x1) / lambda {
            x1[s] = !x1[s];
            ev1.push(Event { t: a.t, site: s, state: x1[s], accepted: true });
        }
        if x2[s] && a.u <= lambda1 / lambda {
            x2[s] = false;
            ev2.push(Event { t: a.t, site: s, state: false, accepted: true });
        }
    }
    Ok(CoupledTrajectory {
        traj1: trajectory(init, ev1, tau, seed, lambda),
        traj2: trajectory(init, ev2, tau, seed, lambda),
        guarantee: Guarantee::Lemma52,
        epsilon: Some(eps),
        tau,
        shadow: None,
        shadow_violations: 0,
    })
}

/// One-sided condition on a uniform mark.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cond {
    Any,
    Le(f64),
    Lt(f64),
    Ge(f64),
    Gt(f64),
}

impl Cond {
    pub fn holds(self, u: f64) -> bool {
        match self {
            Cond::Any => true,
            Cond::Le(x) => u <= x,
            Cond::Lt(x) => u < x,
            Cond::Ge(x) => u >= x,
            Cond::Gt(x) => u > x,
        }
    }

    /// The condition's set as an interval of `[0,1]`.
    fn interval(self) -> (f64, f64) {
        let c = |x: f64| x.clamp(0.0, 1.0);
        match self {
            Cond::Any => (0.0, 1.0),
            Cond::Le(x) | Cond::Lt(x) => (0.0, c(x)),
            Cond::Ge(x) | Cond::Gt(x) => (c(x), 1.0),
        }
    }
}

/// A row of the transition table: from `(X¹(s), X²(s))`, go to `to` when
/// both marks satisfy their conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub from: (bool, bool),
    pub to: (bool, bool),
    pub u: Cond,
    pub u2: Cond,
}

/// Rates entering one arrival of the table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRates {
    /// `C1(s, X¹)`.
    pub c1: f64,
    /// `C2(s, X²)`.
    pub c2: f64,
    /// `sup_{σ2(s)=0} C2`.
    pub m2: f64,
    /// Normaliser `λ = sup_{σ2(s)=0} C2 + sup_{σ1(s)=1} C1`.
    pub lambda: f64,
}

/// The three rows applying in state `from`, in table order; the last row
/// is "otherwise".
pub fn prop41_rows(from: (bool, bool), r: TableRates) -> Result<[Row; 3]> {
    let TableRates { c1, c2, m2, lambda } = r;
    let stay = Row { from, to: from, u: Cond::Any, u2: Cond::Any };
    let rows = match from {
        (false, false) => {
            // C2 = 0 forces C1 = 0 and the ratio is read as 0
            let ratio = if c2 > 0.0 { c1 / c2 } else { 0.0 };
            [
                Row { from, to: (true, true), u: Cond::Le(c2 / lambda), u2: Cond::Le(ratio) },
                Row { from, to: (false, true), u: Cond::Le(c2 / lambda), u2: Cond::Gt(ratio) },
                stay,
            ]
        }
        (false, true) => {
            let ratio = if m2 > 0.0 { c1 / m2 } else { 0.0 };
            [
                Row { from, to: (false, false), u: Cond::Ge((lambda - c2) / lambda), u2: Cond::Any },
                Row { from, to: (true, true), u: Cond::Lt(m2 / lambda), u2: Cond::Le(ratio) },
                stay,
            ]
        }
        (true, true) => {
            let ratio = if lambda - c2 > 0.0 { (lambda - c1) / (lambda - c2) } else { 1.0 };
            [
                Row { from, to: (false, false), u: Cond::Ge((lambda - c2) / lambda), u2: Cond::Any },
                Row { from, to: (false, true), u: Cond::Lt((lambda - c2) / lambda), u2: Cond::Ge(ratio) },
                stay,
            ]
        }
        (true, false) => return Err(Error::Precondition("pair state (1,0) is not ordered".into())),
    };
    Ok(rows)
}

/// First matching row.
pub fn prop41_step(from: (bool, bool), r: TableRates, u: f64, u2: f64) -> Result<(bool, bool)> {
    let rows = prop41_rows(from, r)?;
    Ok(rows.iter().find(|row| row.u.holds(u) && row.u2.holds(u2)).map_or(from, |row| row.to))
}

type Rect = ((f64, f64), (f64, f64));

fn rect(row: &Row) -> Rect {
    (row.u.interval(), row.u2.interval())
}

fn area(r: Rect) -> f64 {
    (r.0 .1 - r.0 .0).max(0.0) * (r.1 .1 - r.1 .0).max(0.0)
}

fn meet(a: Rect, b: Rect) -> Rect {
    ((a.0 .0.max(b.0 .0), a.0 .1.min(b.0 .1)), (a.1 .0.max(b.1 .0), a.1 .1.min(b.1 .1)))
}

/// Probability that each row fires under first-match semantics.
pub fn row_probabilities(rows: &[Row; 3]) -> [f64; 3] {
    let (r0, r1, r2) = (rect(&rows[0]), rect(&rows[1]), rect(&rows[2]));
    let p0 = area(r0);
    let p1 = area(r1) - area(meet(r1, r0));
    let p2 = area(r2) - area(meet(r2, r0)) - area(meet(r2, r1)) + area(meet(meet(r2, r0), r1));
    [p0, p1, p2]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop41Epsilon {
    /// `None` when the condition is vacuous (no admissible pair).
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    pub eps3: Option<f64>,
    pub eps4: Option<f64>,
    /// `sup_{σ2(s)=0} C2`.
    pub m2: f64,
    /// `sup_{σ1(s)=1} C1`.
    pub m1: f64,
    /// `m2 + m1`.
    pub lambda: f64,
    /// `min(ε1/m2, ε2/λ, ε3/λ)`, or 0 when a needed condition fails.
    pub eps: f64,
}

/// Calls `f(s, (on1, up1), (on2, up2), deg)` for every site and every
/// ordered pair `σ1 ⪯ σ2` restricted to the closed neighbourhood of `s`.
fn for_each_local_pair(graph: &SiteGraph, mut f: impl FnMut(usize, (bool, usize), (bool, usize), usize)) {
    for s in 0..graph.n_sites() {
        let nbrs = graph.neighbors(s);
        let interior: Vec<usize> = nbrs.iter().copied().filter(|&t| t < graph.n_sites()).collect();
        let fixed_up = nbrs.iter().filter(|&&t| graph.boundary_spin(t) == Some(true)).count();
        let k = interior.len();
        // each interior neighbour and the site itself: 0 = (0,0), 1 = (0,1), 2 = (1,1)
        let total = 3usize.pow(k as u32 + 1);
        for code in 0..total {
            let mut c = code;
            let own = c % 3;
            c /= 3;
            let (mut up1, mut up2) = (fixed_up, fixed_up);
            for _ in 0..k {
                let v = c % 3;
                c /= 3;
                up1 += (v == 2) as usize;
                up2 += (v >= 1) as usize;
            }
            f(s, (own == 2, up1), (own >= 1, up2), nbrs.len());
        }
    }
}

fn fold_min(acc: &mut Option<f64>, v: f64) {
    *acc = Some(acc.map_or(v, |a| a.min(v)));
}

/// The infima of the four rate-gap conditions and the resulting downward ε.
///
/// Rates depend only on a site's closed neighbourhood, so scanning ordered
/// pairs on each closed neighbourhood is the same as scanning all ordered
/// pairs of global configurations.
pub fn prop41_epsilon(spec1: &RateSpec, spec2: &RateSpec, graph: &SiteGraph) -> Result<Prop41Epsilon> {
    spec1.validate(graph)?;
    spec2.validate(graph)?;
    let (mut e1, mut e2, mut e3, mut e4) = (None, None, None, None);
    for_each_local_pair(graph, |_, (on1, up1), (on2, up2), deg| {
        let c1 = spec1.rate_from_counts(on1, up1, deg);
        let c2 = spec2.rate_from_counts(on2, up2, deg);
        if !on2 && c1 != 0.0 {
            fold_min(&mut e1, c2 - c1);
        }
        if on1 && c2 != 0.0 {
            fold_min(&mut e2, c1 - c2);
        }
        if on1 {
            fold_min(&mut e3, c1);
        }
        if !on2 {
            fold_min(&mut e4, c2);
        }
    });
    let m2 = spec2.sup_rate(graph, false);
    let m1 = spec1.sup_rate(graph, true);
    let lambda = m2 + m1;
    let positive = |e: Option<f64>| e.is_none_or(|v| v > 0.0);
    let eps = if positive(e1) && positive(e2) && e3.is_some_and(|v| v > 0.0) && lambda > 0.0 {
        let a = e1.map_or(f64::INFINITY, |v| if m2 > 0.0 { v / m2 } else { f64::INFINITY });
        let b = e2.map_or(f64::INFINITY, |v| v / lambda);
        let c = e3.map_or(f64::INFINITY, |v| v / lambda);
        a.min(b).min(c).min(1.0)
    } else {
        0.0
    };
    Ok(Prop41Epsilon { eps1: e1, eps2: e2, eps3: e3, eps4: e4, m2, m1, lambda, eps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateOrderWitness {
    pub site: usize,
    /// `(state, occupied neighbours)` of `σ1` and `σ2` at the site.
    pub local1: (bool, usize),
    pub local2: (bool, usize),
    pub c1: f64,
    pub c2: f64,
}

/// Checks `C1 ⪯ C2`: `C2 >= C1` where both are 0 at `s` and `C1 >= C2`
/// where both are 1, over all ordered pairs.
pub fn rate_order_check(spec1: &RateSpec, spec2: &RateSpec, graph: &SiteGraph) -> Result<Option<RateOrderWitness>> {
    spec1.validate(graph)?;
    spec2.validate(graph)?;
    let mut witness = None;
    for_each_local_pair(graph, |s, l1, l2, deg| {
        if witness.is_some() || l1.0 != l2.0 {
            return;
        }
        let c1 = spec1.rate_from_counts(l1.0, l1.1, deg);
        let c2 = spec2.rate_from_counts(l2.0, l2.1, deg);
        let bad = if l1.0 { c1 < c2 } else { c2 < c1 };
        if bad {
            witness = Some(RateOrderWitness { site: s, local1: l1, local2: l2, c1, c2 });
        }
    });
    Ok(witness)
}

/// The ordered coupling: both processes are driven by the same arrivals
/// (rate `λ = m2 + m1`) and marks, following the transition table. With
/// `eps` given, the shadow process `X^ε` is run alongside.
#[allow(clippy::too_many_arguments)]
pub fn couple_prop41(
    spec1: &RateSpec,
    spec2: &RateSpec,
    graph: &SiteGraph,
    init1: &[bool],
    init2: &[bool],
    horizon: f64,
    seed: u64,
    eps: Option<f64>,
) -> Result<CoupledTrajectory> {
    check_init(graph, init1)?;
    check_init(graph, init2)?;
    positive_time(horizon, "horizon")?;
    if let Some(w) = rate_order_check(spec1, spec2, graph)? {
        return Err(Error::Precondition(format!("rates are not ordered: {w:?}")));
    }
    if let Some(s) = (0..init1.len()).find(|&s| init1[s] && !init2[s]) {
        return Err(Error::Precondition(format!("initial configurations not ordered at site {s}")));
    }
    if let Some(e) = eps {
        if !(0.0..=1.0).contains(&e) {
            return Err(param(format!("epsilon {e} outside [0,1]")));
        }
    }
    let m2 = spec2.sup_rate(graph, false);
    let m1 = spec1.sup_rate(graph, true);
    let lambda = m2 + m1;
    let (mut x1, mut x2) = (init1.to_vec(), init2.to_vec());
    let mut shadow = eps.map(|_| vec![true; graph.n_sites()]);
    let mut shadow_violations = 0;
    let (mut ev1, mut ev2) = (Vec::new(), Vec::new());
    if lambda > 0.0 {
        for a in Clocks::new(graph.n_sites(), lambda, horizon, seed) {
            let s = a.site;
            let r = TableRates {
                c1: rate_eval(spec1, graph, s, &x1),
                c2: rate_eval(spec2, graph, s, &x2),
                m2,
                lambda,
            };
            let (n1, n2) = prop41_step((x1[s], x2[s]), r, a.u, a.u2)?;
            if n1 != x1[s] {
                x1[s] = n1;
                ev1.push(Event { t: a.t, site: s, state: n1, accepted: true });
            }
            if n2 != x2[s] {
                x2[s] = n2;
                ev2.push(Event { t: a.t, site: s, state: n2, accepted: true });
            }
            if let (Some(e), Some(sh)) = (eps, shadow.as_mut()) {
                sh[s] = a.u2 < 1.0 - e;
                if !sh[s] && x1[s] {
                    shadow_violations += 1;
                }
            }
        }
    }
    Ok(CoupledTrajectory {
        traj1: trajectory(init1, ev1, horizon, seed, lambda),
        traj2: trajectory(init2, ev2, horizon, seed, lambda),
        guarantee: Guarantee::Prop41,
        epsilon: eps,
        tau: horizon,
        shadow,
        shadow_violations,
    })
}

/// Two independent runs (separate seeds), for negative controls.
#[allow(clippy::too_many_arguments)]
pub fn independent_pair(
    spec1: &RateSpec,
    spec2: &RateSpec,
    graph: &SiteGraph,
    init1: &[bool],
    init2: &[bool],
    horizon: f64,
    seed1: u64,
    seed2: u64,
) -> Result<CoupledTrajectory> {
    Ok(CoupledTrajectory {
        traj1: crate::dynamics::simulate(spec1, graph, init1, horizon, seed1)?,
        traj2: crate::dynamics::simulate(spec2, graph, init2, horizon, seed2)?,
        guarantee: Guarantee::Independent,
        epsilon: None,
        tau: horizon,
        shadow: None,
        shadow_violations: 0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum OrderAudit {
    Ok,
    Violation { t: f64, site: usize },
}

impl OrderAudit {
    pub fn is_ok(&self) -> bool {
        matches!(self, OrderAudit::Ok)
    }
}

/// Checks `X¹_t ⪯ X²_t` at time 0 and after every event of either process.
pub fn order_audit(ct: &CoupledTrajectory) -> OrderAudit {
    let (mut x1, mut x2) = (ct.traj1.init.clone(), ct.traj2.init.clone());
    if let Some(s) = (0..x1.len()).find(|&s| x1[s] && !x2[s]) {
        return OrderAudit::Violation { t: 0.0, site: s };
    }
    let (e1, e2): (Vec<&Event>, Vec<&Event>) = (ct.traj1.accepted().collect(), ct.traj2.accepted().collect());
    let (mut i, mut j) = (0, 0);
    while i < e1.len() || j < e2.len() {
        let t = match (e1.get(i), e2.get(j)) {
            (Some(a), Some(b)) => a.t.min(b.t),
            (Some(a), None) => a.t,
            (None, Some(b)) => b.t,
            (None, None) => unreachable!(),
        };
        let mut touched = Vec::new();
        while i < e1.len() && e1[i].t == t {
            x1[e1[i].site] = e1[i].state;
            touched.push(e1[i].site);
            i += 1;
        }
        while j < e2.len() && e2[j].t == t {
            x2[e2[j].site] = e2[j].state;
            touched.push(e2[j].site);
            j += 1;
        }
        if let Some(&s) = touched.iter().find(|&&s| x1[s] && !x2[s]) {
            return OrderAudit::Violation { t, site: s };
        }
    }
    OrderAudit::Ok
}

/// Checks the coupling's own guarantee: the order audit for the table coupling, the
/// window inequalities for the two clock couplings. Returns the offending site.
pub fn guarantee_audit(ct: &CoupledTrajectory) -> Result<Option<usize>> {
    match ct.guarantee {
        Guarantee::Prop41 | Guarantee::Independent => Ok(match order_audit(ct) {
            OrderAudit::Ok => None,
            OrderAudit::Violation { site, .. } => Some(site),
        }),
        Guarantee::Lemma51 => {
            let (inf1, _) = traj_extrema(&ct.traj1, 0.0, ct.tau)?;
            let x2 = ct.traj2.config_at(ct.tau);
            Ok((0..x2.len()).find(|&s| x2[s] && !inf1[s]))
        }
        Guarantee::Lemma52 => {
            let (inf1, _) = traj_extrema(&ct.traj1, 0.0, ct.tau)?;
            let x2 = ct.traj2.config_at(ct.tau);
            Ok((0..x2.len()).find(|&s| inf1[s] && !x2[s]))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointGeneratorReport {
    pub pair_states: usize,
    /// Largest `|rate of X¹(s) flipping - C1(s, σ1)|` over pair states and sites.
    pub max_error_1: f64,
    pub max_error_2: f64,
    /// No transition leaves `{σ1 ⪯ σ2}` and every row probability lies in `[0,1]`.
    pub closed: bool,
    /// Largest rate from a diagonal state `(σ, σ)` to an off-diagonal one.
    pub max_diagonal_leak: f64,
    pub pass: bool,
}

/// Integrates the transition table over `(U, U')` for every ordered pair
/// state and compares the implied single-coordinate flip rates with the
/// individual rate functions.
pub fn joint_generator_check(spec1: &RateSpec, spec2: &RateSpec, graph: &SiteGraph) -> Result<JointGeneratorReport> {
    let n = graph.n_sites();
    if n > MAX_JOINT_SITES {
        return Err(Error::SizeCap { what: "joint generator sites", size: n, cap: MAX_JOINT_SITES });
    }
    spec1.validate(graph)?;
    spec2.validate(graph)?;
    let m2 = spec2.sup_rate(graph, false);
    let m1 = spec1.sup_rate(graph, true);
    let lambda = m2 + m1;
    let (mut err1, mut err2, mut leak) = (0.0f64, 0.0f64, 0.0f64);
    let mut closed = true;
    let total = 3usize.pow(n as u32);
    let (mut x1, mut x2) = (vec![false; n], vec![false; n]);
    for code in 0..total {
        let mut c = code;
        for s in 0..n {
            let v = c % 3;
            c /= 3;
            x1[s] = v == 2;
            x2[s] = v >= 1;
        }
        let diagonal = x1 == x2;
        for s in 0..n {
            let c1 = rate_eval(spec1, graph, s, &x1);
            let c2 = rate_eval(spec2, graph, s, &x2);
            let (mut flip1, mut flip2) = (0.0, 0.0);
            if lambda > 0.0 {
                let from = (x1[s], x2[s]);
                let rows = prop41_rows(from, TableRates { c1, c2, m2, lambda })?;
                let probs = row_probabilities(&rows);
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|&p| !(-1e-12..=1.0 + 1e-12).contains(&p)) || (sum - 1.0).abs() > 1e-12 {
                    closed = false;
                }
                for (row, p) in rows.iter().zip(probs) {
                    if row.to.0 && !row.to.1 {
                        closed = false;
                    }
                    if row.to.0 != from.0 {
                        flip1 += lambda * p;
                    }
                    if row.to.1 != from.1 {
                        flip2 += lambda * p;
                    }
                    if diagonal && row.to.0 != row.to.1 {
                        leak = leak.max(lambda * p);
                    }
                }
            }
            err1 = err1.max((flip1 - c1).abs());
            err2 = err2.max((flip2 - c2).abs());
        }
    }
    let pass = closed && err1 <= GENERATOR_TOL && err2 <= GENERATOR_TOL;
    Ok(JointGeneratorReport { pair_states: total, max_error_1: err1, max_error_2: err2, closed, max_diagonal_leak: leak, pass })
}
