use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use dynperc::contour::{
    beta_p, flip_map_energy_check, lemma81_mc_check, peierls_sum, window_for_epsilon,
};
use dynperc::coupling::{
    couple_lemma51, couple_lemma52, couple_prop41, guarantee_audit, lemma51_epsilon, lemma52_tau,
    prop41_epsilon,
};
use dynperc::dynamics::{sample_stationary_init, simulate, InitMode, RateSpec};
use dynperc::emit::{emit, summary_json, Format};
use dynperc::exact::{
    dominates, fkg_lattice_check, gibbs_measure, is_monotone, positive_correlations_check,
    product_measure, rc_wired_measure, ExactMeasure, MAX_UPSET_VARS,
};
use dynperc::experiment::{run_experiment, ExperimentConfig};
use dynperc::lattice::{dual_graph, Contour, Doubled, GraphSpec, SiteGraph};
use dynperc::movability::{max_downward_epsilon, max_upward_epsilon, Direction, DEFAULT_TOL};
use dynperc::percolation::{persistence_probability, PersistenceExperiment};
use dynperc::rc_es::{
    cor92_p, es_sample, lemma93_check, lemma93_epsilon_prime, lss_rho, EsMode, DEFAULT_SWEEPS,
    MAX_ENUM_EDGES,
};

/// Only environment variable consulted: overrides the output directory.
const OUT_ENV: &str = "DYNPERC_OUT_DIR";

#[derive(Parser)]
#[command(name = "dynperc", version, about = "Finite-volume dynamical percolation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; the summary goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monotonicity, FKG and domination checks on exact measures.
    Exact(Common),
    /// Largest ε keeping a domination under thinning or boosting.
    Movability(Common),
    /// Runs the graphical representation and prints the trajectory.
    Simulate(Common),
    /// Runs one of the ordered couplings and audits its guarantee.
    Couple(Common),
    /// Monte Carlo persistence of a crossing over a window.
    Percolation(Common),
    /// Peierls sums, the window bound and the flip map.
    #[command(subcommand)]
    Contour(ContourCmd),
    /// Random-cluster sampling and product-domination densities.
    #[command(subcommand)]
    Rc(RcCmd),
    /// Runs a named experiment.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "json")]
        format: OutFormat,
    },
}

#[derive(Subcommand)]
enum ContourCmd {
    /// Peierls tail sum and β_p.
    Peierls {
        #[arg(long)]
        beta: f64,
        #[arg(long = "L", default_value_t = 1)]
        l: usize,
    },
    /// Conditioned window check for a set of contour edges.
    Check81(Common),
    /// Flip-map energy identity.
    Flipmap(Common),
}

#[derive(Subcommand)]
enum RcCmd {
    /// One Edwards–Sokal draw.
    Sample(RcArgs),
    /// Edge thinning against site thinning.
    Check93(RcArgs),
    /// Product-domination density and the matching ε'.
    Lss {
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
    },
}

#[derive(Args)]
struct RcArgs {
    /// Graph spec as inline JSON.
    #[arg(long = "box")]
    graph: String,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// ε' for check93; the constructive chooser when absent.
    #[arg(long)]
    eps_prime: Option<f64>,
    /// Gibbs sweeps; exact enumeration for small graphs when absent.
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MeasureSpec {
    Gibbs { beta: f64, #[serde(default)] h: f64 },
    Product { p: f64 },
    RcWired { p: f64 },
    /// Serialized measure: `{labels, probs}` with probabilities in bitmask order.
    Explicit { labels: Vec<String>, probs: Vec<f64> },
}

impl MeasureSpec {
    fn build(&self, g: &SiteGraph) -> Result<ExactMeasure> {
        Ok(match self {
            MeasureSpec::Gibbs { beta, h } => gibbs_measure(g, *beta, *h)?,
            MeasureSpec::Product { p } => product_measure(g.n_sites(), *p)?,
            MeasureSpec::RcWired { p } => rc_wired_measure(g, *p)?,
            MeasureSpec::Explicit { labels, probs } => ExactMeasure::from_probs(labels.clone(), probs.clone())?,
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactConfig {
    graph: GraphSpec,
    measure: MeasureSpec,
    #[serde(default)]
    compare: Option<MeasureSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MovabilityConfig {
    graph: GraphSpec,
    mu1: MeasureSpec,
    mu2: MeasureSpec,
    direction: Direction,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum InitSpec {
    Ones,
    Zeros,
    Exact,
    Burnin { t_b: f64 },
}

fn initial(spec: &RateSpec, g: &SiteGraph, init: InitSpec, seed: u64) -> Result<Vec<bool>> {
    Ok(match init {
        InitSpec::Ones => g.constant(true),
        InitSpec::Zeros => g.constant(false),
        InitSpec::Exact => sample_stationary_init(spec, g, InitMode::Exact, seed)?.config,
        InitSpec::Burnin { t_b } => sample_stationary_init(spec, g, InitMode::Burnin { t_b }, seed)?.config,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateConfig {
    graph: GraphSpec,
    rates: RateSpec,
    init: InitSpec,
    horizon: f64,
    #[serde(default = "one")]
    replicas: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CoupleKind {
    Lemma51 { tau: f64 },
    Lemma52 { eps: f64 },
    Prop41 { rates2: RateSpec, horizon: f64, #[serde(default)] shadow: bool },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoupleConfig {
    graph: GraphSpec,
    rates: RateSpec,
    init: InitSpec,
    coupling: CoupleKind,
    #[serde(default = "one")]
    replicas: usize,
    #[serde(default)]
    seed: u64,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
struct PercolationConfig {
    graph: GraphSpec,
    #[serde(flatten)]
    experiment: PersistenceExperiment,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Check81Config {
    graph: GraphSpec,
    rates: RateSpec,
    /// Contour vertices in doubled coordinates.
    contour: Vec<Doubled>,
    /// Positions (indices into the contour's edge cycle) of the absent edges.
    absent: Vec<usize>,
    #[serde(default)]
    tau: Option<f64>,
    #[serde(default)]
    eps: Option<f64>,
    replicas: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlipmapConfig {
    graph: GraphSpec,
    contour: Vec<Doubled>,
    beta: f64,
    samples: usize,
    #[serde(default)]
    seed: u64,
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn output(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out.map(Path::to_path_buf).or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)) {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("summary.json"), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Exact(c) => {
            let cfg: ExactConfig = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let mu = cfg.measure.build(&g)?;
            let mut v = json!({
                "n_vars": mu.n_vars(),
                "monotone_witness": is_monotone(&mu)?,
                "fkg_lattice": fkg_lattice_check(&mu)?,
            });
            if mu.n_vars() <= MAX_UPSET_VARS {
                v["positive_correlations"] = json!(positive_correlations_check(&mu)?);
            }
            if let Some(dir) = &c.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("measure.json"), serde_json::to_string(&mu)? + "\n")?;
            }
            if let Some(other) = &cfg.compare {
                let nu = other.build(&g)?;
                v["dominated_by_compare"] = serde_json::to_value(dominates(&mu, &nu)?)?;
                v["dominates_compare"] = serde_json::to_value(dominates(&nu, &mu)?)?;
            }
            output(&v, c.out.as_deref())
        }
        Command::Movability(c) => {
            let cfg: MovabilityConfig = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let (a, b) = (cfg.mu1.build(&g)?, cfg.mu2.build(&g)?);
            let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
            let r = match cfg.direction {
                Direction::Down => max_downward_epsilon(&a, &b, tol)?,
                Direction::Up => max_upward_epsilon(&a, &b, tol)?,
            };
            output(&serde_json::to_value(r)?, c.out.as_deref())
        }
        Command::Simulate(c) => {
            let cfg: SimulateConfig = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let seed = c.seed.unwrap_or(cfg.seed);
            let mut lines = String::new();
            let mut counts = Vec::with_capacity(cfg.replicas);
            let mut finals = Vec::with_capacity(cfg.replicas);
            for r in 0..cfg.replicas {
                let rs = dynperc::rng::replica_seed(seed, r);
                let init = initial(&cfg.rates, &g, cfg.init, rs)?;
                let traj = simulate(&cfg.rates, &g, &init, cfg.horizon, rs)?;
                let mut n = 0usize;
                for e in traj.events.iter().filter(|e| e.accepted) {
                    lines += &format!("{}\n", json!({"replica": r, "t": e.t, "site": e.site, "state": e.state}));
                    n += 1;
                }
                counts.push(n);
                finals.push(traj.final_config().iter().filter(|&&b| b).count());
            }
            if let Some(dir) = &c.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("events.jsonl"), &lines)?;
            }
            let v = json!({
                "replicas": cfg.replicas,
                "seed": seed,
                "horizon": cfg.horizon,
                "n_sites": g.n_sites(),
                "events": counts,
                "occupied_at_horizon": finals,
            });
            output(&v, c.out.as_deref())
        }
        Command::Couple(c) => {
            let cfg: CoupleConfig = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let seed = c.seed.unwrap_or(cfg.seed);
            let mut violations = 0usize;
            let mut audits = String::new();
            let mut params = json!({});
            for r in 0..cfg.replicas {
                let rs = dynperc::rng::replica_seed(seed, r);
                let init = initial(&cfg.rates, &g, cfg.init, rs)?;
                let ct = match &cfg.coupling {
                    CoupleKind::Lemma51 { tau } => {
                        params = json!({"tau": tau, "eps": lemma51_epsilon(cfg.rates.lambda_max(&g), *tau)});
                        couple_lemma51(&cfg.rates, &g, &init, *tau, rs)?
                    }
                    CoupleKind::Lemma52 { eps } => {
                        params = json!({"eps": eps, "tau": lemma52_tau(*eps, cfg.rates.inf_rate(&g, true))});
                        couple_lemma52(&cfg.rates, &g, &init, *eps, rs)?
                    }
                    CoupleKind::Prop41 { rates2, horizon, shadow } => {
                        let scan = prop41_epsilon(&cfg.rates, rates2, &g)?;
                        params = serde_json::to_value(scan)?;
                        let init2 = initial(rates2, &g, cfg.init, rs)?;
                        let init2: Vec<bool> = init.iter().zip(&init2).map(|(a, b)| *a || *b).collect();
                        let eps = shadow.then_some(scan.eps);
                        couple_prop41(&cfg.rates, rates2, &g, &init, &init2, *horizon, rs, eps)?
                    }
                };
                let audit = guarantee_audit(&ct)?;
                if audit.is_some() {
                    violations += 1;
                }
                audits += &format!("{}\n", json!({"replica": r, "violation_site": audit, "shadow_violations": ct.shadow_violations}));
            }
            if let Some(dir) = &c.out {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("audits.jsonl"), &audits)?;
            }
            output(&json!({"replicas": cfg.replicas, "seed": seed, "violations": violations, "parameters": params}), c.out.as_deref())
        }
        Command::Percolation(c) => {
            let mut cfg: PercolationConfig = read_config(&c.config)?;
            if let Some(s) = c.seed {
                cfg.experiment.seed = s;
            }
            let g = cfg.graph.build()?;
            let est = persistence_probability(&g, &cfg.experiment)?;
            let v = json!({
                "estimate": est.estimate.estimate,
                "ci": est.estimate.ci,
                "replicas": cfg.experiment.replicas,
                "seed": cfg.experiment.seed,
                "approximate_init": est.approximate_init,
            });
            if let Some(dir) = &c.out {
                fs::create_dir_all(dir)?;
                let lines: String = est
                    .outcomes
                    .iter()
                    .enumerate()
                    .map(|(r, o)| format!("{}\n", json!({"replica": r, "holds": o})))
                    .collect();
                fs::write(dir.join("replicas.jsonl"), lines)?;
            }
            output(&v, c.out.as_deref())
        }
        Command::Contour(ContourCmd::Peierls { beta, l }) => {
            let s = peierls_sum(beta, l);
            let v = json!({"beta": beta, "L": l, "beta_p": beta_p(2)?, "value": s.value, "converges": s.converges});
            output(&v, None)
        }
        Command::Contour(ContourCmd::Check81(c)) => {
            let cfg: Check81Config = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let dual = dual_graph(&g)?;
            let gamma = Contour::from_vertices(&dual, &cfg.contour)?;
            let cycle = cycle_edges(&dual, &cfg.contour)?;
            let absent = cfg
                .absent
                .iter()
                .map(|&i| cycle.get(i).copied().with_context(|| format!("edge position {i} out of range")))
                .collect::<Result<Vec<_>>>()?;
            let lambda = cfg.rates.lambda_max(&g);
            let tau = match (cfg.tau, cfg.eps) {
                (Some(t), _) => t,
                (None, Some(e)) => window_for_epsilon(e, lambda)?,
                (None, None) => bail!("either tau or eps is required"),
            };
            let seed = c.seed.unwrap_or(cfg.seed);
            let r = lemma81_mc_check(&cfg.rates, &dual, &gamma, &absent, tau, cfg.replicas, seed)?;
            output(&serde_json::to_value(r)?, c.out.as_deref())
        }
        Command::Contour(ContourCmd::Flipmap(c)) => {
            let cfg: FlipmapConfig = read_config(&c.config)?;
            let g = cfg.graph.build()?;
            let dual = dual_graph(&g)?;
            let gamma = Contour::from_vertices(&dual, &cfg.contour)?;
            let r = flip_map_energy_check(&dual, &gamma, cfg.beta, cfg.samples, c.seed.unwrap_or(cfg.seed))?;
            output(&serde_json::to_value(r)?, c.out.as_deref())
        }
        Command::Rc(RcCmd::Sample(a)) => {
            let g = parse_graph(&a.graph)?;
            let mode = match a.sweeps {
                Some(sweeps) => EsMode::Gibbs { sweeps },
                None if g.edges().len() <= MAX_ENUM_EDGES => EsMode::ExactEnum,
                None => EsMode::Gibbs { sweeps: DEFAULT_SWEEPS },
            };
            let pair = es_sample(&g, a.p, mode, a.seed)?;
            output(&serde_json::to_value(pair)?, None)
        }
        Command::Rc(RcCmd::Check93(a)) => {
            let g = parse_graph(&a.graph)?;
            let eps_prime = match a.eps_prime {
                Some(e) => e,
                None => lemma93_epsilon_prime(a.eps, g.degree_bound())?,
            };
            let r = lemma93_check(&g, a.p, a.eps, eps_prime, a.replicas, a.seed)?;
            output(&serde_json::to_value(r)?, None)
        }
        Command::Rc(RcCmd::Lss { q, delta, rho, eps }) => {
            let mut v = json!({"delta": delta});
            if let Some(q) = q {
                v["rho"] = json!(lss_rho(q, delta)?);
            }
            if let Some(rho) = rho {
                v["p"] = json!(cor92_p(rho, delta)?);
            }
            if let Some(e) = eps {
                v["eps_prime"] = json!(lemma93_epsilon_prime(e, delta)?);
            }
            output(&v, None)
        }
        Command::Experiment { common, format } => {
            let text = fs::read_to_string(&common.config)
                .with_context(|| format!("reading {}", common.config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            let summary = run_experiment(&cfg)?;
            let dir = common
                .out
                .clone()
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from));
            let jsonl = cfg.output.as_ref().is_some_and(|o| o.jsonl);
            match dir {
                Some(d) => {
                    let fmt = match format {
                        OutFormat::Json => Format::Json,
                        OutFormat::Csv => Format::Csv,
                    };
                    for p in emit(&summary, &d, fmt, jsonl)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => print!("{}", summary_json(&summary)?),
            }
            if !summary.all_pass() {
                eprintln!("some checks failed");
                std::process::exit(2);
            }
            Ok(())
        }
    }
}

fn parse_graph(s: &str) -> Result<SiteGraph> {
    let spec: GraphSpec = serde_json::from_str(s).context("parsing --box")?;
    Ok(spec.build()?)
}

/// Dual edges of a vertex cycle in traversal order.
fn cycle_edges(dual: &dynperc::lattice::DualLattice, cycle: &[Doubled]) -> Result<Vec<usize>> {
    let n = cycle.len();
    (0..n)
        .map(|i| {
            dual.edge_between(cycle[i], cycle[(i + 1) % n])
                .with_context(|| format!("no dual edge {:?}-{:?}", cycle[i], cycle[(i + 1) % n]))
        })
        .collect()
}
