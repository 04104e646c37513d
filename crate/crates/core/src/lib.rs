//! Finite-volume toolkit for dynamical stability of percolation in
//! interacting particle systems.
//!
//! * [`lattice`]: boxes, tori, trees, the planar dual and contour enumeration
//! * [`exact`]: dense measures on at most 20 binary variables, monotonicity,
//!   FKG, Holley and a max-flow stochastic-domination oracle
//! * [`movability`]: Bernoulli thinning and maximal movability searches
//! * [`dynamics`]: flip-rate families and event-driven simulation from
//!   per-site Poisson clocks
//! * [`coupling`]: order-preserving couplings driven by shared clocks
//! * [`percolation`]: cluster labels, crossings and persistence over windows
//! * [`contour`]: disagreement edges, Peierls sums and the flip-map identity
//! * [`rc_es`]: random-cluster sampling and the spin/edge coupling
//! * [`experiment`] and [`emit`]: named experiments and their outputs

pub mod contour;
pub mod coupling;
pub mod dynamics;
pub mod emit;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod flow;
pub mod lattice;
pub mod movability;
pub mod percolation;
pub mod rc_es;
pub mod rng;
pub mod stats;
pub mod unionfind;

pub use error::{Error, Result};
