//! Modified Jackson network model of the OpenFlow switch/controller feedback
//! loop.
//!
//! The crate covers
//! * the corrected balance equations and mean sojourn times ([`analytic`],
//!   [`chain`]),
//! * the exact single-node sojourn-time distribution ([`distribution`]),
//! * a discrete-event simulator that follows real OpenFlow packet semantics
//!   and serves as the validation oracle ([`sim`]),
//! * dimensioning and parameter sweeps ([`dimensioning`], [`figures`]),
//! * configuration and table output ([`config`], [`output`]) and the
//!   acceptance checks ([`validation`]).

pub mod analytic;
pub mod chain;
pub mod config;
pub mod distribution;
pub mod dimensioning;
pub mod error;
pub mod figures;
pub mod output;
pub mod quadrature;
pub mod sim;
pub mod validation;

pub use analytic::{
    derive_q_jack, jackson_rates, mean_sojourn_jackson, mean_sojourn_naive_jackson,
    mean_sojourn_openflow, solve_rates, ControllerParams, NodeParams, SolvedRates,
};
pub use chain::{chain_sojourn, solve_chain, ChainModel, ChainRates, ChainSojourn};
pub use distribution::{build_distribution, SojournDistribution};
pub use error::{ModelError, Result, Station};
pub use sim::{run_chain, run_single_node, ChainSimResult, SimConfig, SimResult};
