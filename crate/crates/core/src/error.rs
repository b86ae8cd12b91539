use std::fmt;

use thiserror::Error;

/// A queueing station in the modeled network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Station {
    /// The data-plane switch of the single-node model.
    Switch,
    /// Switch `i` (zero-based) of a chain.
    ChainSwitch(usize),
    /// The shared SDN controller.
    Controller,
}

impl fmt::Display for Station {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Station::Switch => write!(f, "switch"),
            Station::ChainSwitch(i) => write!(f, "switch {}", i + 1),
            Station::Controller => write!(f, "controller"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("unstable: {station} (load {load})")]
    Unstable { station: Station, load: f64 },

    #[error("naive Jackson model is undefined for q_nf = {q_nf} (requires q_nf < 1)")]
    NaiveUndefined { q_nf: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        ModelError::Domain {
            name,
            value,
            expected,
        }
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self, ModelError::Unstable { .. })
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
