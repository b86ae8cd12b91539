//! Chains of switches that share one controller.
//!
//! Traffic entering at node `i` is served by node `i`, optionally makes a
//! single controller round trip that returns it to node `i`, and then transits
//! every downstream node exactly once. Only a node's own external arrivals can
//! trigger its controller query, so the controller sees `Σ q_i λ_i`.
//!
//! For two nodes this reduces to `Γ_2 = λ_1 + λ_2(1 + q_2)` and
//! `q_2^jack = q_2 λ_2 / Γ_2`. The per-class mean sojourn time is an
//! extension that sums per-visit M/M/1 sojourn means, which the product form
//! of the network makes exact for means.

use serde::{Deserialize, Serialize};

use crate::analytic::{is_stable_load, ControllerParams, NodeParams, SolvedRates};
use crate::error::{ModelError, Result, Station};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub nodes: Vec<NodeParams>,
    pub controller: ControllerParams,
}

impl ChainModel {
    pub fn new(nodes: Vec<NodeParams>, controller: ControllerParams) -> Result<Self> {
        let chain = ChainModel { nodes, controller };
        chain.validate()?;
        Ok(chain)
    }

    pub fn single(node: NodeParams, controller: ControllerParams) -> Self {
        ChainModel {
            nodes: vec![node],
            controller,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(ModelError::Config("a chain needs at least one node".into()));
        }
        for node in &self.nodes {
            node.validate()?;
        }
        self.controller.validate()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_external_rate(&self) -> f64 {
        self.nodes.iter().map(|n| n.lambda).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRates {
    /// Per-node rates. `gamma_controller`/`rho_controller` in each entry
    /// describe the node's own contribution to the controller.
    pub nodes: Vec<SolvedRates>,
    pub gamma_controller: f64,
    pub rho_controller: f64,
}

impl ChainRates {
    /// Every saturated station, switches first in chain order.
    pub fn saturated(&self) -> Vec<Station> {
        let mut out: Vec<Station> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, r)| !is_stable_load(r.rho_switch))
            .map(|(i, _)| Station::ChainSwitch(i))
            .collect();
        if !is_stable_load(self.rho_controller) {
            out.push(Station::Controller);
        }
        out
    }

    pub fn require_stable(&self) -> Result<()> {
        match self.saturated().first() {
            None => Ok(()),
            Some(&station) => Err(ModelError::Unstable {
                station,
                load: self.load_of(station),
            }),
        }
    }

    pub fn load_of(&self, station: Station) -> f64 {
        match station {
            Station::Controller => self.rho_controller,
            Station::ChainSwitch(i) => self.nodes[i].rho_switch,
            Station::Switch => self.nodes[0].rho_switch,
        }
    }
}

pub fn solve_chain(chain: &ChainModel) -> ChainRates {
    let mu_c = chain.controller.mu_controller;
    let mut upstream = 0.0;
    let mut nodes = Vec::with_capacity(chain.nodes.len());
    for (i, node) in chain.nodes.iter().enumerate() {
        let own_query = node.q_nf * node.lambda;
        let (gamma_switch, q_jack) = if i == 0 {
            (node.lambda * (1.0 + node.q_nf), node.q_nf / (1.0 + node.q_nf))
        } else {
            let gamma = upstream + node.lambda * (1.0 + node.q_nf);
            (gamma, own_query / gamma)
        };
        nodes.push(SolvedRates {
            gamma_switch,
            gamma_controller: own_query,
            q_jack,
            rho_switch: gamma_switch / node.mu_switch,
            rho_controller: own_query / mu_c,
        });
        upstream += node.lambda;
    }
    let gamma_controller: f64 = nodes.iter().map(|r| r.gamma_controller).sum();
    ChainRates {
        nodes,
        gamma_controller,
        rho_controller: gamma_controller / mu_c,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSojourn {
    /// Mean sojourn of traffic entering at each node.
    pub per_class: Vec<f64>,
    /// Arrival-weighted mean over all classes.
    pub aggregate: f64,
}

pub fn chain_sojourn(chain: &ChainModel, rates: &ChainRates) -> Result<ChainSojourn> {
    rates.require_stable()?;
    let per_visit: Vec<f64> = chain
        .nodes
        .iter()
        .zip(&rates.nodes)
        .map(|(n, r)| 1.0 / (n.mu_switch - r.gamma_switch))
        .collect();
    let controller_visit = 1.0 / (chain.controller.mu_controller - rates.gamma_controller);

    let per_class: Vec<f64> = chain
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let downstream: f64 = per_visit[i + 1..].iter().sum();
            (1.0 + n.q_nf) * per_visit[i] + n.q_nf * controller_visit + downstream
        })
        .collect();
    let weighted: f64 = chain
        .nodes
        .iter()
        .zip(&per_class)
        .map(|(n, w)| n.lambda * w)
        .sum();
    Ok(ChainSojourn {
        aggregate: weighted / chain.total_external_rate(),
        per_class,
    })
}
