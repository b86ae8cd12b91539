//! Run configuration: one JSON document with optional sections `node` or
//! `chain`, `controller`, `sim`, `sweep` and `output`.
//!
//! Service rates are given either per second (`mu_switch`, `mu_controller`)
//! or as mean service times in microseconds (`mu_switch_us`,
//! `mu_controller_us`), never both. `mu_l`, `mu_l_us`, `mu_c` and `mu_c_us`
//! are accepted as aliases.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::{ControllerParams, NodeParams};
use crate::chain::ChainModel;
use crate::dimensioning::{FixedParams, SweepOutput, SweepSpec, SweepVariable, DEFAULT_DEADLINE};
use crate::error::{ModelError, Result};
use crate::output::Format;
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<NodeSection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, alias = "mu_l", skip_serializing_if = "Option::is_none")]
    pub mu_switch: Option<f64>,
    #[serde(default, alias = "mu_l_us", skip_serializing_if = "Option::is_none")]
    pub mu_switch_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_nf: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerSection {
    #[serde(default, alias = "mu_c", skip_serializing_if = "Option::is_none")]
    pub mu_controller: Option<f64>,
    #[serde(default, alias = "mu_c_us", skip_serializing_if = "Option::is_none")]
    pub mu_controller_us: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets_per_replication: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    /// Values held fixed; missing rates fall back to the `node` and
    /// `controller` sections.
    #[serde(default)]
    pub fixed: FixedSection,
    pub outputs: Vec<SweepOutput>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_controller: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_nf: Option<f64>,
    #[serde(default, alias = "mu_l", skip_serializing_if = "Option::is_none")]
    pub mu_switch: Option<f64>,
    #[serde(default, alias = "mu_l_us", skip_serializing_if = "Option::is_none")]
    pub mu_switch_us: Option<f64>,
    #[serde(default, alias = "mu_c", skip_serializing_if = "Option::is_none")]
    pub mu_controller: Option<f64>,
    #[serde(default, alias = "mu_c_us", skip_serializing_if = "Option::is_none")]
    pub mu_controller_us: Option<f64>,
    /// Seconds; defaults to 0.5 ms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<f64>,
    /// Seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delay_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Resolves a rate given per second or as a service time in µs.
fn rate(name: &'static str, per_second: Option<f64>, micros: Option<f64>) -> Result<Option<f64>> {
    match (per_second, micros) {
        (Some(_), Some(_)) => Err(ModelError::Config(format!(
            "give either {name} or {name}_us, not both"
        ))),
        (Some(r), None) => Ok(Some(r)),
        (None, Some(us)) => {
            if !(us > 0.0 && us.is_finite()) {
                return Err(ModelError::domain(
                    if name == "mu_switch" { "mu_switch_us" } else { "mu_controller_us" },
                    us,
                    "a positive finite service time",
                ));
            }
            Ok(Some(1e6 / us))
        }
        (None, None) => Ok(None),
    }
}

fn missing(field: &str) -> ModelError {
    ModelError::Config(format!("missing field `{field}`"))
}

impl NodeSection {
    pub fn mu_switch(&self) -> Result<Option<f64>> {
        rate("mu_switch", self.mu_switch, self.mu_switch_us)
    }

    pub fn resolve(&self) -> Result<NodeParams> {
        let mu = self.mu_switch()?.ok_or_else(|| missing("mu_switch"))?;
        NodeParams::new(
            self.lambda.ok_or_else(|| missing("lambda"))?,
            mu,
            self.q_nf.ok_or_else(|| missing("q_nf"))?,
        )
    }
}

impl ControllerSection {
    pub fn mu_controller(&self) -> Result<Option<f64>> {
        rate("mu_controller", self.mu_controller, self.mu_controller_us)
    }
}

impl SimSection {
    /// Fills unset fields from `base`.
    pub fn apply(&self, base: SimConfig) -> SimConfig {
        SimConfig {
            seed: self.seed.unwrap_or(base.seed),
            packets_per_replication: self.packets_per_replication.unwrap_or(base.packets_per_replication),
            replications: self.replications.unwrap_or(base.replications),
            warmup_fraction: self.warmup_fraction.unwrap_or(base.warmup_fraction),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| ModelError::Config(format!("config: {e}")))?;
        if cfg.node.is_some() && cfg.chain.is_some() {
            return Err(ModelError::Config("give either `node` or `chain`, not both".into()));
        }
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn controller(&self) -> Result<ControllerParams> {
        let mu = self
            .controller
            .as_ref()
            .map(ControllerSection::mu_controller)
            .transpose()?
            .flatten()
            .ok_or_else(|| missing("controller.mu_controller"))?;
        ControllerParams::new(mu)
    }

    pub fn node(&self) -> Result<NodeParams> {
        self.node.as_ref().ok_or_else(|| missing("node"))?.resolve()
    }

    /// The `chain` section, or a one-node chain built from `node`.
    pub fn chain(&self) -> Result<ChainModel> {
        let ctrl = self.controller()?;
        match (&self.chain, &self.node) {
            (Some(nodes), _) => {
                let nodes = nodes.iter().map(NodeSection::resolve).collect::<Result<Vec<_>>>()?;
                ChainModel::new(nodes, ctrl)
            }
            (None, Some(node)) => Ok(ChainModel::single(node.resolve()?, ctrl)),
            (None, None) => Err(missing("chain")),
        }
    }

    pub fn sim_config(&self, base: SimConfig) -> SimConfig {
        self.sim.as_ref().map_or(base, |s| s.apply(base))
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sweep = self.sweep.as_ref().ok_or_else(|| missing("sweep"))?;
        let f = &sweep.fixed;
        let node = self.node.clone().unwrap_or_default();
        let mu_switch = match rate("mu_switch", f.mu_switch, f.mu_switch_us)? {
            Some(mu) => mu,
            None => node.mu_switch()?.ok_or_else(|| missing("sweep.fixed.mu_switch"))?,
        };
        let mu_controller = match rate("mu_controller", f.mu_controller, f.mu_controller_us)? {
            Some(mu) => mu,
            None => self.controller()?.mu_controller,
        };
        let spec = SweepSpec {
            variable: sweep.variable,
            grid: sweep.grid.clone(),
            fixed: FixedParams {
                mu_switch,
                mu_controller,
                q_nf: f.q_nf.or(node.q_nf),
                lambda: f.lambda.or(if f.rho_controller.is_none() { node.lambda } else { None }),
                rho_controller: f.rho_controller,
                deadline: f.deadline.unwrap_or(DEFAULT_DEADLINE),
                delay_bound: f.delay_bound,
            },
            outputs: sweep.outputs.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }
}
