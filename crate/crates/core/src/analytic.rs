//! Balance equations and mean sojourn times for a single switch attached to
//! an SDN controller.
//!
//! The OpenFlow system sends only a fraction `q_nf` of the *external*
//! arrivals to the controller, and each such packet visits the controller at
//! most once. A plain Jackson network routes a fraction of the *net* switch
//! input instead, so its routing probability has to be corrected to
//! `q_jack = q_nf / (1 + q_nf)` for the station input rates of both models to
//! agree. [`jackson_rates`] solves the Jackson balance equation for an
//! arbitrary routing probability, which gives both the corrected model and the
//! uncorrected ("naive") one used for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result, Station};

/// Loads at or above `1 - STABILITY_MARGIN` are treated as saturated.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// One data-plane node: external Poisson arrivals into an exponential server.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeParams {
    /// External arrival rate (packets/s).
    pub lambda: f64,
    /// Switch service rate (packets/s).
    pub mu_switch: f64,
    /// Probability that an arriving packet belongs to an unknown flow.
    pub q_nf: f64,
}

impl NodeParams {
    pub fn new(lambda: f64, mu_switch: f64, q_nf: f64) -> Result<Self> {
        let node = NodeParams {
            lambda,
            mu_switch,
            q_nf,
        };
        node.validate()?;
        Ok(node)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(ModelError::domain("lambda", self.lambda, "lambda > 0"));
        }
        if !(self.mu_switch > 0.0 && self.mu_switch.is_finite()) {
            return Err(ModelError::domain(
                "mu_switch",
                self.mu_switch,
                "mu_switch > 0",
            ));
        }
        check_probability("q_nf", self.q_nf)
    }

    /// Same node with a different external arrival rate.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        NodeParams { lambda, ..*self }
    }
}

/// The controller station. Its service time includes the switch-to-controller
/// transmission time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Controller service rate (responses/s).
    pub mu_controller: f64,
}

impl ControllerParams {
    pub fn new(mu_controller: f64) -> Result<Self> {
        let ctrl = ControllerParams { mu_controller };
        ctrl.validate()?;
        Ok(ctrl)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_controller > 0.0 && self.mu_controller.is_finite()) {
            return Err(ModelError::domain(
                "mu_controller",
                self.mu_controller,
                "mu_controller > 0",
            ));
        }
        Ok(())
    }
}

/// Solution of the traffic balance equations for one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedRates {
    /// Net input rate to the switch (external plus controller returns).
    pub gamma_switch: f64,
    /// Net input rate to the controller.
    pub gamma_controller: f64,
    /// Jackson routing probability from the switch to the controller.
    pub q_jack: f64,
    pub rho_switch: f64,
    pub rho_controller: f64,
}

impl SolvedRates {
    pub fn switch_stable(&self) -> bool {
        is_stable_load(self.rho_switch)
    }

    pub fn controller_stable(&self) -> bool {
        is_stable_load(self.rho_controller)
    }

    pub fn is_stable(&self) -> bool {
        self.switch_stable() && self.controller_stable()
    }

    /// Ok when both stations are strictly inside the stability region,
    /// otherwise an error naming the first saturated station.
    pub fn require_stable(&self) -> Result<()> {
        self.require_stable_as(Station::Switch)
    }

    pub(crate) fn require_stable_as(&self, switch: Station) -> Result<()> {
        if !self.switch_stable() {
            return Err(ModelError::Unstable {
                station: switch,
                load: self.rho_switch,
            });
        }
        if !self.controller_stable() {
            return Err(ModelError::Unstable {
                station: Station::Controller,
                load: self.rho_controller,
            });
        }
        Ok(())
    }
}

pub fn is_stable_load(rho: f64) -> bool {
    rho < 1.0 - STABILITY_MARGIN
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ModelError::domain(name, p, "0 <= p <= 1"))
    }
}

/// Corrected Jackson routing probability `q_nf / (1 + q_nf)`.
pub fn derive_q_jack(q_nf: f64) -> Result<f64> {
    check_probability("q_nf", q_nf)?;
    Ok(q_nf / (1.0 + q_nf))
}

/// Station rates of the OpenFlow system: `Γ_l = λ(1 + q_nf)`, `Γ_c = q_nf λ`.
///
/// Stability is evaluated but not enforced.
pub fn solve_rates(node: &NodeParams, ctrl: &ControllerParams) -> SolvedRates {
    let gamma_switch = node.lambda * (1.0 + node.q_nf);
    let gamma_controller = node.q_nf * node.lambda;
    SolvedRates {
        gamma_switch,
        gamma_controller,
        q_jack: node.q_nf / (1.0 + node.q_nf),
        rho_switch: gamma_switch / node.mu_switch,
        rho_controller: gamma_controller / ctrl.mu_controller,
    }
}

/// Solves the Jackson balance equation `Γ_l = λ + q Γ_l` for a given routing
/// probability `q` and returns the resulting station rates.
pub fn jackson_rates(node: &NodeParams, ctrl: &ControllerParams, q_jack: f64) -> Result<SolvedRates> {
    if !(0.0..1.0).contains(&q_jack) {
        return Err(ModelError::domain("q_jack", q_jack, "0 <= q_jack < 1"));
    }
    let gamma_switch = node.lambda / (1.0 - q_jack);
    let gamma_controller = q_jack * gamma_switch;
    Ok(SolvedRates {
        gamma_switch,
        gamma_controller,
        q_jack,
        rho_switch: gamma_switch / node.mu_switch,
        rho_controller: gamma_controller / ctrl.mu_controller,
    })
}

/// Jackson-form mean sojourn time `(1/λ)(ρ_l/(1-ρ_l) + ρ_c/(1-ρ_c))`.
pub fn mean_sojourn_jackson(rates: &SolvedRates, node: &NodeParams) -> Result<f64> {
    rates.require_stable()?;
    let per_station = |rho: f64| rho / (1.0 - rho);
    Ok((per_station(rates.rho_switch) + per_station(rates.rho_controller)) / node.lambda)
}

/// Mean sojourn time computed along the OpenFlow packet path:
/// `(1 + q_nf)/(μ_l - Γ_l) + q_nf/(μ_c - Γ_c)`.
pub fn mean_sojourn_openflow(
    node: &NodeParams,
    ctrl: &ControllerParams,
    rates: &SolvedRates,
) -> Result<f64> {
    rates.require_stable()?;
    let switch_term = (1.0 + node.q_nf) / (node.mu_switch - rates.gamma_switch);
    let controller_term = node.q_nf / (ctrl.mu_controller - rates.gamma_controller);
    Ok(switch_term + controller_term)
}

/// Uncorrected Jackson model that routes `q_nf` of the net switch input to
/// the controller. Kept only for comparison against the corrected model.
pub fn mean_sojourn_naive_jackson(node: &NodeParams, ctrl: &ControllerParams) -> Result<f64> {
    check_probability("q_nf", node.q_nf)?;
    if node.q_nf >= 1.0 {
        return Err(ModelError::NaiveUndefined { q_nf: node.q_nf });
    }
    let rates = jackson_rates(node, ctrl, node.q_nf)?;
    mean_sojourn_jackson(&rates, node)
}

/// Mean sojourn time at vanishing load, `(1 + q_nf)/μ_l + q_nf/μ_c`.
pub fn zero_load_sojourn(node: &NodeParams, ctrl: &ControllerParams) -> f64 {
    (1.0 + node.q_nf) / node.mu_switch + node.q_nf / ctrl.mu_controller
}

/// Supremum of stable external arrival rates,
/// `min(μ_l / (1 + q_nf), μ_c / q_nf)`.
pub fn lambda_supremum(mu_switch: f64, q_nf: f64, ctrl: &ControllerParams) -> f64 {
    let switch_bound = mu_switch / (1.0 + q_nf);
    if q_nf > 0.0 {
        switch_bound.min(ctrl.mu_controller / q_nf)
    } else {
        switch_bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU_L: f64 = 1.0 / 9.8e-6;
    const MU_C_240: f64 = 1.0 / 240e-6;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn q_jack_examples() {
        assert_eq!(derive_q_jack(0.0).unwrap(), 0.0);
        assert_eq!(derive_q_jack(1.0).unwrap(), 0.5);
        assert!(rel(derive_q_jack(0.2).unwrap(), 1.0 / 6.0) < 1e-15);
        assert!(derive_q_jack(-0.1).is_err());
        assert!(derive_q_jack(1.5).is_err());
        assert!(derive_q_jack(f64::NAN).is_err());
    }

    #[test]
    fn solve_rates_unstable_example() {
        let node = NodeParams::new(10_000.0, MU_L, 0.5).unwrap();
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        let r = solve_rates(&node, &ctrl);
        assert_eq!(r.gamma_switch, 15_000.0);
        assert_eq!(r.gamma_controller, 5_000.0);
        assert!(rel(r.rho_controller, 1.2) < 1e-12);
        assert!(!r.is_stable());
        assert_eq!(
            r.require_stable().unwrap_err(),
            ModelError::Unstable {
                station: Station::Controller,
                load: r.rho_controller
            }
        );
    }

    #[test]
    fn solve_rates_without_new_flows() {
        let node = NodeParams::new(1000.0, MU_L, 0.0).unwrap();
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        let r = solve_rates(&node, &ctrl);
        assert_eq!(r.gamma_switch, 1000.0);
        assert_eq!(r.gamma_controller, 0.0);
        assert_eq!(r.q_jack, 0.0);
    }

    #[test]
    fn solve_rates_reference_controller() {
        let node = NodeParams::new(2000.0, MU_L, 1.0).unwrap();
        let ctrl = ControllerParams::new(4175.0).unwrap();
        let r = solve_rates(&node, &ctrl);
        assert_eq!(r.gamma_controller, 2000.0);
        assert!((r.rho_controller - 0.479).abs() < 5e-4);
        assert!(r.is_stable());
    }

    #[test]
    fn plain_mm1_when_no_new_flows() {
        let node = NodeParams::new(0.5 * MU_L, MU_L, 0.0).unwrap();
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        let r = solve_rates(&node, &ctrl);
        let expected = 1.0 / (MU_L - node.lambda);
        assert!(rel(mean_sojourn_jackson(&r, &node).unwrap(), expected) < 1e-13);
        assert!(rel(mean_sojourn_openflow(&node, &ctrl, &r).unwrap(), expected) < 1e-13);
        assert!(rel(mean_sojourn_naive_jackson(&node, &ctrl).unwrap(), expected) < 1e-13);
    }

    #[test]
    fn both_forms_agree_on_reference_point() {
        let node = NodeParams::new(20_000.0, MU_L, 1.0).unwrap();
        let ctrl = ControllerParams::new(4175.0).unwrap();
        // Γ_c = 20000 > 4175: the controller saturates.
        let r = solve_rates(&node, &ctrl);
        assert!(mean_sojourn_openflow(&node, &ctrl, &r).unwrap_err().is_unstable());

        let node = node.with_lambda(2000.0);
        let r = solve_rates(&node, &ctrl);
        let jackson = mean_sojourn_jackson(&r, &node).unwrap();
        let openflow = mean_sojourn_openflow(&node, &ctrl, &r).unwrap();
        assert!(rel(jackson, openflow) < 1e-12);
    }

    #[test]
    fn jackson_mean_diverges_towards_controller_saturation() {
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        let mut last = 0.0;
        for rho_c in [0.5, 0.9, 0.99, 0.999, 0.9999] {
            let node = NodeParams::new(rho_c * MU_C_240 / 0.5, MU_L, 0.5).unwrap();
            let w = mean_sojourn_jackson(&solve_rates(&node, &ctrl), &node).unwrap();
            assert!(w > last);
            last = w;
        }
        assert!(last > 1.0);
    }

    #[test]
    fn stability_margin_rejects_near_boundary() {
        let ctrl = ControllerParams::new(1000.0).unwrap();
        let node = NodeParams::new(1000.0 * (1.0 - 1e-10), 1e9, 1.0).unwrap();
        let r = solve_rates(&node, &ctrl);
        assert!(r.rho_controller < 1.0);
        assert!(!r.is_stable());
    }

    #[test]
    fn naive_model_rejects_certain_queries() {
        let node = NodeParams::new(1000.0, MU_L, 1.0).unwrap();
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        assert_eq!(
            mean_sojourn_naive_jackson(&node, &ctrl).unwrap_err(),
            ModelError::NaiveUndefined { q_nf: 1.0 }
        );
    }

    #[test]
    fn naive_model_overestimates() {
        let node = NodeParams::new(1000.0, MU_L, 0.5).unwrap();
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        let modified = mean_sojourn_openflow(&node, &ctrl, &solve_rates(&node, &ctrl)).unwrap();
        let naive = mean_sojourn_naive_jackson(&node, &ctrl).unwrap();
        assert!(naive > modified, "{naive} vs {modified}");
    }

    #[test]
    fn param_validation() {
        assert!(NodeParams::new(0.0, 1.0, 0.5).is_err());
        assert!(NodeParams::new(1.0, -1.0, 0.5).is_err());
        assert!(NodeParams::new(1.0, 1.0, 1.01).is_err());
        assert!(NodeParams::new(1.0, 1.0, f64::NAN).is_err());
        assert!(ControllerParams::new(0.0).is_err());
        assert!(ControllerParams::new(f64::INFINITY).is_err());
    }

    #[test]
    fn lambda_supremum_regimes() {
        let ctrl = ControllerParams::new(MU_C_240).unwrap();
        assert_eq!(lambda_supremum(MU_L, 0.0, &ctrl), MU_L);
        assert!(rel(lambda_supremum(MU_L, 1.0, &ctrl), MU_C_240) < 1e-15);
        assert!(rel(lambda_supremum(MU_L, 1.0, &ctrl), 4_166.666_666_7) < 1e-10);
    }
}
