//! Exact sojourn-time distribution for a single switch with controller
//! feedback.
//!
//! A known-flow packet spends one exponential(`a_l`) sojourn at the switch. A
//! new-flow packet spends two switch sojourns and one controller sojourn,
//! treated as independent, so its Laplace transform is
//! `(a_l/(a_l+s))² · a_c/(a_c+s)`. Partial fractions give the density
//!
//! ```text
//! w(t) = b1·a_l·e^(−a_l t) + b2·a_l·(a_l t)·e^(−a_l t) + d·a_c·e^(−a_c t)
//! ```
//!
//! with `a_l = μ_l − Γ_l` and `a_c = μ_c − Γ_c`. The coefficients are a
//! signed decomposition (`b1` can be negative), so evaluation is always a
//! direct sum and never a sampled mixture.
//!
//! As `a_c → a_l` the coefficients blow up like `(a_c − a_l)^-2` and the
//! direct sum cancels catastrophically. Within [`NEAR_DEGENERATE`] relative
//! separation the same function is evaluated in the cancellation-free form
//! `(1−q)·a_l·e^(−a_l t) + q·a_l²·a_c·t²·e^(−a_l t)·φ((a_c − a_l)t)` with
//! `φ(x) = (e^(−x) − 1 + x)/x²`, whose limit at equal rates is the Erlang-3
//! density.

use serde::{Deserialize, Serialize};

use crate::analytic::{check_probability, ControllerParams, NodeParams, SolvedRates};
use crate::error::{ModelError, Result};

/// Relative rate separation at or below which the rates are treated as equal.
pub const DEGENERATE_TOLERANCE: f64 = 1e-9;

const FACTORIALS: [f64; 21] = {
    let mut f = [1.0; 21];
    let mut i = 1;
    while i < 21 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// Relative rate separation below which evaluation switches to the
/// cancellation-free form.
/// At 0.1 the direct sum's coefficients stay below ~10² in magnitude.
pub const NEAR_DEGENERATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SojournDistribution {
    /// Effective switch rate `μ_l − Γ_l` (1/s).
    pub a_switch: f64,
    /// Effective controller rate `μ_c − Γ_c` (1/s).
    pub a_controller: f64,
    /// Coefficient of the exponential switch term. In the degenerate case
    /// this is `1 − q_nf` and the new-flow part is an Erlang-3 term instead.
    pub b1: f64,
    /// Coefficient of the Erlang-2 switch term (0 when degenerate).
    pub b2: f64,
    /// Coefficient of the controller term (0 when degenerate).
    pub d: f64,
    pub q_nf: f64,
    /// Set when `|a_c − a_l| ≤ 1e-9 · max(a_l, a_c)`.
    pub degenerate: bool,
}

pub fn build_distribution(
    node: &NodeParams,
    ctrl: &ControllerParams,
    rates: &SolvedRates,
) -> Result<SojournDistribution> {
    rates.require_stable()?;
    check_probability("q_nf", node.q_nf)?;
    let a_l = node.mu_switch - rates.gamma_switch;
    let a_c = ctrl.mu_controller - rates.gamma_controller;
    Ok(SojournDistribution::from_rates(a_l, a_c, node.q_nf))
}

impl SojournDistribution {
    /// Builds the distribution directly from effective rates. Both rates must
    /// be positive.
    pub fn from_rates(a_switch: f64, a_controller: f64, q_nf: f64) -> Self {
        assert!(a_switch > 0.0 && a_controller > 0.0, "effective rates must be positive");
        let q = q_nf;
        let delta = a_controller - a_switch;
        let degenerate = delta.abs() <= DEGENERATE_TOLERANCE * a_switch.max(a_controller);
        let (b1, b2, d) = if degenerate {
            (1.0 - q, 0.0, 0.0)
        } else {
            let delta2 = delta * delta;
            (
                1.0 - q - q * a_switch * a_controller / delta2,
                q * a_controller / delta,
                q * a_switch * a_switch / delta2,
            )
        };
        SojournDistribution {
            a_switch,
            a_controller,
            b1,
            b2,
            d,
            q_nf,
            degenerate,
        }
    }

    /// Controller rate used for evaluation: in the degenerate case both
    /// rates are taken equal to `a_l`.
    fn effective_controller_rate(&self) -> f64 {
        if self.degenerate {
            self.a_switch
        } else {
            self.a_controller
        }
    }

    fn near_degenerate(&self) -> bool {
        let delta = self.a_controller - self.a_switch;
        self.degenerate || delta.abs() < NEAR_DEGENERATE * self.a_switch.max(self.a_controller)
    }

    /// `e^(−a_l t) · φ((a_c − a_l) t)`.
    fn damped_phi(&self, t: f64) -> f64 {
        let a_l = self.a_switch;
        let a_c = self.effective_controller_rate();
        let x = (a_c - a_l) * t;
        let e_l = (-a_l * t).exp();
        if x.abs() < 1.0 {
            // Σ (−x)^n / (n+2)!, converged to rounding by n = 18
            let mut series = 0.0;
            for n in (0..=18).rev() {
                series = 1.0 / FACTORIALS[n + 2] - x * series;
            }
            e_l * series
        } else {
            let e_c = (-a_c * t).exp();
            (e_c - e_l * (1.0 - x)) / (x * x)
        }
    }

    /// Probability density of the sojourn time at `t` (1/s).
    pub fn pdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let q = self.q_nf;
        let a_l = self.a_switch;
        if self.near_degenerate() {
            let a_c = self.effective_controller_rate();
            let e_l = (-a_l * t).exp();
            return Ok((1.0 - q) * a_l * e_l + q * a_l * a_l * a_c * t * t * self.damped_phi(t));
        }
        let a_c = self.a_controller;
        let e_l = (-a_l * t).exp();
        Ok(self.b1 * a_l * e_l + self.b2 * a_l * (a_l * t) * e_l + self.d * a_c * (-a_c * t).exp())
    }

    /// `P(W > t)`, clamped to `[0, 1]` against rounding in the signed sum.
    pub fn ccdf(&self, t: f64) -> Result<f64> {
        Ok(self.raw_ccdf(t)?.clamp(0.0, 1.0))
    }

    fn raw_ccdf(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let q = self.q_nf;
        let a_l = self.a_switch;
        let e_l = (-a_l * t).exp();
        if self.near_degenerate() {
            let at = a_l * t;
            return Ok((1.0 - q) * e_l + q * (e_l * (1.0 + at) + at * at * self.damped_phi(t)));
        }
        let a_c = self.a_controller;
        Ok((self.b1 + self.b2) * e_l + self.b2 * (a_l * t) * e_l + self.d * (-a_c * t).exp())
    }

    /// `P(W ≤ deadline)`.
    pub fn prob_within_deadline(&self, deadline: f64) -> Result<f64> {
        Ok(1.0 - self.ccdf(deadline)?)
    }

    /// Smallest `t` with `P(W ≤ t) ≥ p`, for `0 ≤ p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(ModelError::domain("p", p, "0 <= p < 1"));
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        let cdf = |t: f64| 1.0 - self.ccdf(t).expect("t >= 0");
        let mut lo = 0.0;
        let mut hi = self.mean();
        while cdf(hi) < p {
            lo = hi;
            hi *= 2.0;
        }
        // Bisect down to adjacent floats; well inside the 1e-12 s target.
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if cdf(mid) >= p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Mean sojourn time, `(1−q)/a_l + q(2/a_l + 1/a_c)`.
    pub fn mean(&self) -> f64 {
        let q = self.q_nf;
        let a_l = self.a_switch;
        (1.0 - q) / a_l + q * (2.0 / a_l + 1.0 / self.effective_controller_rate())
    }

    /// Mean assembled from the partial-fraction coefficients,
    /// `b1/a_l + 2·b2/a_l + d/a_c`. Only meaningful away from degeneracy.
    pub fn coefficient_mean(&self) -> f64 {
        (self.b1 + 2.0 * self.b2) / self.a_switch + self.d / self.a_controller
    }

    /// Laplace transform `E[e^(−sW)]` in product form.
    pub fn laplace(&self, s: f64) -> f64 {
        let q = self.q_nf;
        let sw = self.a_switch / (self.a_switch + s);
        let a_c = self.effective_controller_rate();
        (1.0 - q) * sw + q * sw * sw * a_c / (a_c + s)
    }

    /// Upper end of the range used for numerical checks: 50 mean lifetimes of
    /// the slower station.
    pub fn integration_horizon(&self) -> f64 {
        50.0 / self.a_switch.min(self.effective_controller_rate())
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::domain("t", t, "t >= 0"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_when_no_new_flows() {
        let d = SojournDistribution::from_rates(5e4, 3e3, 0.0);
        assert_eq!((d.b1, d.b2, d.d), (1.0, 0.0, 0.0));
        assert_eq!(d.pdf(0.0).unwrap(), 5e4);
        for t in [0.0f64, 1e-5, 1e-4, 1e-3] {
            let expected = (-5e4 * t).exp();
            assert!((d.ccdf(t).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn double_rate_controller_coefficients() {
        let d = SojournDistribution::from_rates(1000.0, 2000.0, 1.0);
        assert!(!d.degenerate);
        assert!((d.b2 - 2.0).abs() < 1e-15);
        assert!((d.d - 1.0).abs() < 1e-15);
        assert!((d.b1 + 2.0).abs() < 1e-15);
        assert!((d.b1 + d.b2 + d.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ccdf_at_origin_is_one() {
        for (a_l, a_c, q) in [(1e5, 4e3, 0.5), (1e3, 2e3, 1.0), (7.0, 7.0, 0.3), (2.0, 2.001, 0.9)] {
            let d = SojournDistribution::from_rates(a_l, a_c, q);
            assert!((d.ccdf(0.0).unwrap() - 1.0).abs() < 1e-12, "{a_l} {a_c} {q}");
            assert_eq!(d.prob_within_deadline(0.0).unwrap(), 1.0 - d.ccdf(0.0).unwrap());
        }
    }

    #[test]
    fn degenerate_flag_and_erlang_limit() {
        let a = 800.0;
        let q = 0.4;
        let d = SojournDistribution::from_rates(a, a * (1.0 + 1e-12), q);
        assert!(d.degenerate);
        for t in [0.0, 1e-4, 1e-3, 5e-3, 2e-2] {
            let at = a * t;
            let pdf = (1.0 - q) * a * (-at).exp() + q * a * at * at / 2.0 * (-at).exp();
            let ccdf = (-at).exp() * (1.0 - q + q * (1.0 + at + at * at / 2.0));
            assert!((d.pdf(t).unwrap() - pdf).abs() <= 1e-12 * pdf.max(1e-300));
            assert!((d.ccdf(t).unwrap() - ccdf).abs() <= 1e-12);
        }
    }

    #[test]
    fn negative_time_rejected() {
        let d = SojournDistribution::from_rates(1.0, 2.0, 0.5);
        assert!(d.pdf(-1e-9).is_err());
        assert!(d.ccdf(-1.0).is_err());
        assert!(d.ccdf(f64::NAN).is_err());
    }

    #[test]
    fn quantile_edges() {
        let d = SojournDistribution::from_rates(1e4, 3e3, 0.0);
        assert_eq!(d.quantile(0.0).unwrap(), 0.0);
        let q = d.quantile(1.0 - (-1.0f64).exp()).unwrap();
        assert!((q - 1e-4).abs() < 1e-9);
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(-0.1).is_err());
    }

    #[test]
    fn coefficient_mean_matches_closed_mean() {
        let d = SojournDistribution::from_rates(9e4, 2e3, 0.6);
        assert!((d.coefficient_mean() - d.mean()).abs() < 1e-12 * d.mean());
    }
}
