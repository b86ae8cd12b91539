//! Data tables for the standard figure set (fig2 ... fig6).

use serde::{Deserialize, Serialize};

use crate::analytic::ControllerParams;
use crate::dimensioning::{
    log_grid, max_throughput, sweep, FixedParams, NodeTemplate, SweepOutput, SweepRow, SweepSpec,
    SweepVariable, DEFAULT_DEADLINE,
};
use crate::error::{ModelError, Result};
use crate::output::{Cell, Table};
use crate::sim::SimConfig;

/// Switch service time of the reference setup (s).
pub const SWITCH_SERVICE_TIME: f64 = 9.8e-6;
/// Controller service time of the reference setup (s), about 4175 responses/s.
pub const CONTROLLER_SERVICE_TIME: f64 = 240e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl std::str::FromStr for Figure {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            other => Err(ModelError::Config(format!(
                "unknown figure `{other}` (expected fig2, fig3, fig4, fig5 or fig6)"
            ))),
        }
    }
}

impl Figure {
    pub const ALL: [Figure; 5] = [Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn default_q_values(&self) -> Vec<f64> {
        match self {
            Figure::Fig2 | Figure::Fig5 => vec![0.5],
            Figure::Fig3 => vec![0.2, 1.0],
            Figure::Fig4 | Figure::Fig6 => vec![0.2, 0.5, 1.0],
        }
    }

    pub fn uses_simulation(&self) -> bool {
        matches!(self, Figure::Fig2 | Figure::Fig3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FigureOptions {
    pub mu_switch: f64,
    pub mu_controller: f64,
    /// Overrides the figure's own q_nf set.
    pub q_values: Option<Vec<f64>>,
    pub rho_grid: Vec<f64>,
    /// Controller service times (µs) compared in fig5.
    pub controller_service_us: Vec<f64>,
    pub deadline: f64,
    /// Number of delay bounds in fig4.
    pub delay_bound_points: usize,
    pub sim: SimConfig,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            mu_switch: 1.0 / SWITCH_SERVICE_TIME,
            mu_controller: 1.0 / CONTROLLER_SERVICE_TIME,
            q_values: None,
            rho_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            controller_service_us: vec![120.0, 240.0, 480.0],
            deadline: DEFAULT_DEADLINE,
            delay_bound_points: 30,
            sim: SimConfig::default(),
        }
    }
}

/// `0.2 → "0.2"`, `1.0 → "1.0"`.
fn label(x: f64) -> String {
    format!("{:?}", (x * 1e9).round() / 1e9)
}

impl FigureOptions {
    fn q_values(&self, fig: Figure) -> Result<Vec<f64>> {
        let qs = self.q_values.clone().unwrap_or_else(|| fig.default_q_values());
        if qs.is_empty() {
            return Err(ModelError::Config("q_values is empty".into()));
        }
        Ok(qs)
    }

    fn rho_spec(&self, q_nf: f64, mu_controller: f64, outputs: Vec<SweepOutput>) -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::RhoController,
            grid: self.rho_grid.clone(),
            fixed: FixedParams {
                mu_switch: self.mu_switch,
                mu_controller,
                q_nf: Some(q_nf),
                lambda: None,
                rho_controller: None,
                deadline: self.deadline,
                delay_bound: None,
            },
            outputs,
        }
    }

    fn rho_sweep(&self, q_nf: f64, mu_controller: f64, outputs: Vec<SweepOutput>) -> Result<Vec<SweepRow>> {
        Ok(sweep(&self.rho_spec(q_nf, mu_controller, outputs), &self.sim)?.rows)
    }

    /// Delay bounds for fig4: log grid over `[1.05·E0_min, 100·E0_max]`,
    /// `E0` being the zero-load mean sojourn of each q_nf.
    pub fn delay_bound_grid(&self, q_values: &[f64]) -> Result<Vec<f64>> {
        let ctrl = ControllerParams::new(self.mu_controller)?;
        let e0: Vec<f64> = q_values
            .iter()
            .map(|&q| NodeTemplate { mu_switch: self.mu_switch, q_nf: q }.zero_load_sojourn(&ctrl))
            .collect();
        let lo = e0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = e0.iter().copied().fold(0.0, f64::max);
        if self.delay_bound_points < 2 {
            return Err(ModelError::Config("delay_bound_points must be at least 2".into()));
        }
        Ok(log_grid(1.05 * lo, 100.0 * hi, self.delay_bound_points))
    }
}

pub fn figure_table(fig: Figure, opts: &FigureOptions) -> Result<Table> {
    let qs = opts.q_values(fig)?;
    match fig {
        Figure::Fig2 => {
            let mut t = Table::new(["rho_c", "naive_jackson_mean", "modified_jackson_mean", "sim_mean", "sim_ci"]);
            let q = qs[0];
            if qs.len() > 1 {
                return Err(ModelError::Config("fig2 takes a single q_nf".into()));
            }
            let outputs = vec![SweepOutput::NaiveMean, SweepOutput::AnalyticMean, SweepOutput::SimulatedMean];
            for r in opts.rho_sweep(q, opts.mu_controller, outputs)? {
                t.push(vec![
                    Cell::Num(r.x),
                    r.naive_mean.into(),
                    r.analytic_mean.into(),
                    r.sim_mean.into(),
                    r.sim_ci.into(),
                ]);
            }
            Ok(t)
        }
        Figure::Fig3 => {
            let mut t = Table::new(["q_nf", "rho_c", "modified_jackson_mean", "sim_mean", "sim_ci"]);
            for &q in &qs {
                let outputs = vec![SweepOutput::AnalyticMean, SweepOutput::SimulatedMean];
                for r in opts.rho_sweep(q, opts.mu_controller, outputs)? {
                    t.push(vec![
                        Cell::Num(q),
                        Cell::Num(r.x),
                        r.analytic_mean.into(),
                        r.sim_mean.into(),
                        r.sim_ci.into(),
                    ]);
                }
            }
            Ok(t)
        }
        Figure::Fig4 => {
            let ctrl = ControllerParams::new(opts.mu_controller)?;
            let grid = opts.delay_bound_grid(&qs)?;
            let mut cols = vec!["delay_bound".to_string()];
            cols.extend(qs.iter().map(|&q| format!("throughput_q{}", label(q))));
            let mut t = Table::new(cols);
            for &bound in &grid {
                let mut row = vec![Cell::Num(bound)];
                for &q in &qs {
                    let template = NodeTemplate { mu_switch: opts.mu_switch, q_nf: q };
                    row.push(Cell::Num(max_throughput(bound, &template, &ctrl)?.lambda));
                }
                t.push(row);
            }
            Ok(t)
        }
        Figure::Fig5 => {
            let mut t = Table::new(["controller_service_us", "rho_c", "modified_jackson_mean"]);
            let q = qs[0];
            if qs.len() > 1 {
                return Err(ModelError::Config("fig5 takes a single q_nf".into()));
            }
            for &us in &opts.controller_service_us {
                if !(us > 0.0) || !us.is_finite() {
                    return Err(ModelError::domain("controller_service_us", us, "> 0"));
                }
                for r in opts.rho_sweep(q, 1e6 / us, vec![SweepOutput::AnalyticMean])? {
                    t.push(vec![Cell::Num(us), Cell::Num(r.x), r.analytic_mean.into()]);
                }
            }
            Ok(t)
        }
        Figure::Fig6 => {
            let ms = label(opts.deadline * 1e3);
            let mut cols = vec!["rho_c".to_string()];
            cols.extend(qs.iter().map(|&q| format!("p_within_{ms}ms_q{}", label(q))));
            let mut t = Table::new(cols);
            let per_q = qs
                .iter()
                .map(|&q| opts.rho_sweep(q, opts.mu_controller, vec![SweepOutput::DeadlineProb]))
                .collect::<Result<Vec<_>>>()?;
            for (i, &rho) in opts.rho_grid.iter().enumerate() {
                let mut row = vec![Cell::Num(rho)];
                row.extend(per_q.iter().map(|rows| Cell::from(rows[i].deadline_prob)));
                t.push(row);
            }
            Ok(t)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> FigureOptions {
        FigureOptions {
            sim: SimConfig {
                packets_per_replication: 10_000,
                ..SimConfig::default()
            },
            ..FigureOptions::default()
        }
    }

    #[test]
    fn labels() {
        assert_eq!(label(0.2), "0.2");
        assert_eq!(label(1.0), "1.0");
        assert_eq!(label(0.5e-3 * 1e3), "0.5");
    }

    #[test]
    fn column_sets() {
        let opts = quick();
        assert_eq!(
            figure_table(Figure::Fig2, &opts).unwrap().columns,
            ["rho_c", "naive_jackson_mean", "modified_jackson_mean", "sim_mean", "sim_ci"]
        );
        assert_eq!(
            figure_table(Figure::Fig4, &opts).unwrap().columns,
            ["delay_bound", "throughput_q0.2", "throughput_q0.5", "throughput_q1.0"]
        );
        let fig6 = figure_table(Figure::Fig6, &opts).unwrap();
        assert_eq!(
            fig6.columns,
            ["rho_c", "p_within_0.5ms_q0.2", "p_within_0.5ms_q0.5", "p_within_0.5ms_q1.0"]
        );
        assert_eq!(fig6.rows.len(), 9);
        assert_eq!(figure_table(Figure::Fig5, &opts).unwrap().rows.len(), 27);
    }

    #[test]
    fn fig2_naive_undefined_past_half_load() {
        let t = figure_table(Figure::Fig2, &quick()).unwrap();
        let naive = t.values("naive_jackson_mean").unwrap();
        let modified = t.values("modified_jackson_mean").unwrap();
        // q = 0.5 doubles the naive controller load
        assert!(naive[3].is_some() && naive[4].is_none());
        assert!(modified.iter().all(Option::is_some));
        assert!(naive[0].unwrap() > modified[0].unwrap());
    }

    #[test]
    fn unknown_figure() {
        assert!("fig7".parse::<Figure>().is_err());
        assert_eq!("fig3".parse::<Figure>().unwrap(), Figure::Fig3);
    }
}
