//! Dimensioning: how much traffic a node admits under a mean-delay bound, and
//! parameter sweeps over the model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    lambda_supremum, mean_sojourn_naive_jackson, mean_sojourn_openflow, solve_rates,
    zero_load_sojourn, ControllerParams, NodeParams,
};
use crate::distribution::build_distribution;
use crate::error::{ModelError, Result};
use crate::output::{Cell, Table};
use crate::sim::{run_single_node, SimConfig};

/// A node whose external arrival rate is still to be chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTemplate {
    pub mu_switch: f64,
    pub q_nf: f64,
}

impl NodeTemplate {
    pub fn with_lambda(&self, lambda: f64) -> NodeParams {
        NodeParams {
            lambda,
            mu_switch: self.mu_switch,
            q_nf: self.q_nf,
        }
    }

    /// Mean sojourn as `λ → 0⁺`.
    pub fn zero_load_sojourn(&self, ctrl: &ControllerParams) -> f64 {
        zero_load_sojourn(&self.with_lambda(0.0), ctrl)
    }

    pub fn lambda_supremum(&self, ctrl: &ControllerParams) -> f64 {
        lambda_supremum(self.mu_switch, self.q_nf, ctrl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    /// Largest admissible external rate (0 when the bound is infeasible).
    pub lambda: f64,
    /// Stability supremum of the external rate.
    pub lambda_sup: f64,
    /// False when even vanishing traffic violates the bound.
    pub feasible: bool,
}

/// Largest `λ` whose mean sojourn stays within `delay_bound`, by bisection on
/// `(0, λ_sup)` to an absolute tolerance of `1e-6 · λ_sup`.
pub fn max_throughput(delay_bound: f64, template: &NodeTemplate, ctrl: &ControllerParams) -> Result<Throughput> {
    if !(delay_bound > 0.0) || delay_bound.is_nan() {
        return Err(ModelError::domain("delay_bound", delay_bound, "delay_bound > 0"));
    }
    template.with_lambda(1.0).validate()?;
    ctrl.validate()?;
    let lambda_sup = template.lambda_supremum(ctrl);
    if delay_bound <= template.zero_load_sojourn(ctrl) {
        return Ok(Throughput {
            lambda: 0.0,
            lambda_sup,
            feasible: false,
        });
    }
    let within = |lambda: f64| {
        let node = template.with_lambda(lambda);
        mean_sojourn_openflow(&node, ctrl, &solve_rates(&node, ctrl)).is_ok_and(|w| w <= delay_bound)
    };
    let tolerance = 1e-6 * lambda_sup;
    let (mut lo, mut hi) = (0.0, lambda_sup);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if within(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Throughput {
        lambda: lo,
        lambda_sup,
        feasible: true,
    })
}

/// `n` logarithmically spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Lambda,
    RhoController,
    QNf,
    MuController,
    DelayBound,
}

impl SweepVariable {
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::Lambda => "lambda",
            SweepVariable::RhoController => "rho_c",
            SweepVariable::QNf => "q_nf",
            SweepVariable::MuController => "mu_controller",
            SweepVariable::DelayBound => "delay_bound",
        }
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepVariable::Lambda),
            "rho_controller" | "rho_c" => Ok(SweepVariable::RhoController),
            "q_nf" => Ok(SweepVariable::QNf),
            "mu_controller" => Ok(SweepVariable::MuController),
            "delay_bound" => Ok(SweepVariable::DelayBound),
            other => Err(ModelError::Config(format!(
                "unknown sweep variable `{other}` (lambda, rho_controller, q_nf, mu_controller, delay_bound)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    AnalyticMean,
    NaiveMean,
    SimulatedMean,
    DeadlineProb,
    Throughput,
}

impl std::str::FromStr for SweepOutput {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic_mean" => Ok(SweepOutput::AnalyticMean),
            "naive_mean" => Ok(SweepOutput::NaiveMean),
            "simulated_mean" => Ok(SweepOutput::SimulatedMean),
            "deadline_prob" => Ok(SweepOutput::DeadlineProb),
            "throughput" => Ok(SweepOutput::Throughput),
            other => Err(ModelError::Config(format!(
                "unknown sweep output `{other}` (analytic_mean, naive_mean, simulated_mean, deadline_prob, throughput)"
            ))),
        }
    }
}

/// Parameters held constant during a sweep. Either `lambda` or
/// `rho_controller` fixes the traffic; the latter is converted with
/// `λ = ρ_c μ_c / q_nf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub mu_switch: f64,
    pub mu_controller: f64,
    pub q_nf: Option<f64>,
    pub lambda: Option<f64>,
    pub rho_controller: Option<f64>,
    /// Deadline for `deadline_prob` (s).
    pub deadline: f64,
    /// Mean-delay bound for `throughput` (s).
    pub delay_bound: Option<f64>,
}

pub const DEFAULT_DEADLINE: f64 = 0.5e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub fixed: FixedParams,
    pub outputs: Vec<SweepOutput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub lambda: Option<f64>,
    pub rho_controller: Option<f64>,
    pub analytic_mean: Option<f64>,
    pub naive_mean: Option<f64>,
    pub sim_mean: Option<f64>,
    pub sim_ci: Option<f64>,
    pub deadline_prob: Option<f64>,
    pub throughput: Option<f64>,
    /// Why requested outputs are missing ("unstable: controller", ...).
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(ModelError::Config("sweep grid is empty".into()));
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return Err(ModelError::Config("sweep grid contains a non-finite value".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::Config("sweep grid must be strictly increasing".into()));
        }
        if self.outputs.is_empty() {
            return Err(ModelError::Config("no sweep outputs requested".into()));
        }
        if self.fixed.lambda.is_some() && self.fixed.rho_controller.is_some() {
            return Err(ModelError::Config(
                "fix either lambda or rho_controller, not both".into(),
            ));
        }
        if self.variable == SweepVariable::RhoController {
            let q = self.q_nf_at(self.grid[0])?;
            if q == 0.0 {
                return Err(ModelError::domain(
                    "q_nf",
                    q,
                    "q_nf > 0 when sweeping rho_controller (no λ gives positive controller load)",
                ));
            }
        }
        Ok(())
    }

    fn q_nf_at(&self, x: f64) -> Result<f64> {
        match self.variable {
            SweepVariable::QNf => Ok(x),
            _ => self
                .fixed
                .q_nf
                .ok_or_else(|| ModelError::Config("missing fixed parameter q_nf".into())),
        }
    }

    fn needs_traffic(&self) -> bool {
        self.outputs.iter().any(|o| *o != SweepOutput::Throughput)
    }
}

struct Point {
    template: NodeTemplate,
    ctrl: ControllerParams,
    lambda: Option<f64>,
    delay_bound: Option<f64>,
}

fn resolve_point(spec: &SweepSpec, x: f64) -> Result<Point> {
    let q_nf = spec.q_nf_at(x)?;
    let mu_controller = match spec.variable {
        SweepVariable::MuController => x,
        _ => spec.fixed.mu_controller,
    };
    let template = NodeTemplate {
        mu_switch: spec.fixed.mu_switch,
        q_nf,
    };
    let ctrl = ControllerParams::new(mu_controller)?;
    template.with_lambda(1.0).validate()?;
    let back_solve = |rho: f64| -> Result<f64> {
        if q_nf == 0.0 {
            return Err(ModelError::domain("q_nf", q_nf, "q_nf > 0 to back-solve lambda from rho_controller"));
        }
        Ok(rho * mu_controller / q_nf)
    };
    let lambda = match spec.variable {
        SweepVariable::Lambda => Some(x),
        SweepVariable::RhoController => Some(back_solve(x)?),
        _ => match (spec.fixed.lambda, spec.fixed.rho_controller) {
            (Some(l), _) => Some(l),
            (None, Some(rho)) => Some(back_solve(rho)?),
            (None, None) => None,
        },
    };
    if lambda.is_none() && spec.needs_traffic() {
        return Err(ModelError::Config(
            "missing fixed parameter lambda (or rho_controller)".into(),
        ));
    }
    if let Some(l) = lambda {
        template.with_lambda(l).validate()?;
    }
    let delay_bound = match spec.variable {
        SweepVariable::DelayBound => Some(x),
        _ => spec.fixed.delay_bound,
    };
    if delay_bound.is_none() && spec.outputs.contains(&SweepOutput::Throughput) {
        return Err(ModelError::Config("missing fixed parameter delay_bound".into()));
    }
    Ok(Point {
        template,
        ctrl,
        lambda,
        delay_bound,
    })
}

/// Evaluates every grid point. Points where an output is undefined (an
/// unstable station, the naive model at `q_nf = 1`, ...) still produce a row,
/// with the reason in `note`. Simulated points share `sim.seed`.
pub fn sweep(spec: &SweepSpec, sim: &SimConfig) -> Result<SweepResult> {
    spec.validate()?;
    if spec.outputs.contains(&SweepOutput::SimulatedMean) {
        sim.validate()?;
    }
    let points = spec
        .grid
        .iter()
        .map(|&x| resolve_point(spec, x))
        .collect::<Result<Vec<_>>>()?;
    let rows = spec
        .grid
        .par_iter()
        .zip(points.par_iter())
        .map(|(&x, point)| evaluate_point(spec, sim, x, point))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

fn evaluate_point(spec: &SweepSpec, sim: &SimConfig, x: f64, point: &Point) -> Result<SweepRow> {
    let mut row = SweepRow {
        x,
        lambda: point.lambda,
        rho_controller: None,
        analytic_mean: None,
        naive_mean: None,
        sim_mean: None,
        sim_ci: None,
        deadline_prob: None,
        throughput: None,
        note: String::new(),
    };
    let mut notes: Vec<String> = Vec::new();
    let ctrl = &point.ctrl;

    if let Some(lambda) = point.lambda {
        let node = point.template.with_lambda(lambda);
        let rates = solve_rates(&node, ctrl);
        row.rho_controller = Some(rates.rho_controller);
        let stable = rates.require_stable();
        if let Err(e) = &stable {
            notes.push(e.to_string());
        }
        for output in &spec.outputs {
            match output {
                SweepOutput::AnalyticMean => {
                    row.analytic_mean = mean_sojourn_openflow(&node, ctrl, &rates).ok();
                }
                SweepOutput::NaiveMean => match mean_sojourn_naive_jackson(&node, ctrl) {
                    Ok(w) => row.naive_mean = Some(w),
                    Err(e) => notes.push(format!("naive model {e}")),
                },
                SweepOutput::SimulatedMean => {
                    if stable.is_ok() {
                        let res = run_single_node(&node, ctrl, sim)?;
                        row.sim_mean = Some(res.mean_sojourn);
                        row.sim_ci = Some(res.ci_halfwidth);
                    }
                }
                SweepOutput::DeadlineProb => {
                    if stable.is_ok() {
                        let dist = build_distribution(&node, ctrl, &rates)?;
                        row.deadline_prob = Some(dist.prob_within_deadline(spec.fixed.deadline)?);
                    }
                }
                SweepOutput::Throughput => {}
            }
        }
    }
    if spec.outputs.contains(&SweepOutput::Throughput) {
        let bound = point.delay_bound.expect("resolved with the point");
        let t = max_throughput(bound, &point.template, ctrl)?;
        if !t.feasible {
            notes.push("bound infeasible".into());
        }
        row.throughput = Some(t.lambda);
    }
    row.note = notes.join("; ");
    Ok(row)
}

impl SweepResult {
    pub fn to_table(&self) -> Table {
        let mut columns = vec![self.spec.variable.column().to_string()];
        let var = self.spec.variable;
        let show_lambda = var != SweepVariable::Lambda && self.spec.needs_traffic();
        let show_rho = var != SweepVariable::RhoController && self.spec.needs_traffic();
        if show_lambda {
            columns.push("lambda".into());
        }
        if show_rho {
            columns.push("rho_c".into());
        }
        for output in &self.spec.outputs {
            match output {
                SweepOutput::AnalyticMean => columns.push("modified_jackson_mean".into()),
                SweepOutput::NaiveMean => columns.push("naive_jackson_mean".into()),
                SweepOutput::SimulatedMean => {
                    columns.push("sim_mean".into());
                    columns.push("sim_ci".into());
                }
                SweepOutput::DeadlineProb => columns.push("deadline_prob".into()),
                SweepOutput::Throughput => columns.push("throughput".into()),
            }
        }
        columns.push("note".into());

        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![Cell::Num(r.x)];
                if show_lambda {
                    cells.push(r.lambda.into());
                }
                if show_rho {
                    cells.push(r.rho_controller.into());
                }
                for output in &self.spec.outputs {
                    match output {
                        SweepOutput::AnalyticMean => cells.push(r.analytic_mean.into()),
                        SweepOutput::NaiveMean => cells.push(r.naive_mean.into()),
                        SweepOutput::SimulatedMean => {
                            cells.push(r.sim_mean.into());
                            cells.push(r.sim_ci.into());
                        }
                        SweepOutput::DeadlineProb => cells.push(r.deadline_prob.into()),
                        SweepOutput::Throughput => cells.push(r.throughput.into()),
                    }
                }
                cells.push(Cell::Text(r.note.clone()));
                cells
            })
            .collect();
        Table { columns, rows }
    }
}
