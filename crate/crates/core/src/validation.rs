//! Acceptance checks 1–10: algebraic identities, analytic/simulation
//! agreement and limit cases.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{
    derive_q_jack, jackson_rates, mean_sojourn_jackson, mean_sojourn_naive_jackson,
    mean_sojourn_openflow, solve_rates, ControllerParams, NodeParams,
};
use crate::chain::{chain_sojourn, solve_chain, ChainModel};
use crate::dimensioning::{
    log_grid, max_throughput, sweep, FixedParams, NodeTemplate, SweepOutput, SweepSpec,
    SweepVariable, DEFAULT_DEADLINE,
};
use crate::distribution::{build_distribution, SojournDistribution};
use crate::error::{ModelError, Result};
use crate::figures::{CONTROLLER_SERVICE_TIME, SWITCH_SERVICE_TIME};
use crate::quadrature::integrate_from_zero;
use crate::sim::rng::derive_seed;
use crate::sim::stats::ks_distance;
use crate::sim::{run_chain, run_replication, run_single_node, Counts, SimConfig, SimResult, TraceEvent};

pub const DEFAULT_VALIDATION_SEED: u64 = 1;

/// Signature of the corrected routing-probability rule, swappable so tests can
/// check that a perturbed rule is caught.
pub type QJackRule = fn(f64) -> Result<f64>;

#[derive(Debug, Clone)]
pub struct ValidationPlan {
    pub seed: u64,
    pub quick: bool,
    /// Random parameter sets for criteria 1 and 2.
    pub random_inputs: usize,
    pub replications: u32,
    /// Packets per replication for the mean comparisons (4, 5, 9).
    pub mean_packets: u64,
    /// Packets per replication for the M/M/1 limit (6).
    pub mm1_packets: u64,
    /// Packets per replication for the deadline comparison (8).
    pub deadline_packets: u64,
    /// Multiplier on CI halfwidths in the containment checks (4, 5, 6, 9).
    pub ci_scale: f64,
    pub ks_tolerance: f64,
    pub deadline_tolerance: f64,
    /// Allowed deviation at ρ_c = 0.7, where packet sojourns at the two
    /// switch visits are not independent.
    pub deadline_tolerance_high_load: f64,
    pub q_jack: QJackRule,
}

impl ValidationPlan {
    pub fn full(seed: u64) -> Self {
        ValidationPlan {
            seed,
            quick: false,
            random_inputs: 2000,
            replications: 5,
            mean_packets: 200_000,
            mm1_packets: 2_000_000,
            // 5 × 200 000 measured after warm-up: 10⁶ samples
            deadline_packets: 222_223,
            ci_scale: 1.0,
            ks_tolerance: 0.01,
            deadline_tolerance: 0.01,
            deadline_tolerance_high_load: 0.03,
            q_jack: derive_q_jack,
        }
    }

    /// Reduced packet counts with tolerances widened to match.
    pub fn quick(seed: u64) -> Self {
        ValidationPlan {
            quick: true,
            random_inputs: 1000,
            mean_packets: 40_000,
            mm1_packets: 200_000,
            deadline_packets: 40_000,
            // several 5-replication CIs per criterion: at ×2 (|t₄| > 5.6) a
            // correct model fails the whole suite on a few percent of seeds
            ci_scale: 2.0,
            ks_tolerance: 0.02,
            deadline_tolerance: 0.02,
            deadline_tolerance_high_load: 0.04,
            ..Self::full(seed)
        }
    }

    fn covers(&self, sim: &SimResult, value: f64) -> bool {
        (value - sim.mean_sojourn).abs() <= self.ci_scale * sim.ci_halfwidth
    }

    fn ci_label(&self) -> String {
        if self.ci_scale == 1.0 {
            "the 95% CI".to_string()
        } else {
            format!("{}× the 95% CI", self.ci_scale)
        }
    }

    fn sim(&self, packets: u64, index: u64) -> SimConfig {
        SimConfig {
            seed: derive_seed(self.seed, index),
            packets_per_replication: packets,
            replications: self.replications,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {}: {} ({:.2} s of {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

struct Check {
    passed: bool,
    summary: String,
}

pub const CRITERIA: [(u8, &str, u64); 10] = [
    (1, "corrected routing probability", 1),
    (2, "Jackson mean equals packet-path mean", 1),
    (3, "sojourn distribution consistency", 10),
    (4, "analytic mean inside simulation CI", 180),
    (5, "uncorrected model is rejected", 60),
    (6, "M/M/1 limit", 60),
    (7, "saturation throughput", 5),
    (8, "deadline probability", 180),
    (9, "two-node chain", 120),
    (10, "simulator invariants", 60),
];

pub fn run_criterion(id: u8, plan: &ValidationPlan) -> Result<CriterionOutcome> {
    let &(_, name, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| ModelError::Config(format!("no acceptance criterion {id}")))?;
    let start = Instant::now();
    let check = match id {
        1 => routing_probability(plan),
        2 => mean_equality(plan),
        3 => distribution_consistency(),
        4 => simulated_means(plan),
        5 => naive_discrimination(plan),
        6 => mm1_limit(plan),
        7 => saturation(),
        8 => deadline_probability(plan),
        9 => two_node_chain(plan),
        10 => simulator_invariants(plan),
        _ => unreachable!(),
    }?;
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let mut summary = check.summary;
    if elapsed > budget {
        summary.push_str("; over time budget");
    }
    Ok(CriterionOutcome {
        id,
        name,
        passed: check.passed && elapsed <= budget,
        summary,
        elapsed,
        budget,
    })
}

pub fn run_all(plan: &ValidationPlan) -> Result<Vec<CriterionOutcome>> {
    CRITERIA.iter().map(|c| run_criterion(c.0, plan)).collect()
}

fn reference_ctrl() -> ControllerParams {
    ControllerParams {
        mu_controller: 1.0 / CONTROLLER_SERVICE_TIME,
    }
}

fn reference_mu_switch() -> f64 {
    1.0 / SWITCH_SERVICE_TIME
}

/// Node at the reference rates with controller load `rho_c`.
fn reference_node(q_nf: f64, rho_c: f64) -> NodeParams {
    NodeParams {
        lambda: rho_c / (q_nf * CONTROLLER_SERVICE_TIME),
        mu_switch: reference_mu_switch(),
        q_nf,
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Random stable parameter sets spanning several decades of rates and loads.
pub fn random_stable_inputs(seed: u64, n: usize) -> Vec<(NodeParams, ControllerParams)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let q_nf = if rng.random_bool(0.05) { 0.0 } else { rng.random::<f64>() };
        let mu_switch = log_uniform(&mut rng, 1e2, 1e7);
        let ctrl = ControllerParams {
            mu_controller: log_uniform(&mut rng, 1e1, 1e6),
        };
        let sup = NodeTemplate { mu_switch, q_nf }.lambda_supremum(&ctrl);
        let lambda = sup * rng.random_range(1e-4..0.999);
        let node = NodeParams { lambda, mu_switch, q_nf };
        if lambda > 0.0 && solve_rates(&node, &ctrl).is_stable() {
            out.push((node, ctrl));
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn routing_probability(plan: &ValidationPlan) -> Result<Check> {
    let rule = plan.q_jack;
    let exact = rule(1.0)? == 0.5 && rule(0.0)? == 0.0;
    let mut worst: f64 = 0.0;
    for (node, ctrl) in random_stable_inputs(plan.seed, plan.random_inputs) {
        let rates = solve_rates(&node, &ctrl);
        worst = worst.max(rel(rule(node.q_nf)? * rates.gamma_switch, node.q_nf * node.lambda));
    }
    Ok(Check {
        passed: exact && worst <= 1e-12,
        summary: format!(
            "q_jack(1)=0.5 and q_jack(0)=0 exact: {exact}; max rel |q_jack Γ_l − q λ| = {worst:.2e} over {} inputs (tol 1e-12)",
            plan.random_inputs
        ),
    })
}

fn mean_equality(plan: &ValidationPlan) -> Result<Check> {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (node, ctrl) in random_stable_inputs(plan.seed.wrapping_add(1), plan.random_inputs) {
        let jackson = (plan.q_jack)(node.q_nf)
            .and_then(|q| jackson_rates(&node, &ctrl, q))
            .and_then(|rates| mean_sojourn_jackson(&rates, &node));
        let path = mean_sojourn_openflow(&node, &ctrl, &solve_rates(&node, &ctrl))?;
        match jackson {
            Ok(w) => worst = worst.max(rel(w, path)),
            Err(_) => failures += 1,
        }
    }
    Ok(Check {
        passed: failures == 0 && worst <= 1e-12,
        summary: format!(
            "max rel difference {worst:.2e} over {} stable inputs (tol 1e-12){}",
            plan.random_inputs,
            if failures > 0 { format!("; {failures} inputs unstable under the Jackson rates") } else { String::new() }
        ),
    })
}

fn integral<F: Fn(f64) -> f64>(dist: &SojournDistribution, f: F) -> f64 {
    integrate_from_zero(f, dist.integration_horizon(), 1e-12)
}

fn distribution_consistency() -> Result<Check> {
    let ctrl = reference_ctrl();
    let mut coef: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut mean: f64 = 0.0;
    let mut laplace: f64 = 0.0;
    let mut continuity: f64 = 0.0;
    for q in [0.2, 0.5, 1.0] {
        for rho_c in [0.3, 0.7] {
            let node = reference_node(q, rho_c);
            let rates = solve_rates(&node, &ctrl);
            let dist = build_distribution(&node, &ctrl, &rates)?;
            coef = coef.max((dist.b1 + dist.b2 + dist.d - 1.0).abs());
            mass = mass.max((integral(&dist, |t| dist.pdf(t).unwrap()) - 1.0).abs());
            let w = mean_sojourn_openflow(&node, &ctrl, &rates)?;
            mean = mean.max(rel(integral(&dist, |t| dist.ccdf(t).unwrap()), w));
            for s in [0.5 * dist.a_switch, dist.a_switch, 2.0 * dist.a_switch] {
                let numeric = integral(&dist, |t| (-s * t).exp() * dist.pdf(t).unwrap());
                laplace = laplace.max((numeric - dist.laplace(s)).abs());
            }
        }
        let a = reference_mu_switch() * 0.5;
        let near = SojournDistribution::from_rates(a, a * (1.0 + 1e-6), q);
        let exact = SojournDistribution::from_rates(a, a, q);
        let horizon = exact.integration_horizon();
        for k in 0..100 {
            let t = horizon * k as f64 / 99.0;
            continuity = continuity
                .max((near.ccdf(t)? - exact.ccdf(t)?).abs())
                .max((near.pdf(t)? - exact.pdf(t)?).abs() / a);
        }
    }
    let passed = coef <= 1e-12 && mass <= 1e-9 && mean <= 1e-6 && laplace <= 1e-6 && continuity <= 1e-5;
    Ok(Check {
        passed,
        summary: format!(
            "|b1+b2+d−1| {coef:.1e}, |∫pdf−1| {mass:.1e}, ∫ccdf vs mean rel {mean:.1e}, Laplace {laplace:.1e}, continuity {continuity:.1e}"
        ),
    })
}

struct MeanPoint {
    q_nf: f64,
    rho_c: f64,
    analytic: f64,
    sim: SimResult,
}

impl MeanPoint {
    fn z(&self) -> f64 {
        (self.analytic - self.sim.mean_sojourn) / self.sim.ci_halfwidth
    }
}

fn simulated_means(plan: &ValidationPlan) -> Result<Check> {
    let ctrl = reference_ctrl();
    let grid: Vec<(f64, f64)> = [0.2, 1.0]
        .iter()
        .flat_map(|&q| (1..=9).map(move |i| (q, i as f64 / 10.0)))
        .collect();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(q_nf, rho_c))| {
            let node = reference_node(q_nf, rho_c);
            let analytic = mean_sojourn_openflow(&node, &ctrl, &solve_rates(&node, &ctrl))?;
            let sim = run_single_node(&node, &ctrl, &plan.sim(plan.mean_packets, 400 + i as u64))?;
            Ok(MeanPoint { q_nf, rho_c, analytic, sim })
        })
        .collect::<Result<Vec<_>>>()?;
    let inside = points.iter().filter(|p| plan.covers(&p.sim, p.analytic)).count();
    let misses: Vec<String> = points
        .iter()
        .filter(|p| !plan.covers(&p.sim, p.analytic))
        .map(|p| format!("q={} ρ_c={} at {:+.2} halfwidths", p.q_nf, p.rho_c, p.z()))
        .collect();
    Ok(Check {
        passed: inside >= 16,
        summary: format!(
            "{inside}/{} inside {} (need 16){}",
            points.len(),
            plan.ci_label(),
            if misses.is_empty() { String::new() } else { format!("; outside: {}", misses.join(", ")) }
        ),
    })
}

fn naive_discrimination(plan: &ValidationPlan) -> Result<Check> {
    let ctrl = reference_ctrl();
    // (q_nf, controller load of the real system)
    let points = [(1.0, 0.8), (0.9, 0.08), (0.5, 0.4), (0.5, 0.8)];
    let results = points
        .par_iter()
        .enumerate()
        .map(|(i, &(q, rho_c))| {
            let node = reference_node(q, rho_c);
            let sim = run_single_node(&node, &ctrl, &plan.sim(plan.mean_packets, 500 + i as u64))?;
            let modified = mean_sojourn_openflow(&node, &ctrl, &solve_rates(&node, &ctrl))?;
            let naive = mean_sojourn_naive_jackson(&node, &ctrl);
            Ok((q, rho_c, sim, modified, naive))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (q, rho_c, sim, modified, naive) in results {
        let h = sim.ci_halfwidth;
        let dev_mod = (modified - sim.mean_sojourn).abs() / h;
        passed &= dev_mod <= 3.0 * plan.ci_scale;
        let naive_part = match naive {
            Ok(w) => {
                let dev = (w - sim.mean_sojourn).abs() / h;
                passed &= dev > 3.0;
                format!("naive {dev:.1}")
            }
            Err(ModelError::NaiveUndefined { .. }) => "naive undefined".to_string(),
            Err(e) if e.is_unstable() => "naive unstable".to_string(),
            Err(e) => return Err(e),
        };
        parts.push(format!("q={q} ρ_c={rho_c}: modified {dev_mod:.1}, {naive_part}"));
    }
    Ok(Check {
        passed,
        summary: format!(
            "deviation in CI halfwidths (modified ≤ {}, naive > 3): {}",
            3.0 * plan.ci_scale,
            parts.join("; ")
        ),
    })
}

fn mm1_limit(plan: &ValidationPlan) -> Result<Check> {
    let ctrl = reference_ctrl();
    let mu = reference_mu_switch();
    let rhos = [0.3, 0.6, 0.9];
    let results = rhos
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| {
            let node = NodeParams { lambda: rho * mu, mu_switch: mu, q_nf: 0.0 };
            let sim = run_single_node(&node, &ctrl, &plan.sim(plan.mm1_packets, 600 + i as u64))?;
            let rate = mu - node.lambda;
            let ks = ks_distance(&sim.empirical_ccdf, |t| 1.0 - (-rate * t).exp());
            Ok((rho, plan.covers(&sim, 1.0 / rate), (1.0 / rate - sim.mean_sojourn) / sim.ci_halfwidth, ks, sim.empirical_ccdf.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = results.iter().all(|r| r.1 && r.3 < plan.ks_tolerance);
    let parts: Vec<String> = results
        .iter()
        .map(|(rho, _, z, ks, n)| format!("ρ={rho}: mean {z:+.2} halfwidths, KS {ks:.4} (n={n})"))
        .collect();
    Ok(Check {
        passed,
        summary: format!("{} (mean within {}, KS tol {})", parts.join("; "), plan.ci_label(), plan.ks_tolerance),
    })
}

fn saturation() -> Result<Check> {
    let ctrl = reference_ctrl();
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for q in [0.2, 0.5, 1.0] {
        let template = NodeTemplate { mu_switch: reference_mu_switch(), q_nf: q };
        let e0 = template.zero_load_sojourn(&ctrl);
        let t = max_throughput(1e3 * e0, &template, &ctrl)?;
        let sup = (reference_mu_switch() / (1.0 + q)).min(ctrl.mu_controller / q);
        worst = worst.max((sup - t.lambda) / sup);
        let mut last = 0.0;
        for bound in log_grid(1.05 * e0, 100.0 * e0, 60) {
            let l = max_throughput(bound, &template, &ctrl)?.lambda;
            monotone &= l >= last;
            last = l;
        }
    }
    Ok(Check {
        passed: worst < 1e-3 && monotone,
        summary: format!("max relative shortfall at 10³·E0: {:.3}% (tol 0.1%), monotone: {monotone}", worst * 100.0),
    })
}

fn deadline_probability(plan: &ValidationPlan) -> Result<Check> {
    let ctrl = reference_ctrl();
    let qs = [0.2, 0.5, 1.0];
    let mut monotone = true;
    for &q in &qs {
        let spec = SweepSpec {
            variable: SweepVariable::RhoController,
            grid: (1..=19).map(|i| i as f64 * 0.05).collect(),
            fixed: FixedParams {
                mu_switch: reference_mu_switch(),
                mu_controller: ctrl.mu_controller,
                q_nf: Some(q),
                lambda: None,
                rho_controller: None,
                deadline: DEFAULT_DEADLINE,
                delay_bound: None,
            },
            outputs: vec![SweepOutput::DeadlineProb],
        };
        let probs: Vec<f64> = sweep(&spec, &SimConfig::default())?
            .rows
            .iter()
            .map(|r| r.deadline_prob.expect("stable grid"))
            .collect();
        monotone &= probs.windows(2).all(|w| w[1] <= w[0]);
    }
    let grid: Vec<(f64, f64)> = qs
        .iter()
        .flat_map(|&q| [0.3, 0.5, 0.7].map(|r| (q, r)))
        .collect();
    let deviations = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(q, rho_c))| {
            let node = reference_node(q, rho_c);
            let dist = build_distribution(&node, &ctrl, &solve_rates(&node, &ctrl))?;
            let sim = run_single_node(&node, &ctrl, &plan.sim(plan.deadline_packets, 800 + i as u64))?;
            let dev = sim.fraction_within(DEFAULT_DEADLINE) - dist.prob_within_deadline(DEFAULT_DEADLINE)?;
            Ok((q, rho_c, dev))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut passed = monotone;
    let mut worst: f64 = 0.0;
    let mut high_load = Vec::new();
    for &(q, rho_c, dev) in &deviations {
        if rho_c == 0.7 {
            passed &= dev.abs() <= plan.deadline_tolerance_high_load;
            if dev.abs() > plan.deadline_tolerance {
                high_load.push(format!("q={q} ρ_c=0.7 deviates {dev:+.4}"));
            }
        } else {
            passed &= dev.abs() <= plan.deadline_tolerance;
        }
        worst = worst.max(dev.abs());
    }
    Ok(Check {
        passed,
        summary: format!(
            "nonincreasing in ρ_c: {monotone}; max |simulated − analytic| {worst:.4} (tol {}, {} at ρ_c=0.7){}",
            plan.deadline_tolerance,
            plan.deadline_tolerance_high_load,
            if high_load.is_empty() { String::new() } else { format!("; {}", high_load.join(", ")) }
        ),
    })
}

fn symmetric_chain(lambda: f64, q: f64) -> ChainModel {
    let node = NodeParams { lambda, mu_switch: reference_mu_switch(), q_nf: q };
    ChainModel {
        nodes: vec![node, node],
        controller: reference_ctrl(),
    }
}

fn two_node_chain(plan: &ValidationPlan) -> Result<Check> {
    let mut algebra: f64 = 0.0;
    for (lambda, q) in [(1000.0, 0.5), (1500.0, 1.0), (20_000.0, 0.05), (500.0, 0.0)] {
        let rates = solve_chain(&symmetric_chain(lambda, q));
        let expected_q2 = q * lambda / (lambda + lambda * (1.0 + q));
        let expected_gamma2 = lambda + lambda * (1.0 + q);
        algebra = algebra
            .max((rates.nodes[1].q_jack - expected_q2).abs())
            .max(rel(rates.nodes[1].gamma_switch, expected_gamma2))
            .max(rel(rates.nodes[0].gamma_switch, lambda * (1.0 + q)))
            .max(rel(rates.gamma_controller, 2.0 * q * lambda));
    }
    let points = [(1000.0, 0.5), (1500.0, 1.0)];
    let sims = points
        .par_iter()
        .enumerate()
        .map(|(i, &(lambda, q))| {
            let chain = symmetric_chain(lambda, q);
            let predicted = chain_sojourn(&chain, &solve_chain(&chain))?;
            let sim = run_chain(&chain, &plan.sim(plan.mean_packets, 900 + i as u64))?;
            Ok((lambda, q, predicted, sim))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut passed = algebra <= 1e-12;
    let mut parts = Vec::new();
    for (lambda, q, predicted, sim) in sims {
        let agg = &sim.aggregate;
        passed &= plan.covers(agg, predicted.aggregate);
        let class_z: Vec<String> = predicted
            .per_class
            .iter()
            .zip(&sim.per_class)
            .map(|(w, s)| {
                let z = (w - s.mean_sojourn) / s.ci_halfwidth;
                passed &= z.abs() <= 3.0 * plan.ci_scale;
                format!("{z:+.2}")
            })
            .collect();
        parts.push(format!(
            "λ={lambda} q={q}: aggregate {:+.2} halfwidths, classes [{}]",
            (predicted.aggregate - agg.mean_sojourn) / agg.ci_halfwidth,
            class_z.join(", ")
        ));
    }
    Ok(Check {
        passed,
        summary: format!(
            "rate algebra error {algebra:.1e} (tol 1e-12); {} (aggregate within {}, classes within {} halfwidths)",
            parts.join("; "),
            plan.ci_label(),
            3.0 * plan.ci_scale
        ),
    })
}

fn simulator_invariants(plan: &ValidationPlan) -> Result<Check> {
    let cfg = SimConfig {
        seed: plan.seed,
        packets_per_replication: 20_000,
        replications: 2,
        ..SimConfig::default()
    };
    let chains = [
        ChainModel::single(reference_node(1.0, 0.5), reference_ctrl()),
        ChainModel::single(reference_node(0.3, 0.9), reference_ctrl()),
        symmetric_chain(1500.0, 0.5),
    ];
    let mut departures = 0u64;
    let mut repeat_visits = 0u64;
    let mut conservation_breaks = 0u64;
    let mut visit_mismatch = false;
    for chain in &chains {
        for r in 0..cfg.replications {
            let mut visited = 0u64;
            let mut observer = |_: f64, event: &TraceEvent, counts: &Counts| {
                if counts.arrived != counts.departed + counts.in_system {
                    conservation_breaks += 1;
                }
                if let TraceEvent::Departure { controller_visits, .. } = event {
                    departures += 1;
                    if *controller_visits > 1 {
                        repeat_visits += 1;
                    }
                    visited += u64::from(*controller_visits);
                }
            };
            let out = run_replication(chain, &cfg, r, &mut observer);
            visit_mismatch |= visited != out.visited.iter().sum::<u64>();
        }
    }

    let render = || -> Result<Vec<u8>> {
        let spec = SweepSpec {
            variable: SweepVariable::RhoController,
            grid: vec![0.2, 0.5, 0.8],
            fixed: FixedParams {
                mu_switch: reference_mu_switch(),
                mu_controller: reference_ctrl().mu_controller,
                q_nf: Some(0.5),
                lambda: None,
                rho_controller: None,
                deadline: DEFAULT_DEADLINE,
                delay_bound: None,
            },
            outputs: vec![SweepOutput::AnalyticMean, SweepOutput::SimulatedMean],
        };
        Ok(sweep(&spec, &cfg)?.to_table().to_csv().into_bytes())
    };
    let first = render()?;
    let second = render()?;
    let identical = first == second;

    Ok(Check {
        passed: repeat_visits == 0 && conservation_breaks == 0 && !visit_mismatch && identical,
        summary: format!(
            "{departures} traced departures, {repeat_visits} with more than one controller visit, {conservation_breaks} conservation breaks; repeated CSV byte-identical: {identical} ({} bytes)",
            first.len()
        ),
    })
}
