use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ofjackson::config::{ControllerSection, NodeSection, RunConfig, SimSection, SweepSection};
use ofjackson::dimensioning::{log_grid, max_throughput, sweep, NodeTemplate, SweepOutput, SweepVariable};
use ofjackson::figures::{figure_table, Figure, FigureOptions, CONTROLLER_SERVICE_TIME, SWITCH_SERVICE_TIME};
use ofjackson::output::{Cell, Format, Table};
use ofjackson::validation::{run_all, ValidationPlan, DEFAULT_VALIDATION_SEED};
use ofjackson::*;

/// Environment variable that replaces the built-in default seed.
const SEED_ENV: &str = "OFJACKSON_SEED";

const EXIT_USAGE: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "ofjackson", version, about = "OpenFlow switch/controller queueing model and simulator")]
struct Cli {
    /// JSON run configuration; command-line flags override its values.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Output format (default: the config's, else csv).
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Write the table here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Station rates, loads and both mean-sojourn forms for one node.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Sojourn-time density/CCDF or quantile table for one node.
    Distribution {
        #[command(flatten)]
        model: ModelArgs,
        /// Emit quantiles at these levels instead of a density table.
        #[arg(long, value_delimiter = ',')]
        quantiles: Option<Vec<f64>>,
        /// Number of time points in the density table.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Last time point (s); defaults to the 0.999 quantile.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Simulate one node and compare with the analytic mean.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Analyze (and optionally simulate) a chain of switches sharing one controller.
    Chain {
        /// Node as `lambda,q_nf[,service_time_us]`, in path order. Repeatable.
        #[arg(long = "node", value_name = "SPEC")]
        nodes: Vec<String>,
        #[arg(long)]
        mu_controller: Option<f64>,
        #[arg(long)]
        mu_controller_us: Option<f64>,
        /// Also run the simulator.
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Largest admissible arrival rate under a mean-delay bound.
    Dimension {
        #[command(flatten)]
        model: ModelArgs,
        /// Mean-delay bound (s). Without it a log grid of bounds is emitted.
        #[arg(long)]
        delay_bound: Option<f64>,
        /// Mean-delay bound (µs).
        #[arg(long, conflicts_with = "delay_bound")]
        delay_bound_us: Option<f64>,
        #[arg(long, default_value_t = 30)]
        grid_points: usize,
    },
    /// Parameter sweep (from the config's `sweep` section and/or flags).
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        variable: Option<SweepVariable>,
        /// Explicit grid values.
        #[arg(long, value_delimiter = ',', conflicts_with = "range")]
        grid: Option<Vec<f64>>,
        /// Grid as `start:stop:step`.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<SweepOutput>>,
        /// Fixed controller load (instead of --lambda).
        #[arg(long)]
        rho_controller: Option<f64>,
        /// Deadline for deadline_prob (s).
        #[arg(long)]
        deadline: Option<f64>,
        /// Mean-delay bound for throughput (s).
        #[arg(long)]
        delay_bound: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Data table for one of the standard figures (fig2 ... fig6).
    Figure {
        name: Figure,
        #[arg(long, value_delimiter = ',')]
        q_values: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        rho_grid: Option<Vec<f64>>,
        /// Controller service times compared in fig5 (µs).
        #[arg(long, value_delimiter = ',')]
        controller_service_us: Option<Vec<f64>>,
        /// Deadline for fig6 (s).
        #[arg(long)]
        deadline: Option<f64>,
        #[arg(long)]
        mu_switch_us: Option<f64>,
        #[arg(long)]
        mu_controller_us: Option<f64>,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Run the acceptance checks.
    Validate {
        /// Reduced packet counts and matching tolerances.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Only these criteria (1-10).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

#[derive(Args, Default)]
struct ModelArgs {
    /// External arrival rate (packets/s).
    #[arg(long)]
    lambda: Option<f64>,
    /// Probability that a packet starts a new flow.
    #[arg(long)]
    q_nf: Option<f64>,
    /// Switch service rate (1/s). Default 1/9.8 µs.
    #[arg(long)]
    mu_switch: Option<f64>,
    /// Switch mean service time (µs).
    #[arg(long, conflicts_with = "mu_switch")]
    mu_switch_us: Option<f64>,
    /// Controller service rate (1/s). Default 1/240 µs.
    #[arg(long)]
    mu_controller: Option<f64>,
    /// Controller mean service time (µs).
    #[arg(long, conflicts_with = "mu_controller")]
    mu_controller_us: Option<f64>,
}

#[derive(Args, Default)]
struct SimArgs {
    /// Master seed (default: config, then $OFJACKSON_SEED, then 1).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    packets: Option<u64>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long)]
    warmup: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let unstable = e.downcast_ref::<ModelError>().is_some_and(ModelError::is_unstable);
            ExitCode::from(if unstable { EXIT_UNSTABLE } else { EXIT_USAGE })
        }
    }
}

struct Session {
    config: RunConfig,
    format: Format,
    output: Option<PathBuf>,
}

impl Session {
    fn emit(&self, table: &Table) -> anyhow::Result<()> {
        self.write(&table.render(self.format))
    }

    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Node and controller from the config overlaid with flags; service
    /// rates default to the reference 9.8 µs / 240 µs.
    fn model(&mut self, m: &ModelArgs) -> anyhow::Result<(NodeParams, ControllerParams)> {
        self.overlay_model(m);
        Ok((self.config.node()?, self.config.controller()?))
    }

    fn overlay_model(&mut self, m: &ModelArgs) {
        let cfg = &mut self.config;
        let node = cfg.node.get_or_insert_with(NodeSection::default);
        if m.lambda.is_some() {
            node.lambda = m.lambda;
        }
        if m.q_nf.is_some() {
            node.q_nf = m.q_nf;
        }
        if m.mu_switch.is_some() || m.mu_switch_us.is_some() {
            node.mu_switch = m.mu_switch;
            node.mu_switch_us = m.mu_switch_us;
        }
        if node.mu_switch.is_none() && node.mu_switch_us.is_none() {
            node.mu_switch_us = Some(SWITCH_SERVICE_TIME * 1e6);
        }
        overlay_controller(cfg, m.mu_controller, m.mu_controller_us);
    }

    fn sim(&mut self, s: &SimArgs) -> anyhow::Result<SimConfig> {
        let section = self.config.sim.get_or_insert_with(SimSection::default);
        section.seed = s.seed.or(section.seed);
        section.packets_per_replication = s.packets.or(section.packets_per_replication);
        section.replications = s.replications.or(section.replications);
        section.warmup_fraction = s.warmup.or(section.warmup_fraction);
        let base = SimConfig { seed: env_seed()?.unwrap_or(SimConfig::default().seed), ..SimConfig::default() };
        let cfg = self.config.sim_config(base);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn overlay_controller(cfg: &mut RunConfig, per_second: Option<f64>, micros: Option<f64>) {
    let ctrl = cfg.controller.get_or_insert_with(ControllerSection::default);
    if per_second.is_some() || micros.is_some() {
        ctrl.mu_controller = per_second;
        ctrl.mu_controller_us = micros;
    }
    if ctrl.mu_controller.is_none() && ctrl.mu_controller_us.is_none() {
        ctrl.mu_controller_us = Some(CONTROLLER_SERVICE_TIME * 1e6);
    }
}

fn env_seed() -> anyhow::Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => Ok(Some(v.trim().parse().with_context(|| format!("{SEED_ENV}={v} is not a u64 seed"))?)),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{SEED_ENV}: {e}"),
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let mut session = Session {
        format: cli.format.unwrap_or(config.output.format),
        output: cli.output.clone().or_else(|| config.output.path.clone()),
        config,
    };
    match cli.command {
        Command::Analyze { model } => analyze(&mut session, &model),
        Command::Distribution { model, quantiles, points, t_max } => {
            distribution(&mut session, &model, quantiles, points, t_max)
        }
        Command::Simulate { model, sim } => simulate(&mut session, &model, &sim),
        Command::Chain { nodes, mu_controller, mu_controller_us, simulate, sim } => {
            chain(&mut session, &nodes, mu_controller, mu_controller_us, simulate, &sim)
        }
        Command::Dimension { model, delay_bound, delay_bound_us, grid_points } => {
            dimension(&mut session, &model, delay_bound.or(delay_bound_us.map(|us| us * 1e-6)), grid_points)
        }
        Command::Sweep { model, variable, grid, range, outputs, rho_controller, deadline, delay_bound, sim } => {
            let grid = match (grid, range) {
                (Some(g), _) => Some(g),
                (None, Some(r)) => Some(parse_range(&r)?),
                (None, None) => None,
            };
            let overrides = SweepOverrides { variable, grid, outputs, rho_controller, deadline, delay_bound };
            run_sweep(&mut session, &model, overrides, &sim)
        }
        Command::Figure { name, q_values, rho_grid, controller_service_us, deadline, mu_switch_us, mu_controller_us, sim } => {
            let mut opts = FigureOptions { sim: session.sim(&sim)?, ..FigureOptions::default() };
            if let Some(node) = &session.config.node {
                if let Some(mu) = node.mu_switch()? {
                    opts.mu_switch = mu;
                }
            }
            if let Some(ctrl) = &session.config.controller {
                if let Some(mu) = ctrl.mu_controller()? {
                    opts.mu_controller = mu;
                }
            }
            if let Some(us) = mu_switch_us {
                opts.mu_switch = 1e6 / us;
            }
            if let Some(us) = mu_controller_us {
                opts.mu_controller = 1e6 / us;
            }
            opts.q_values = q_values.or(opts.q_values);
            opts.rho_grid = rho_grid.unwrap_or(opts.rho_grid);
            opts.controller_service_us = controller_service_us.unwrap_or(opts.controller_service_us);
            opts.deadline = deadline.unwrap_or(opts.deadline);
            session.emit(&figure_table(name, &opts)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { quick, seed, only } => validate(quick, seed, only),
    }
}

fn num(v: f64) -> Cell {
    Cell::Num(v)
}

fn text(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

fn analyze(session: &mut Session, m: &ModelArgs) -> anyhow::Result<ExitCode> {
    let (node, ctrl) = session.model(m)?;
    let rates = solve_rates(&node, &ctrl);
    let jackson = jackson_rates(&node, &ctrl, rates.q_jack).and_then(|r| mean_sojourn_jackson(&r, &node));
    let path = mean_sojourn_openflow(&node, &ctrl, &rates);
    let verdict = match rates.require_stable() {
        Ok(()) => "stable".to_string(),
        Err(e) => e.to_string(),
    };
    let mut t = Table::new(["quantity", "value"]);
    let rows: Vec<(&str, Cell)> = vec![
        ("lambda", num(node.lambda)),
        ("q_nf", num(node.q_nf)),
        ("mu_switch", num(node.mu_switch)),
        ("mu_controller", num(ctrl.mu_controller)),
        ("gamma_switch", num(rates.gamma_switch)),
        ("gamma_controller", num(rates.gamma_controller)),
        ("q_jack", num(rates.q_jack)),
        ("rho_switch", num(rates.rho_switch)),
        ("rho_controller", num(rates.rho_controller)),
        ("mean_sojourn_jackson", jackson.as_ref().ok().copied().into()),
        ("mean_sojourn_openflow", path.as_ref().ok().copied().into()),
        (
            "difference",
            match (&jackson, &path) {
                (Ok(a), Ok(b)) => num(a - b),
                _ => Cell::Empty,
            },
        ),
        ("verdict", text(verdict)),
    ];
    for (k, v) in rows {
        t.push(vec![text(k), v]);
    }
    session.emit(&t)?;
    Ok(if rates.is_stable() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_UNSTABLE) })
}

fn distribution(
    session: &mut Session,
    m: &ModelArgs,
    quantiles: Option<Vec<f64>>,
    points: usize,
    t_max: Option<f64>,
) -> anyhow::Result<ExitCode> {
    let (node, ctrl) = session.model(m)?;
    let dist = build_distribution(&node, &ctrl, &solve_rates(&node, &ctrl))?;
    let table = match quantiles {
        Some(levels) => {
            let mut t = Table::new(["p", "t"]);
            for p in levels {
                t.push(vec![num(p), num(dist.quantile(p)?)]);
            }
            t
        }
        None => {
            if points < 2 {
                bail!("--points must be at least 2");
            }
            let end = match t_max {
                Some(t) if t > 0.0 => t,
                Some(t) => bail!("--t-max must be positive, got {t}"),
                None => dist.quantile(0.999)?,
            };
            let mut t = Table::new(["t", "pdf", "ccdf"]);
            for i in 0..points {
                let x = end * i as f64 / (points - 1) as f64;
                t.push(vec![num(x), num(dist.pdf(x)?), num(dist.ccdf(x)?)]);
            }
            t
        }
    };
    session.emit(&table)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(session: &mut Session, m: &ModelArgs, s: &SimArgs) -> anyhow::Result<ExitCode> {
    let (node, ctrl) = session.model(m)?;
    let cfg = session.sim(s)?;
    let rates = solve_rates(&node, &ctrl);
    let analytic = mean_sojourn_openflow(&node, &ctrl, &rates).ok();
    let res = run_single_node(&node, &ctrl, &cfg)?;
    let mut t = Table::new([
        "lambda",
        "q_nf",
        "rho_switch",
        "rho_controller",
        "analytic_mean",
        "sim_mean",
        "sim_ci",
        "controller_visit_fraction",
        "measured_packets",
        "seed",
    ]);
    t.push(vec![
        num(node.lambda),
        num(node.q_nf),
        num(rates.rho_switch),
        num(rates.rho_controller),
        analytic.into(),
        num(res.mean_sojourn),
        num(res.ci_halfwidth),
        num(res.controller_visit_fraction),
        num(res.measured_packets as f64),
        text(cfg.seed.to_string()),
    ]);
    session.emit(&t)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_node_spec(spec: &str) -> anyhow::Result<NodeSection> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("--node {spec}: expected lambda,q_nf[,service_time_us]"))?;
    match parts[..] {
        [lambda, q] => Ok(NodeSection {
            lambda: Some(lambda),
            q_nf: Some(q),
            mu_switch_us: Some(SWITCH_SERVICE_TIME * 1e6),
            ..NodeSection::default()
        }),
        [lambda, q, us] => Ok(NodeSection { lambda: Some(lambda), q_nf: Some(q), mu_switch_us: Some(us), ..NodeSection::default() }),
        _ => bail!("--node {spec}: expected lambda,q_nf[,service_time_us]"),
    }
}

fn chain(
    session: &mut Session,
    nodes: &[String],
    mu_controller: Option<f64>,
    mu_controller_us: Option<f64>,
    simulate: bool,
    s: &SimArgs,
) -> anyhow::Result<ExitCode> {
    if !nodes.is_empty() {
        session.config.chain = Some(nodes.iter().map(|n| parse_node_spec(n)).collect::<anyhow::Result<_>>()?);
        session.config.node = None;
    }
    overlay_controller(&mut session.config, mu_controller, mu_controller_us);
    let model = session.config.chain()?;
    let rates = solve_chain(&model);
    let predicted = chain_sojourn(&model, &rates);
    let sim = if simulate { Some(run_chain(&model, &session.sim(s)?)?) } else { None };

    let mut cols = vec!["class", "lambda", "q_nf", "gamma_switch", "q_jack", "rho_switch", "analytic_mean"];
    if sim.is_some() {
        cols.extend(["sim_mean", "sim_ci"]);
    }
    let mut t = Table::new(cols);
    for (i, (n, r)) in model.nodes.iter().zip(&rates.nodes).enumerate() {
        let mut row = vec![
            text((i + 1).to_string()),
            num(n.lambda),
            num(n.q_nf),
            num(r.gamma_switch),
            num(r.q_jack),
            num(r.rho_switch),
            predicted.as_ref().ok().map(|p| p.per_class[i]).into(),
        ];
        if let Some(s) = &sim {
            row.extend([num(s.per_class[i].mean_sojourn), num(s.per_class[i].ci_halfwidth)]);
        }
        t.push(row);
    }
    let mut row = vec![
        text("aggregate"),
        num(model.total_external_rate()),
        Cell::Empty,
        num(rates.gamma_controller),
        Cell::Empty,
        num(rates.rho_controller),
        predicted.as_ref().ok().map(|p| p.aggregate).into(),
    ];
    if let Some(s) = &sim {
        row.extend([num(s.aggregate.mean_sojourn), num(s.aggregate.ci_halfwidth)]);
    }
    t.push(row);
    session.emit(&t)?;
    if let Err(e) = predicted {
        eprintln!("{e}");
        return Ok(ExitCode::from(EXIT_UNSTABLE));
    }
    Ok(ExitCode::SUCCESS)
}

fn dimension(session: &mut Session, m: &ModelArgs, bound: Option<f64>, grid_points: usize) -> anyhow::Result<ExitCode> {
    session.overlay_model(m);
    let node = session.config.node.clone().unwrap_or_default();
    let template = NodeTemplate {
        mu_switch: node.mu_switch()?.expect("defaulted"),
        q_nf: node.q_nf.context("missing field `q_nf` (use --q-nf)")?,
    };
    let ctrl = session.config.controller()?;
    let e0 = template.zero_load_sojourn(&ctrl);
    let bounds = match bound {
        Some(b) => vec![b],
        None => {
            if grid_points < 2 {
                bail!("--grid-points must be at least 2");
            }
            log_grid(1.05 * e0, 100.0 * e0, grid_points)
        }
    };
    let mut t = Table::new(["delay_bound", "q_nf", "zero_load_sojourn", "lambda_sup", "max_throughput", "feasible"]);
    for b in bounds {
        let res = max_throughput(b, &template, &ctrl)?;
        t.push(vec![
            num(b),
            num(template.q_nf),
            num(e0),
            num(res.lambda_sup),
            num(res.lambda),
            text(if res.feasible { "true" } else { "false (bound infeasible)" }),
        ]);
    }
    session.emit(&t)?;
    Ok(ExitCode::SUCCESS)
}

struct SweepOverrides {
    variable: Option<SweepVariable>,
    grid: Option<Vec<f64>>,
    outputs: Option<Vec<SweepOutput>>,
    rho_controller: Option<f64>,
    deadline: Option<f64>,
    delay_bound: Option<f64>,
}

/// `start:stop:step`, inclusive of `stop` when it lies on the grid.
fn parse_range(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("--range {spec}: expected start:stop:step"))?;
    let [start, stop, step] = parts[..] else {
        bail!("--range {spec}: expected start:stop:step");
    };
    if !(step > 0.0) || !(stop >= start) {
        bail!("--range {spec}: need step > 0 and stop >= start");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    // rounding keeps 0.1:0.9:0.1 at 0.3 rather than 0.30000000000000004
    Ok((0..n).map(|i| format!("{:.12e}", start + i as f64 * step).parse().expect("formatted float")).collect())
}

fn run_sweep(session: &mut Session, m: &ModelArgs, o: SweepOverrides, s: &SimArgs) -> anyhow::Result<ExitCode> {
    session.overlay_model(m);
    let section = match session.config.sweep.take() {
        Some(sec) => sec,
        None => SweepSection {
            variable: o.variable.context("missing sweep variable (use --variable or a config `sweep` section)")?,
            grid: Vec::new(),
            fixed: Default::default(),
            outputs: vec![SweepOutput::AnalyticMean],
        },
    };
    let mut section = section;
    if let Some(v) = o.variable {
        section.variable = v;
    }
    if let Some(g) = o.grid {
        section.grid = g;
    }
    if let Some(out) = o.outputs {
        section.outputs = out;
    }
    if m.lambda.is_some() {
        section.fixed.lambda = m.lambda;
        section.fixed.rho_controller = None;
    }
    if o.rho_controller.is_some() {
        section.fixed.rho_controller = o.rho_controller;
        section.fixed.lambda = None;
        if let Some(node) = session.config.node.as_mut() {
            node.lambda = None;
        }
    }
    if m.q_nf.is_some() {
        section.fixed.q_nf = m.q_nf;
    }
    section.fixed.deadline = o.deadline.or(section.fixed.deadline);
    section.fixed.delay_bound = o.delay_bound.or(section.fixed.delay_bound);
    if m.mu_switch.is_some() || m.mu_switch_us.is_some() {
        section.fixed.mu_switch = m.mu_switch;
        section.fixed.mu_switch_us = m.mu_switch_us;
    }
    if m.mu_controller.is_some() || m.mu_controller_us.is_some() {
        section.fixed.mu_controller = m.mu_controller;
        section.fixed.mu_controller_us = m.mu_controller_us;
    }
    session.config.sweep = Some(section);
    let spec = session.config.sweep_spec()?;
    let sim = if spec.outputs.contains(&SweepOutput::SimulatedMean) {
        session.sim(s)?
    } else {
        SimConfig::default()
    };
    session.emit(&sweep(&spec, &sim)?.to_table())?;
    Ok(ExitCode::SUCCESS)
}

fn validate(quick: bool, seed: Option<u64>, only: Option<Vec<u8>>) -> anyhow::Result<ExitCode> {
    let seed = seed.unwrap_or(DEFAULT_VALIDATION_SEED);
    let plan = if quick { ValidationPlan::quick(seed) } else { ValidationPlan::full(seed) };
    let outcomes = match only {
        Some(ids) => ids
            .iter()
            .map(|&id| ofjackson::validation::run_criterion(id, &plan))
            .collect::<Result<Vec<_>>>()?,
        None => run_all(&plan)?,
    };
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} criteria passed{}",
        outcomes.len() - failed,
        outcomes.len(),
        if quick { " (quick mode)" } else { "" }
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(EXIT_VALIDATION) })
}
