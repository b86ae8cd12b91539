//! Discrete-event simulation of OpenFlow switches and their controller.
//!
//! Unlike the analytic model, the simulator follows individual packets:
//! every packet arrives at its entry switch, is marked as a new flow with
//! probability `q_nf`, gets FIFO exponential service at the switch and, if
//! marked, is sent once to the controller and then back to the same switch
//! for a second, independently drawn service. Afterwards it transits every
//! downstream switch of the chain once and leaves.
//!
//! A replication runs until `packets_per_replication` packets have departed;
//! the first `warmup_fraction` of those departures are not measured.
//! Replications are independent and run in parallel; results are merged by
//! replication index so the output never depends on scheduling.

pub mod event;
pub mod rng;
pub mod stats;

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ControllerParams, NodeParams};
use crate::chain::ChainModel;
use crate::error::{ModelError, Result, Station};
use event::EventQueue;
use rng::{stream_rng, StreamId};

/// Most sojourn samples kept for the empirical distribution of one run.
pub const RESERVOIR_CAP: usize = 1_000_000;

pub const MIN_PACKETS_PER_REPLICATION: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub packets_per_replication: u64,
    pub replications: u32,
    pub warmup_fraction: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            packets_per_replication: 200_000,
            replications: 5,
            warmup_fraction: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.packets_per_replication < MIN_PACKETS_PER_REPLICATION {
            return Err(ModelError::Config(format!(
                "packets_per_replication = {} (must be at least {MIN_PACKETS_PER_REPLICATION})",
                self.packets_per_replication
            )));
        }
        if self.replications < 2 {
            return Err(ModelError::Config(format!(
                "replications = {} (at least 2 are needed for a confidence interval)",
                self.replications
            )));
        }
        if !(0.0..0.5).contains(&self.warmup_fraction) {
            return Err(ModelError::Config(format!(
                "warmup_fraction = {} (must be in [0, 0.5))",
                self.warmup_fraction
            )));
        }
        Ok(())
    }

    fn warmup_departures(&self) -> u64 {
        (self.warmup_fraction * self.packets_per_replication as f64).floor() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_sojourn: f64,
    /// 95% half-width over replication means (Student-t, `R − 1` degrees of
    /// freedom).
    pub ci_halfwidth: f64,
    pub per_replication_means: Vec<f64>,
    /// Sorted measured sojourn times, reservoir-sampled down to
    /// [`RESERVOIR_CAP`] when needed.
    pub empirical_ccdf: Vec<f64>,
    /// Fraction of departed packets that visited the controller.
    pub controller_visit_fraction: f64,
    /// Packets that contributed to `mean_sojourn`.
    pub measured_packets: u64,
}

impl SimResult {
    /// True when `value` lies inside the 95% confidence interval.
    pub fn contains(&self, value: f64) -> bool {
        (value - self.mean_sojourn).abs() <= self.ci_halfwidth
    }

    /// Empirical `P(W ≤ t)`.
    pub fn fraction_within(&self, t: f64) -> f64 {
        stats::empirical_cdf(&self.empirical_ccdf, t)
    }

    /// Empirical `P(W > t)`.
    pub fn ccdf_at(&self, t: f64) -> f64 {
        1.0 - self.fraction_within(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSimResult {
    /// Statistics of traffic entering at each node.
    pub per_class: Vec<SimResult>,
    pub aggregate: SimResult,
}

/// Something that happened to a packet, reported to an [`Observer`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEvent {
    Arrival { packet: u64, class: usize },
    ServiceStart { station: Station, packet: u64 },
    ServiceEnd { station: Station, packet: u64 },
    Departure { packet: u64, class: usize, sojourn: f64, controller_visits: u8 },
}

/// Population counters after an event has been processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub arrived: u64,
    pub departed: u64,
    /// Sum of all station populations (queued plus in service).
    pub in_system: u64,
}

pub trait Observer {
    fn observe(&mut self, time: f64, event: &TraceEvent, counts: &Counts);
}

impl Observer for () {
    fn observe(&mut self, _: f64, _: &TraceEvent, _: &Counts) {}
}

impl<F: FnMut(f64, &TraceEvent, &Counts)> Observer for F {
    fn observe(&mut self, time: f64, event: &TraceEvent, counts: &Counts) {
        self(time, event, counts)
    }
}

/// Raw measurements of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutput {
    /// Measured sojourn sum and count per entry class.
    pub class_totals: Vec<(f64, u64)>,
    /// Measured sojourn times of all classes, in departure order.
    pub samples: Vec<f64>,
    /// Measured sojourn times per class. Empty for single-node runs, where
    /// they would duplicate `samples`.
    pub class_samples: Vec<Vec<f64>>,
    /// All departures per class, including warm-up.
    pub departed: Vec<u64>,
    /// Departures per class that visited the controller, including warm-up.
    pub visited: Vec<u64>,
}

pub fn run_single_node(node: &NodeParams, ctrl: &ControllerParams, cfg: &SimConfig) -> Result<SimResult> {
    let chain = ChainModel::single(*node, *ctrl);
    Ok(run_chain(&chain, cfg)?.aggregate)
}

pub fn run_chain(chain: &ChainModel, cfg: &SimConfig) -> Result<ChainSimResult> {
    chain.validate()?;
    cfg.validate()?;
    let outputs: Vec<ReplicationOutput> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| run_replication(chain, cfg, r, &mut ()))
        .collect();
    Ok(merge(chain.len(), cfg, &outputs))
}

/// Runs a single replication, reporting every event to `observer`.
pub fn run_replication<O: Observer>(
    chain: &ChainModel,
    cfg: &SimConfig,
    replication: u32,
    observer: &mut O,
) -> ReplicationOutput {
    Engine::new(chain, cfg, replication).run(observer)
}

fn merge(classes: usize, cfg: &SimConfig, outputs: &[ReplicationOutput]) -> ChainSimResult {
    let reservoir_rng = || stream_rng(cfg.seed, 0, StreamId::Reservoir);
    let summarize = |means: Vec<f64>, samples: Vec<f64>, departed: u64, visited: u64, measured: u64| {
        let (mean_sojourn, ci_halfwidth) = stats::mean_and_ci(&means);
        let mut kept = stats::reservoir(samples, RESERVOIR_CAP, &mut reservoir_rng());
        kept.sort_by(f64::total_cmp);
        SimResult {
            mean_sojourn,
            ci_halfwidth,
            per_replication_means: means,
            empirical_ccdf: kept,
            controller_visit_fraction: if departed == 0 {
                0.0
            } else {
                visited as f64 / departed as f64
            },
            measured_packets: measured,
        }
    };

    let aggregate = {
        let means = outputs
            .iter()
            .map(|o| {
                let (sum, n) = o
                    .class_totals
                    .iter()
                    .fold((0.0, 0u64), |(s, c), (s2, c2)| (s + s2, c + c2));
                sum / n as f64
            })
            .collect();
        let samples = outputs.iter().flat_map(|o| o.samples.iter().copied()).collect();
        let departed = outputs.iter().flat_map(|o| &o.departed).sum();
        let visited = outputs.iter().flat_map(|o| &o.visited).sum();
        let measured = outputs.iter().map(|o| o.samples.len() as u64).sum();
        summarize(means, samples, departed, visited, measured)
    };

    let per_class = if classes == 1 {
        vec![aggregate.clone()]
    } else {
        (0..classes)
            .map(|c| {
                let means = outputs
                    .iter()
                    .map(|o| o.class_totals[c].0 / o.class_totals[c].1 as f64)
                    .collect();
                let samples = outputs
                    .iter()
                    .flat_map(|o| o.class_samples[c].iter().copied())
                    .collect();
                let departed = outputs.iter().map(|o| o.departed[c]).sum();
                let visited = outputs.iter().map(|o| o.visited[c]).sum();
                let measured = outputs.iter().map(|o| o.class_totals[c].1).sum();
                summarize(means, samples, departed, visited, measured)
            })
            .collect()
    };
    ChainSimResult {
        per_class,
        aggregate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leg {
    /// First service at the entry switch.
    Entry,
    /// At the controller.
    Controller,
    /// Second service at the entry switch after the controller round trip.
    Return,
    /// Passing through downstream switch `i`.
    Transit(usize),
}

#[derive(Debug, Clone)]
struct Packet {
    serial: u64,
    arrival: f64,
    class: usize,
    new_flow: bool,
    leg: Leg,
    controller_visits: u8,
}

#[derive(Debug, Default)]
struct StationQueue {
    waiting: VecDeque<usize>,
    in_service: Option<usize>,
}

impl StationQueue {
    fn population(&self) -> u64 {
        self.waiting.len() as u64 + u64::from(self.in_service.is_some())
    }
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Arrival(usize),
    Completion(usize),
}

struct Engine<'a> {
    chain: &'a ChainModel,
    events: EventQueue<Event>,
    /// Switches `0..n`, then the controller at index `n`.
    stations: Vec<StationQueue>,
    service: Vec<(Exp<f64>, ChaCha8Rng)>,
    arrivals: Vec<(Exp<f64>, ChaCha8Rng)>,
    marking: Vec<ChaCha8Rng>,
    packets: Vec<Option<Packet>>,
    free: Vec<usize>,
    counts: Counts,
    target: u64,
    warmup: u64,
    out: ReplicationOutput,
}

impl<'a> Engine<'a> {
    fn new(chain: &'a ChainModel, cfg: &SimConfig, replication: u32) -> Self {
        let n = chain.len();
        let seed = cfg.seed;
        let exp = |rate: f64| Exp::new(rate).expect("rates are validated positive");
        let mut service: Vec<_> = chain
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (exp(node.mu_switch), stream_rng(seed, replication, StreamId::SwitchService(i))))
            .collect();
        service.push((
            exp(chain.controller.mu_controller),
            stream_rng(seed, replication, StreamId::ControllerService),
        ));
        let arrivals = chain
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| (exp(node.lambda), stream_rng(seed, replication, StreamId::Arrivals(i))))
            .collect();
        let marking = (0..n)
            .map(|i| stream_rng(seed, replication, StreamId::FlowMarking(i)))
            .collect();
        let multi_class = n > 1;
        Engine {
            chain,
            events: EventQueue::new(),
            stations: (0..=n).map(|_| StationQueue::default()).collect(),
            service,
            arrivals,
            marking,
            packets: Vec::new(),
            free: Vec::new(),
            counts: Counts {
                arrived: 0,
                departed: 0,
                in_system: 0,
            },
            target: cfg.packets_per_replication,
            warmup: cfg.warmup_departures(),
            out: ReplicationOutput {
                class_totals: vec![(0.0, 0); n],
                samples: Vec::with_capacity((cfg.packets_per_replication - cfg.warmup_departures()) as usize),
                class_samples: if multi_class { vec![Vec::new(); n] } else { Vec::new() },
                departed: vec![0; n],
                visited: vec![0; n],
            },
        }
    }

    fn controller(&self) -> usize {
        self.chain.len()
    }

    fn station_id(&self, idx: usize) -> Station {
        if idx == self.controller() {
            Station::Controller
        } else if self.chain.len() == 1 {
            Station::Switch
        } else {
            Station::ChainSwitch(idx)
        }
    }

    fn run<O: Observer>(mut self, observer: &mut O) -> ReplicationOutput {
        for class in 0..self.chain.len() {
            let (dist, rng) = &mut self.arrivals[class];
            let t = dist.sample(rng);
            self.events.schedule(t, Event::Arrival(class));
        }
        while self.counts.departed < self.target {
            let (now, event) = self.events.pop().expect("arrivals are always pending");
            match event {
                Event::Arrival(class) => self.on_arrival(now, class, observer),
                Event::Completion(station) => self.on_completion(now, station, observer),
            }
            debug_assert_eq!(
                self.counts.in_system,
                self.stations.iter().map(StationQueue::population).sum::<u64>()
            );
            debug_assert_eq!(self.counts.arrived, self.counts.departed + self.counts.in_system);
        }
        self.out
    }

    fn on_arrival<O: Observer>(&mut self, now: f64, class: usize, observer: &mut O) {
        let q = self.chain.nodes[class].q_nf;
        let new_flow = self.marking[class].random_bool(q);
        let serial = self.counts.arrived;
        let packet = Packet {
            serial,
            arrival: now,
            class,
            new_flow,
            leg: Leg::Entry,
            controller_visits: 0,
        };
        let slot = match self.free.pop() {
            Some(slot) => {
                self.packets[slot] = Some(packet);
                slot
            }
            None => {
                self.packets.push(Some(packet));
                self.packets.len() - 1
            }
        };
        self.counts.arrived += 1;
        self.counts.in_system += 1;
        observer.observe(now, &TraceEvent::Arrival { packet: serial, class }, &self.counts);

        let (dist, rng) = &mut self.arrivals[class];
        let next = now + dist.sample(rng);
        self.events.schedule(next, Event::Arrival(class));

        self.enqueue(now, class, slot, observer);
    }

    fn enqueue<O: Observer>(&mut self, now: f64, station: usize, slot: usize, observer: &mut O) {
        if self.stations[station].in_service.is_none() {
            self.start_service(now, station, slot, observer);
        } else {
            self.stations[station].waiting.push_back(slot);
        }
    }

    fn start_service<O: Observer>(&mut self, now: f64, station: usize, slot: usize, observer: &mut O) {
        self.stations[station].in_service = Some(slot);
        let (dist, rng) = &mut self.service[station];
        let done = now + dist.sample(rng);
        self.events.schedule(done, Event::Completion(station));
        let packet = self.packet(slot).serial;
        let id = self.station_id(station);
        observer.observe(now, &TraceEvent::ServiceStart { station: id, packet }, &self.counts);
    }

    fn packet(&self, slot: usize) -> &Packet {
        self.packets[slot].as_ref().expect("live packet slot")
    }

    fn packet_mut(&mut self, slot: usize) -> &mut Packet {
        self.packets[slot].as_mut().expect("live packet slot")
    }

    fn on_completion<O: Observer>(&mut self, now: f64, station: usize, observer: &mut O) {
        let slot = self.stations[station]
            .in_service
            .take()
            .expect("completion at an idle station");
        let serial = self.packet(slot).serial;
        let id = self.station_id(station);
        observer.observe(now, &TraceEvent::ServiceEnd { station: id, packet: serial }, &self.counts);
        if let Some(next) = self.stations[station].waiting.pop_front() {
            self.start_service(now, station, next, observer);
        }

        let controller = self.controller();
        if station == controller {
            let packet = self.packet_mut(slot);
            packet.leg = Leg::Return;
            let entry = packet.class;
            self.enqueue(now, entry, slot, observer);
            return;
        }

        let (leg, new_flow) = {
            let packet = self.packet(slot);
            (packet.leg, packet.new_flow)
        };
        match leg {
            Leg::Entry if new_flow => {
                let packet = self.packet_mut(slot);
                packet.controller_visits += 1;
                assert!(
                    packet.controller_visits <= 1,
                    "packet {} visited the controller twice",
                    packet.serial
                );
                packet.leg = Leg::Controller;
                self.enqueue(now, controller, slot, observer);
            }
            Leg::Entry | Leg::Return | Leg::Transit(_) => self.forward(now, station, slot, observer),
            Leg::Controller => unreachable!("controller leg at a switch"),
        }
    }

    /// Sends a packet that finished at switch `station` downstream, or out.
    fn forward<O: Observer>(&mut self, now: f64, station: usize, slot: usize, observer: &mut O) {
        let next = station + 1;
        if next < self.chain.len() {
            self.packet_mut(slot).leg = Leg::Transit(next);
            self.enqueue(now, next, slot, observer);
        } else {
            self.depart(now, slot, observer);
        }
    }

    fn depart<O: Observer>(&mut self, now: f64, slot: usize, observer: &mut O) {
        let packet = self.packets[slot].take().expect("live packet slot");
        self.free.push(slot);
        let sojourn = now - packet.arrival;
        let class = packet.class;
        self.counts.departed += 1;
        self.counts.in_system -= 1;
        self.out.departed[class] += 1;
        if packet.controller_visits > 0 {
            self.out.visited[class] += 1;
        }
        if self.counts.departed > self.warmup {
            let totals = &mut self.out.class_totals[class];
            totals.0 += sojourn;
            totals.1 += 1;
            self.out.samples.push(sojourn);
            if let Some(per_class) = self.out.class_samples.get_mut(class) {
                per_class.push(sojourn);
            }
        }
        observer.observe(
            now,
            &TraceEvent::Departure {
                packet: packet.serial,
                class,
                sojourn,
                controller_visits: packet.controller_visits,
            },
            &self.counts,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimConfig {
        SimConfig {
            seed: 11,
            packets_per_replication: 20_000,
            replications: 3,
            warmup_fraction: 0.1,
        }
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::default();
        assert!(ok.validate().is_ok());
        assert!(SimConfig { replications: 1, ..ok }.validate().is_err());
        assert!(SimConfig { packets_per_replication: 9_999, ..ok }.validate().is_err());
        assert!(SimConfig { warmup_fraction: 0.5, ..ok }.validate().is_err());
        assert!(SimConfig { warmup_fraction: -0.1, ..ok }.validate().is_err());
    }

    #[test]
    fn measured_counts() {
        let node = NodeParams::new(1000.0, 5000.0, 0.5).unwrap();
        let ctrl = ControllerParams::new(2000.0).unwrap();
        let res = run_single_node(&node, &ctrl, &small_cfg()).unwrap();
        assert_eq!(res.measured_packets, 3 * 18_000);
        assert_eq!(res.empirical_ccdf.len(), 3 * 18_000);
        assert_eq!(res.per_replication_means.len(), 3);
        assert!(res.empirical_ccdf.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn no_controller_visits_without_new_flows() {
        let node = NodeParams::new(1000.0, 5000.0, 0.0).unwrap();
        let ctrl = ControllerParams::new(2000.0).unwrap();
        let res = run_single_node(&node, &ctrl, &small_cfg()).unwrap();
        assert_eq!(res.controller_visit_fraction, 0.0);
    }

    #[test]
    fn every_packet_visits_controller_when_all_flows_are_new() {
        let node = NodeParams::new(1000.0, 5000.0, 1.0).unwrap();
        let ctrl = ControllerParams::new(2000.0).unwrap();
        let res = run_single_node(&node, &ctrl, &small_cfg()).unwrap();
        assert_eq!(res.controller_visit_fraction, 1.0);
    }

    #[test]
    fn unstable_runs_complete() {
        // Controller load 1.5: the queue grows but the run still finishes.
        let node = NodeParams::new(3000.0, 50_000.0, 1.0).unwrap();
        let ctrl = ControllerParams::new(2000.0).unwrap();
        let res = run_single_node(&node, &ctrl, &small_cfg()).unwrap();
        assert!(res.mean_sojourn > 1.0 / 2000.0 * 10.0);
    }
}
