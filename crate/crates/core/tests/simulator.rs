use std::collections::{HashMap, VecDeque};

use ofjackson::sim::stats::ks_distance;
use ofjackson::sim::{run_replication, Counts, TraceEvent};
use ofjackson::*;

const MU_L: f64 = 1.0 / 9.8e-6;
const MU_C: f64 = 1.0 / 240e-6;

fn ctrl() -> ControllerParams {
    ControllerParams::new(MU_C).unwrap()
}

fn cfg(seed: u64, packets: u64) -> SimConfig {
    SimConfig {
        seed,
        packets_per_replication: packets,
        ..SimConfig::default()
    }
}

#[test]
fn identical_seeds_give_identical_results() {
    let node = NodeParams::new(2000.0, MU_L, 1.0).unwrap();
    let a = run_single_node(&node, &ctrl(), &cfg(42, 20_000)).unwrap();
    let b = run_single_node(&node, &ctrl(), &cfg(42, 20_000)).unwrap();
    assert_eq!(a, b);
    let bits = |r: &SimResult| r.per_replication_means.iter().map(|m| m.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    let c = run_single_node(&node, &ctrl(), &cfg(43, 20_000)).unwrap();
    assert_ne!(a.mean_sojourn, c.mean_sojourn);
}

#[test]
fn one_node_chain_follows_the_same_sample_path() {
    let node = NodeParams::new(3000.0, MU_L, 0.6).unwrap();
    let single = run_single_node(&node, &ctrl(), &cfg(5, 15_000)).unwrap();
    let chain = run_chain(&ChainModel::single(node, ctrl()), &cfg(5, 15_000)).unwrap();
    assert_eq!(single, chain.aggregate);
    assert_eq!(chain.per_class, vec![single]);
}

/// Checks conservation, FIFO service per station and controller visits on
/// every event of one replication.
fn trace(chain: &ChainModel, seed: u64) -> (u64, u64) {
    let config = cfg(seed, 10_000);
    let mut waiting: HashMap<Station, VecDeque<u64>> = HashMap::new();
    let mut in_service: HashMap<Station, u64> = HashMap::new();
    let mut arrivals = HashMap::new();
    let mut departures = 0u64;
    let mut visits = 0u64;
    let mut last_time = 0.0;
    let mut observer = |time: f64, event: &TraceEvent, counts: &Counts| {
        assert!(time >= last_time, "time went backwards");
        last_time = time;
        assert_eq!(counts.arrived, counts.departed + counts.in_system);
        match *event {
            TraceEvent::Arrival { packet, .. } => {
                arrivals.insert(packet, time);
            }
            TraceEvent::ServiceStart { station, packet } => {
                assert!(!in_service.contains_key(&station), "{station} serves two packets");
                // the packet must be the oldest one queued at the station, if
                // any queued ahead of it
                if let Some(queue) = waiting.get_mut(&station) {
                    if let Some(pos) = queue.iter().position(|&p| p == packet) {
                        assert_eq!(pos, 0, "FIFO violated at {station}");
                        queue.pop_front();
                    }
                }
                in_service.insert(station, packet);
            }
            TraceEvent::ServiceEnd { station, packet } => {
                assert_eq!(in_service.remove(&station), Some(packet));
            }
            TraceEvent::Departure { packet, sojourn, controller_visits, .. } => {
                assert!(controller_visits <= 1);
                let arrived = arrivals.remove(&packet).expect("departed packet had arrived");
                assert!((time - arrived - sojourn).abs() <= 1e-12 * time.max(1.0));
                departures += 1;
                visits += u64::from(controller_visits);
            }
        }
    };
    run_replication(chain, &config, 0, &mut observer);
    (departures, visits)
}

#[test]
fn traced_invariants_single_node() {
    for q in [0.0f64, 0.4, 1.0] {
        let node = NodeParams::new(0.6 * MU_C / q.max(0.2), MU_L, q).unwrap();
        let (departed, visited) = trace(&ChainModel::single(node, ctrl()), 9);
        assert_eq!(departed, 10_000);
        if q == 0.0 {
            assert_eq!(visited, 0);
        }
        if q == 1.0 {
            assert_eq!(visited, departed);
        }
    }
}

#[test]
fn traced_invariants_chain() {
    let n = |l: f64, q: f64| NodeParams::new(l, MU_L, q).unwrap();
    let chain = ChainModel::new(vec![n(1500.0, 0.5), n(1000.0, 0.3), n(20_000.0, 0.0)], ctrl()).unwrap();
    let (departed, _) = trace(&chain, 3);
    assert_eq!(departed, 10_000);
}

#[test]
fn controller_visit_fraction_concentrates() {
    let q = 0.3;
    let node = NodeParams::new(5000.0, MU_L, q).unwrap();
    let config = cfg(17, 50_000);
    let res = run_single_node(&node, &ctrl(), &config).unwrap();
    let n = (config.packets_per_replication * config.replications as u64) as f64;
    let sigma = (q * (1.0 - q) / n).sqrt();
    assert!((res.controller_visit_fraction - q).abs() <= 3.0 * sigma, "{}", res.controller_visit_fraction);
}

#[test]
fn mm1_sojourn_is_exponential() {
    let node = NodeParams::new(0.5 * MU_L, MU_L, 0.0).unwrap();
    let rate = MU_L - node.lambda;
    let res = run_single_node(&node, &ctrl(), &cfg(2, 222_223)).unwrap();
    assert_eq!(res.empirical_ccdf.len(), 1_000_000);
    let ks = ks_distance(&res.empirical_ccdf, |t| 1.0 - (-rate * t).exp());
    assert!(ks < 0.01, "{ks}");
}

#[test]
fn mm1_confidence_interval_coverage() {
    // 95% intervals over 20 independent seeds: fewer than 16 hits has
    // probability 0.016 for a correct simulator
    let node = NodeParams::new(0.5 * MU_L, MU_L, 0.0).unwrap();
    let expected = 1.0 / (MU_L - node.lambda);
    let hits = (0..20u64)
        .filter(|&i| {
            let seed = ofjackson::sim::rng::derive_seed(1000, i);
            run_single_node(&node, &ctrl(), &cfg(seed, 200_000)).unwrap().contains(expected)
        })
        .count();
    assert!(hits >= 16, "{hits}/20");
}

#[test]
fn tandem_without_new_flows() {
    let (l1, l2) = (20_000.0, 30_000.0);
    let chain = ChainModel::new(
        vec![NodeParams::new(l1, MU_L, 0.0).unwrap(), NodeParams::new(l2, MU_L, 0.0).unwrap()],
        ctrl(),
    )
    .unwrap();
    let res = run_chain(&chain, &cfg(8, 200_000)).unwrap();
    let expected = 1.0 / (MU_L - l1) + 1.0 / (MU_L - l1 - l2);
    let class1 = &res.per_class[0];
    assert!(class1.contains(expected), "{} ± {} vs {expected}", class1.mean_sojourn, class1.ci_halfwidth);
    assert_eq!(res.aggregate.controller_visit_fraction, 0.0);
}

#[test]
fn unstable_runs_are_allowed() {
    let node = NodeParams::new(3000.0, MU_L, 1.0).unwrap();
    let ctrl = ControllerParams::new(2000.0).unwrap();
    assert!(!solve_rates(&node, &ctrl).is_stable());
    let res = run_single_node(&node, &ctrl, &cfg(1, 10_000)).unwrap();
    assert!(res.mean_sojourn > 0.0);
}
