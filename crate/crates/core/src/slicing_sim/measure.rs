use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::anomaly::{AnomalySchedule, Target};
use super::embedding::SfcEmbedding;
use super::network::{PlId, SubstrateNetwork};

pub const NUM_FEATURES: usize = 6;
pub const FEATURE_NAMES: [&str; NUM_FEATURES] =
    ["processing_rate", "data_flow", "queuing_delay", "processing_delay", "cpu_usage", "memory_usage"];

/// Utilization cap of the queueing-delay formula.
const MAX_UTILIZATION: f64 = 0.95;
const NOISE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureParams {
    pub noise_sigma: f64,
    /// Half-width of the uniform per-step load factor around 1.
    pub load_jitter: f64,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self { noise_sigma: 0.05, load_jitter: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: usize,
    /// Indexed by global VN id.
    pub features: Vec<[f64; NUM_FEATURES]>,
    pub anomalous_pns: BTreeSet<usize>,
    pub anomalous_pls: BTreeSet<PlId>,
}

/// Fraction of each reservation a PN or PL can honor; below 1 only when oversubscribed.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareScales {
    pub node: Vec<f64>,
    pub link: Vec<f64>,
}

impl ShareScales {
    pub fn new(network: &SubstrateNetwork, embeddings: &[SfcEmbedding]) -> Self {
        let mut node_load = vec![0.0; network.num_pns()];
        let mut link_load = vec![0.0; network.links.len()];
        for s in embeddings {
            let (rate, size) = s.nominal();
            for (k, &q) in s.vn_to_pn.iter().enumerate() {
                node_load[q] += rate * size * s.node_headroom[k];
            }
            for k in 0..s.link_headroom.len() {
                for l in s.vl_links(k) {
                    let r = network.link_index(l).expect("embedded on substrate links");
                    link_load[r] += rate * size * s.link_headroom[k];
                }
            }
        }
        let scale = |cap: f64, load: f64| if load > cap { cap / load } else { 1.0 };
        Self {
            node: network.nodes.iter().zip(&node_load).map(|(n, &l)| scale(n.capacity, l)).collect(),
            link: network.links.iter().zip(&link_load).map(|(k, &l)| scale(k.bandwidth, l)).collect(),
        }
    }
}

fn queueing_delay(utilization: f64, service_rate: f64) -> f64 {
    let u = utilization.min(MAX_UTILIZATION);
    u / (service_rate * (1.0 - u))
}

/// One row of per-VN features at step `t`. The noise stream is keyed by `(noise_seed, t)`,
/// so rows can be generated in any order and schedules can change without moving it.
pub fn step_measurements(
    network: &SubstrateNetwork,
    embeddings: &[SfcEmbedding],
    schedule: &AnomalySchedule,
    t: usize,
    noise_seed: u64,
    params: &MeasureParams,
    scales: &ShareScales,
) -> TraceRow {
    let mut pn_loss = vec![0.0; network.num_pns()];
    let mut pl_loss = vec![0.0; network.links.len()];
    let mut anomalous_pns = BTreeSet::new();
    let mut anomalous_pls = BTreeSet::new();
    for e in schedule.events.iter().filter(|e| e.covers(t)) {
        match e.target {
            Target::Pn(q) => {
                pn_loss[q] = e.loss_fraction;
                anomalous_pns.insert(q);
            }
            Target::Pl(id) => {
                if let Some(r) = network.link_index(id) {
                    pl_loss[r] = e.loss_fraction;
                }
                anomalous_pls.insert(id);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    rng.set_stream(t as u64);
    let num_vns: usize = embeddings.iter().map(|s| s.vn_chain.len()).sum();
    let mut features = vec![[0.0; NUM_FEATURES]; num_vns];
    for s in embeddings {
        let (rate, size) = s.nominal();
        let load = rate * (1.0 + params.load_jitter * (2.0 * rng.random::<f64>() - 1.0));
        let mut upstream_throughput = load;
        for (k, (&vn, &q)) in s.vn_chain.iter().zip(&s.vn_to_pn).enumerate() {
            let service = rate * s.node_headroom[k] * scales.node[q] * (1.0 - pn_loss[q]);
            let arrival = if k == 0 {
                load
            } else {
                let link_cap = s
                    .vl_links(k - 1)
                    .map(|l| {
                        let r = network.link_index(l).expect("embedded on substrate links");
                        rate * s.link_headroom[k - 1] * scales.link[r] * (1.0 - pl_loss[r])
                    })
                    .fold(f64::INFINITY, f64::min);
                upstream_throughput.min(link_cap)
            };
            let utilization = arrival / service;
            let busy = utilization.min(1.0);
            let clean = [
                service,
                arrival * size,
                queueing_delay(utilization, service),
                1.0 / service,
                0.1 + 0.8 * busy,
                0.2 + 0.5 * busy,
            ];
            for (slot, x) in features[vn].iter_mut().zip(clean) {
                let eps: f64 = rng.sample(StandardNormal);
                *slot = x * (1.0 + params.noise_sigma * eps).max(NOISE_FLOOR);
            }
            upstream_throughput = arrival.min(service);
        }
    }
    TraceRow { time: t, features, anomalous_pns, anomalous_pls }
}
