use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{PlId, SubstrateNetwork};
use crate::error::{Error, Result};

const MAX_WALK_ATTEMPTS: usize = 10_000;

/// Nominal arrival rate (packets/s) and packet size (kbit) of each service type.
pub const SERVICES: [(f64, f64); 3] = [(10.0, 200.0), (100.0, 10.0), (500.0, 1.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Self-avoiding random walk: consecutive VNs land on adjacent PNs.
    #[default]
    Walk,
    /// Distinct PNs drawn uniformly, VLs routed on shortest paths.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedParams {
    pub num_sfcs: usize,
    pub chain_length: (usize, usize),
    /// Relative weights of the three service types.
    pub service_mix: Vec<f64>,
    pub placement: Placement,
    pub node_headroom: (f64, f64),
    pub link_headroom: (f64, f64),
}

impl Default for EmbedParams {
    fn default() -> Self {
        Self {
            num_sfcs: 6,
            chain_length: (4, 6),
            service_mix: vec![1.0; 3],
            placement: Placement::Walk,
            node_headroom: (1.8, 2.5),
            link_headroom: (1.12, 1.3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SfcEmbedding {
    pub sfc_id: usize,
    /// 1, 2 or 3
    pub service_type: usize,
    /// Global VN ids in chain order.
    pub vn_chain: Vec<usize>,
    pub vn_to_pn: Vec<usize>,
    /// PN sequence of each VL, both endpoints included.
    pub vl_to_path: Vec<Vec<usize>>,
    /// Reserved processing share of each VN, as a multiple of the nominal rate.
    pub node_headroom: Vec<f64>,
    /// Reserved bandwidth of each VL, as a multiple of the nominal rate.
    pub link_headroom: Vec<f64>,
}

impl SfcEmbedding {
    pub fn nominal(&self) -> (f64, f64) {
        SERVICES[self.service_type - 1]
    }

    pub fn vl_links(&self, k: usize) -> impl Iterator<Item = PlId> + '_ {
        self.vl_to_path[k].windows(2).map(|w| PlId::new(w[0], w[1]))
    }
}

fn validate(network: &SubstrateNetwork, p: &EmbedParams) -> Result<()> {
    let (lo, hi) = p.chain_length;
    if lo < 1 || hi < lo {
        return Err(Error::InvalidConfig(format!("chain length range [{lo}, {hi}] is empty")));
    }
    if hi > network.num_pns() {
        return Err(Error::InfeasibleEmbedding(format!(
            "chains of up to {hi} VNs need distinct PNs but the substrate has {}",
            network.num_pns()
        )));
    }
    if p.service_mix.len() != SERVICES.len()
        || p.service_mix.iter().any(|w| !(*w >= 0.0))
        || p.service_mix.iter().sum::<f64>() <= 0.0
    {
        return Err(Error::InvalidConfig(format!(
            "service_mix needs {} non-negative weights with a positive sum",
            SERVICES.len()
        )));
    }
    for (name, (a, b)) in [("node", p.node_headroom), ("link", p.link_headroom)] {
        if !(a >= 1.0 && b >= a) {
            return Err(Error::InvalidConfig(format!("{name} headroom range [{a}, {b}] must start at 1 or above")));
        }
    }
    Ok(())
}

fn walk(network: &SubstrateNetwork, len: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = network.num_pns();
    for _ in 0..MAX_WALK_ATTEMPTS {
        let mut pns = vec![rng.random_range(0..n)];
        while pns.len() < len {
            let last = *pns.last().unwrap();
            let free: Vec<usize> = network.adjacency[last].iter().copied().filter(|v| !pns.contains(v)).collect();
            if free.is_empty() {
                break;
            }
            pns.push(free[rng.random_range(0..free.len())]);
        }
        if pns.len() == len {
            return Some(pns);
        }
    }
    None
}

fn distinct(network: &SubstrateNetwork, len: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    rand::seq::index::sample(rng, network.num_pns(), len).into_vec()
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

pub fn embed_sfcs(network: &SubstrateNetwork, params: &EmbedParams, seed: u64) -> Result<Vec<SfcEmbedding>> {
    validate(network, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix = WeightedIndex::new(&params.service_mix).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut next_vn = 0;
    let mut out = Vec::with_capacity(params.num_sfcs);
    for sfc_id in 0..params.num_sfcs {
        let service_type = mix.sample(&mut rng) + 1;
        let len = rng.random_range(params.chain_length.0..=params.chain_length.1);
        let vn_to_pn = match params.placement {
            Placement::Walk => walk(network, len, &mut rng).ok_or_else(|| {
                Error::InfeasibleEmbedding(format!("no simple path of {len} PNs found for SFC {sfc_id}"))
            })?,
            Placement::Uniform => distinct(network, len, &mut rng),
        };
        let vl_to_path = vn_to_pn
            .windows(2)
            .map(|w| match params.placement {
                Placement::Walk => Some(vec![w[0], w[1]]),
                Placement::Uniform => network.shortest_path(w[0], w[1]),
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InfeasibleEmbedding("substrate is disconnected".into()))?;
        let node_headroom = (0..len).map(|_| draw(&mut rng, params.node_headroom)).collect();
        let link_headroom = (1..len).map(|_| draw(&mut rng, params.link_headroom)).collect();
        out.push(SfcEmbedding {
            sfc_id,
            service_type,
            vn_chain: (next_vn..next_vn + len).collect(),
            vn_to_pn,
            vl_to_path,
            node_headroom,
            link_headroom,
        });
        next_vn += len;
    }
    Ok(out)
}
