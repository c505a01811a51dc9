use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_REJECTIONS: usize = 10_000;

/// Unordered PN pair, stored with the smaller id first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlId(pub usize, pub usize);

impl PlId {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            PlId(a, b)
        } else {
            PlId(b, a)
        }
    }
}

impl fmt::Display for PlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalNode {
    pub id: usize,
    /// kbit/s shared by every VN hosted on the node
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalLink {
    pub id: PlId,
    /// kbit/s shared by every VL routed over the link
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateNetwork {
    pub nodes: Vec<PhysicalNode>,
    /// Sorted by id.
    pub links: Vec<PhysicalLink>,
    pub adjacency: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityRanges {
    pub node: (f64, f64),
    pub link: (f64, f64),
}

impl Default for CapacityRanges {
    fn default() -> Self {
        Self { node: (20_000.0, 40_000.0), link: (20_000.0, 40_000.0) }
    }
}

impl SubstrateNetwork {
    pub fn num_pns(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_index(&self, id: PlId) -> Option<usize> {
        self.links.binary_search_by(|l| l.id.cmp(&id)).ok()
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adjacency)
    }

    /// BFS path with neighbors visited in id order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.num_pns();
        let mut prev = vec![usize::MAX; n];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                while *path.last().unwrap() != from {
                    path.push(prev[*path.last().unwrap()]);
                }
                path.reverse();
                return Some(path);
            }
            for &v in &self.adjacency[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }
}

fn connected(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.iter().all(|&s| s)
}

fn draw_range(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Connected Erdos-Renyi graph, redrawn until connected.
pub fn build_network(
    num_pns: usize,
    link_probability: f64,
    capacity: CapacityRanges,
    seed: u64,
) -> Result<SubstrateNetwork> {
    if num_pns < 2 {
        return Err(Error::InvalidConfig(format!("num_pns must be at least 2, got {num_pns}")));
    }
    if !(link_probability > 0.0 && link_probability <= 1.0) {
        return Err(Error::InvalidConfig(format!("link_probability must lie in (0, 1], got {link_probability}")));
    }
    for (name, (lo, hi)) in [("node", capacity.node), ("link", capacity.link)] {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidConfig(format!("{name} capacity range [{lo}, {hi}] is not positive")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_REJECTIONS {
        let mut adjacency = vec![Vec::new(); num_pns];
        let mut ids = Vec::new();
        for a in 0..num_pns {
            for b in a + 1..num_pns {
                if rng.random::<f64>() < link_probability {
                    adjacency[a].push(b);
                    adjacency[b].push(a);
                    ids.push(PlId(a, b));
                }
            }
        }
        if !connected(&adjacency) {
            continue;
        }
        for nb in adjacency.iter_mut() {
            nb.sort_unstable();
        }
        let nodes = (0..num_pns).map(|id| PhysicalNode { id, capacity: draw_range(&mut rng, capacity.node) }).collect();
        let links =
            ids.into_iter().map(|id| PhysicalLink { id, bandwidth: draw_range(&mut rng, capacity.link) }).collect();
        return Ok(SubstrateNetwork { nodes, links, adjacency });
    }
    Err(Error::Unsatisfiable(format!(
        "no connected graph with {num_pns} nodes at link probability {link_probability} after {MAX_REJECTIONS} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let a = build_network(10, 0.4, CapacityRanges::default(), 3).unwrap();
        let b = build_network(10, 0.4, CapacityRanges::default(), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_nodes_one_link() {
        let n = build_network(2, 1.0, CapacityRanges::default(), 0).unwrap();
        assert_eq!(n.links.len(), 1);
        assert_eq!(n.links[0].id, PlId(0, 1));
    }

    #[test]
    fn always_connected() {
        for seed in 0..100 {
            let n = build_network(10, 0.4, CapacityRanges::default(), seed).unwrap();
            assert!(n.is_connected());
            assert!(n.nodes.iter().all(|p| p.capacity > 0.0));
            assert!(n.links.iter().all(|l| l.id.0 < l.id.1 && l.bandwidth > 0.0));
        }
    }

    #[test]
    fn invalid_inputs() {
        let c = CapacityRanges::default();
        assert!(build_network(1, 0.5, c, 0).is_err());
        assert!(build_network(5, 0.0, c, 0).is_err());
        assert!(build_network(5, 1.5, c, 0).is_err());
        assert!(matches!(build_network(40, 1e-4, c, 0), Err(Error::Unsatisfiable(_))));
    }

    #[test]
    fn paths_follow_links() {
        let n = build_network(10, 0.3, CapacityRanges::default(), 8).unwrap();
        for a in 0..10 {
            for b in 0..10 {
                let p = n.shortest_path(a, b).unwrap();
                assert_eq!((p[0], *p.last().unwrap()), (a, b));
                assert!(p.windows(2).all(|w| n.link_index(PlId::new(w[0], w[1])).is_some()));
            }
        }
    }
}
