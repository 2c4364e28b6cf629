//! Network-aware hyper-edge costs.
//!
//! A hyper-edge's cost under an assignment depends only on which QPUs host
//! root nodes and which host receivers, encoded as a pair of N-bit masks.
//! The cost is the size of a Steiner forest connecting every receiver QPU
//! to a tree spanning the root QPUs, computed by a multi-source BFS that
//! re-seeds from the growing forest. Costs are served from a dense
//! precomputed table for small networks and a concurrent memo above that.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use crate::error::CostError;
use crate::hypergraph::{HEdge, HNode, TemporalHypergraph};
use crate::network::{NetworkGraph, QpuId};

/// Root/receiver QPU-occupancy masks for one hyper-edge. Bit i is set iff
/// some node of the corresponding set is assigned to QPU i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConfigPair {
    pub root_cfg: u64,
    pub rec_cfg: u64,
}

impl ConfigPair {
    pub fn new(root_cfg: u64, rec_cfg: u64) -> Self {
        ConfigPair { root_cfg, rec_cfg }
    }
}

/// E-bit count for the all-to-all connected special case: one starting
/// process per receiver QPU that hosts no root node. Also a lower bound
/// for any topology.
pub fn alltoall_cost(pair: ConfigPair) -> u32 {
    (pair.rec_cfg & !pair.root_cfg).count_ones()
}

/// A tree spanning the root QPUs; its edges are not charged to the
/// hyper-edge (they are covered by cut state-edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootTree {
    pub nodes: Vec<QpuId>,
    pub node_mask: u64,
    pub edges: Vec<(QpuId, QpuId)>,
}

fn norm_edge(a: QpuId, b: QpuId) -> (QpuId, QpuId) {
    (a.min(b), a.max(b))
}

/// Tree spanning the QPUs of `root_cfg`: exact shortest path for two
/// roots, nearest-terminal-first heuristic beyond that (repeatedly attach
/// the terminal closest to the current tree via BFS). Deterministic: ties
/// break on smallest QPU id.
pub fn root_tree(root_cfg: u64, g: &NetworkGraph) -> RootTree {
    assert!(root_cfg != 0, "root configuration must be nonzero");
    let terminals: Vec<QpuId> = (0..g.num_qpus() as u32)
        .filter(|q| root_cfg >> q & 1 == 1)
        .collect();
    let mut node_mask = 1u64 << terminals[0];
    let mut nodes = vec![terminals[0]];
    let mut edges = Vec::new();
    let mut unattached: Vec<QpuId> = terminals[1..].to_vec();
    while !unattached.is_empty() {
        let (dist, parent) = bfs_from_set(g, &nodes);
        unattached.retain(|&t| node_mask >> t & 1 == 0);
        let Some(&t) = unattached
            .iter()
            .min_by_key(|&&t| (dist[t as usize], t))
        else {
            break;
        };
        let mut cur = t;
        while dist[cur as usize] != 0 {
            let p = parent[cur as usize] as QpuId;
            edges.push(norm_edge(cur, p));
            node_mask |= 1 << cur;
            nodes.push(cur);
            cur = p;
        }
        unattached.retain(|&u| u != t);
    }
    nodes.sort_unstable();
    edges.sort_unstable();
    edges.dedup();
    RootTree {
        nodes,
        node_mask,
        edges,
    }
}

/// Multi-source BFS with deterministic (distance, id) expansion order.
fn bfs_from_set(g: &NetworkGraph, sources: &[QpuId]) -> (Vec<u32>, Vec<usize>) {
    let n = g.num_qpus();
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u32, QpuId)>> = BinaryHeap::new();
    for &s in sources {
        dist[s as usize] = 0;
        heap.push(Reverse((0, s)));
    }
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u as usize] {
            continue;
        }
        for &v in g.neighbors(u) {
            if d + 1 < dist[v as usize] {
                dist[v as usize] = d + 1;
                parent[v as usize] = u as usize;
                heap.push(Reverse((d + 1, v)));
            }
        }
    }
    (dist, parent)
}

/// Steiner forest connecting every receiver QPU to the root tree, returned
/// as (sorted forest edges, cost = edge count).
///
/// Multi-source BFS: the frontier starts with every tree node at distance
/// zero and expands in (distance, id) order. When a receiver is dequeued,
/// the path back to the tree joins the forest and its nodes re-enter the
/// frontier at distance zero, so later receivers may attach to the grown
/// forest. Shared path edges are counted once. Receivers on the tree cost
/// nothing.
pub fn forest_cost(pair: ConfigPair, g: &NetworkGraph) -> (Vec<(QpuId, QpuId)>, u32) {
    let tree = root_tree(pair.root_cfg, g);
    forest_from_tree(&tree, pair.rec_cfg, g)
}

pub(crate) fn forest_from_tree(
    tree: &RootTree,
    rec_cfg: u64,
    g: &NetworkGraph,
) -> (Vec<(QpuId, QpuId)>, u32) {
    let n = g.num_qpus();
    let mut remaining = rec_cfg & !tree.node_mask;
    if remaining == 0 {
        return (Vec::new(), 0);
    }
    let mut forest = std::collections::BTreeSet::new();
    let mut dist = vec![u32::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap: BinaryHeap<Reverse<(u32, QpuId)>> = BinaryHeap::new();
    for &s in &tree.nodes {
        dist[s as usize] = 0;
        heap.push(Reverse((0, s)));
    }
    while remaining != 0 {
        let Reverse((d, u)) = heap
            .pop()
            .expect("connected network always reaches all receivers");
        if d > dist[u as usize] {
            continue;
        }
        if remaining >> u & 1 == 1 {
            remaining &= !(1 << u);
            let mut cur = u;
            while dist[cur as usize] != 0 {
                let p = parent[cur as usize] as QpuId;
                forest.insert(norm_edge(cur, p));
                dist[cur as usize] = 0;
                heap.push(Reverse((0, cur)));
                cur = p;
            }
            continue;
        }
        for &v in g.neighbors(u) {
            if d + 1 < dist[v as usize] {
                dist[v as usize] = d + 1;
                parent[v as usize] = u as usize;
                heap.push(Reverse((d + 1, v)));
            }
        }
    }
    let cost = forest.len() as u32;
    (forest.into_iter().collect(), cost)
}

const DEFAULT_PRECOMPUTE_THRESHOLD: usize = 10;
/// Hard cap on dense tables: 2^(2*12) u32 entries = 64 MiB.
const DENSE_HARD_CAP: usize = 12;

enum TableBackend {
    Dense(Vec<u32>),
    Memo(DashMap<ConfigPair, u32>),
}

/// Configuration-pair cost oracle for a fixed network: a dense precomputed
/// table when the network is small enough, a concurrent memo otherwise.
/// Shared read-only across threads; memo inserts are idempotent.
pub struct CostEngine {
    network: Arc<NetworkGraph>,
    backend: TableBackend,
    threshold: usize,
}

impl CostEngine {
    pub fn new(network: Arc<NetworkGraph>, threshold: usize) -> Result<Self, CostError> {
        let n = network.num_qpus();
        if n > 64 {
            return Err(CostError::TooManyQpus(n));
        }
        let backend = if n <= threshold.min(DENSE_HARD_CAP) {
            TableBackend::Dense(precompute_dense(&network))
        } else {
            TableBackend::Memo(DashMap::new())
        };
        Ok(CostEngine {
            network,
            backend,
            threshold,
        })
    }

    pub fn with_default_threshold(network: Arc<NetworkGraph>) -> Result<Self, CostError> {
        Self::new(network, DEFAULT_PRECOMPUTE_THRESHOLD)
    }

    pub fn network(&self) -> &NetworkGraph {
        &self.network
    }

    pub fn is_precomputed(&self) -> bool {
        matches!(self.backend, TableBackend::Dense(_))
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Forest cost of a configuration pair. Zero when every receiver QPU
    /// already hosts a root node.
    pub fn cost(&self, pair: ConfigPair) -> u32 {
        debug_assert!(pair.root_cfg != 0);
        debug_assert!(
            pair.root_cfg | pair.rec_cfg < 1 << self.network.num_qpus(),
            "mask outside network"
        );
        if pair.rec_cfg & !pair.root_cfg == 0 {
            return 0;
        }
        match &self.backend {
            TableBackend::Dense(table) => {
                let n = self.network.num_qpus();
                table[((pair.root_cfg as usize) << n) | pair.rec_cfg as usize]
            }
            TableBackend::Memo(memo) => *memo
                .entry(pair)
                .or_insert_with(|| forest_cost(pair, &self.network).1),
        }
    }

    /// Serialize a dense table keyed by the network fingerprint.
    pub fn save_table(&self, mut w: impl Write) -> Result<(), CostError> {
        let TableBackend::Dense(table) = &self.backend else {
            return Err(CostError::NoDenseTable);
        };
        let io = |e: std::io::Error| CostError::BadTableFile(e.to_string());
        w.write_all(b"QNPT").map_err(io)?;
        w.write_all(&1u32.to_le_bytes()).map_err(io)?;
        w.write_all(&self.network.fingerprint()).map_err(io)?;
        w.write_all(&(self.network.num_qpus() as u32).to_le_bytes())
            .map_err(io)?;
        for &c in table {
            w.write_all(&c.to_le_bytes()).map_err(io)?;
        }
        Ok(())
    }

    /// Load a dense table saved by [`CostEngine::save_table`], validating
    /// the network fingerprint.
    pub fn load_table(network: Arc<NetworkGraph>, mut r: impl Read) -> Result<Self, CostError> {
        let bad = |m: &str| CostError::BadTableFile(m.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|e| CostError::BadTableFile(e.to_string()))?;
        if &magic != b"QNPT" {
            return Err(bad("bad magic"));
        }
        let mut buf4 = [0u8; 4];
        r.read_exact(&mut buf4)
            .map_err(|e| CostError::BadTableFile(e.to_string()))?;
        if u32::from_le_bytes(buf4) != 1 {
            return Err(bad("unsupported version"));
        }
        let mut fp = [0u8; 32];
        r.read_exact(&mut fp)
            .map_err(|e| CostError::BadTableFile(e.to_string()))?;
        if fp != network.fingerprint() {
            return Err(CostError::FingerprintMismatch);
        }
        r.read_exact(&mut buf4)
            .map_err(|e| CostError::BadTableFile(e.to_string()))?;
        let n = u32::from_le_bytes(buf4) as usize;
        if n != network.num_qpus() || n > DENSE_HARD_CAP {
            return Err(bad("size mismatch"));
        }
        let entries = 1usize << (2 * n);
        let mut table = vec![0u32; entries];
        let mut bytes = vec![0u8; entries * 4];
        r.read_exact(&mut bytes)
            .map_err(|e| CostError::BadTableFile(e.to_string()))?;
        for (i, chunk) in bytes.chunks_exact(4).enumerate() {
            table[i] = u32::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(CostEngine {
            network,
            backend: TableBackend::Dense(table),
            threshold: n,
        })
    }
}

fn precompute_dense(g: &NetworkGraph) -> Vec<u32> {
    let n = g.num_qpus();
    let size = 1usize << (2 * n);
    let mut table = vec![0u32; size];
    table
        .par_chunks_mut(1 << n)
        .enumerate()
        .skip(1)
        .for_each(|(root_cfg, row)| {
            let tree = root_tree(root_cfg as u64, g);
            for (rec_cfg, slot) in row.iter_mut().enumerate() {
                *slot = forest_from_tree(&tree, rec_cfg as u64, g).1;
            }
        });
    table
}

/// The configuration pair of an edge under a node -> QPU map. Dummy nodes
/// contribute the QPU they are pinned to.
pub fn edge_masks(edge: &HEdge, h: &TemporalHypergraph, qpu_of: &[QpuId]) -> ConfigPair {
    let mask_of = |set: &[usize]| -> u64 {
        let mut m = 0u64;
        for &v in set {
            debug_assert!(!matches!(h.node(v), HNode::Dummy { qpu } if *qpu != qpu_of[v]));
            m |= 1 << qpu_of[v];
        }
        m
    };
    ConfigPair {
        root_cfg: mask_of(&edge.root),
        rec_cfg: mask_of(&edge.rec),
    }
}

/// Cost of one edge under an assignment, via the engine's table.
/// State-edges come out as the hop distance between their endpoints' QPUs.
pub fn edge_cost(
    edge: &HEdge,
    h: &TemporalHypergraph,
    qpu_of: &[QpuId],
    engine: &CostEngine,
) -> u32 {
    engine.cost(edge_masks(edge, h, qpu_of))
}

/// Total e-bit cost: the sum of every edge's forest size, state-edges
/// included.
pub fn total_cost(h: &TemporalHypergraph, qpu_of: &[QpuId], engine: &CostEngine) -> u64 {
    h.edges()
        .iter()
        .map(|e| edge_cost(e, h, qpu_of, engine) as u64)
        .sum()
}

/// Table-bypassing recomputation: every forest built from scratch. Used to
/// validate engine-backed results.
pub fn total_cost_uncached(h: &TemporalHypergraph, qpu_of: &[QpuId], g: &NetworkGraph) -> u64 {
    h.edges()
        .iter()
        .map(|e| forest_cost(edge_masks(e, h, qpu_of), g).1 as u64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{make_grid, make_linear, make_random};

    #[test]
    fn alltoall_examples() {
        let p = |r, s| ConfigPair::new(r, s);
        assert_eq!(alltoall_cost(p(0b001, 0b001)), 0);
        assert_eq!(alltoall_cost(p(0b001, 0b110)), 2);
        assert_eq!(alltoall_cost(p(0b011, 0b110)), 1);
    }

    #[test]
    fn root_tree_single_node() {
        let g = make_linear(4, 2).unwrap();
        let t = root_tree(0b0100, &g);
        assert_eq!(t.nodes, vec![2]);
        assert!(t.edges.is_empty());
    }

    #[test]
    fn root_tree_path_ends() {
        let g = make_linear(4, 2).unwrap();
        let t = root_tree(0b1001, &g);
        assert_eq!(t.nodes, vec![0, 1, 2, 3]);
        assert_eq!(t.edges, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn forest_linear_example() {
        // root {Q0}, receivers {Q1, Q3} on a 4-node path
        let g = make_linear(4, 2).unwrap();
        let (edges, cost) = forest_cost(ConfigPair::new(0b0001, 0b1010), &g);
        assert_eq!(cost, 3);
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn forest_receivers_on_tree_cost_nothing() {
        let g = make_grid(2, 3, 2).unwrap();
        let (edges, cost) = forest_cost(ConfigPair::new(0b111, 0b101), &g);
        assert_eq!(cost, 0);
        assert!(edges.is_empty());
    }

    #[test]
    fn forest_equals_alltoall_on_complete_networks() {
        for n in 2..=5u32 {
            let g = make_random(n, 1.0, 2, 0).unwrap();
            for root in 1u64..1 << n {
                for rec in 0u64..1 << n {
                    let pair = ConfigPair::new(root, rec);
                    assert_eq!(
                        forest_cost(pair, &g).1,
                        alltoall_cost(pair),
                        "n={n} root={root:b} rec={rec:b}"
                    );
                }
            }
        }
    }

    #[test]
    fn forest_monotone_in_receivers() {
        // adding receivers never lowers the cost (the root tree is fixed by
        // the root mask alone). The symmetric claim for roots is false:
        // growing the root set reshapes the tree, and a receiver that sat
        // on a Steiner point of the old tree can become chargeable.
        for (name, g) in [
            ("linear", make_linear(5, 2).unwrap()),
            ("grid", make_grid(2, 2, 2).unwrap()),
            ("er", make_random(5, 0.5, 2, 7).unwrap()),
        ] {
            let n = g.num_qpus();
            for root in 1u64..1 << n {
                for rec in 0u64..1 << n {
                    let base = forest_cost(ConfigPair::new(root, rec), &g).1;
                    for b in 0..n as u64 {
                        if rec >> b & 1 == 0 {
                            let more = forest_cost(ConfigPair::new(root, rec | 1 << b), &g).1;
                            assert!(more >= base, "{name}: rec bit {b} root={root:b} rec={rec:b}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn root_tree_steiner_points_can_absorb_receivers() {
        // grid 2x2, roots {1, 2}: the tree routes through QPU 0, so the
        // receiver {0} is free; with roots {1, 2, 3} the tree is 1-3-2 and
        // the receiver costs one auxiliary edge
        let g = make_grid(2, 2, 2).unwrap();
        assert_eq!(forest_cost(ConfigPair::new(0b0110, 0b0001), &g).1, 0);
        assert_eq!(forest_cost(ConfigPair::new(0b1110, 0b0001), &g).1, 1);
    }

    #[test]
    fn dense_and_memo_agree() {
        let g = Arc::new(make_grid(2, 3, 2).unwrap());
        let dense = CostEngine::new(g.clone(), 10).unwrap();
        let memo = CostEngine::new(g.clone(), 0).unwrap();
        assert!(dense.is_precomputed());
        assert!(!memo.is_precomputed());
        let n = g.num_qpus();
        for root in 1u64..1 << n {
            for rec in 0u64..1 << n {
                let pair = ConfigPair::new(root, rec);
                assert_eq!(dense.cost(pair), memo.cost(pair));
                assert_eq!(dense.cost(pair), forest_cost(pair, &g).1);
            }
        }
    }

    #[test]
    fn table_roundtrip_and_fingerprint() {
        let g = Arc::new(make_linear(4, 2).unwrap());
        let engine = CostEngine::new(g.clone(), 10).unwrap();
        let mut buf = Vec::new();
        engine.save_table(&mut buf).unwrap();
        let loaded = CostEngine::load_table(g.clone(), buf.as_slice()).unwrap();
        for root in 1u64..16 {
            for rec in 0u64..16 {
                let pair = ConfigPair::new(root, rec);
                assert_eq!(engine.cost(pair), loaded.cost(pair));
            }
        }
        let other = Arc::new(make_grid(2, 2, 2).unwrap());
        assert!(matches!(
            CostEngine::load_table(other, buf.as_slice()),
            Err(CostError::FingerprintMismatch)
        ));
    }

    #[test]
    fn memo_engine_rejects_oversized_networks() {
        // networks beyond 64 QPUs cannot be mask-encoded
        let g = Arc::new(make_linear(65, 1).unwrap());
        assert!(matches!(
            CostEngine::new(g, 10),
            Err(CostError::TooManyQpus(65))
        ));
    }
}
