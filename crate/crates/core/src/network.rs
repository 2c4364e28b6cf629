//! QPU network graphs: topology generators, all-pairs hop distances,
//! matching-based coarsening and partial uncoarsening (node expansion).

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rustworkx_core::max_weight_matching::max_weight_matching;
use rustworkx_core::petgraph;
use sha2::{Digest, Sha256};

use crate::error::NetworkError;

pub type QpuId = u32;

const RANDOM_RETRY_BUDGET: u32 = 1000;

/// One QPU: a data-qubit capacity plus the set of finest-level QPU ids it
/// stands for (a singleton at level 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qpu {
    pub capacity: u32,
    pub members: Vec<u32>,
}

/// An undirected QPU graph with unit-length links and a precomputed
/// all-pairs hop-distance table. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    qpus: Vec<Qpu>,
    links: Vec<(QpuId, QpuId)>,
    adj: Vec<Vec<QpuId>>,
    dist: Vec<u32>,
    level: u32,
}

impl NetworkGraph {
    /// Level-0 graph from per-QPU capacities and an undirected link list.
    pub fn new(capacities: Vec<u32>, links: Vec<(QpuId, QpuId)>) -> Result<Self, NetworkError> {
        let qpus = capacities
            .into_iter()
            .enumerate()
            .map(|(i, capacity)| Qpu {
                capacity,
                members: vec![i as u32],
            })
            .collect();
        Self::from_parts(qpus, links, 0)
    }

    pub(crate) fn from_parts(
        qpus: Vec<Qpu>,
        links: Vec<(QpuId, QpuId)>,
        level: u32,
    ) -> Result<Self, NetworkError> {
        let n = qpus.len();
        if n < 1 {
            return Err(NetworkError::TooFewQpus { min: 1, got: 0 });
        }
        if qpus.iter().any(|q| q.capacity == 0) {
            return Err(NetworkError::ZeroCapacity);
        }
        let mut normalized = BTreeSet::new();
        for &(a, b) in &links {
            if a as usize >= n || b as usize >= n {
                return Err(NetworkError::BadLink(a, b));
            }
            if a == b {
                return Err(NetworkError::SelfLink(a));
            }
            normalized.insert((a.min(b), a.max(b)));
        }
        let links: Vec<_> = normalized.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &links {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let dist = all_pairs_bfs(n, &adj)?;
        Ok(NetworkGraph {
            qpus,
            links,
            adj,
            dist,
            level,
        })
    }

    pub fn num_qpus(&self) -> usize {
        self.qpus.len()
    }

    pub fn capacity(&self, q: QpuId) -> u32 {
        self.qpus[q as usize].capacity
    }

    pub fn total_capacity(&self) -> u64 {
        self.qpus.iter().map(|q| q.capacity as u64).sum()
    }

    pub fn members(&self, q: QpuId) -> &[u32] {
        &self.qpus[q as usize].members
    }

    pub fn qpus(&self) -> &[Qpu] {
        &self.qpus
    }

    pub fn links(&self) -> &[(QpuId, QpuId)] {
        &self.links
    }

    pub fn neighbors(&self, q: QpuId) -> &[QpuId] {
        &self.adj[q as usize]
    }

    pub fn has_link(&self, a: QpuId, b: QpuId) -> bool {
        self.adj[a as usize].binary_search(&b).is_ok()
    }

    /// Hop distance between two QPUs.
    pub fn dist(&self, a: QpuId, b: QpuId) -> u32 {
        self.dist[a as usize * self.qpus.len() + b as usize]
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Stable content hash over the adjacency structure, used to key
    /// persisted cost tables.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update((self.qpus.len() as u64).to_le_bytes());
        for &(a, b) in &self.links {
            hasher.update(a.to_le_bytes());
            hasher.update(b.to_le_bytes());
        }
        hasher.finalize().into()
    }

    /// Adjacency-list text dump for fixtures.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "network level={} qpus={} links={}",
            self.level,
            self.qpus.len(),
            self.links.len()
        );
        for (i, qpu) in self.qpus.iter().enumerate() {
            let members = qpu
                .members
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(out, "qpu {i} cap={} members={members}", qpu.capacity);
        }
        for &(a, b) in &self.links {
            let _ = writeln!(out, "link {a} {b}");
        }
        out
    }
}

fn all_pairs_bfs(n: usize, adj: &[Vec<QpuId>]) -> Result<Vec<u32>, NetworkError> {
    let mut dist = vec![u32::MAX; n * n];
    let mut queue = std::collections::VecDeque::new();
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        queue.clear();
        queue.push_back(s as u32);
        while let Some(u) = queue.pop_front() {
            let du = row[u as usize];
            for &v in &adj[u as usize] {
                if row[v as usize] == u32::MAX {
                    row[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        if row.iter().any(|&d| d == u32::MAX) {
            return Err(NetworkError::Disconnected);
        }
    }
    Ok(dist)
}

/// Path graph of `n_qpus` nodes.
pub fn make_linear(n_qpus: u32, capacity: u32) -> Result<NetworkGraph, NetworkError> {
    if n_qpus < 2 {
        return Err(NetworkError::TooFewQpus {
            min: 2,
            got: n_qpus,
        });
    }
    let links = (0..n_qpus - 1).map(|i| (i, i + 1)).collect();
    NetworkGraph::new(vec![capacity; n_qpus as usize], links)
}

/// 2D lattice with 4-neighbour links, row-major node numbering.
pub fn make_grid(rows: u32, cols: u32, capacity: u32) -> Result<NetworkGraph, NetworkError> {
    let n = rows * cols;
    if n < 2 {
        return Err(NetworkError::TooFewQpus { min: 2, got: n });
    }
    let mut links = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let id = r * cols + c;
            if c + 1 < cols {
                links.push((id, id + 1));
            }
            if r + 1 < rows {
                links.push((id, id + cols));
            }
        }
    }
    NetworkGraph::new(vec![capacity; n as usize], links)
}

/// Erdos-Renyi graph with link probability `p`, resampled until connected
/// (up to a bounded retry budget).
pub fn make_random(
    n_qpus: u32,
    p: f64,
    capacity: u32,
    seed: u64,
) -> Result<NetworkGraph, NetworkError> {
    if n_qpus < 2 {
        return Err(NetworkError::TooFewQpus {
            min: 2,
            got: n_qpus,
        });
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(NetworkError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_RETRY_BUDGET {
        let mut links = Vec::new();
        for a in 0..n_qpus {
            for b in a + 1..n_qpus {
                if rng.gen_bool(p) {
                    links.push((a, b));
                }
            }
        }
        match NetworkGraph::new(vec![capacity; n_qpus as usize], links) {
            Ok(g) => return Ok(g),
            Err(NetworkError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(NetworkError::RetryBudgetExceeded(RANDOM_RETRY_BUDGET))
}

/// Which matching algorithm backs the coarsener.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingMode {
    /// Blossom-based optimum over (cardinality, total weight), then refined
    /// to the lexicographically smallest optimal edge set.
    Exact,
    /// Heaviest-edge-first greedy with lexicographic tie-breaking.
    Greedy,
}

impl std::fmt::Display for MatchingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatchingMode::Exact => f.write_str("exact"),
            MatchingMode::Greedy => f.write_str("greedy"),
        }
    }
}

fn merge_weight(g: &NetworkGraph, a: QpuId, b: QpuId) -> i64 {
    let d = g.capacity(a) as i64 - g.capacity(b) as i64;
    -(d * d)
}

/// A matching over the network links, favouring merges of similar-capacity
/// QPUs via the weight -(|Q_i| - |Q_j|)^2.
///
/// The result maximizes cardinality first and total weight second (an empty
/// matching is never preferred while links remain), with ties broken toward
/// the lexicographically smallest edge set. Returns the empty set when the
/// graph has no links.
pub fn compute_matching(g: &NetworkGraph, mode: MatchingMode) -> Vec<(QpuId, QpuId)> {
    match mode {
        MatchingMode::Greedy => greedy_matching(g),
        MatchingMode::Exact => exact_matching(g),
    }
}

fn greedy_matching(g: &NetworkGraph) -> Vec<(QpuId, QpuId)> {
    let mut edges: Vec<_> = g.links().to_vec();
    edges.sort_by_key(|&(a, b)| (-merge_weight(g, a, b), a, b));
    let mut used = vec![false; g.num_qpus()];
    let mut matching = Vec::new();
    for (a, b) in edges {
        if !used[a as usize] && !used[b as usize] {
            used[a as usize] = true;
            used[b as usize] = true;
            matching.push((a, b));
        }
    }
    matching.sort_unstable();
    matching
}

/// Maximum-cardinality maximum-weight matching restricted to edges avoiding
/// `removed` nodes. Returns (cardinality, total weight).
fn blossom_optimum(
    n: usize,
    edges: &[(QpuId, QpuId, i64)],
    removed: &[bool],
) -> (usize, i64) {
    let mut graph = petgraph::graph::UnGraph::<(), i64>::default();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for &(a, b, w) in edges {
        if !removed[a as usize] && !removed[b as usize] {
            graph.add_edge(nodes[a as usize], nodes[b as usize], w);
        }
    }
    let matching = max_weight_matching(
        &graph,
        true,
        |e| Ok::<i128, std::convert::Infallible>(*e.weight() as i128),
        false,
    )
    .unwrap();
    let mut weight = 0i64;
    let lookup: std::collections::HashMap<(u32, u32), i64> = edges
        .iter()
        .map(|&(a, b, w)| ((a.min(b), a.max(b)), w))
        .collect();
    for &(a, b) in &matching {
        let key = ((a as u32).min(b as u32), (a as u32).max(b as u32));
        weight += lookup[&key];
    }
    (matching.len(), weight)
}

fn exact_matching(g: &NetworkGraph) -> Vec<(QpuId, QpuId)> {
    if g.links().is_empty() {
        return Vec::new();
    }
    let n = g.num_qpus();
    let edges: Vec<(QpuId, QpuId, i64)> = g
        .links()
        .iter()
        .map(|&(a, b)| (a, b, merge_weight(g, a, b)))
        .collect();
    let mut removed = vec![false; n];
    let (mut card, mut weight) = blossom_optimum(n, &edges, &removed);
    let mut committed = Vec::new();
    // Lexicographic refinement: commit edges in lex order whenever the
    // remainder still achieves the target (cardinality, weight).
    for &(a, b, w) in &edges {
        if card == 0 {
            break;
        }
        if removed[a as usize] || removed[b as usize] {
            continue;
        }
        removed[a as usize] = true;
        removed[b as usize] = true;
        let (rc, rw) = blossom_optimum(n, &edges, &removed);
        if rc + 1 == card && rw + w == weight {
            committed.push((a, b));
            card = rc;
            weight = rw;
        } else {
            removed[a as usize] = false;
            removed[b as usize] = false;
        }
    }
    committed.sort_unstable();
    committed
}

/// Result of a single-level coarsening step.
#[derive(Debug, Clone)]
pub struct CoarsenResult {
    pub graph: NetworkGraph,
    /// Input QPU id -> output QPU id.
    pub merge_map: Vec<QpuId>,
    /// False when the matching ran out before reaching the requested size.
    pub reached_target: bool,
}

/// Contract matched edges until the node count reaches `n_max`, stopping
/// mid-matching as soon as the target size is hit. Merged QPUs sum their
/// capacities; parallel links collapse to one unit link.
pub fn coarsen_network(g: &NetworkGraph, n_max: usize, mode: MatchingMode) -> CoarsenResult {
    let n_max = n_max.max(1);
    if g.num_qpus() <= n_max {
        return CoarsenResult {
            graph: g.clone(),
            merge_map: (0..g.num_qpus() as u32).collect(),
            reached_target: true,
        };
    }
    let mut cur = g.clone();
    let mut map: Vec<QpuId> = (0..g.num_qpus() as u32).collect();
    loop {
        let matching = compute_matching(&cur, mode);
        if matching.is_empty() {
            return CoarsenResult {
                graph: cur,
                merge_map: map,
                reached_target: false,
            };
        }
        let mut group: Vec<u32> = (0..cur.num_qpus() as u32).collect();
        let mut count = cur.num_qpus();
        for &(a, b) in &matching {
            group[b as usize] = a;
            count -= 1;
            if count == n_max {
                break;
            }
        }
        let (next, step_map) = contract(&cur, &group);
        for entry in &mut map {
            *entry = step_map[group[*entry as usize] as usize];
        }
        cur = next;
        if count == n_max {
            return CoarsenResult {
                graph: cur,
                merge_map: map,
                reached_target: true,
            };
        }
    }
}

/// Contract nodes that share a group representative. Coarse nodes are
/// ordered by their smallest contained finest-level member for determinism.
fn contract(g: &NetworkGraph, group: &[u32]) -> (NetworkGraph, Vec<QpuId>) {
    let n = g.num_qpus();
    let mut reps: Vec<u32> = group
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    reps.sort_by_key(|&r| {
        (0..n)
            .filter(|&i| group[i] == r)
            .map(|i| g.members(i as u32)[0])
            .min()
            .unwrap()
    });
    let rep_index: std::collections::HashMap<u32, u32> = reps
        .iter()
        .enumerate()
        .map(|(i, &r)| (r, i as u32))
        .collect();
    let step_map: Vec<QpuId> = (0..n).map(|i| rep_index[&group[i]]).collect();
    let mut qpus = vec![
        Qpu {
            capacity: 0,
            members: Vec::new(),
        };
        reps.len()
    ];
    for i in 0..n {
        let c = step_map[i] as usize;
        qpus[c].capacity += g.capacity(i as u32);
        qpus[c].members.extend_from_slice(g.members(i as u32));
    }
    for qpu in &mut qpus {
        qpu.members.sort_unstable();
    }
    let links: Vec<(QpuId, QpuId)> = g
        .links()
        .iter()
        .map(|&(a, b)| (step_map[a as usize], step_map[b as usize]))
        .filter(|&(a, b)| a != b)
        .collect();
    let graph =
        NetworkGraph::from_parts(qpus, links, g.level() + 1).expect("contraction stays connected");
    (graph, step_map)
}

/// The full coarsening ladder from the input graph down to at most `chi`
/// QPUs, with per-level merge maps.
#[derive(Debug, Clone)]
pub struct CoarseningHierarchy {
    /// levels[0] is the input (finest) graph.
    pub levels: Vec<NetworkGraph>,
    /// merge_maps[l] maps levels[l] QPU ids to levels[l+1] QPU ids.
    pub merge_maps: Vec<Vec<QpuId>>,
    pub chi: u32,
    pub matching_mode: MatchingMode,
}

impl CoarseningHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn coarsest(&self) -> &NetworkGraph {
        self.levels.last().unwrap()
    }
}

/// Repeatedly coarsen by a factor `chi`: level sizes follow
/// N, floor(N/chi), floor(N/chi^2), ... until the size is at most chi.
pub fn coarsen_network_recursive(
    g: &NetworkGraph,
    chi: u32,
    mode: MatchingMode,
) -> Result<CoarseningHierarchy, NetworkError> {
    if chi < 2 {
        return Err(NetworkError::BadChi(chi));
    }
    let mut levels = vec![g.clone()];
    let mut merge_maps = Vec::new();
    let mut k = g.num_qpus();
    while k > chi as usize {
        let n_max = k / chi as usize;
        let step = coarsen_network(levels.last().unwrap(), n_max, mode);
        if step.graph.num_qpus() == k {
            break; // no merge possible; cannot happen on connected graphs
        }
        k = step.graph.num_qpus();
        levels.push(step.graph);
        merge_maps.push(step.merge_map);
    }
    Ok(CoarseningHierarchy {
        levels,
        merge_maps,
        chi,
        matching_mode: mode,
    })
}

/// How a node of an expanded sub-network relates to the graph it was
/// derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandedNodeClass {
    /// A constituent of the expanded node, at the parent (finer) level.
    Constituent,
    /// A node of the coarse graph carried over unchanged; payload is its
    /// index in the coarse graph.
    Retained(QpuId),
}

/// Result of [`expand_node`]: the sub-network plus provenance per node.
#[derive(Debug, Clone)]
pub struct ExpandedNetwork {
    pub graph: NetworkGraph,
    pub classes: Vec<ExpandedNodeClass>,
}

impl ExpandedNetwork {
    pub fn constituents(&self) -> impl Iterator<Item = QpuId> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(|(_, c)| matches!(c, ExpandedNodeClass::Constituent))
            .map(|(i, _)| i as QpuId)
    }
}

/// Replace coarse node `v` by its constituents from the parent (finer)
/// level graph. Constituents link to their parent-level neighbours inside
/// `v` and to the coarse node containing any outside neighbour; all other
/// coarse nodes and links are preserved.
pub fn expand_node(
    g_coarse: &NetworkGraph,
    g_parent: &NetworkGraph,
    v: QpuId,
) -> Result<ExpandedNetwork, NetworkError> {
    let n = g_coarse.num_qpus();
    if v as usize >= n {
        return Err(NetworkError::NoSuchQpu(v));
    }
    let v_members: BTreeSet<u32> = g_coarse.members(v).iter().copied().collect();
    // parent-level nodes fully contained in v
    let constituents: Vec<QpuId> = (0..g_parent.num_qpus() as u32)
        .filter(|&u| g_parent.members(u).iter().all(|m| v_members.contains(m)))
        .collect();
    if constituents.is_empty() {
        return Err(NetworkError::HierarchyMismatch(format!(
            "no parent-level node is contained in coarse QPU {v}"
        )));
    }
    let covered: usize = constituents
        .iter()
        .map(|&u| g_parent.members(u).len())
        .sum();
    if covered != v_members.len() {
        return Err(NetworkError::HierarchyMismatch(format!(
            "constituents of QPU {v} cover {covered} of {} members",
            v_members.len()
        )));
    }
    // output order: constituents (parent order), then retained coarse nodes
    let mut qpus = Vec::with_capacity(constituents.len() + n - 1);
    let mut classes = Vec::with_capacity(qpus.capacity());
    for &u in &constituents {
        qpus.push(Qpu {
            capacity: g_parent.capacity(u),
            members: g_parent.members(u).to_vec(),
        });
        classes.push(ExpandedNodeClass::Constituent);
    }
    let mut coarse_to_new: Vec<Option<u32>> = vec![None; n];
    for c in 0..n as u32 {
        if c == v {
            continue;
        }
        coarse_to_new[c as usize] = Some(qpus.len() as u32);
        qpus.push(Qpu {
            capacity: g_coarse.capacity(c),
            members: g_coarse.members(c).to_vec(),
        });
        classes.push(ExpandedNodeClass::Retained(c));
    }
    // owner of each finest-level member among retained coarse nodes
    let mut member_owner = std::collections::HashMap::new();
    for c in 0..n as u32 {
        if c == v {
            continue;
        }
        for &m in g_coarse.members(c) {
            member_owner.insert(m, coarse_to_new[c as usize].unwrap());
        }
    }
    let constituent_index: std::collections::HashMap<QpuId, u32> = constituents
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, i as u32))
        .collect();
    let mut links = Vec::new();
    for (i, &u) in constituents.iter().enumerate() {
        for &w in g_parent.neighbors(u) {
            if let Some(&j) = constituent_index.get(&w) {
                links.push((i as u32, j));
            } else {
                let owner = member_owner[&g_parent.members(w)[0]];
                links.push((i as u32, owner));
            }
        }
    }
    for &(a, b) in g_coarse.links() {
        if a != v && b != v {
            links.push((
                coarse_to_new[a as usize].unwrap(),
                coarse_to_new[b as usize].unwrap(),
            ));
        }
    }
    let graph = NetworkGraph::from_parts(qpus, links, g_parent.level())?;
    Ok(ExpandedNetwork { graph, classes })
}
