//! Temporal hypergraphs over (qubit, timestep) nodes: state-edges link
//! temporal successors, grouped hyper-edges cover teleportation-compatible
//! CP gate runs, and recursive pairwise merging of adjacent timesteps
//! coarsens the graph down to depth 1.

use std::collections::HashMap;

use crate::circuit::{Circuit, Gate};
use crate::error::PartitionError;
use crate::network::QpuId;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HNode {
    /// A (qubit, timestep) pair; `span` is the inclusive range of original
    /// timesteps a coarsened node covers ([t, t] at level 0).
    Circuit { qubit: u32, timestep: u32, span: (u32, u32) },
    /// A locked stand-in for all circuit content assigned to an external
    /// partition; carries only the QPU it is pinned to.
    Dummy { qpu: QpuId },
}

impl HNode {
    pub fn is_dummy(&self) -> bool {
        matches!(self, HNode::Dummy { .. })
    }

    pub fn timestep(&self) -> Option<u32> {
        match self {
            HNode::Circuit { timestep, .. } => Some(*timestep),
            HNode::Dummy { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// Temporal successor edge between (q, t) and (q, t+1).
    State,
    /// A single CP gate.
    Gate,
    /// A run of CP gates merged by teleportation compatibility.
    Group,
}

/// A hyper-edge split into root (control-qubit) and receiver (target)
/// node sets. State-edges put the earlier node in the root set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HEdge {
    pub kind: EdgeKind,
    /// Sorted, deduplicated; disjoint from `rec`.
    pub root: Vec<NodeId>,
    pub rec: Vec<NodeId>,
    /// Root node at the maximal timestep of the edge.
    pub final_root: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalHypergraph {
    pub num_qubits: u32,
    /// Depth at this coarsening level.
    pub depth: u32,
    pub level: u32,
    nodes: Vec<HNode>,
    edges: Vec<HEdge>,
    /// For coarsened graphs: coarse node id -> ids of the finer-level nodes
    /// it merged (empty on level-0 and cut graphs).
    children: Vec<Vec<NodeId>>,
}

impl TemporalHypergraph {
    pub(crate) fn from_parts(
        num_qubits: u32,
        depth: u32,
        level: u32,
        nodes: Vec<HNode>,
        edges: Vec<HEdge>,
        children: Vec<Vec<NodeId>>,
    ) -> Self {
        debug_assert!(edges.iter().all(|e| {
            !e.root.is_empty()
                && !e.rec.is_empty()
                && e.root.iter().all(|n| !e.rec.contains(n))
        }));
        TemporalHypergraph {
            num_qubits,
            depth,
            level,
            nodes,
            edges,
            children,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, id: NodeId) -> &HNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[HNode] {
        &self.nodes
    }

    pub fn edge(&self, id: EdgeId) -> &HEdge {
        &self.edges[id]
    }

    pub fn edges(&self) -> &[HEdge] {
        &self.edges
    }

    /// Fine-level children of a coarse node (empty unless this graph was
    /// produced by [`coarsen_temporal`]).
    pub fn children(&self, id: NodeId) -> &[NodeId] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_children(&self) -> bool {
        !self.children.is_empty()
    }

    pub fn dummy_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_dummy())
            .map(|(i, _)| i)
    }

    pub fn live_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_dummy()).count()
    }

    /// Per-node incident edges with the side each node sits on.
    pub fn incidence(&self) -> Vec<Vec<(EdgeId, Side)>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for (eid, edge) in self.edges.iter().enumerate() {
            for &v in &edge.root {
                inc[v].push((eid, Side::Root));
            }
            for &v in &edge.rec {
                inc[v].push((eid, Side::Rec));
            }
        }
        inc
    }

    /// Line-oriented text dump for fixtures.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "hypergraph level={} qubits={} depth={} nodes={} edges={}",
            self.level,
            self.num_qubits,
            self.depth,
            self.nodes.len(),
            self.edges.len()
        );
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                HNode::Circuit { qubit, timestep, span } => {
                    let _ = writeln!(
                        out,
                        "node {i} q={qubit} t={timestep} span={}..{}",
                        span.0, span.1
                    );
                }
                HNode::Dummy { qpu } => {
                    let _ = writeln!(out, "node {i} dummy qpu={qpu}");
                }
            }
        }
        let fmt_set = |s: &[NodeId]| {
            s.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        for (i, edge) in self.edges.iter().enumerate() {
            let kind = match edge.kind {
                EdgeKind::State => "state",
                EdgeKind::Gate => "gate",
                EdgeKind::Group => "group",
            };
            let _ = writeln!(
                out,
                "edge {i} {kind} root={{{}}} rec={{{}}} final={}",
                fmt_set(&edge.root),
                fmt_set(&edge.rec),
                edge.final_root
            );
        }
        out
    }
}

/// Which side of a hyper-edge a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Root,
    Rec,
}

/// A maximal run of CP gates sharing a control qubit, teleportation-
/// compatible because the control qubit only sees diagonal single-qubit
/// gates or further CPs-as-control in between.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateGroup {
    pub control: u32,
    /// (timestep, target qubit) per gate, in time order.
    pub gates: Vec<(u32, u32)>,
}

/// Group the circuit's CP gates by gate-teleportation compatibility.
///
/// A run on control qubit q extends across timestep t when qubit q at t
/// carries nothing (identity), a diagonal SingleU, or a CP controlled on q.
/// A non-diagonal SingleU on q, or a CP where q is the target, ends the
/// run.
pub fn group_gates(circuit: &Circuit) -> Vec<GateGroup> {
    let mut groups = Vec::new();
    for q in 0..circuit.num_qubits() {
        let mut current: Option<GateGroup> = None;
        for t in 0..circuit.depth() {
            match circuit.gate_on(q, t) {
                None => {}
                Some(Gate::SingleU { theta, .. }) => {
                    if *theta != 0.0 {
                        if let Some(g) = current.take() {
                            groups.push(g);
                        }
                    }
                }
                Some(Gate::ControlledPhase { control, target, .. }) => {
                    if *control == q {
                        current
                            .get_or_insert_with(|| GateGroup {
                                control: q,
                                gates: Vec::new(),
                            })
                            .gates
                            .push((t, *target));
                    } else {
                        debug_assert_eq!(*target, q);
                        if let Some(g) = current.take() {
                            groups.push(g);
                        }
                    }
                }
            }
        }
        if let Some(g) = current.take() {
            groups.push(g);
        }
    }
    groups
}

/// Build the level-0 temporal hypergraph of a circuit: one node per
/// (qubit, timestep), a state-edge per temporal successor pair, and one
/// hyper-edge per compatibility group of CP gates. The root set of a group
/// covers every control-qubit node over the group's time span.
pub fn build_temporal_hypergraph(circuit: &Circuit) -> TemporalHypergraph {
    let n = circuit.num_qubits();
    let d = circuit.depth();
    let node_id = |q: u32, t: u32| -> NodeId { (q * d + t) as NodeId };
    let mut nodes = Vec::with_capacity((n * d) as usize);
    for q in 0..n {
        for t in 0..d {
            nodes.push(HNode::Circuit {
                qubit: q,
                timestep: t,
                span: (t, t),
            });
        }
    }
    let mut edges = Vec::new();
    for q in 0..n {
        for t in 0..d.saturating_sub(1) {
            edges.push(HEdge {
                kind: EdgeKind::State,
                root: vec![node_id(q, t)],
                rec: vec![node_id(q, t + 1)],
                final_root: node_id(q, t),
            });
        }
    }
    for group in group_gates(circuit) {
        let t_min = group.gates.first().unwrap().0;
        let t_max = group.gates.last().unwrap().0;
        let root: Vec<NodeId> = (t_min..=t_max).map(|t| node_id(group.control, t)).collect();
        let mut rec: Vec<NodeId> = group.gates.iter().map(|&(t, tq)| node_id(tq, t)).collect();
        rec.sort_unstable();
        rec.dedup();
        edges.push(HEdge {
            kind: if group.gates.len() == 1 {
                EdgeKind::Gate
            } else {
                EdgeKind::Group
            },
            root,
            rec,
            final_root: node_id(group.control, t_max),
        });
    }
    TemporalHypergraph::from_parts(n, d, 0, nodes, edges, Vec::new())
}

/// Merge temporally adjacent node pairs (q, 2t) and (q, 2t+1); an odd
/// final timestep passes through unmerged. State-edges that become internal
/// to a merged node are dropped; all other edges re-home to the merged
/// nodes with root/receiver membership preserved. Dummy nodes pass through
/// unmerged.
pub fn coarsen_temporal(h: &TemporalHypergraph) -> Result<TemporalHypergraph, PartitionError> {
    if h.depth < 2 {
        return Err(PartitionError::DepthTooSmall(h.depth));
    }
    let coarse_depth = h.depth / 2 + h.depth % 2;
    let mut coarse_nodes: Vec<HNode> = Vec::new();
    let mut children: Vec<Vec<NodeId>> = Vec::new();
    let mut node_map: Vec<NodeId> = vec![usize::MAX; h.num_nodes()];
    let mut slot: HashMap<(u32, u32), NodeId> = HashMap::new();
    for (id, node) in h.nodes().iter().enumerate() {
        match node {
            HNode::Dummy { qpu } => {
                node_map[id] = coarse_nodes.len();
                coarse_nodes.push(HNode::Dummy { qpu: *qpu });
                children.push(vec![id]);
            }
            HNode::Circuit { qubit, timestep, span } => {
                let coarse_t = timestep / 2;
                match slot.entry((*qubit, coarse_t)) {
                    std::collections::hash_map::Entry::Occupied(entry) => {
                        let cid = *entry.get();
                        node_map[id] = cid;
                        children[cid].push(id);
                        if let HNode::Circuit { span: cspan, .. } = &mut coarse_nodes[cid] {
                            cspan.0 = cspan.0.min(span.0);
                            cspan.1 = cspan.1.max(span.1);
                        }
                    }
                    std::collections::hash_map::Entry::Vacant(entry) => {
                        let cid = coarse_nodes.len();
                        entry.insert(cid);
                        node_map[id] = cid;
                        coarse_nodes.push(HNode::Circuit {
                            qubit: *qubit,
                            timestep: coarse_t,
                            span: *span,
                        });
                        children.push(vec![id]);
                    }
                }
            }
        }
    }
    let mut coarse_edges = Vec::with_capacity(h.num_edges());
    for edge in h.edges() {
        let mut root: Vec<NodeId> = edge.root.iter().map(|&v| node_map[v]).collect();
        root.sort_unstable();
        root.dedup();
        let mut rec: Vec<NodeId> = edge.rec.iter().map(|&v| node_map[v]).collect();
        rec.sort_unstable();
        rec.dedup();
        // receivers merged into a root node are already covered by it
        rec.retain(|v| !root.contains(v));
        if rec.is_empty() {
            continue;
        }
        coarse_edges.push(HEdge {
            kind: edge.kind,
            root,
            rec,
            final_root: node_map[edge.final_root],
        });
    }
    Ok(TemporalHypergraph::from_parts(
        h.num_qubits,
        coarse_depth,
        h.level + 1,
        coarse_nodes,
        coarse_edges,
        children,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_cp_fraction, schedule, Circuit, Gate, PI};

    fn cp(control: u32, target: u32) -> Gate {
        Gate::ControlledPhase {
            control,
            target,
            theta: 1.0,
        }
    }

    fn diag(qubit: u32) -> Gate {
        Gate::SingleU {
            qubit,
            theta: 0.0,
            phi: 0.0,
            lambda: 0.3,
        }
    }

    fn hadamard(qubit: u32) -> Gate {
        Gate::SingleU {
            qubit,
            theta: PI / 2.0,
            phi: 0.0,
            lambda: PI,
        }
    }

    #[test]
    fn empty_circuit_counts() {
        let c = Circuit::from_timesteps(3, vec![vec![]; 4]).unwrap();
        let h = build_temporal_hypergraph(&c);
        assert_eq!(h.num_nodes(), 12);
        assert_eq!(h.num_edges(), 9);
        assert!(h.edges().iter().all(|e| e.kind == EdgeKind::State));
    }

    #[test]
    fn single_cp_edge() {
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        assert_eq!(h.num_nodes(), 2);
        assert_eq!(h.num_edges(), 1);
        let e = h.edge(0);
        assert_eq!(e.kind, EdgeKind::Gate);
        assert_eq!(e.root, vec![0]); // (q0, t0)
        assert_eq!(e.rec, vec![1]); // (q1, t0)
        assert_eq!(e.final_root, 0);
    }

    #[test]
    fn common_control_groups_across_diagonal() {
        // CP(q0,q1)@t0 then CP(q0,q2)@t1 with q0 untouched in between
        let c = Circuit::from_timesteps(3, vec![vec![cp(0, 1)], vec![cp(0, 2)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let groups: Vec<_> = h
            .edges()
            .iter()
            .filter(|e| e.kind != EdgeKind::State)
            .collect();
        assert_eq!(groups.len(), 1);
        let d = c.depth();
        let node_id = |q: u32, t: u32| (q * d + t) as NodeId;
        assert_eq!(groups[0].root, vec![node_id(0, 0), node_id(0, 1)]);
        let mut rec = vec![node_id(1, 0), node_id(2, 1)];
        rec.sort_unstable();
        assert_eq!(groups[0].rec, rec);
        assert_eq!(groups[0].final_root, node_id(0, 1));
    }

    #[test]
    fn diagonal_single_extends_group() {
        let gates = vec![cp(0, 1), diag(0), cp(0, 2)];
        let c = schedule(3, &gates).unwrap();
        let groups = group_gates(&c);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].gates.len(), 2);
    }

    #[test]
    fn non_diagonal_breaks_group() {
        let gates = vec![cp(0, 1), hadamard(0), cp(0, 2)];
        let c = schedule(3, &gates).unwrap();
        let groups = group_gates(&c);
        assert_eq!(groups.len(), 2);
    }

    #[test]
    fn cp_as_target_breaks_group() {
        let gates = vec![cp(0, 1), cp(2, 0), cp(0, 1)];
        let c = schedule(3, &gates).unwrap();
        let groups = group_gates(&c);
        // q0's run is broken by the CP where q0 is the target; q2 has its own
        let by_control: Vec<_> = groups.iter().map(|g| (g.control, g.gates.len())).collect();
        assert!(by_control.contains(&(2, 1)));
        assert_eq!(
            groups.iter().filter(|g| g.control == 0).count(),
            2,
            "{groups:?}"
        );
    }

    #[test]
    fn repeated_pair_merges_receiver_nodes() {
        let gates = vec![cp(0, 1), cp(0, 1)];
        let c = schedule(2, &gates).unwrap();
        let h = build_temporal_hypergraph(&c);
        let group: Vec<_> = h
            .edges()
            .iter()
            .filter(|e| e.kind == EdgeKind::Group)
            .collect();
        assert_eq!(group.len(), 1);
        let d = c.depth();
        let node_id = |q: u32, t: u32| (q * d + t) as NodeId;
        assert_eq!(group[0].rec, vec![node_id(1, 0), node_id(1, 1)]);
    }

    /// Brute-force grouping oracle: two CP gates with the same control are
    /// compatible iff every gate on the control qubit strictly between them
    /// is diagonal or a CP controlled on that qubit; groups are maximal
    /// runs of pairwise-consecutive compatible gates.
    fn oracle_groups(c: &Circuit) -> Vec<GateGroup> {
        let mut cps: Vec<(u32, u32, u32)> = Vec::new(); // (t, control, target)
        for (t, g) in c.gates() {
            if let Gate::ControlledPhase { control, target, .. } = g {
                cps.push((t, *control, *target));
            }
        }
        cps.sort_unstable();
        let compatible = |control: u32, t1: u32, t2: u32| -> bool {
            (t1 + 1..t2).all(|t| match c.gate_on(control, t) {
                None => true,
                Some(Gate::SingleU { theta, .. }) => *theta == 0.0,
                Some(Gate::ControlledPhase { control: cc, .. }) => *cc == control,
            })
        };
        let mut out: Vec<GateGroup> = Vec::new();
        for q in 0..c.num_qubits() {
            let mine: Vec<_> = cps.iter().filter(|&&(_, cc, _)| cc == q).collect();
            let mut current: Option<GateGroup> = None;
            for &&(t, _, target) in &mine {
                match current.as_mut() {
                    Some(g) if compatible(q, g.gates.last().unwrap().0, t) => {
                        g.gates.push((t, target))
                    }
                    _ => {
                        if let Some(g) = current.take() {
                            out.push(g);
                        }
                        current = Some(GateGroup {
                            control: q,
                            gates: vec![(t, target)],
                        });
                    }
                }
            }
            if let Some(g) = current.take() {
                out.push(g);
            }
        }
        out
    }

    #[test]
    fn grouping_matches_oracle_on_random_circuits() {
        for seed in 0..20 {
            let c = generate_cp_fraction(6, 8, 0.6, seed).unwrap();
            assert_eq!(group_gates(&c), oracle_groups(&c), "seed {seed}");
        }
        // with diagonal gates sprinkled in: rebuild circuits where singles
        // are made diagonal half the time
        for seed in 0..10 {
            let base = generate_cp_fraction(5, 8, 0.4, seed).unwrap();
            let timesteps: Vec<Vec<Gate>> = base
                .timesteps()
                .iter()
                .map(|ts| {
                    ts.iter()
                        .map(|g| match g {
                            Gate::SingleU { qubit, phi, lambda, .. } if qubit % 2 == 0 => {
                                Gate::SingleU {
                                    qubit: *qubit,
                                    theta: 0.0,
                                    phi: *phi,
                                    lambda: *lambda,
                                }
                            }
                            other => *other,
                        })
                        .collect()
                })
                .collect();
            let c = Circuit::from_timesteps(5, timesteps).unwrap();
            assert_eq!(group_gates(&c), oracle_groups(&c), "seed {seed}");
        }
    }

    #[test]
    fn every_cp_gate_in_exactly_one_group() {
        let c = generate_cp_fraction(8, 10, 0.7, 3).unwrap();
        let total: usize = group_gates(&c).iter().map(|g| g.gates.len()).sum();
        assert_eq!(total, c.two_qubit_gate_count());
    }

    #[test]
    fn coarsen_counts_no_gates() {
        let c = Circuit::from_timesteps(2, vec![vec![]; 2]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let coarse = coarsen_temporal(&h).unwrap();
        assert_eq!(coarse.depth, 1);
        assert_eq!(coarse.num_nodes(), 2);
        assert_eq!(coarse.num_edges(), 0);
    }

    #[test]
    fn coarsen_depth_ladder() {
        let c = Circuit::from_timesteps(3, vec![vec![]; 4]).unwrap();
        let h0 = build_temporal_hypergraph(&c);
        let h1 = coarsen_temporal(&h0).unwrap();
        assert_eq!(h1.depth, 2);
        assert_eq!(h1.num_edges(), 3); // one surviving state edge per qubit
        let h2 = coarsen_temporal(&h1).unwrap();
        assert_eq!(h2.depth, 1);
        assert_eq!(h2.num_edges(), 0);
        assert!(coarsen_temporal(&h2).is_err());
    }

    #[test]
    fn coarsen_odd_depth_passes_last_step() {
        let c = Circuit::from_timesteps(1, vec![vec![]; 5]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let coarse = coarsen_temporal(&h).unwrap();
        assert_eq!(coarse.depth, 3);
        let spans: Vec<_> = coarse
            .nodes()
            .iter()
            .map(|n| match n {
                HNode::Circuit { span, .. } => *span,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(spans, vec![(0, 1), (2, 3), (4, 4)]);
    }

    #[test]
    fn coarsen_gate_edge_survives_with_merged_endpoints() {
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)], vec![]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let coarse = coarsen_temporal(&h).unwrap();
        assert_eq!(coarse.depth, 1);
        assert_eq!(coarse.num_edges(), 1);
        let e = coarse.edge(0);
        assert_eq!(e.kind, EdgeKind::Gate);
        assert_eq!(e.root.len(), 1);
        assert_eq!(e.rec.len(), 1);
        assert_ne!(e.root[0], e.rec[0]);
    }

    #[test]
    fn recoarsening_children_is_identity() {
        let c = generate_cp_fraction(4, 6, 0.5, 1).unwrap();
        let h0 = build_temporal_hypergraph(&c);
        let h1 = coarsen_temporal(&h0).unwrap();
        // children partition the fine node set
        let mut seen = vec![false; h0.num_nodes()];
        for cid in 0..h1.num_nodes() {
            for &f in h1.children(cid) {
                assert!(!seen[f]);
                seen[f] = true;
            }
            assert!(h1.children(cid).len() <= 2);
        }
        assert!(seen.iter().all(|&s| s));
        // re-coarsening the same fine graph reproduces the coarse graph
        let h1b = coarsen_temporal(&h0).unwrap();
        assert_eq!(h1, h1b);
    }

    #[test]
    fn dump_mentions_nodes_and_edges() {
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let text = h.dump();
        assert!(text.contains("hypergraph level=0 qubits=2 depth=1 nodes=2 edges=1"));
        assert!(text.contains("edge 0 gate root={0} rec={1} final=0"));
    }
}
