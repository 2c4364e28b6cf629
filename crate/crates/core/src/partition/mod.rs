//! Node-to-QPU assignment, FM refinement with network-aware gains,
//! multilevel temporal partitioning, and the recursive network-coarsened
//! driver.

mod fm;
mod gain;
mod recursive;

pub use fm::{
    fm_pass, fm_refine, multilevel_partition, FmOptions, FmPassResult, FmStats, LevelReport,
    MultilevelOutcome,
};
pub use recursive::{
    cut_hypergraph, recursive_partition, CutCopy, RecursiveLevelReport, RecursiveOptions,
    RecursiveOutcome,
};

use crate::error::PartitionError;
use crate::hypergraph::{HNode, NodeId, TemporalHypergraph};
use crate::network::{NetworkGraph, QpuId};

/// The assignment function: one QPU per hypergraph node, with per
/// (QPU, timestep) load counters so capacity stays respected at every
/// original timestep. Dummy nodes are pinned to their QPU, locked, and
/// consume no capacity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    qpu_of: Vec<QpuId>,
    locked: Vec<bool>,
    /// loads[qpu * depth + t] for the depth of the hypergraph level this
    /// assignment belongs to.
    loads: Vec<u32>,
    depth: usize,
    num_qpus: usize,
}

impl Assignment {
    /// Build and validate an assignment from a plain node -> QPU map:
    /// QPU ids must exist, dummies must sit on their pinned QPU, and no
    /// (QPU, timestep) load may exceed capacity.
    pub fn from_qpu_map(
        h: &TemporalHypergraph,
        network: &NetworkGraph,
        qpu_of: Vec<QpuId>,
    ) -> Result<Self, PartitionError> {
        if qpu_of.len() != h.num_nodes() {
            return Err(PartitionError::WrongLength {
                got: qpu_of.len(),
                expected: h.num_nodes(),
            });
        }
        let num_qpus = network.num_qpus();
        let depth = h.depth as usize;
        let mut loads = vec![0u32; num_qpus * depth];
        let mut locked = vec![false; qpu_of.len()];
        for (v, node) in h.nodes().iter().enumerate() {
            let q = qpu_of[v];
            if q as usize >= num_qpus {
                return Err(PartitionError::BadQpu { qpu: q, num_qpus });
            }
            match node {
                HNode::Dummy { qpu } => {
                    if *qpu != q {
                        return Err(PartitionError::ProjectionMismatch(format!(
                            "dummy node {v} pinned to QPU {qpu} but assigned to {q}"
                        )));
                    }
                    locked[v] = true;
                }
                HNode::Circuit { timestep, .. } => {
                    let slot = q as usize * depth + *timestep as usize;
                    loads[slot] += 1;
                    if loads[slot] > network.capacity(q) {
                        return Err(PartitionError::CapacityViolation {
                            qpu: q,
                            timestep: *timestep,
                        });
                    }
                }
            }
        }
        Ok(Assignment {
            qpu_of,
            locked,
            loads,
            depth,
            num_qpus,
        })
    }

    pub fn qpu_of(&self, node: NodeId) -> QpuId {
        self.qpu_of[node]
    }

    pub fn qpu_map(&self) -> &[QpuId] {
        &self.qpu_of
    }

    pub fn into_qpu_map(self) -> Vec<QpuId> {
        self.qpu_of
    }

    pub fn is_locked(&self, node: NodeId) -> bool {
        self.locked[node]
    }

    pub fn len(&self) -> usize {
        self.qpu_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qpu_of.is_empty()
    }

    pub fn load(&self, qpu: QpuId, timestep: u32) -> u32 {
        self.loads[qpu as usize * self.depth + timestep as usize]
    }

    /// Whether `node` may move to `to` without breaking capacity at its
    /// timestep. Locked nodes never move.
    pub fn can_move(
        &self,
        h: &TemporalHypergraph,
        network: &NetworkGraph,
        node: NodeId,
        to: QpuId,
    ) -> bool {
        if self.locked[node] || to as usize >= self.num_qpus {
            return false;
        }
        let from = self.qpu_of[node];
        if from == to {
            return true;
        }
        match h.node(node) {
            HNode::Dummy { .. } => false,
            HNode::Circuit { timestep, .. } => {
                self.loads[to as usize * self.depth + *timestep as usize] < network.capacity(to)
            }
        }
    }

    /// Move a node, updating load counters. The caller checks capacity via
    /// [`Assignment::can_move`]; rollback moves skip the check by design.
    pub fn apply_move(&mut self, h: &TemporalHypergraph, node: NodeId, to: QpuId) {
        let from = self.qpu_of[node];
        if from == to {
            return;
        }
        debug_assert!(!self.locked[node]);
        if let HNode::Circuit { timestep, .. } = h.node(node) {
            let t = *timestep as usize;
            self.loads[from as usize * self.depth + t] -= 1;
            self.loads[to as usize * self.depth + t] += 1;
        }
        self.qpu_of[node] = to;
    }
}

/// Contiguous block layout: dummies go to their pinned QPU; circuit nodes
/// are placed in (qubit, timestep) order on the first allowed QPU with a
/// free slot at their timestep, which packs whole qubits onto QPU 0, then
/// QPU 1, and so on.
pub fn initial_assignment(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    allowed: Option<&[bool]>,
) -> Result<Assignment, PartitionError> {
    let depth = h.depth as usize;
    let num_qpus = network.num_qpus();
    let mut loads = vec![0u32; num_qpus * depth];
    let mut qpu_of = vec![0u32; h.num_nodes()];
    let mut order: Vec<NodeId> = Vec::with_capacity(h.num_nodes());
    for (v, node) in h.nodes().iter().enumerate() {
        match node {
            HNode::Dummy { qpu } => qpu_of[v] = *qpu,
            HNode::Circuit { .. } => order.push(v),
        }
    }
    order.sort_by_key(|&v| match h.node(v) {
        HNode::Circuit { qubit, timestep, .. } => (*qubit, *timestep),
        HNode::Dummy { .. } => unreachable!(),
    });
    let permitted =
        |q: usize| -> bool { allowed.map(|a| a.get(q).copied().unwrap_or(false)).unwrap_or(true) };
    for &v in &order {
        let HNode::Circuit { timestep, .. } = h.node(v) else {
            unreachable!()
        };
        let t = *timestep as usize;
        let slot = (0..num_qpus)
            .find(|&q| permitted(q) && loads[q * depth + t] < network.capacity(q as u32));
        match slot {
            Some(q) => {
                loads[q * depth + t] += 1;
                qpu_of[v] = q as u32;
            }
            None => {
                let capacity: u64 = (0..num_qpus)
                    .filter(|&q| permitted(q))
                    .map(|q| network.capacity(q as u32) as u64)
                    .sum();
                return Err(PartitionError::InsufficientCapacity {
                    capacity,
                    required: h.live_node_count() as u64 / h.depth.max(1) as u64,
                });
            }
        }
    }
    Assignment::from_qpu_map(h, network, qpu_of)
}

/// Push a coarse-level assignment down one level: every fine node inherits
/// its coarse parent's QPU. Exact cost preservation: dropped edges were
/// internal to merged nodes and surviving edges keep their masks.
pub fn project_assignment(
    coarse: &TemporalHypergraph,
    coarse_phi: &Assignment,
    fine: &TemporalHypergraph,
    network: &NetworkGraph,
) -> Result<Assignment, PartitionError> {
    if !coarse.has_children() {
        return Err(PartitionError::ProjectionMismatch(
            "coarse hypergraph carries no child map".into(),
        ));
    }
    if coarse_phi.len() != coarse.num_nodes() {
        return Err(PartitionError::WrongLength {
            got: coarse_phi.len(),
            expected: coarse.num_nodes(),
        });
    }
    let mut qpu_of = vec![u32::MAX; fine.num_nodes()];
    for cid in 0..coarse.num_nodes() {
        for &f in coarse.children(cid) {
            if f >= fine.num_nodes() {
                return Err(PartitionError::ProjectionMismatch(format!(
                    "child {f} outside fine hypergraph"
                )));
            }
            qpu_of[f] = coarse_phi.qpu_of(cid);
        }
    }
    if let Some(missing) = qpu_of.iter().position(|&q| q == u32::MAX) {
        return Err(PartitionError::MissingParent(missing));
    }
    Assignment::from_qpu_map(fine, network, qpu_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, Gate};
    use crate::hypergraph::build_temporal_hypergraph;
    use crate::network::make_linear;

    fn cp(control: u32, target: u32) -> Gate {
        Gate::ControlledPhase {
            control,
            target,
            theta: 1.0,
        }
    }

    #[test]
    fn block_layout_fills_qpus_in_order() {
        let c = Circuit::from_timesteps(6, vec![vec![]; 2]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(3, 2).unwrap();
        let phi = initial_assignment(&h, &g, None).unwrap();
        for v in 0..h.num_nodes() {
            let crate::hypergraph::HNode::Circuit { qubit, .. } = h.node(v) else {
                unreachable!()
            };
            assert_eq!(phi.qpu_of(v), qubit / 2);
        }
    }

    #[test]
    fn exact_fit_fills_every_qpu() {
        let c = Circuit::from_timesteps(4, vec![vec![]; 3]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(2, 2).unwrap();
        let phi = initial_assignment(&h, &g, None).unwrap();
        for t in 0..3 {
            assert_eq!(phi.load(0, t), 2);
            assert_eq!(phi.load(1, t), 2);
        }
    }

    #[test]
    fn forced_split_costs_one() {
        use crate::cost::{total_cost, CostEngine};
        use std::sync::Arc;
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(2, 1).unwrap());
        let phi = initial_assignment(&h, &g, None).unwrap();
        let engine = CostEngine::with_default_threshold(g.clone()).unwrap();
        assert_eq!(total_cost(&h, phi.qpu_map(), &engine), 1);
    }

    #[test]
    fn insufficient_capacity_is_an_error() {
        let c = Circuit::from_timesteps(5, vec![vec![]; 1]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(2, 2).unwrap();
        assert!(matches!(
            initial_assignment(&h, &g, None),
            Err(PartitionError::InsufficientCapacity { .. })
        ));
    }

    #[test]
    fn capacity_checked_per_timestep() {
        let c = Circuit::from_timesteps(2, vec![vec![]; 2]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(2, 1).unwrap();
        // both nodes of qubit 0 on QPU 0 and of qubit 1 on QPU 1 is fine
        let ok = Assignment::from_qpu_map(&h, &g, vec![0, 0, 1, 1]);
        assert!(ok.is_ok());
        // qubit 1's node at t=0 joining QPU 0 overloads (0, t=0)
        let err = Assignment::from_qpu_map(&h, &g, vec![0, 0, 0, 1]).unwrap_err();
        assert!(matches!(err, PartitionError::CapacityViolation { qpu: 0, timestep: 0 }));
    }

    #[test]
    fn moves_update_loads() {
        let c = Circuit::from_timesteps(2, vec![vec![]; 1]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(2, 2).unwrap();
        let mut phi = Assignment::from_qpu_map(&h, &g, vec![0, 0]).unwrap();
        assert!(phi.can_move(&h, &g, 1, 1));
        phi.apply_move(&h, 1, 1);
        assert_eq!(phi.load(0, 0), 1);
        assert_eq!(phi.load(1, 0), 1);
        assert_eq!(phi.qpu_of(1), 1);
    }

    #[test]
    fn projection_inherits_parent_qpu() {
        use crate::hypergraph::coarsen_temporal;
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)], vec![]]).unwrap();
        let fine = build_temporal_hypergraph(&c);
        let coarse = coarsen_temporal(&fine).unwrap();
        let g = make_linear(3, 2).unwrap();
        let coarse_phi = Assignment::from_qpu_map(&coarse, &g, vec![2, 1]).unwrap();
        let fine_phi = project_assignment(&coarse, &coarse_phi, &fine, &g).unwrap();
        for cid in 0..coarse.num_nodes() {
            for &f in coarse.children(cid) {
                assert_eq!(fine_phi.qpu_of(f), coarse_phi.qpu_of(cid));
            }
        }
    }

    #[test]
    fn projection_requires_child_map() {
        let c = Circuit::from_timesteps(2, vec![vec![]; 2]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = make_linear(2, 2).unwrap();
        let phi = initial_assignment(&h, &g, None).unwrap();
        assert!(matches!(
            project_assignment(&h, &phi, &h, &g),
            Err(PartitionError::ProjectionMismatch(_))
        ));
    }
}
