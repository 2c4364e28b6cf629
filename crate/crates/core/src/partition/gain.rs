//! Gain bookkeeping for FM: per (node, target QPU) cost improvements kept
//! exact under moves via the four-term edge-cost update, with a lazy
//! max-heap for deterministic best-move retrieval (highest gain, then
//! smallest node id, then smallest target id).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::Assignment;
use crate::cost::{ConfigPair, CostEngine};
use crate::hypergraph::{EdgeId, NodeId, Side, TemporalHypergraph};
use crate::network::{NetworkGraph, QpuId};

/// Occupancy counters and masks for one edge side.
#[derive(Debug, Clone)]
struct SideState {
    counts: Vec<u16>,
    mask: u64,
}

impl SideState {
    fn new(num_qpus: usize) -> Self {
        SideState {
            counts: vec![0; num_qpus],
            mask: 0,
        }
    }

    fn add(&mut self, q: QpuId) {
        self.counts[q as usize] += 1;
        self.mask |= 1 << q;
    }

    fn shift(&mut self, from: QpuId, to: QpuId) {
        self.counts[from as usize] -= 1;
        if self.counts[from as usize] == 0 {
            self.mask &= !(1 << from);
        }
        self.counts[to as usize] += 1;
        self.mask |= 1 << to;
    }

    /// Mask after hypothetically applying up to two shifts.
    fn mask_with(&self, moves: &[(QpuId, QpuId)]) -> u64 {
        let mut mask = self.mask;
        let mut touched: [(u32, i32); 4] = [(u32::MAX, 0); 4];
        let mut len = 0usize;
        let bump = |q: u32, d: i32, touched: &mut [(u32, i32); 4], len: &mut usize| {
            for slot in touched.iter_mut().take(*len) {
                if slot.0 == q {
                    slot.1 += d;
                    return;
                }
            }
            touched[*len] = (q, d);
            *len += 1;
        };
        for &(from, to) in moves {
            bump(from, -1, &mut touched, &mut len);
            bump(to, 1, &mut touched, &mut len);
        }
        for &(q, d) in touched.iter().take(len) {
            let c = self.counts[q as usize] as i32 + d;
            debug_assert!(c >= 0);
            if c == 0 {
                mask &= !(1u64 << q);
            } else {
                mask |= 1u64 << q;
            }
        }
        mask
    }
}

type HeapEntry = (i64, Reverse<u32>, Reverse<u32>, u32);

pub(crate) struct GainKeeper<'a> {
    h: &'a TemporalHypergraph,
    engine: &'a CostEngine,
    incidence: &'a [Vec<(EdgeId, Side)>],
    roots: Vec<SideState>,
    recs: Vec<SideState>,
    gains: Vec<i64>,
    version: Vec<u32>,
    heap: BinaryHeap<HeapEntry>,
    allowed: &'a [bool],
    num_qpus: usize,
}

impl<'a> GainKeeper<'a> {
    pub fn new(
        h: &'a TemporalHypergraph,
        engine: &'a CostEngine,
        incidence: &'a [Vec<(EdgeId, Side)>],
        phi: &Assignment,
        allowed: &'a [bool],
    ) -> Self {
        let num_qpus = engine.network().num_qpus();
        let mut roots = vec![SideState::new(num_qpus); h.num_edges()];
        let mut recs = vec![SideState::new(num_qpus); h.num_edges()];
        for (eid, edge) in h.edges().iter().enumerate() {
            for &v in &edge.root {
                roots[eid].add(phi.qpu_of(v));
            }
            for &v in &edge.rec {
                recs[eid].add(phi.qpu_of(v));
            }
        }
        let mut keeper = GainKeeper {
            h,
            engine,
            incidence,
            roots,
            recs,
            gains: vec![0; h.num_nodes() * num_qpus],
            version: vec![0; h.num_nodes() * num_qpus],
            heap: BinaryHeap::with_capacity(h.num_nodes() * num_qpus),
            allowed,
            num_qpus,
        };
        for v in 0..h.num_nodes() {
            if phi.is_locked(v) {
                continue;
            }
            let home = phi.qpu_of(v);
            for &(eid, side) in &keeper.incidence[v] {
                let pre = keeper.cost_of(eid, None, None);
                for p in 0..num_qpus as u32 {
                    if p == home || !keeper.allowed[p as usize] {
                        continue;
                    }
                    let post = keeper.cost_of(eid, Some((side, home, p)), None);
                    keeper.gains[v * num_qpus + p as usize] += pre as i64 - post as i64;
                }
            }
            for p in 0..num_qpus as u32 {
                if p == home || !keeper.allowed[p as usize] {
                    continue;
                }
                let slot = v * num_qpus + p as usize;
                keeper
                    .heap
                    .push((keeper.gains[slot], Reverse(v as u32), Reverse(p), 0));
            }
        }
        keeper
    }

    /// Edge cost with up to two hypothetical side-aware moves applied.
    fn cost_of(
        &self,
        eid: EdgeId,
        a: Option<(Side, QpuId, QpuId)>,
        b: Option<(Side, QpuId, QpuId)>,
    ) -> u32 {
        let mut root_moves: [(QpuId, QpuId); 2] = [(0, 0); 2];
        let mut rec_moves: [(QpuId, QpuId); 2] = [(0, 0); 2];
        let (mut nr, mut ns) = (0usize, 0usize);
        for mv in [a, b].into_iter().flatten() {
            match mv.0 {
                Side::Root => {
                    root_moves[nr] = (mv.1, mv.2);
                    nr += 1;
                }
                Side::Rec => {
                    rec_moves[ns] = (mv.1, mv.2);
                    ns += 1;
                }
            }
        }
        let root_mask = if nr == 0 {
            self.roots[eid].mask
        } else {
            self.roots[eid].mask_with(&root_moves[..nr])
        };
        let rec_mask = if ns == 0 {
            self.recs[eid].mask
        } else {
            self.recs[eid].mask_with(&rec_moves[..ns])
        };
        self.engine.cost(ConfigPair::new(root_mask, rec_mask))
    }

    pub fn gain(&self, node: NodeId, target: QpuId) -> i64 {
        self.gains[node * self.num_qpus + target as usize]
    }

    /// Pop the best feasible move: highest gain, smallest node, smallest
    /// target. Capacity-infeasible candidates are skipped and stay
    /// eligible; stale and already-moved entries are discarded.
    pub fn best_move(
        &mut self,
        phi: &Assignment,
        moved: &[bool],
        network: &NetworkGraph,
    ) -> Option<(NodeId, QpuId, i64)> {
        let mut stash: Vec<HeapEntry> = Vec::new();
        let mut found = None;
        while let Some(entry) = self.heap.pop() {
            let (gain, Reverse(v), Reverse(p), ver) = entry;
            let (v, p) = (v as usize, p);
            let slot = v * self.num_qpus + p as usize;
            if self.version[slot] != ver {
                continue;
            }
            if moved[v] || phi.is_locked(v) || phi.qpu_of(v) == p {
                continue;
            }
            if !phi.can_move(self.h, network, v, p) {
                stash.push(entry);
                continue;
            }
            found = Some((v, p, gain));
            break;
        }
        for entry in stash {
            self.heap.push(entry);
        }
        found
    }

    /// Commit `v`'s move and fold the four-term correction into every
    /// neighbour's stored gains: for a shared edge e and neighbour move
    /// u -> p, the correction is
    /// [c_e(after v) - c_e(after v and u)] - [c_e(before) - c_e(after u)].
    pub fn apply_move(&mut self, v: NodeId, from: QpuId, to: QpuId, phi: &Assignment) {
        for &(eid, v_side) in &self.incidence[v] {
            let vmv = Some((v_side, from, to));
            let pre_cost = self.cost_of(eid, None, None) as i64;
            let post_cost = self.cost_of(eid, vmv, None) as i64;
            let edge = self.h.edge(eid);
            let others = edge
                .root
                .iter()
                .map(|&u| (u, Side::Root))
                .chain(edge.rec.iter().map(|&u| (u, Side::Rec)));
            for (u, u_side) in others {
                if u == v || phi.is_locked(u) {
                    continue;
                }
                let home = phi.qpu_of(u);
                for p in 0..self.num_qpus as u32 {
                    if p == home || !self.allowed[p as usize] {
                        continue;
                    }
                    let umv = Some((u_side, home, p));
                    let pre_u = self.cost_of(eid, umv, None) as i64;
                    let post_u = self.cost_of(eid, vmv, umv) as i64;
                    let delta = (post_cost - post_u) - (pre_cost - pre_u);
                    if delta != 0 {
                        let slot = u * self.num_qpus + p as usize;
                        self.gains[slot] += delta;
                        self.version[slot] += 1;
                        self.heap.push((
                            self.gains[slot],
                            Reverse(u as u32),
                            Reverse(p),
                            self.version[slot],
                        ));
                    }
                }
            }
            match v_side {
                Side::Root => self.roots[eid].shift(from, to),
                Side::Rec => self.recs[eid].shift(from, to),
            }
        }
    }
}

/// From-scratch gain of moving `node` to `target`, computed directly from
/// the assignment map without any incremental state. Audit oracle for the
/// gain structure.
pub(crate) fn scratch_gain(
    h: &TemporalHypergraph,
    incidence: &[Vec<(EdgeId, Side)>],
    engine: &CostEngine,
    qpu_of: &[QpuId],
    node: NodeId,
    target: QpuId,
) -> i64 {
    let mut gain = 0i64;
    for &(eid, _) in &incidence[node] {
        let edge = h.edge(eid);
        let mask = |set: &[NodeId], moved: bool| -> u64 {
            let mut m = 0u64;
            for &u in set {
                let q = if moved && u == node {
                    target
                } else {
                    qpu_of[u]
                };
                m |= 1 << q;
            }
            m
        };
        let before = engine.cost(ConfigPair::new(mask(&edge.root, false), mask(&edge.rec, false)));
        let after = engine.cost(ConfigPair::new(mask(&edge.root, true), mask(&edge.rec, true)));
        gain += before as i64 - after as i64;
    }
    gain
}
