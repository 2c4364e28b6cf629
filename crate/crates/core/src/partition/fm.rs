//! Fiduccia-Mattheyses refinement tailored to forest-priced hyper-edges,
//! plus the multilevel temporal driver that refines from the coarsest
//! depth-1 hypergraph back to the input.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::gain::{scratch_gain, GainKeeper};
use super::{initial_assignment, project_assignment, Assignment};
use crate::cost::{total_cost, CostEngine};
use crate::error::PartitionError;
use crate::hypergraph::{coarsen_temporal, TemporalHypergraph};
use crate::network::NetworkGraph;

#[derive(Debug, Clone)]
pub struct FmOptions {
    /// Hard cap on passes per level; the loop stops earlier at the first
    /// zero-improvement pass.
    pub max_passes: u32,
    /// Gain audits per applied move (0 disables auditing).
    pub audit_per_move: u32,
    pub audit_seed: u64,
    /// Restrict move targets to these QPUs (all QPUs when `None`).
    pub allowed: Option<Vec<bool>>,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions {
            max_passes: 10,
            audit_per_move: 0,
            audit_seed: 0,
            allowed: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FmPassResult {
    pub improvement: u64,
    pub moves_kept: usize,
    pub moves_tried: usize,
    pub audits: usize,
    pub audit_mismatches: usize,
}

#[derive(Debug, Clone, Default)]
pub struct FmStats {
    pub passes: u32,
    pub moves: usize,
    pub audits: usize,
    pub audit_mismatches: usize,
    pub initial_cost: u64,
    pub final_cost: u64,
}

/// One FM pass: repeatedly apply the highest-gain feasible move of a
/// not-yet-moved node, then roll back to the earliest prefix with the
/// lowest cost. The returned cost never exceeds the input cost.
pub fn fm_pass(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    engine: &CostEngine,
    phi: &mut Assignment,
    opts: &FmOptions,
) -> Result<FmPassResult, PartitionError> {
    let incidence = h.incidence();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.audit_seed);
    run_pass(h, network, engine, phi, opts, &incidence, &mut rng)
}

fn allowed_mask(opts: &FmOptions, num_qpus: usize) -> Vec<bool> {
    match &opts.allowed {
        Some(mask) => {
            debug_assert_eq!(mask.len(), num_qpus);
            mask.clone()
        }
        None => vec![true; num_qpus],
    }
}

fn run_pass(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    engine: &CostEngine,
    phi: &mut Assignment,
    opts: &FmOptions,
    incidence: &[Vec<(crate::hypergraph::EdgeId, crate::hypergraph::Side)>],
    audit_rng: &mut ChaCha8Rng,
) -> Result<FmPassResult, PartitionError> {
    let allowed = allowed_mask(opts, network.num_qpus());
    let initial = total_cost(h, phi.qpu_map(), engine) as i64;
    let mut keeper = GainKeeper::new(h, engine, incidence, phi, &allowed);
    let mut moved = vec![false; h.num_nodes()];
    let mut trail: Vec<(usize, u32)> = Vec::new();
    let mut cur = initial;
    let mut best = initial;
    let mut best_len = 0usize;
    let mut result = FmPassResult::default();
    let candidates: Vec<usize> = (0..h.num_nodes()).filter(|&v| !phi.is_locked(v)).collect();
    while let Some((v, p, gain)) = keeper.best_move(phi, &moved, network) {
        let from = phi.qpu_of(v);
        phi.apply_move(h, v, p);
        keeper.apply_move(v, from, p, phi);
        moved[v] = true;
        trail.push((v, from));
        cur -= gain;
        debug_assert!(cur >= 0, "cost bookkeeping went negative");
        result.moves_tried += 1;
        if cur < best {
            best = cur;
            best_len = trail.len();
        }
        if opts.audit_per_move > 0 {
            let unmoved: Vec<usize> = candidates.iter().copied().filter(|&u| !moved[u]).collect();
            for _ in 0..opts.audit_per_move {
                if unmoved.is_empty() {
                    break;
                }
                let u = unmoved[audit_rng.gen_range(0..unmoved.len())];
                let p = audit_rng.gen_range(0..network.num_qpus() as u32);
                if p == phi.qpu_of(u) || !allowed[p as usize] {
                    continue;
                }
                let stored = keeper.gain(u, p);
                let fresh = scratch_gain(h, incidence, engine, phi.qpu_map(), u, p);
                result.audits += 1;
                if stored != fresh {
                    result.audit_mismatches += 1;
                }
            }
        }
    }
    for &(v, from) in trail[best_len..].iter().rev() {
        phi.apply_move(h, v, from);
    }
    result.moves_kept = best_len;
    result.improvement = (initial - best) as u64;
    debug_assert_eq!(total_cost(h, phi.qpu_map(), engine), best as u64);
    Ok(result)
}

/// Repeat FM passes until one yields no improvement (or the pass cap is
/// hit).
pub fn fm_refine(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    engine: &CostEngine,
    phi: &mut Assignment,
    opts: &FmOptions,
) -> Result<FmStats, PartitionError> {
    let incidence = h.incidence();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.audit_seed);
    let mut stats = FmStats {
        initial_cost: total_cost(h, phi.qpu_map(), engine),
        ..FmStats::default()
    };
    stats.final_cost = stats.initial_cost;
    while stats.passes < opts.max_passes {
        let pass = run_pass(h, network, engine, phi, opts, &incidence, &mut rng)?;
        stats.passes += 1;
        stats.moves += pass.moves_kept;
        stats.audits += pass.audits;
        stats.audit_mismatches += pass.audit_mismatches;
        stats.final_cost -= pass.improvement;
        if pass.improvement == 0 {
            break;
        }
    }
    Ok(stats)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct LevelReport {
    pub level: u32,
    pub depth: u32,
    /// Cost of the assignment inherited from the coarser level (or the
    /// initial layout at the coarsest level).
    pub projected_cost: u64,
    pub refined_cost: u64,
    pub millis: f64,
}

#[derive(Debug)]
pub struct MultilevelOutcome {
    pub assignment: Assignment,
    pub cost: u64,
    pub levels: Vec<LevelReport>,
    pub audits: usize,
    pub audit_mismatches: usize,
}

/// Multilevel temporal partitioning: coarsen the hypergraph to depth 1,
/// block-place and refine there, then project and refine at each finer
/// level down to the input graph.
pub fn multilevel_partition(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    engine: &CostEngine,
    opts: &FmOptions,
) -> Result<MultilevelOutcome, PartitionError> {
    let mut ladder: Vec<TemporalHypergraph> = vec![h.clone()];
    while ladder.last().unwrap().depth > 1 {
        ladder.push(coarsen_temporal(ladder.last().unwrap())?);
    }
    let mut levels = Vec::with_capacity(ladder.len());
    let mut audits = 0;
    let mut audit_mismatches = 0;
    let coarsest = ladder.last().unwrap();
    let start = std::time::Instant::now();
    let mut phi = initial_assignment(coarsest, network, opts.allowed.as_deref())?;
    let projected = total_cost(coarsest, phi.qpu_map(), engine);
    let stats = fm_refine(coarsest, network, engine, &mut phi, opts)?;
    audits += stats.audits;
    audit_mismatches += stats.audit_mismatches;
    levels.push(LevelReport {
        level: coarsest.level,
        depth: coarsest.depth,
        projected_cost: projected,
        refined_cost: stats.final_cost,
        millis: start.elapsed().as_secs_f64() * 1e3,
    });
    for idx in (0..ladder.len() - 1).rev() {
        let start = std::time::Instant::now();
        let fine = &ladder[idx];
        phi = project_assignment(&ladder[idx + 1], &phi, fine, network)?;
        let projected = total_cost(fine, phi.qpu_map(), engine);
        let stats = fm_refine(fine, network, engine, &mut phi, opts)?;
        audits += stats.audits;
        audit_mismatches += stats.audit_mismatches;
        levels.push(LevelReport {
            level: fine.level,
            depth: fine.depth,
            projected_cost: projected,
            refined_cost: stats.final_cost,
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let cost = total_cost(h, phi.qpu_map(), engine);
    Ok(MultilevelOutcome {
        assignment: phi,
        cost,
        levels,
        audits,
        audit_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate_cp_fraction, Circuit, Gate};
    use crate::hypergraph::build_temporal_hypergraph;
    use crate::network::{make_linear, NetworkGraph};
    use std::sync::Arc;

    fn cp(control: u32, target: u32) -> Gate {
        Gate::ControlledPhase {
            control,
            target,
            theta: 1.0,
        }
    }

    fn engine_for(g: &Arc<NetworkGraph>) -> CostEngine {
        CostEngine::with_default_threshold(g.clone()).unwrap()
    }

    #[test]
    fn obvious_move_reunites_pair() {
        // 2 qubits, one CP, both fit on one QPU: splitting is suboptimal
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(2, 2).unwrap());
        let engine = engine_for(&g);
        let mut phi = Assignment::from_qpu_map(&h, &g, vec![0, 1]).unwrap();
        let result = fm_pass(&h, &g, &engine, &mut phi, &FmOptions::default()).unwrap();
        assert_eq!(result.improvement, 1);
        assert_eq!(phi.qpu_of(0), phi.qpu_of(1));
        assert_eq!(total_cost(&h, phi.qpu_map(), &engine), 0);
    }

    #[test]
    fn optimal_input_is_a_fixed_point() {
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(2, 2).unwrap());
        let engine = engine_for(&g);
        let mut phi = Assignment::from_qpu_map(&h, &g, vec![0, 0]).unwrap();
        let result = fm_pass(&h, &g, &engine, &mut phi, &FmOptions::default()).unwrap();
        assert_eq!(result.improvement, 0);
        assert_eq!(phi.qpu_map(), &[0, 0]);
    }

    #[test]
    fn passes_never_worsen() {
        for seed in 0..8 {
            let c = generate_cp_fraction(6, 4, 0.6, seed).unwrap();
            let h = build_temporal_hypergraph(&c);
            let g = Arc::new(make_linear(3, 3).unwrap());
            let engine = engine_for(&g);
            let mut phi = initial_assignment(&h, &g, None).unwrap();
            let mut prev = total_cost(&h, phi.qpu_map(), &engine);
            for _ in 0..3 {
                let r = fm_pass(&h, &g, &engine, &mut phi, &FmOptions::default()).unwrap();
                let now = total_cost(&h, phi.qpu_map(), &engine);
                assert_eq!(now, prev - r.improvement);
                assert!(now <= prev);
                prev = now;
            }
        }
    }

    #[test]
    fn audits_pass_on_small_runs() {
        let opts = FmOptions {
            audit_per_move: 4,
            audit_seed: 9,
            ..FmOptions::default()
        };
        for seed in 0..4 {
            let c = generate_cp_fraction(5, 4, 0.7, seed).unwrap();
            let h = build_temporal_hypergraph(&c);
            let g = Arc::new(make_linear(3, 2).unwrap());
            let engine = engine_for(&g);
            let mut phi = initial_assignment(&h, &g, None).unwrap();
            let stats = fm_refine(&h, &g, &engine, &mut phi, &opts).unwrap();
            assert!(stats.audits > 0);
            assert_eq!(stats.audit_mismatches, 0);
        }
    }

    #[test]
    fn gain_after_neighbor_move_matches_scratch() {
        // state edge on a 2-QPU line: u at QPU0, v at QPU1; after v joins
        // u, u's gain toward QPU1 flips sign (recomputed from scratch)
        let c = Circuit::from_timesteps(1, vec![vec![], vec![]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(2, 2).unwrap());
        let engine = engine_for(&g);
        let mut phi = Assignment::from_qpu_map(&h, &g, vec![0, 1]).unwrap();
        let incidence = h.incidence();
        let allowed = vec![true, true];
        let mut keeper = GainKeeper::new(&h, &engine, &incidence, &phi, &allowed);
        assert_eq!(keeper.gain(0, 1), 1); // joining v saves the cut
        phi.apply_move(&h, 1, 0);
        keeper.apply_move(1, 1, 0, &phi);
        let fresh = scratch_gain(&h, &incidence, &engine, phi.qpu_map(), 0, 1);
        assert_eq!(keeper.gain(0, 1), fresh);
        assert_eq!(fresh, -1);
    }

    #[test]
    fn multilevel_on_depth_one_equals_plain_fm() {
        let c = generate_cp_fraction(6, 1, 0.8, 2).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(3, 3).unwrap());
        let engine = engine_for(&g);
        let out = multilevel_partition(&h, &g, &engine, &FmOptions::default()).unwrap();
        let mut phi = initial_assignment(&h, &g, None).unwrap();
        fm_refine(&h, &g, &engine, &mut phi, &FmOptions::default()).unwrap();
        assert_eq!(out.assignment.qpu_map(), phi.qpu_map());
        assert_eq!(out.levels.len(), 1);
    }

    #[test]
    fn refinement_levels_never_regress() {
        for seed in 0..6 {
            let c = generate_cp_fraction(6, 8, 0.5, seed).unwrap();
            let h = build_temporal_hypergraph(&c);
            let g = Arc::new(make_linear(3, 3).unwrap());
            let engine = engine_for(&g);
            let out = multilevel_partition(&h, &g, &engine, &FmOptions::default()).unwrap();
            for level in &out.levels {
                assert!(
                    level.refined_cost <= level.projected_cost,
                    "seed {seed}: level {} regressed",
                    level.level
                );
            }
            // the final cost is the last level's refined cost
            assert_eq!(out.cost, out.levels.last().unwrap().refined_cost);
        }
    }

    #[test]
    fn multilevel_beats_or_matches_initial_layout() {
        for seed in 0..6 {
            let c = generate_cp_fraction(8, 6, 0.6, seed).unwrap();
            let h = build_temporal_hypergraph(&c);
            let g = Arc::new(make_linear(4, 3).unwrap());
            let engine = engine_for(&g);
            let initial = initial_assignment(&h, &g, None).unwrap();
            let initial_cost = total_cost(&h, initial.qpu_map(), &engine);
            let out = multilevel_partition(&h, &g, &engine, &FmOptions::default()).unwrap();
            assert!(out.cost <= initial_cost, "seed {seed}");
        }
    }
}
