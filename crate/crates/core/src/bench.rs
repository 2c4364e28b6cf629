//! Benchmark harness: run configurations, validated JSON reports,
//! topology-spec parsing, and the brute-force oracles used to verify the
//! heuristics on small instances.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{generate_cp_fraction, parse_qasm, Circuit};
use crate::cost::{root_tree, total_cost, total_cost_uncached, CostEngine};
use crate::error::{BenchError, Phase};
use crate::hypergraph::{build_temporal_hypergraph, HNode, TemporalHypergraph};
use crate::network::{
    coarsen_network_recursive, make_grid, make_linear, make_random, MatchingMode, NetworkGraph,
    QpuId,
};
use crate::partition::{
    multilevel_partition, recursive_partition, Assignment, FmOptions, RecursiveOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitSource {
    Qasm { path: PathBuf },
    CpFraction { n: u32, depth: u32, fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologySpec {
    Linear { n: u32 },
    Grid { rows: u32, cols: u32 },
    Random { n: u32, p_millis: u32 },
}

impl TopologySpec {
    pub fn num_qpus(&self) -> u32 {
        match *self {
            TopologySpec::Linear { n } => n,
            TopologySpec::Grid { rows, cols } => rows * cols,
            TopologySpec::Random { n, .. } => n,
        }
    }

    pub fn build(&self, capacity: u32, seed: u64) -> Result<NetworkGraph, crate::NetworkError> {
        match *self {
            TopologySpec::Linear { n } => make_linear(n, capacity),
            TopologySpec::Grid { rows, cols } => make_grid(rows, cols, capacity),
            TopologySpec::Random { n, p_millis } => {
                make_random(n, p_millis as f64 / 1000.0, capacity, seed)
            }
        }
    }
}

impl FromStr for TopologySpec {
    type Err = String;

    /// `linear:<N>` | `grid:<R>x<C>` | `random:<N>:<p>`
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad topology spec `{s}` (want linear:<N>, grid:<R>x<C>, random:<N>:<p>)");
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "linear" => {
                let n = rest.parse().map_err(|_| bad())?;
                Ok(TopologySpec::Linear { n })
            }
            "grid" => {
                let (r, c) = rest.split_once('x').ok_or_else(bad)?;
                Ok(TopologySpec::Grid {
                    rows: r.parse().map_err(|_| bad())?,
                    cols: c.parse().map_err(|_| bad())?,
                })
            }
            "random" => {
                let (n, p) = rest.split_once(':').ok_or_else(bad)?;
                let p: f64 = p.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                Ok(TopologySpec::Random {
                    n: n.parse().map_err(|_| bad())?,
                    p_millis: (p * 1000.0).round() as u32,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for TopologySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            TopologySpec::Linear { n } => write!(f, "linear:{n}"),
            TopologySpec::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
            TopologySpec::Random { n, p_millis } => {
                write!(f, "random:{n}:{}", p_millis as f64 / 1000.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Direct,
    Coarse,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub circuit: CircuitSource,
    pub topology: TopologySpec,
    /// Homogeneous QPU capacity; defaults to ceil(n / N).
    pub capacity: Option<u32>,
    pub mode: Mode,
    /// Coarsening factor, used in coarse mode.
    pub chi: u32,
    pub seed: u64,
    pub reps: u32,
    pub matching: MatchingMode,
    pub table_threshold: usize,
    pub parallel: bool,
    /// Embed the per-node assignment and per-edge costs in the report.
    pub detailed: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            circuit: CircuitSource::CpFraction {
                n: 8,
                depth: 8,
                fraction: 0.5,
            },
            topology: TopologySpec::Linear { n: 4 },
            capacity: None,
            mode: Mode::Direct,
            chi: 4,
            seed: 0,
            reps: 1,
            matching: MatchingMode::Exact,
            table_threshold: 10,
            parallel: false,
            detailed: false,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseMillis {
    pub parse: f64,
    pub build: f64,
    pub coarsen: f64,
    pub partition: f64,
    pub stitch: f64,
    pub validate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCost {
    pub level: u32,
    pub detail: String,
}

/// One run's validated result. `cost` always equals an independent
/// table-bypassing recomputation of the emitted assignment.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: String,
    pub config_hash: String,
    pub circuit: String,
    pub topology: String,
    pub capacity: u32,
    pub mode: Mode,
    pub chi: Option<u32>,
    pub seed: u64,
    pub matching_mode: MatchingMode,
    pub num_qubits: u32,
    pub depth: u32,
    pub num_qpus: u32,
    pub cost: u64,
    pub phase_ms: PhaseMillis,
    pub per_level: Vec<LevelCost>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_costs: Option<Vec<u32>>,
}

fn config_hash(config: &RunConfig, seed: u64) -> String {
    let mut hasher = Sha256::new();
    let mut echo = config.clone();
    echo.seed = seed;
    echo.reps = 1;
    hasher.update(serde_json::to_vec(&echo).expect("config serializes"));
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn load_circuit(source: &CircuitSource, seed: u64) -> Result<Circuit, BenchError> {
    match source {
        CircuitSource::Qasm { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| BenchError::new(Phase::Io, format!("{}: {e}", path.display())))?;
            parse_qasm(&text).map_err(|e| BenchError::new(Phase::Parse, e))
        }
        CircuitSource::CpFraction { n, depth, fraction } => {
            generate_cp_fraction(*n, *depth, *fraction, seed)
                .map_err(|e| BenchError::new(Phase::Parse, e))
        }
    }
}

/// Execute the full pipeline for every repetition (seed, seed+1, ...),
/// validating each emitted assignment and recomputing its cost from
/// scratch before reporting.
pub fn run(config: &RunConfig) -> Result<Vec<RunReport>, BenchError> {
    let mut reports = Vec::with_capacity(config.reps.max(1) as usize);
    for rep in 0..config.reps.max(1) {
        let seed = config.seed + rep as u64;
        reports.push(run_once(config, seed)?);
    }
    Ok(reports)
}

fn run_once(config: &RunConfig, seed: u64) -> Result<RunReport, BenchError> {
    let mut phase_ms = PhaseMillis::default();
    let t = Instant::now();
    let circuit = load_circuit(&config.circuit, seed)?;
    phase_ms.parse = t.elapsed().as_secs_f64() * 1e3;

    let n_qpus = config.topology.num_qpus();
    let capacity = match config.capacity {
        Some(c) => c,
        None => circuit.num_qubits().div_ceil(n_qpus.max(1)),
    };
    let network = config
        .topology
        .build(capacity, config.seed)
        .map_err(|e| BenchError::new(Phase::Build, e))?;
    if (network.total_capacity() as u64) < circuit.num_qubits() as u64 {
        return Err(BenchError::new(
            Phase::Build,
            format!(
                "total capacity {} cannot hold {} qubits",
                network.total_capacity(),
                circuit.num_qubits()
            ),
        ));
    }
    let t = Instant::now();
    let h = build_temporal_hypergraph(&circuit);
    phase_ms.build = t.elapsed().as_secs_f64() * 1e3;

    let mut per_level = Vec::new();
    let assignment: Assignment;
    match config.mode {
        Mode::Direct => {
            let t = Instant::now();
            let engine = CostEngine::new(Arc::new(network.clone()), config.table_threshold)
                .map_err(|e| BenchError::new(Phase::Partition, e))?;
            let out = multilevel_partition(&h, &network, &engine, &FmOptions::default())
                .map_err(|e| BenchError::new(Phase::Partition, e))?;
            phase_ms.partition = t.elapsed().as_secs_f64() * 1e3;
            for level in &out.levels {
                per_level.push(LevelCost {
                    level: level.level,
                    detail: format!(
                        "depth={} projected={} refined={} millis={:.2}",
                        level.depth, level.projected_cost, level.refined_cost, level.millis
                    ),
                });
            }
            assignment = out.assignment;
        }
        Mode::Coarse => {
            if config.chi < 2 {
                return Err(BenchError::new(
                    Phase::Coarsen,
                    format!("coarse mode needs chi >= 2, got {}", config.chi),
                ));
            }
            if n_qpus <= config.chi {
                return Err(BenchError::new(
                    Phase::Coarsen,
                    format!(
                        "coarse mode needs more QPUs ({n_qpus}) than chi ({})",
                        config.chi
                    ),
                ));
            }
            let t = Instant::now();
            let hierarchy = coarsen_network_recursive(&network, config.chi, config.matching)
                .map_err(|e| BenchError::new(Phase::Coarsen, e))?;
            phase_ms.coarsen = t.elapsed().as_secs_f64() * 1e3;
            let t = Instant::now();
            let out = recursive_partition(
                &h,
                &hierarchy,
                &RecursiveOptions {
                    table_threshold: config.table_threshold,
                    parallel: config.parallel,
                    ..RecursiveOptions::default()
                },
            )
            .map_err(|e| BenchError::new(Phase::Partition, e))?;
            phase_ms.partition = t.elapsed().as_secs_f64() * 1e3;
            phase_ms.stitch = out.stitch_millis;
            for level in &out.levels {
                per_level.push(LevelCost {
                    level: level.level,
                    detail: format!(
                        "subproblems={} millis={:.2}",
                        level.subproblems, level.millis
                    ),
                });
            }
            assignment = out.assignment;
        }
    }

    // independent validation: totality and capacity were enforced by the
    // Assignment constructor; recompute the cost without the table
    let t = Instant::now();
    let cost = total_cost_uncached(&h, assignment.qpu_map(), &network);
    let engine_cost = {
        let engine = CostEngine::new(Arc::new(network.clone()), config.table_threshold)
            .map_err(|e| BenchError::new(Phase::Validate, e))?;
        total_cost(&h, assignment.qpu_map(), &engine)
    };
    if cost != engine_cost {
        return Err(BenchError::new(
            Phase::Validate,
            format!("engine cost {engine_cost} != recomputed cost {cost}"),
        ));
    }
    for (v, node) in h.nodes().iter().enumerate() {
        if let HNode::Dummy { .. } = node {
            return Err(BenchError::new(
                Phase::Validate,
                format!("dummy node {v} in a top-level hypergraph"),
            ));
        }
    }
    phase_ms.validate = t.elapsed().as_secs_f64() * 1e3;

    let (assignment_field, edge_costs) = if config.detailed {
        let engine = CostEngine::new(Arc::new(network.clone()), config.table_threshold)
            .map_err(|e| BenchError::new(Phase::Validate, e))?;
        let per_edge: Vec<u32> = h
            .edges()
            .iter()
            .map(|e| crate::cost::edge_cost(e, &h, assignment.qpu_map(), &engine))
            .collect();
        (Some(assignment.qpu_map().to_vec()), Some(per_edge))
    } else {
        (None, None)
    };

    Ok(RunReport {
        schema: 1,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config, seed),
        circuit: match &config.circuit {
            CircuitSource::Qasm { path } => format!("qasm:{}", path.display()),
            CircuitSource::CpFraction { n, depth, fraction } => {
                format!("cp:{n},{depth},{fraction}")
            }
        },
        topology: config.topology.to_string(),
        capacity,
        mode: config.mode,
        chi: match config.mode {
            Mode::Coarse => Some(config.chi),
            Mode::Direct => None,
        },
        seed,
        matching_mode: config.matching,
        num_qubits: circuit.num_qubits(),
        depth: circuit.depth(),
        num_qpus: n_qpus,
        cost,
        phase_ms,
        per_level,
        assignment: assignment_field,
        edge_costs,
    })
}

/// Append reports as JSON lines.
pub fn write_reports(reports: &[RunReport], mut w: impl Write) -> Result<(), BenchError> {
    for report in reports {
        let line = serde_json::to_string(report)
            .map_err(|e| BenchError::new(Phase::Io, e))?;
        writeln!(w, "{line}").map_err(|e| BenchError::new(Phase::Io, e))?;
    }
    Ok(())
}

/// Append one CSV row per config: fraction (empty for QASM circuits),
/// qubit count, and the mean cost across repetitions.
pub fn append_csv_row(
    config: &RunConfig,
    reports: &[RunReport],
    path: &std::path::Path,
) -> Result<(), BenchError> {
    let io = |e: std::io::Error| BenchError::new(Phase::Io, e);
    let fresh = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io)?;
    if fresh {
        writeln!(file, "fraction,num_qubits,cost_mean").map_err(io)?;
    }
    let mean = reports.iter().map(|r| r.cost as f64).sum::<f64>() / reports.len().max(1) as f64;
    let (fraction, n) = match &config.circuit {
        CircuitSource::CpFraction { n, fraction, .. } => (format!("{fraction}"), *n),
        CircuitSource::Qasm { .. } => (String::new(), reports[0].num_qubits),
    };
    writeln!(file, "{fraction},{n},{mean}").map_err(io)?;
    Ok(())
}

const BRUTE_FORCE_NODE_LIMIT: usize = 18;
const BRUTE_FORCE_QPU_LIMIT: usize = 3;

/// Exhaustive minimum-cost capacity-feasible assignment, lexicographically
/// smallest among ties. Dummy nodes stay pinned. Guarded to small
/// instances.
pub fn brute_force_partition(
    h: &TemporalHypergraph,
    network: &NetworkGraph,
    engine: &CostEngine,
) -> Result<(Vec<QpuId>, u64), BenchError> {
    if h.num_nodes() > BRUTE_FORCE_NODE_LIMIT || network.num_qpus() > BRUTE_FORCE_QPU_LIMIT {
        return Err(BenchError::new(
            Phase::Partition,
            format!(
                "brute force limited to {BRUTE_FORCE_NODE_LIMIT} nodes / {BRUTE_FORCE_QPU_LIMIT} QPUs, got {} / {}",
                h.num_nodes(),
                network.num_qpus()
            ),
        ));
    }
    let depth = h.depth.max(1) as usize;
    let num_qpus = network.num_qpus();
    let mut qpu_of: Vec<QpuId> = vec![0; h.num_nodes()];
    let mut loads = vec![0u32; num_qpus * depth];
    let mut best: Option<(u64, Vec<QpuId>)> = None;
    // depth-first over nodes in id order; first minimum found is the
    // lexicographically smallest because QPUs are tried in ascending order
    fn dfs(
        v: usize,
        h: &TemporalHypergraph,
        network: &NetworkGraph,
        engine: &CostEngine,
        qpu_of: &mut Vec<QpuId>,
        loads: &mut Vec<u32>,
        depth: usize,
        best: &mut Option<(u64, Vec<QpuId>)>,
    ) {
        if v == h.num_nodes() {
            let cost = total_cost(h, qpu_of, engine);
            if best.as_ref().map_or(true, |(b, _)| cost < *b) {
                *best = Some((cost, qpu_of.clone()));
            }
            return;
        }
        match h.node(v) {
            HNode::Dummy { qpu } => {
                qpu_of[v] = *qpu;
                dfs(v + 1, h, network, engine, qpu_of, loads, depth, best);
            }
            HNode::Circuit { timestep, .. } => {
                let t = *timestep as usize;
                for q in 0..network.num_qpus() as u32 {
                    let slot = q as usize * depth + t;
                    if loads[slot] < network.capacity(q) {
                        loads[slot] += 1;
                        qpu_of[v] = q;
                        dfs(v + 1, h, network, engine, qpu_of, loads, depth, best);
                        loads[slot] -= 1;
                    }
                }
            }
        }
    }
    dfs(0, h, network, engine, &mut qpu_of, &mut loads, depth, &mut best);
    best.map(|(cost, map)| (map, cost)).ok_or_else(|| {
        BenchError::new(Phase::Partition, "no capacity-feasible assignment exists")
    })
}

const STEINER_EDGE_LIMIT: usize = 20;

/// Exact minimum Steiner forest size: the fewest non-tree edges whose
/// union with the root tree connects every receiver QPU to it. Subset
/// enumeration in increasing size with union-find connectivity, exact by
/// construction; guarded to at most 20 links.
pub fn brute_force_steiner_forest(
    network: &NetworkGraph,
    roots: u64,
    receivers: u64,
) -> Result<u32, BenchError> {
    if network.links().len() > STEINER_EDGE_LIMIT {
        return Err(BenchError::new(
            Phase::Partition,
            format!(
                "steiner oracle limited to {STEINER_EDGE_LIMIT} links, got {}",
                network.links().len()
            ),
        ));
    }
    if roots == 0 {
        return Err(BenchError::new(Phase::Partition, "empty root set"));
    }
    let tree = root_tree(roots, network);
    let wanted = receivers & !tree.node_mask;
    if wanted == 0 {
        return Ok(0);
    }
    let tree_edges: std::collections::BTreeSet<(QpuId, QpuId)> =
        tree.edges.iter().copied().collect();
    let candidates: Vec<(QpuId, QpuId)> = network
        .links()
        .iter()
        .copied()
        .filter(|e| !tree_edges.contains(e))
        .collect();
    let n = network.num_qpus();
    let connected = |subset: &[usize]| -> bool {
        let mut uf: Vec<u32> = (0..n as u32).collect();
        fn find(uf: &mut Vec<u32>, x: u32) -> u32 {
            let mut x = x;
            while uf[x as usize] != x {
                uf[x as usize] = uf[uf[x as usize] as usize];
                x = uf[x as usize];
            }
            x
        }
        let union = |uf: &mut Vec<u32>, a: u32, b: u32| {
            let (ra, rb) = (find(uf, a), find(uf, b));
            if ra != rb {
                uf[ra as usize] = rb;
            }
        };
        for &(a, b) in &tree.edges {
            union(&mut uf, a, b);
        }
        for &i in subset {
            let (a, b) = candidates[i];
            union(&mut uf, a, b);
        }
        let root_rep = find(&mut uf, tree.nodes[0]);
        (0..n as u32)
            .filter(|q| wanted >> q & 1 == 1)
            .all(|q| find(&mut uf, q) == root_rep)
    };
    fn next_combination(subset: &mut [usize], n: usize) -> bool {
        let k = subset.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if subset[i] < n - k + i {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    // increasing subset size: the first feasible size is the minimum
    for size in 1..=candidates.len() {
        let mut subset: Vec<usize> = (0..size).collect();
        loop {
            if connected(&subset) {
                return Ok(size as u32);
            }
            if !next_combination(&mut subset, candidates.len()) {
                break;
            }
        }
    }
    Err(BenchError::new(
        Phase::Partition,
        "receivers unreachable (disconnected network?)",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::hypergraph::build_temporal_hypergraph;
    use crate::network::make_linear;

    #[test]
    fn topology_specs_parse() {
        assert_eq!(
            "linear:8".parse::<TopologySpec>().unwrap(),
            TopologySpec::Linear { n: 8 }
        );
        assert_eq!(
            "grid:4x2".parse::<TopologySpec>().unwrap(),
            TopologySpec::Grid { rows: 4, cols: 2 }
        );
        assert_eq!(
            "random:12:0.3".parse::<TopologySpec>().unwrap(),
            TopologySpec::Random { n: 12, p_millis: 300 }
        );
        assert!("ring:5".parse::<TopologySpec>().is_err());
        assert!("grid:4".parse::<TopologySpec>().is_err());
    }

    #[test]
    fn zero_fraction_costs_nothing() {
        let config = RunConfig {
            circuit: CircuitSource::CpFraction {
                n: 8,
                depth: 4,
                fraction: 0.0,
            },
            topology: TopologySpec::Linear { n: 4 },
            ..RunConfig::default()
        };
        let reports = run(&config).unwrap();
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].cost, 0);
        assert_eq!(reports[0].capacity, 2);
    }

    #[test]
    fn reports_are_deterministic_modulo_timing() {
        let config = RunConfig {
            circuit: CircuitSource::CpFraction {
                n: 8,
                depth: 6,
                fraction: 0.6,
            },
            topology: TopologySpec::Linear { n: 3 },
            capacity: Some(3),
            detailed: true,
            ..RunConfig::default()
        };
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        assert_eq!(a[0].cost, b[0].cost);
        assert_eq!(a[0].assignment, b[0].assignment);
        assert_eq!(a[0].config_hash, b[0].config_hash);
    }

    #[test]
    fn reps_use_derived_seeds() {
        let config = RunConfig {
            circuit: CircuitSource::CpFraction {
                n: 6,
                depth: 4,
                fraction: 0.5,
            },
            topology: TopologySpec::Linear { n: 3 },
            reps: 3,
            seed: 10,
            ..RunConfig::default()
        };
        let reports = run(&config).unwrap();
        assert_eq!(reports.len(), 3);
        assert_eq!(
            reports.iter().map(|r| r.seed).collect::<Vec<_>>(),
            vec![10, 11, 12]
        );
        // distinct hashes per seed
        assert_ne!(reports[0].config_hash, reports[1].config_hash);
    }

    #[test]
    fn brute_force_tiny_instances() {
        let cp = |control, target| crate::circuit::Gate::ControlledPhase {
            control,
            target,
            theta: 1.0,
        };
        // one CP, two capacity-1 QPUs: forced split, cost 1
        let c = Circuit::from_timesteps(2, vec![vec![cp(0, 1)]]).unwrap();
        let h = build_temporal_hypergraph(&c);
        let g = Arc::new(make_linear(2, 1).unwrap());
        let engine = CostEngine::with_default_threshold(g.clone()).unwrap();
        let (map, cost) = brute_force_partition(&h, &g, &engine).unwrap();
        assert_eq!(cost, 1);
        assert_eq!(map, vec![0, 1]); // lexicographically smallest optimum
        // one CP, a capacity-2 QPU available: co-locate for free
        let g = Arc::new(make_linear(2, 2).unwrap());
        let engine = CostEngine::with_default_threshold(g.clone()).unwrap();
        let (map, cost) = brute_force_partition(&h, &g, &engine).unwrap();
        assert_eq!(cost, 0);
        assert_eq!(map, vec![0, 0]);
    }

    #[test]
    fn brute_force_budget_guard() {
        let c = Circuit::from_timesteps(5, vec![vec![]; 4]).unwrap();
        let h = build_temporal_hypergraph(&c); // 20 nodes > limit
        let g = Arc::new(make_linear(2, 5).unwrap());
        let engine = CostEngine::with_default_threshold(g.clone()).unwrap();
        assert!(brute_force_partition(&h, &g, &engine).is_err());
    }

    #[test]
    fn steiner_oracle_examples() {
        let g = make_linear(4, 1).unwrap();
        // receivers within roots: 0
        assert_eq!(brute_force_steiner_forest(&g, 0b0011, 0b0010).unwrap(), 0);
        // single receiver: its shortest-path distance to the tree
        assert_eq!(brute_force_steiner_forest(&g, 0b0001, 0b1000).unwrap(), 3);
        // root {Q0}, receivers {Q1, Q3}
        assert_eq!(brute_force_steiner_forest(&g, 0b0001, 0b1010).unwrap(), 3);
    }
}
