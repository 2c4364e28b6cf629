//! Partition quantum circuits across QPU networks so that the total
//! end-to-end entanglement (e-bit) cost is minimized.
//!
//! The pipeline: a circuit in the {U, CP} basis becomes a temporal
//! hypergraph over (qubit, timestep) nodes; hyper-edge costs are Steiner
//! forests on the QPU graph, served from a configuration-pair cost table;
//! a Fiduccia-Mattheyses refinement with multilevel temporal coarsening
//! optimizes the node-to-QPU assignment; for large networks a recursive
//! matching-based network coarsening splits the problem into sub-networks
//! stitched back into a full solution.

pub mod bench;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod hypergraph;
pub mod network;
pub mod partition;

pub use circuit::{generate_cp_fraction, parse_qasm, Circuit, Gate};
pub use cost::{alltoall_cost, forest_cost, root_tree, ConfigPair, CostEngine};
pub use error::{BenchError, CircuitError, CostError, NetworkError, PartitionError};
pub use hypergraph::{build_temporal_hypergraph, coarsen_temporal, TemporalHypergraph};
pub use network::{
    coarsen_network, coarsen_network_recursive, compute_matching, expand_node, make_grid,
    make_linear, make_random, CoarseningHierarchy, MatchingMode, NetworkGraph,
};
pub use partition::{
    initial_assignment, multilevel_partition, project_assignment, recursive_partition, Assignment,
    FmOptions,
};
