//! Error types shared across the crate.

use thiserror::Error;

/// Error produced while parsing OpenQASM source, tagged with the 1-based
/// source line it was detected on.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("line {line}: {kind}")]
pub struct QasmError {
    pub line: usize,
    pub kind: QasmErrorKind,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QasmErrorKind {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("qubit index {index} out of range for register of size {size}")]
    QubitOutOfRange { index: usize, size: usize },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("syntax error: {0}")]
    Syntax(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CircuitError {
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error("CP fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error("circuit needs at least {min} qubits, got {got}")]
    TooFewQubits { min: u32, got: u32 },
    #[error("depth must be at least {min}, got {got}")]
    DepthTooSmall { min: u32, got: u32 },
    #[error("qubit {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: u32, num_qubits: u32 },
    #[error("controlled-phase gate must act on two distinct qubits, got {0}")]
    DuplicateQubit(u32),
    #[error("qubit {qubit} appears in two gates at timestep {timestep}")]
    QubitClash { qubit: u32, timestep: u32 },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("network needs at least {min} QPUs, got {got}")]
    TooFewQpus { min: u32, got: u32 },
    #[error("QPU capacity must be at least 1")]
    ZeroCapacity,
    #[error("link probability {0} must be in (0, 1]")]
    BadProbability(f64),
    #[error("could not sample a connected network in {0} attempts (p too small?)")]
    RetryBudgetExceeded(u32),
    #[error("generated network is disconnected")]
    Disconnected,
    #[error("link ({0}, {1}) references a missing QPU")]
    BadLink(u32, u32),
    #[error("self-link on QPU {0}")]
    SelfLink(u32),
    #[error("coarsening factor chi must be at least 2, got {0}")]
    BadChi(u32),
    #[error("QPU {0} not found in coarse graph")]
    NoSuchQpu(u32),
    #[error("graphs do not form a parent/child pair: {0}")]
    HierarchyMismatch(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CostError {
    #[error("cost engine supports at most 64 QPUs, network has {0}")]
    TooManyQpus(usize),
    #[error("table was built for a different network (fingerprint mismatch)")]
    FingerprintMismatch,
    #[error("engine has no dense table to serialize")]
    NoDenseTable,
    #[error("malformed table file: {0}")]
    BadTableFile(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PartitionError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("total capacity {capacity} cannot hold {required} qubits")]
    InsufficientCapacity { capacity: u64, required: u64 },
    #[error("assignment violates capacity of QPU {qpu} at timestep {timestep}")]
    CapacityViolation { qpu: u32, timestep: u32 },
    #[error("assignment references QPU {qpu} outside the network ({num_qpus} QPUs)")]
    BadQpu { qpu: u32, num_qpus: usize },
    #[error("assignment length {got} does not match node count {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("hypergraph depth {0} cannot be coarsened further")]
    DepthTooSmall(u32),
    #[error("coarse assignment missing a parent for node {0}")]
    MissingParent(usize),
    #[error("projection mismatch: {0}")]
    ProjectionMismatch(String),
    #[error("node {0} was assigned outside the coarse QPU set")]
    NodeOutsideRegion(usize),
    #[error("stitching error: {0}")]
    Stitch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Parse,
    Build,
    Coarsen,
    Partition,
    Stitch,
    Validate,
    Io,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Parse => "parse",
            Phase::Build => "build",
            Phase::Coarsen => "coarsen",
            Phase::Partition => "partition",
            Phase::Stitch => "stitch",
            Phase::Validate => "validate",
            Phase::Io => "io",
        };
        f.write_str(s)
    }
}

/// Pipeline error with the phase it surfaced in.
#[derive(Debug, Error)]
#[error("[{phase}] {message}")]
pub struct BenchError {
    pub phase: Phase,
    pub message: String,
}

impl BenchError {
    pub fn new(phase: Phase, err: impl std::fmt::Display) -> Self {
        BenchError {
            phase,
            message: err.to_string(),
        }
    }
}
