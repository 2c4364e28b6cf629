//! Circuits in the {U, CP} basis: parsing, basis rewriting, ASAP scheduling
//! and random benchmark generation.

mod generate;
mod qasm;

pub use generate::generate_cp_fraction;
pub use qasm::{parse_program, parse_qasm};

use crate::error::CircuitError;

pub const PI: f64 = std::f64::consts::PI;

/// A gate in the target basis.
///
/// `SingleU` is the general single-qubit rotation U(theta, phi, lambda);
/// `ControlledPhase` is CP(theta) with the first listed qubit taken as the
/// control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    SingleU {
        qubit: u32,
        theta: f64,
        phi: f64,
        lambda: f64,
    },
    ControlledPhase {
        control: u32,
        target: u32,
        theta: f64,
    },
}

impl Gate {
    pub fn qubits(&self) -> impl Iterator<Item = u32> {
        let (a, b) = match *self {
            Gate::SingleU { qubit, .. } => (qubit, None),
            Gate::ControlledPhase {
                control, target, ..
            } => (control, Some(target)),
        };
        std::iter::once(a).chain(b)
    }

    /// A single-qubit gate is diagonal in the computational basis iff
    /// theta = 0, i.e. it is U(0, 0, lambda) up to global phase. CP gates
    /// are always diagonal.
    pub fn is_diagonal(&self) -> bool {
        match *self {
            Gate::SingleU { theta, .. } => theta == 0.0,
            Gate::ControlledPhase { .. } => true,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::ControlledPhase { .. })
    }
}

/// A depth-scheduled circuit: one set of non-overlapping gates per timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: u32,
    timesteps: Vec<Vec<Gate>>,
}

impl Circuit {
    /// Build a circuit from pre-scheduled timesteps, validating that qubit
    /// indices are in range, CP gates touch two distinct qubits, and no
    /// qubit appears twice within a timestep.
    pub fn from_timesteps(
        num_qubits: u32,
        timesteps: Vec<Vec<Gate>>,
    ) -> Result<Self, CircuitError> {
        for (t, gates) in timesteps.iter().enumerate() {
            let mut busy = vec![false; num_qubits as usize];
            for gate in gates {
                if let Gate::ControlledPhase {
                    control, target, ..
                } = gate
                {
                    if control == target {
                        return Err(CircuitError::DuplicateQubit(*control));
                    }
                }
                for q in gate.qubits() {
                    if q >= num_qubits {
                        return Err(CircuitError::QubitOutOfRange {
                            qubit: q,
                            num_qubits,
                        });
                    }
                    if busy[q as usize] {
                        return Err(CircuitError::QubitClash {
                            qubit: q,
                            timestep: t as u32,
                        });
                    }
                    busy[q as usize] = true;
                }
            }
        }
        Ok(Circuit {
            num_qubits,
            timesteps,
        })
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn depth(&self) -> u32 {
        self.timesteps.len() as u32
    }

    pub fn timesteps(&self) -> &[Vec<Gate>] {
        &self.timesteps
    }

    /// Iterate all gates with their timestep.
    pub fn gates(&self) -> impl Iterator<Item = (u32, &Gate)> {
        self.timesteps
            .iter()
            .enumerate()
            .flat_map(|(t, gs)| gs.iter().map(move |g| (t as u32, g)))
    }

    /// The gate acting on `qubit` at timestep `t`, if any.
    pub fn gate_on(&self, qubit: u32, t: u32) -> Option<&Gate> {
        self.timesteps
            .get(t as usize)?
            .iter()
            .find(|g| g.qubits().any(|q| q == qubit))
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates().filter(|(_, g)| g.is_two_qubit()).count()
    }
}

/// An unscheduled gate list as it appears in source order, possibly using
/// alias gates outside the {U, CP} basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub num_qubits: u32,
    pub gates: Vec<RawGate>,
}

/// Source-level gates accepted by the parser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawGate {
    U { qubit: u32, theta: f64, phi: f64, lambda: f64 },
    U1 { qubit: u32, lambda: f64 },
    Rz { qubit: u32, lambda: f64 },
    H { qubit: u32 },
    X { qubit: u32 },
    Z { qubit: u32 },
    Cx { control: u32, target: u32 },
    Cz { control: u32, target: u32 },
    Cp { control: u32, target: u32, theta: f64 },
}

/// Rewrite a program into the {U, CP} basis.
///
/// Rules: cz -> CP(pi); cx(c,t) -> H(t) CP(pi)(c,t) H(t) with
/// H = U(pi/2, 0, pi); rz(l)/u1(l) -> U(0, 0, l); h -> U(pi/2, 0, pi);
/// x -> U(pi, 0, pi); z -> U(0, 0, pi). Total on parsed programs.
pub fn rewrite_to_basis(program: &Program) -> Vec<Gate> {
    let h = |qubit| Gate::SingleU {
        qubit,
        theta: PI / 2.0,
        phi: 0.0,
        lambda: PI,
    };
    let mut out = Vec::with_capacity(program.gates.len());
    for gate in &program.gates {
        match *gate {
            RawGate::U {
                qubit,
                theta,
                phi,
                lambda,
            } => out.push(Gate::SingleU {
                qubit,
                theta,
                phi,
                lambda,
            }),
            RawGate::U1 { qubit, lambda } | RawGate::Rz { qubit, lambda } => {
                out.push(Gate::SingleU {
                    qubit,
                    theta: 0.0,
                    phi: 0.0,
                    lambda,
                })
            }
            RawGate::H { qubit } => out.push(h(qubit)),
            RawGate::X { qubit } => out.push(Gate::SingleU {
                qubit,
                theta: PI,
                phi: 0.0,
                lambda: PI,
            }),
            RawGate::Z { qubit } => out.push(Gate::SingleU {
                qubit,
                theta: 0.0,
                phi: 0.0,
                lambda: PI,
            }),
            RawGate::Cx { control, target } => {
                out.push(h(target));
                out.push(Gate::ControlledPhase {
                    control,
                    target,
                    theta: PI,
                });
                out.push(h(target));
            }
            RawGate::Cz { control, target } => out.push(Gate::ControlledPhase {
                control,
                target,
                theta: PI,
            }),
            RawGate::Cp {
                control,
                target,
                theta,
            } => out.push(Gate::ControlledPhase {
                control,
                target,
                theta,
            }),
        }
    }
    out
}

/// Greedy as-soon-as-possible scheduling: each gate is placed at the
/// earliest timestep at least one past the latest timestep of any gate
/// already on its qubits.
pub fn schedule(num_qubits: u32, gates: &[Gate]) -> Result<Circuit, CircuitError> {
    let mut ready = vec![0u32; num_qubits as usize];
    let mut timesteps: Vec<Vec<Gate>> = Vec::new();
    for gate in gates {
        for q in gate.qubits() {
            if q >= num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
        }
        if let Gate::ControlledPhase {
            control, target, ..
        } = gate
        {
            if control == target {
                return Err(CircuitError::DuplicateQubit(*control));
            }
        }
        let t = gate.qubits().map(|q| ready[q as usize]).max().unwrap_or(0);
        if t as usize >= timesteps.len() {
            timesteps.resize_with(t as usize + 1, Vec::new);
        }
        timesteps[t as usize].push(*gate);
        for q in gate.qubits() {
            ready[q as usize] = t + 1;
        }
    }
    Circuit::from_timesteps(num_qubits, timesteps)
}
