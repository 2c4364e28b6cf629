//! Random CP-fraction benchmark circuits: fixed-depth circuits where a
//! controlled fraction of qubits take part in two-qubit CP gates at every
//! timestep.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate};
use crate::error::CircuitError;

const TAU: f64 = std::f64::consts::TAU;

/// Generate a CP-fraction circuit.
///
/// Every timestep draws `floor(fraction * n / 2)` disjoint qubit pairs
/// uniformly at random and puts a CP(theta) on each, theta uniform in
/// (0, 2pi). Every unpaired qubit gets a random (never diagonal) SingleU.
///
/// Each timestep uses its own RNG stream derived from `(seed, t)`, so for a
/// fixed seed the drawn pairings are a prefix-stable function of the
/// fraction: raising the fraction only adds pairs, which keeps sweeps over
/// the fraction comparable seed by seed.
pub fn generate_cp_fraction(
    n: u32,
    depth: u32,
    fraction: f64,
    seed: u64,
) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::TooFewQubits { min: 2, got: n });
    }
    if depth < 1 {
        return Err(CircuitError::DepthTooSmall { min: 1, got: depth });
    }
    if !(0.0..=1.0).contains(&fraction) || fraction.is_nan() {
        return Err(CircuitError::FractionOutOfRange(fraction));
    }
    let pairs = ((fraction * n as f64) / 2.0).floor() as usize;
    let mut timesteps = Vec::with_capacity(depth as usize);
    for t in 0..depth {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64 + 1);
        let mut order: Vec<u32> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut gates = Vec::with_capacity(n as usize);
        for pair in 0..pairs {
            gates.push(Gate::ControlledPhase {
                control: order[2 * pair],
                target: order[2 * pair + 1],
                theta: nonzero_angle(&mut rng),
            });
        }
        for &qubit in &order[2 * pairs..] {
            gates.push(Gate::SingleU {
                qubit,
                theta: nonzero_angle(&mut rng),
                phi: nonzero_angle(&mut rng),
                lambda: nonzero_angle(&mut rng),
            });
        }
        timesteps.push(gates);
    }
    Circuit::from_timesteps(n, timesteps)
}

/// Uniform draw from the open interval (0, 2pi).
fn nonzero_angle(rng: &mut impl Rng) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x != 0.0 {
            return x * TAU;
        }
    }
}
