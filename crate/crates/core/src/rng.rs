//! Seeded random streams.
//!
//! Every stochastic consumer draws from its own ChaCha stream, selected by
//! a fixed label, so switching one impairment on or off leaves the others'
//! realisations untouched.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    Payload = 1,
    TxPhase = 2,
    Ase = 3,
    LoPhase = 4,
    /// Extra streams for tests and sweeps.
    Aux = 5,
}

pub fn stream(seed: u64, label: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(label as u64);
    rng
}

/// Seed for sweep point `index`, independent of evaluation order.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
