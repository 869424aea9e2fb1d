//! Shared fixtures for the criterion benchmarks.

use cohtx::link::payload;
use cohtx::params::validate;
use cohtx::{Complex64, DerivedConstants, SystemConfig};

/// Default system at block size `n`.
pub fn constants(n: usize, rolloff: f64) -> DerivedConstants {
    validate(&SystemConfig {
        block_symbols: n,
        rolloff,
        ..Default::default()
    })
    .expect("benchmark configuration is valid")
}

/// Deterministic 16QAM symbols.
pub fn symbols(n: usize) -> Vec<Complex64> {
    payload(n, 1).expect("payload").symbols[0].clone()
}
