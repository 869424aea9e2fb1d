#![allow(dead_code)]

use cohtx::filters::{build_joint_filter, CdSign};
use cohtx::jfscd::JfsCdEngine;
use cohtx::link::payload;
use cohtx::params::{default_overlap_symbols, derive_beta2, validate};
use cohtx::{Complex64, DerivedConstants, SystemConfig, Waveform};

pub fn symbols(n: usize, seed: u64) -> Vec<Complex64> {
    payload(n, seed).unwrap().symbols[0].clone()
}

/// Default system with the given block size, roll-off and length. V is the
/// default formula capped at N/4 so every grid point is valid.
pub fn constants(n: usize, alpha: f64, length: f64) -> DerivedConstants {
    let base = SystemConfig::default();
    let beta2 = derive_beta2(base.dispersion_d, base.wavelength).unwrap();
    let v = default_overlap_symbols(beta2, length, base.symbol_period(), alpha).min(n / 4);
    constants_with_overlap(n, v, alpha, length)
}

pub fn constants_with_overlap(n: usize, v: usize, alpha: f64, length: f64) -> DerivedConstants {
    validate(&SystemConfig {
        block_symbols: n,
        overlap_symbols: Some(v),
        rolloff: alpha,
        fiber_length: length,
        ..Default::default()
    })
    .unwrap()
}

pub fn jfscd(symbols: &[Complex64], k: &DerivedConstants) -> Waveform {
    JfsCdEngine::from_constants(k, build_joint_filter(k, CdSign::Precompensate).unwrap())
        .unwrap()
        .run_stream(symbols)
        .unwrap()
}
