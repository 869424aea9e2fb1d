use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::qam::QamConstellation;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BpsConfig {
    pub test_phases: usize,
    /// Symbols summed per decision, centred on the current symbol.
    pub window: usize,
}

impl Default for BpsConfig {
    fn default() -> Self {
        Self {
            test_phases: 32,
            window: 64,
        }
    }
}

/// Multiplies by exp(−jφ[n]).
pub fn genie_derotate(samples: &[Complex64], phase: &[f64]) -> Result<Vec<Complex64>> {
    if samples.len() != phase.len() {
        return Err(Error::size(format!("{} phase values for {} samples", phase.len(), samples.len())));
    }
    Ok(samples
        .iter()
        .zip(phase)
        .map(|(&s, &p)| s * Complex64::from_polar(1.0, -p))
        .collect())
}

/// Blind phase search. Returns the derotated symbols and the unwrapped
/// phase estimate per symbol. Input must already be at constellation scale.
pub fn blind_phase_search(symbols: &[Complex64], cfg: BpsConfig) -> Result<(Vec<Complex64>, Vec<f64>)> {
    if cfg.test_phases == 0 || cfg.window == 0 {
        return Err(Error::arg("BPS needs at least one test phase and a non-empty window"));
    }
    let qam = QamConstellation::qam16();
    let b = cfg.test_phases;
    let rotors: Vec<Complex64> = (0..b)
        .map(|i| Complex64::from_polar(1.0, -(i as f64) * FRAC_PI_2 / b as f64))
        .collect();
    // distance[k][i]: squared decision error of symbol k under test phase i
    let dist: Vec<Vec<f64>> = symbols
        .iter()
        .map(|&s| {
            rotors
                .iter()
                .map(|&r| {
                    let z = s * r;
                    (z - qam.decide(z)).norm_sqr()
                })
                .collect()
        })
        .collect();

    let n = symbols.len();
    let half = cfg.window / 2;
    let mut acc = vec![0.0; b];
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut raw = Vec::with_capacity(n);
    for k in 0..n {
        let want_lo = k.saturating_sub(half);
        let want_hi = (k + cfg.window - half).min(n);
        while hi < want_hi {
            for (a, d) in acc.iter_mut().zip(&dist[hi]) {
                *a += d;
            }
            hi += 1;
        }
        while lo < want_lo {
            for (a, d) in acc.iter_mut().zip(&dist[lo]) {
                *a -= d;
            }
            lo += 1;
        }
        let best = (0..b).fold(0, |best, i| if acc[i] < acc[best] { i } else { best });
        raw.push(best as f64 * FRAC_PI_2 / b as f64);
    }

    // remove π/2 jumps
    let mut phase = Vec::with_capacity(n);
    let mut prev = 0.0;
    for (k, &p) in raw.iter().enumerate() {
        let mut q = p;
        if k > 0 {
            q += FRAC_PI_2 * ((prev - p) / FRAC_PI_2).round();
        }
        phase.push(q);
        prev = q;
    }
    let out = genie_derotate(symbols, &phase)?;
    Ok((out, phase))
}

/// Rotates by the multiple of π/2 that best matches the known prefix.
pub fn resolve_quadrant(symbols: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let n = reference.len().min(symbols.len());
    let best = (0..4)
        .map(|q| {
            let r = Complex64::from_polar(1.0, q as f64 * PI / 2.0);
            let err: f64 = (0..n).map(|k| (symbols[k] * r - reference[k]).norm_sqr()).sum();
            (q, err)
        })
        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
        .0;
    let r = Complex64::from_polar(1.0, best as f64 * PI / 2.0);
    symbols.iter().map(|&s| s * r).collect()
}
