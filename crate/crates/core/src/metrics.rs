//! PAPR/CCDF, error-rate and complexity metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::params::SystemConfig;
use crate::waveform::{mean_power, Waveform};
use crate::{Error, Result};

pub const DEFAULT_PAPR_WINDOW: usize = 1024;
pub const DEFAULT_FIR_TAPS: usize = 21;

/// PAPR in dB of each full, non-overlapping window of `window` samples.
/// Peaks are normalised by the mean power of the whole stream.
pub fn papr_windowed(w: &Waveform, window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(Error::arg("PAPR window must be > 0"));
    }
    if w.len() < window {
        return Err(Error::size(format!("{} samples is less than one {window}-sample window", w.len())));
    }
    let mean = w.mean_power();
    if !(mean > 0.0) {
        return Err(Error::arg("PAPR of an all-zero waveform is undefined"));
    }
    Ok(w.samples
        .chunks_exact(window)
        .map(|chunk| {
            let peak = chunk.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
            10.0 * (peak / mean).log10()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    /// Pr(PAPR > threshold).
    pub probabilities: Vec<f64>,
    pub window_samples: usize,
    pub n_windows: usize,
}

pub fn ccdf(paprs: &[f64], thresholds: &[f64], window_samples: usize) -> CcdfCurve {
    let mut sorted = paprs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let probabilities = thresholds
        .iter()
        .map(|&t| {
            if n == 0 {
                return 0.0;
            }
            let at_or_below = sorted.partition_point(|&p| p <= t);
            (n - at_or_below) as f64 / n as f64
        })
        .collect();
    CcdfCurve {
        thresholds: thresholds.to_vec(),
        probabilities,
        window_samples,
        n_windows: n,
    }
}

/// Evenly spaced thresholds from `lo` to `hi` inclusive.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as usize + 1;
    (0..count).map(|i| lo + step * i as f64).collect()
}

/// PAPR exceeded by a fraction `probability` of the windows.
pub fn papr_at_probability(paprs: &[f64], probability: f64) -> Result<f64> {
    if paprs.is_empty() {
        return Err(Error::size("no PAPR values"));
    }
    if !(0.0..1.0).contains(&probability) {
        return Err(Error::arg(format!("probability must lie in [0, 1), got {probability}")));
    }
    let mut sorted = paprs.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idx = ((probability * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
    Ok(sorted[idx])
}

pub fn bit_errors(bits_rx: &[u8], bits_tx: &[u8]) -> Result<usize> {
    if bits_rx.len() != bits_tx.len() {
        return Err(Error::size(format!(
            "received {} bits but transmitted {}",
            bits_rx.len(),
            bits_tx.len()
        )));
    }
    Ok(bits_rx.iter().zip(bits_tx).filter(|(a, b)| a != b).count())
}

pub fn ber(bits_rx: &[u8], bits_tx: &[u8]) -> Result<f64> {
    if bits_tx.is_empty() {
        return Err(Error::size("no bits to compare"));
    }
    Ok(bit_errors(bits_rx, bits_tx)? as f64 / bits_tx.len() as f64)
}

/// Q = 20·log₁₀(√2·erfc⁻¹(2·BER)). Returns +∞ for BER = 0 and −∞ for
/// BER ≥ 0.5; callers fall back to [`q_from_evm`] for the former.
pub fn q_from_ber(ber: f64) -> f64 {
    if ber <= 0.0 {
        f64::INFINITY
    } else if ber >= 0.5 {
        f64::NEG_INFINITY
    } else {
        20.0 * (std::f64::consts::SQRT_2 * erfc_inv(2.0 * ber)).log10()
    }
}

/// RMS error vector magnitude as a fraction (multiply by 100 for %).
pub fn evm(symbols_rx: &[Complex64], symbols_ref: &[Complex64]) -> Result<f64> {
    if symbols_rx.len() != symbols_ref.len() {
        return Err(Error::size(format!(
            "{} received symbols vs {} reference symbols",
            symbols_rx.len(),
            symbols_ref.len()
        )));
    }
    let reference = mean_power(symbols_ref);
    if !(reference > 0.0) {
        return Err(Error::arg("reference symbols have zero power"));
    }
    let err = symbols_rx
        .iter()
        .zip(symbols_ref)
        .map(|(r, s)| (r - s).norm_sqr())
        .sum::<f64>()
        / symbols_rx.len() as f64;
    Ok((err / reference).sqrt())
}

/// SNR-proxy Q: −20·log₁₀(EVM). +∞ for a perfect match.
pub fn q_from_evm(evm: f64) -> f64 {
    -20.0 * evm.log10()
}

/// Real multiplications per symbol of the joint engine, as printed:
/// (8/N)[N/2·log₂N + (1+α)N + N·log₂(2N)].
pub fn mults_jfscd(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    8.0 / nf * (nf / 2.0 * nf.log2() + (1.0 + alpha) * nf + nf * (2.0 * nf).log2())
}

/// Real multiplications per symbol of FIR shaping plus overlap-save CD
/// compensation: 2·taps + 16·log₂(2N) + 16.
pub fn mults_cascade(n: usize, fir_taps: usize) -> f64 {
    2.0 * fir_taps as f64 + 16.0 * (2.0 * n as f64).log2() + 16.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub n: usize,
    pub alpha: f64,
    pub fir_taps: usize,
    pub jfscd_mults_per_symbol: f64,
    pub cascade_mults_per_symbol: f64,
    pub reduction_fraction: f64,
}

impl ComplexityReport {
    pub fn new(n: usize, alpha: f64, fir_taps: usize) -> Self {
        let j = mults_jfscd(n, alpha);
        let c = mults_cascade(n, fir_taps);
        Self {
            n,
            alpha,
            fir_taps,
            jfscd_mults_per_symbol: j,
            cascade_mults_per_symbol: c,
            reduction_fraction: 1.0 - j / c,
        }
    }
}

/// Everything measured in one run, with the configuration that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: SystemConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ccdf: Option<CcdfCurve>,
    pub ber: Option<f64>,
    pub q_ber_db: Option<f64>,
    pub evm: Option<f64>,
    pub q_evm_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<ComplexityReport>,
}

impl MetricReport {
    pub fn new(config: SystemConfig) -> Self {
        Self {
            config,
            ccdf: None,
            ber: None,
            q_ber_db: None,
            evm: None,
            q_evm_db: None,
            complexity: None,
        }
    }

    /// Q from BER when errors were counted, otherwise from EVM.
    pub fn q_db(&self) -> Option<f64> {
        match (self.q_ber_db, self.q_evm_db) {
            (Some(q), _) if q.is_finite() => Some(q),
            (_, q) => q,
        }
    }
}
