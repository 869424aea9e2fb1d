//! System configuration and the constants derived from it.
//!
//! Every physical and DSP parameter lives in [`SystemConfig`]. Defaults
//! reproduce the reference simulation point: 36 GBd DP-16QAM at two
//! samples per symbol, roll-off 0.2, 100 km of fiber with
//! D = 16 ps/(nm·km), 100 kHz lasers with a 1 GHz offset and 23 dB OSNR.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Floor on the derived overlap so raised-cosine tails are covered even
/// when the dispersion term vanishes.
pub const MIN_OVERLAP_SYMBOLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QAM16")]
    Qam16,
}

/// Spectral shaping applied by the transmitter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapingProfile {
    /// Full raised-cosine (Nyquist) response at the transmitter.
    #[default]
    Rc,
    /// Root-raised-cosine; the receiver applies the matching half.
    Rrc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Symbols per second.
    pub baud_rate: f64,
    /// Samples per symbol. Only 2 is supported.
    pub sps: u32,
    /// Raised-cosine roll-off, in (0, 1].
    pub rolloff: f64,
    /// Dispersion parameter in ps/(nm·km).
    #[serde(rename = "dispersion_D")]
    pub dispersion_d: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Meters.
    pub fiber_length: f64,
    /// Per-laser linewidth in Hz.
    pub linewidth: f64,
    /// Carrier offset between transmitter and local oscillator, Hz.
    pub freq_offset: f64,
    pub osnr_db: f64,
    /// OSNR reference bandwidth, Hz.
    pub ref_bandwidth: f64,
    /// Symbols per JFS-CD block (N). Power of two.
    pub block_symbols: usize,
    /// Overlap symbols per block side (V). Derived from the dispersion
    /// memory when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap_symbols: Option<usize>,
    /// Differential group delay, seconds.
    pub dgd: f64,
    pub seed: u64,
    pub modulation: Modulation,
    pub shaping: ShapingProfile,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            baud_rate: 36e9,
            sps: 2,
            rolloff: 0.2,
            dispersion_d: 16.0,
            wavelength: SPEED_OF_LIGHT / 193.1e12,
            fiber_length: 100e3,
            linewidth: 100e3,
            freq_offset: 1e9,
            osnr_db: 23.0,
            ref_bandwidth: 12.5e9,
            block_symbols: 128,
            overlap_symbols: None,
            dgd: 0.0,
            seed: 1,
            modulation: Modulation::Qam16,
            shaping: ShapingProfile::Rc,
        }
    }
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    /// Copy with the derived overlap written back, so serialized configs
    /// are self-describing.
    pub fn resolved(&self) -> Result<Self> {
        let consts = validate(self)?;
        Ok(Self {
            overlap_symbols: Some(consts.overlap_symbols),
            ..self.clone()
        })
    }

    pub fn symbol_period(&self) -> f64 {
        1.0 / self.baud_rate
    }
}

/// Quantities computed once from a validated [`SystemConfig`].
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedConstants {
    /// Group-velocity dispersion, s²/m. Opposite sign to D.
    pub beta2: f64,
    /// Symbol period, s.
    pub ts: f64,
    /// Sample rate, Hz.
    pub fs: f64,
    pub rolloff: f64,
    pub fiber_length: f64,
    pub shaping: ShapingProfile,
    /// N.
    pub n_symbols: usize,
    /// V.
    pub overlap_symbols: usize,
    /// Angular frequencies of a 2N-point DFT at `fs`, DC at index 0,
    /// indices above N wrapped to negative frequency.
    pub omega_grid_2n: Vec<f64>,
}

impl DerivedConstants {
    /// One-sided signal bandwidth (1+α)/(2Ts) in Hz.
    pub fn signal_edge_hz(&self) -> f64 {
        (1.0 + self.rolloff) / (2.0 * self.ts)
    }
}

/// β₂ = −Dλ²/(2πc), with D in ps/(nm·km) and λ in meters.
pub fn derive_beta2(dispersion_d: f64, wavelength: f64) -> Result<f64> {
    if !dispersion_d.is_finite() {
        return Err(Error::config("dispersion_D", "must be finite"));
    }
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(Error::config("wavelength", "must be finite and > 0"));
    }
    // ps/(nm·km) -> s/m²
    let d_si = dispersion_d * 1e-6;
    Ok(-d_si * wavelength * wavelength / (2.0 * PI * SPEED_OF_LIGHT))
}

/// Angular-frequency grid of an `m`-point DFT at sample rate `fs`.
pub fn omega_grid(m: usize, fs: f64) -> Vec<f64> {
    let half = m / 2;
    (0..m)
        .map(|k| {
            let signed = if k <= half {
                k as f64
            } else {
                k as f64 - m as f64
            };
            2.0 * PI * fs * signed / m as f64
        })
        .collect()
}

/// Overlap needed to hold twice the dispersion group-delay spread at the
/// band edge, floored at [`MIN_OVERLAP_SYMBOLS`].
pub fn default_overlap_symbols(beta2: f64, fiber_length: f64, ts: f64, rolloff: f64) -> usize {
    let spread = 2.0 * beta2.abs() * fiber_length * PI * (1.0 + rolloff) / (ts * ts);
    (spread.ceil() as usize).max(MIN_OVERLAP_SYMBOLS)
}

fn finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("must be finite, got {v}")))
    }
}

/// Checks every invariant of `config` and computes the derived constants.
pub fn validate(config: &SystemConfig) -> Result<DerivedConstants> {
    finite("baud_rate", config.baud_rate)?;
    if config.baud_rate <= 0.0 {
        return Err(Error::config("baud_rate", "must be > 0"));
    }
    if config.sps != 2 {
        return Err(Error::config(
            "sps",
            format!("only 2 samples per symbol is supported, got {}", config.sps),
        ));
    }
    finite("rolloff", config.rolloff)?;
    if !(config.rolloff > 0.0 && config.rolloff <= 1.0) {
        return Err(Error::config(
            "rolloff",
            format!("must lie in (0, 1], got {}", config.rolloff),
        ));
    }
    finite("fiber_length", config.fiber_length)?;
    if config.fiber_length < 0.0 {
        return Err(Error::config("fiber_length", "must be >= 0"));
    }
    finite("linewidth", config.linewidth)?;
    if config.linewidth < 0.0 {
        return Err(Error::config("linewidth", "must be >= 0"));
    }
    finite("freq_offset", config.freq_offset)?;
    finite("osnr_db", config.osnr_db)?;
    finite("ref_bandwidth", config.ref_bandwidth)?;
    if config.ref_bandwidth <= 0.0 {
        return Err(Error::config("ref_bandwidth", "must be > 0"));
    }
    finite("dgd", config.dgd)?;
    if config.dgd < 0.0 {
        return Err(Error::config("dgd", "must be >= 0"));
    }
    let beta2 = derive_beta2(config.dispersion_d, config.wavelength)?;
    let ts = config.symbol_period();
    let fs = config.baud_rate * config.sps as f64;

    let n = config.block_symbols;
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::config(
            "block_symbols",
            format!("must be a power of two >= 4, got {n}"),
        ));
    }
    let overlap = match config.overlap_symbols {
        Some(v) => v,
        None => default_overlap_symbols(beta2, config.fiber_length, ts, config.rolloff),
    };
    if n < 4 * overlap {
        return Err(Error::config(
            if config.overlap_symbols.is_some() {
                "overlap_symbols"
            } else {
                "block_symbols"
            },
            format!("block_symbols ({n}) must be >= 4 * overlap_symbols ({overlap})"),
        ));
    }

    Ok(DerivedConstants {
        beta2,
        ts,
        fs,
        rolloff: config.rolloff,
        fiber_length: config.fiber_length,
        shaping: config.shaping,
        n_symbols: n,
        overlap_symbols: overlap,
        omega_grid_2n: omega_grid(2 * n, fs),
    })
}
