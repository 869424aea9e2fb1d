//! Receiver chain used to score transmitter schemes: frequency-offset
//! removal, 2×2 equalization, carrier-phase recovery and 16QAM decisions.

pub mod cfo;
pub mod cpr;
pub mod equalizer;
pub mod qam;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::params::omega_grid;
use crate::waveform::Waveform;
use crate::{Error, Result};

pub use cfo::{cfo_compensate, estimate_cfo, CfoMode};
pub use cpr::{blind_phase_search, genie_derotate, resolve_quadrant, BpsConfig};
pub use equalizer::{equalize_2x2, equalize_2x2_guided, EqualizerMode, EqualizerOutput, LmsConfig, MimoTaps};
pub use qam::{demap_symbols, map_bits, QamConstellation};

/// Known symbols at the start of each polarization.
pub const TRAINING_SYMBOLS: usize = 512;

/// Complex gain g such that Σ conj(ref)·(g·rx) = Σ |ref|². Unlike a
/// least-squares fit this is not biased down by additive noise.
pub fn complex_gain(rx: &[Complex64], reference: &[Complex64]) -> Result<Complex64> {
    let n = rx.len().min(reference.len());
    let corr: Complex64 = (0..n).map(|k| reference[k].conj() * rx[k]).sum();
    let power: f64 = reference[..n].iter().map(|r| r.norm_sqr()).sum();
    if corr.norm() == 0.0 {
        return Err(Error::arg("received prefix is uncorrelated with the reference"));
    }
    Ok(Complex64::new(power, 0.0) / corr)
}

/// Brick-wall receiver front end passing |f| ≤ `cutoff_hz`.
pub fn lowpass(w: &Waveform, cutoff_hz: f64) -> Waveform {
    let n = w.len();
    if n == 0 {
        return w.clone();
    }
    let mut planner = FftPlanner::new();
    let mut buf = w.samples.clone();
    planner.plan_fft_forward(n).process(&mut buf);
    let limit = 2.0 * std::f64::consts::PI * cutoff_hz;
    for (v, om) in buf.iter_mut().zip(omega_grid(n, w.sample_rate)) {
        if om.abs() > limit {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v /= n as f64;
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    Waveform::new(buf, w.sample_rate)
}
