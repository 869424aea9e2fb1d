use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::apply_cfo;
use crate::waveform::Waveform;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CfoMode {
    /// Remove a known offset.
    Genie(f64),
    /// Fourth-power spectral peak over the first `fft_size` samples.
    Estimate { fft_size: usize },
}

/// Frequency of the strongest line in the spectrum of x⁴, divided by 4.
pub fn estimate_cfo(w: &Waveform, fft_size: usize) -> Result<f64> {
    if !fft_size.is_power_of_two() || fft_size < 16 {
        return Err(Error::arg(format!("fft_size must be a power of two >= 16, got {fft_size}")));
    }
    let n = fft_size.min(w.len().next_power_of_two());
    let mut buf: Vec<Complex64> = (0..n)
        .map(|i| w.samples.get(i).map_or(Complex64::new(0.0, 0.0), |s| s.powi(4)))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (peak, _) = buf
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (k, v)| if v.norm_sqr() > best.1 { (k, v.norm_sqr()) } else { best });
    let signed = if peak > n / 2 { peak as f64 - n as f64 } else { peak as f64 };
    Ok(signed * w.sample_rate / n as f64 / 4.0)
}

/// Returns the corrected waveform and the offset that was removed.
pub fn cfo_compensate(w: &Waveform, mode: CfoMode) -> Result<(Waveform, f64)> {
    let df = match mode {
        CfoMode::Genie(df) => df,
        CfoMode::Estimate { fft_size } => estimate_cfo(w, fft_size)?,
    };
    Ok((apply_cfo(w, -df), df))
}

/// Half-bin resolution of the estimator.
pub fn estimator_resolution(fs: f64, fft_size: usize) -> f64 {
    fs / (4.0 * fft_size as f64)
}

