//! Conventional transmitter: pulse shaping followed by a separate
//! chromatic-dispersion filter.
//!
//! Two shaping variants exist. [`ShapingVariant::IdealFd`] shapes with the
//! exact raised-cosine magnitude on the same 2N grid and block partition
//! as the JFS-CD engine, then applies dispersion in a second FFT pass; it
//! is the equivalence oracle for the joint engine. [`ShapingVariant::Fir`]
//! is the practical baseline: a truncated RC FIR at 2 samples/symbol
//! followed by an overlap-save dispersion filter.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::filters::{cd_phasor, shaping_magnitude, CdProfile, CdSign};
use crate::jfscd::partition_frames;
use crate::params::{omega_grid, DerivedConstants};
use crate::waveform::Waveform;
use crate::{Error, Result};

/// Symmetric real FIR, `span_symbols * sps + 1` taps.
#[derive(Clone, Debug, PartialEq)]
pub struct FirFilter {
    pub taps: Vec<f64>,
    pub span_symbols: usize,
    pub sps: usize,
}

impl FirFilter {
    pub fn center(&self) -> usize {
        self.taps.len() / 2
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Raised-cosine impulse response at `t` symbol periods, peak 1.
pub fn rc_impulse(t: f64, alpha: f64) -> f64 {
    let d = 1.0 - (2.0 * alpha * t).powi(2);
    if alpha > 0.0 && d.abs() < 1e-10 {
        // removable singularity at |t| = 1/(2α)
        PI / 4.0 * sinc(1.0 / (2.0 * alpha))
    } else {
        sinc(t) * (PI * alpha * t).cos() / d
    }
}

pub fn rc_fir_taps(alpha: f64, span_symbols: usize, sps: usize) -> Result<FirFilter> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::arg(format!("roll-off must lie in (0, 1], got {alpha}")));
    }
    if sps == 0 || !(span_symbols * sps).is_multiple_of(2) {
        return Err(Error::arg(format!(
            "span ({span_symbols}) x sps ({sps}) must be even for an odd, centred tap count"
        )));
    }
    let len = span_symbols * sps + 1;
    let center = (len / 2) as f64;
    let taps = (0..len)
        .map(|k| rc_impulse((k as f64 - center) / sps as f64, alpha))
        .collect();
    Ok(FirFilter {
        taps,
        span_symbols,
        sps,
    })
}

/// Zero-stuffs to 2 samples/symbol and convolves, centre-aligned so the
/// output has exactly `2 * symbols.len()` samples.
pub fn fir_shape(symbols: &[Complex64], fir: &FirFilter, sample_rate: f64) -> Waveform {
    let len = 2 * symbols.len();
    let center = fir.center() as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (i, &s) in symbols.iter().enumerate() {
        let pos = 2 * i as isize;
        for (k, &h) in fir.taps.iter().enumerate() {
            let n = pos + k as isize - center;
            if (0..len as isize).contains(&n) {
                out[n as usize] += s * h;
            }
        }
    }
    Waveform::new(out, sample_rate)
}

/// Overlap-save dispersion filter. Each FFT block discards `overlap`
/// samples at both ends, since the dispersion response is centred on zero
/// delay.
pub struct CdFilter {
    fft_size: usize,
    overlap: usize,
    // phasors already carry the 1/fft_size of the inverse transform
    response: Vec<Complex64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CdFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CdFilter")
            .field("fft_size", &self.fft_size)
            .field("overlap", &self.overlap)
            .finish()
    }
}

/// Half-width of the dispersion impulse response over the full sampled
/// band, in samples.
pub fn cd_memory_samples(beta2: f64, length: f64, fs: f64) -> f64 {
    beta2.abs() * length * PI * fs * fs
}

/// FFT size and per-side overlap comfortably covering the dispersion memory.
pub fn auto_cd_sizes(beta2: f64, length: f64, fs: f64) -> (usize, usize) {
    let mem = cd_memory_samples(beta2, length, fs).ceil() as usize;
    let overlap = (2 * mem + 32).next_power_of_two();
    (overlap * 8, overlap)
}

impl CdFilter {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta2: f64,
        length: f64,
        sign: CdSign,
        fs: f64,
        fft_size: usize,
        overlap: usize,
        profile: CdProfile,
    ) -> Result<Self> {
        if !fft_size.is_power_of_two() {
            return Err(Error::arg(format!("fft_size must be a power of two, got {fft_size}")));
        }
        if 2 * overlap >= fft_size {
            return Err(Error::arg(format!(
                "overlap ({overlap}) must be below fft_size / 2 ({})",
                fft_size / 2
            )));
        }
        let scale = 1.0 / fft_size as f64;
        let response = omega_grid(fft_size, fs)
            .into_iter()
            .map(|w| profile.phasor(w, beta2, length, sign) * scale)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft_size,
            overlap,
            response,
            fft: planner.plan_fft_forward(fft_size),
            ifft: planner.plan_fft_inverse(fft_size),
        })
    }

    /// Filter sized automatically from the dispersion memory.
    pub fn auto(beta2: f64, length: f64, sign: CdSign, fs: f64, profile: CdProfile) -> Result<Self> {
        let (fft_size, overlap) = auto_cd_sizes(beta2, length, fs);
        Self::new(beta2, length, sign, fs, fft_size, overlap, profile)
    }

    pub fn apply(&self, w: &Waveform) -> Waveform {
        if w.is_empty() {
            return w.clone();
        }
        let step = self.fft_size - 2 * self.overlap;
        let blocks = w.len().div_ceil(step);
        let mut padded = vec![Complex64::new(0.0, 0.0); blocks * step + 2 * self.overlap];
        padded[self.overlap..self.overlap + w.len()].copy_from_slice(&w.samples);

        let pieces: Vec<Vec<Complex64>> = (0..blocks)
            .into_par_iter()
            .map(|m| {
                let mut buf = padded[m * step..m * step + self.fft_size].to_vec();
                self.fft.process(&mut buf);
                for (b, h) in buf.iter_mut().zip(&self.response) {
                    *b *= h;
                }
                self.ifft.process(&mut buf);
                buf[self.overlap..self.fft_size - self.overlap].to_vec()
            })
            .collect();
        let mut out: Vec<Complex64> = pieces.into_iter().flatten().collect();
        out.truncate(w.len());
        Waveform::new(out, w.sample_rate)
    }
}

/// Overlap-save filtering with the exact per-bin phasor
/// `exp(sign·j(β₂/2)ω²L)`. Output length equals input length.
pub fn fd_cd_filter(
    w: &Waveform,
    beta2: f64,
    length: f64,
    sign: CdSign,
    fft_size: usize,
    overlap: usize,
) -> Result<Waveform> {
    Ok(CdFilter::new(beta2, length, sign, w.sample_rate, fft_size, overlap, CdProfile::Exact)?.apply(w))
}

/// How the cascade shapes the symbols before dispersion compensation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapingVariant {
    /// Exact RC magnitude on the JFS-CD grid and block partition.
    IdealFd,
    /// Truncated RC FIR with `span_symbols * 2 + 1` taps.
    Fir { span_symbols: usize },
}

impl ShapingVariant {
    /// The 21-tap baseline.
    pub const FIR21: Self = ShapingVariant::Fir { span_symbols: 10 };
}

/// Ideal-FD cascade on the JFS-CD block structure: zero-stuff, FFT,
/// shape, IFFT; then FFT, dispersion, IFFT; then drop 2V samples per side.
fn ideal_blocks(symbols: &[Complex64], consts: &DerivedConstants, length: f64, sign: CdSign) -> Result<Vec<Complex64>> {
    let n = consts.n_symbols;
    let m = 2 * n;
    let v = consts.overlap_symbols;
    let frames = partition_frames(symbols, n, v)?;

    let grid = omega_grid(m, consts.fs);
    let shaping = grid
        .iter()
        .map(|&w| Ok(shaping_magnitude(consts.shaping, w, consts.ts, consts.rolloff)? / (consts.ts * n as f64)))
        .collect::<Result<Vec<f64>>>()?;
    let dispersion: Vec<Complex64> = grid
        .iter()
        .map(|&w| cd_phasor(w, consts.beta2, length, sign) / m as f64)
        .collect();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let pieces: Vec<Vec<Complex64>> = frames
        .par_iter()
        .map(|frame| {
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for (i, &s) in frame.symbols.iter().enumerate() {
                buf[2 * i] = s;
            }
            fft.process(&mut buf);
            for (b, &h) in buf.iter_mut().zip(&shaping) {
                *b *= h;
            }
            ifft.process(&mut buf);
            // `buf` is now the shaped block; the dispersion stage sees it
            // as an ordinary time-domain signal.
            fft.process(&mut buf);
            for (b, h) in buf.iter_mut().zip(&dispersion) {
                *b *= h;
            }
            ifft.process(&mut buf);
            buf[2 * v..m - 2 * v].to_vec()
        })
        .collect();
    let mut out: Vec<Complex64> = pieces.into_iter().flatten().collect();
    out.truncate(2 * symbols.len());
    Ok(out)
}

/// Shaping only, no dispersion compensation. Used by the
/// receiver-side compensation baseline.
pub fn shape(symbols: &[Complex64], consts: &DerivedConstants, variant: ShapingVariant) -> Result<Waveform> {
    match variant {
        ShapingVariant::IdealFd => Ok(Waveform::new(
            ideal_blocks(symbols, consts, 0.0, CdSign::Precompensate)?,
            consts.fs,
        )),
        ShapingVariant::Fir { span_symbols } => {
            let fir = rc_fir_taps(consts.rolloff, span_symbols, 2)?;
            Ok(fir_shape(symbols, &fir, consts.fs))
        }
    }
}

/// Shaping followed by dispersion pre-compensation.
pub fn cascade_precompensate(symbols: &[Complex64], consts: &DerivedConstants, variant: ShapingVariant) -> Result<Waveform> {
    match variant {
        ShapingVariant::IdealFd => Ok(Waveform::new(
            ideal_blocks(symbols, consts, consts.fiber_length, CdSign::Precompensate)?,
            consts.fs,
        )),
        ShapingVariant::Fir { .. } => {
            let shaped = shape(symbols, consts, variant)?;
            let cd = CdFilter::auto(
                consts.beta2,
                consts.fiber_length,
                CdSign::Precompensate,
                consts.fs,
                CdProfile::for_signal(consts),
            )?;
            Ok(cd.apply(&shaped))
        }
    }
}

/// Receiver-side dispersion compensation for the post-compensation baseline.
pub fn post_compensate(w: &Waveform, consts: &DerivedConstants) -> Result<Waveform> {
    let cd = CdFilter::auto(
        consts.beta2,
        consts.fiber_length,
        CdSign::Precompensate,
        consts.fs,
        CdProfile::for_signal(consts),
    )?;
    Ok(cd.apply(w))
}
