//! Joint frequency-domain shaping and dispersion pre-compensation.
//!
//! Each block of N symbols is transformed with an N-point FFT. Its spectrum
//! is repeated twice to form the 2N-bin spectrum of the zero-stuffed,
//! 2×-oversampled sequence, multiplied bin by bin with the joint
//! shaping/CD response (stop-band bins are written as zeros without a
//! multiply), and brought back with a 2N-point IFFT. Blocks overlap by V
//! symbols on each side and the 2V samples at either end, which carry
//! circular-convolution wrap-around, are dropped before stitching.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::filters::JointFilter;
use crate::params::DerivedConstants;
use crate::waveform::Waveform;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// N symbols of block `block_index`, including V symbols borrowed from
/// each neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    pub block_index: usize,
    pub overlap: usize,
}

impl SymbolFrame {
    pub fn new(symbols: Vec<Complex64>, block_index: usize, overlap: usize) -> Result<Self> {
        if symbols.len() < 4 * overlap {
            return Err(Error::size(format!(
                "frame of {} symbols cannot carry {} overlap symbols per side",
                symbols.len(),
                overlap
            )));
        }
        Ok(Self {
            symbols,
            block_index,
            overlap,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Indices of the symbols this frame is responsible for: `[V, N−V)`.
    pub fn valid_range(&self) -> Range<usize> {
        self.overlap..self.symbols.len() - self.overlap
    }
}

/// 2(N − 2V) retained output samples of one frame.
#[derive(Clone, Debug, PartialEq)]
pub struct OversampledBlock {
    pub samples: Vec<Complex64>,
    pub block_index: usize,
}

/// `out[k] = x[k mod N]` for `k` in `[0, 2N)`: the spectrum of the
/// zero-stuffed sequence.
pub fn replicate_spectrum(x_freq: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * x_freq.len());
    out.extend_from_slice(x_freq);
    out.extend_from_slice(x_freq);
    out
}

/// Splits `symbols` into frames that advance by `N − 2V`, zero-padding
/// V symbols before the stream and as many as needed after it.
pub fn partition_frames(symbols: &[Complex64], n: usize, overlap: usize) -> Result<Vec<SymbolFrame>> {
    if n < 4 * overlap || n == 0 {
        return Err(Error::size(format!(
            "block of {n} symbols cannot carry {overlap} overlap symbols per side"
        )));
    }
    let step = n - 2 * overlap;
    if symbols.len() < step {
        return Err(Error::size(format!(
            "stream of {} symbols is shorter than one frame payload ({step})",
            symbols.len()
        )));
    }
    let blocks = symbols.len().div_ceil(step);
    let mut padded = vec![ZERO; blocks * step + 2 * overlap];
    padded[overlap..overlap + symbols.len()].copy_from_slice(symbols);
    (0..blocks)
        .map(|m| SymbolFrame::new(padded[m * step..m * step + n].to_vec(), m, overlap))
        .collect()
}

/// Block engine holding the joint filter table and FFT plans. Shareable
/// across threads; every block is processed independently.
pub struct JfsCdEngine {
    filter: JointFilter,
    overlap: usize,
    fft_n: Arc<dyn Fft<f64>>,
    ifft_2n: Arc<dyn Fft<f64>>,
    skip_stopband: bool,
}

impl std::fmt::Debug for JfsCdEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JfsCdEngine")
            .field("n_symbols", &self.filter.n_symbols)
            .field("overlap", &self.overlap)
            .field("skip_stopband", &self.skip_stopband)
            .finish()
    }
}

impl JfsCdEngine {
    pub fn new(filter: JointFilter, overlap: usize) -> Result<Self> {
        let n = filter.n_symbols;
        if filter.len() != 2 * n {
            return Err(Error::size(format!(
                "filter has {} bins, expected {}",
                filter.len(),
                2 * n
            )));
        }
        if n < 4 * overlap {
            return Err(Error::size(format!(
                "block of {n} symbols cannot carry {overlap} overlap symbols per side"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            fft_n: planner.plan_fft_forward(n),
            ifft_2n: planner.plan_fft_inverse(2 * n),
            filter,
            overlap,
            skip_stopband: true,
        })
    }

    /// Engine for the configured block size and overlap.
    pub fn from_constants(consts: &DerivedConstants, filter: JointFilter) -> Result<Self> {
        if filter.n_symbols != consts.n_symbols {
            return Err(Error::size(format!(
                "filter built for N = {}, config has N = {}",
                filter.n_symbols, consts.n_symbols
            )));
        }
        Self::new(filter, consts.overlap_symbols)
    }

    /// Turns the stop-band shortcut off; every bin is then multiplied.
    pub fn with_stopband_skip(mut self, skip: bool) -> Self {
        self.skip_stopband = skip;
        self
    }

    pub fn filter(&self) -> &JointFilter {
        &self.filter
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn process_block(&self, frame: &SymbolFrame) -> Result<OversampledBlock> {
        let n = self.filter.n_symbols;
        if frame.len() != n {
            return Err(Error::size(format!(
                "frame has {} symbols, filter expects {n}",
                frame.len()
            )));
        }
        if frame.overlap != self.overlap {
            return Err(Error::size(format!(
                "frame overlap {} differs from engine overlap {}",
                frame.overlap, self.overlap
            )));
        }

        let mut spectrum = frame.symbols.clone();
        self.fft_n.process(&mut spectrum);

        let coeffs = self.filter.scaled();
        let mask = &self.filter.stopband_mask;
        // Replication is implicit in the `k % N` index.
        let mut buf: Vec<Complex64> = (0..2 * n)
            .map(|k| {
                if self.skip_stopband && mask[k] {
                    ZERO
                } else {
                    spectrum[k & (n - 1)] * coeffs[k]
                }
            })
            .collect();
        self.ifft_2n.process(&mut buf);

        let discard = 2 * self.overlap;
        Ok(OversampledBlock {
            samples: buf[discard..2 * n - discard].to_vec(),
            block_index: frame.block_index,
        })
    }

    /// Shapes and pre-compensates a whole symbol stream. Output holds two
    /// samples per input symbol; the first and last V symbols carry the
    /// zero-padding transient.
    pub fn run_stream(&self, symbols: &[Complex64]) -> Result<Waveform> {
        let frames = partition_frames(symbols, self.filter.n_symbols, self.overlap)?;
        let blocks = frames
            .par_iter()
            .map(|f| self.process_block(f))
            .collect::<Result<Vec<_>>>()?;
        let mut samples: Vec<Complex64> = Vec::with_capacity(blocks.len() * blocks[0].samples.len());
        for b in blocks {
            samples.extend(b.samples);
        }
        samples.truncate(2 * symbols.len());
        Ok(Waveform::new(samples, self.filter.sample_rate()))
    }
}

/// One-shot form of [`JfsCdEngine::process_block`].
pub fn process_block(frame: &SymbolFrame, filter: &JointFilter) -> Result<OversampledBlock> {
    JfsCdEngine::new(filter.clone(), frame.overlap)?.process_block(frame)
}

/// One-shot form of [`JfsCdEngine::run_stream`].
pub fn run_stream(symbols: &[Complex64], consts: &DerivedConstants, filter: &JointFilter) -> Result<Waveform> {
    JfsCdEngine::from_constants(consts, filter.clone())?.run_stream(symbols)
}
