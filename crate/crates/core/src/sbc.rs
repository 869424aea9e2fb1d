//! Square-boundary clipping.
//!
//! A sample is clipped when its larger quadrature component exceeds the
//! threshold; the decision uses comparisons only, and clipped samples are
//! scaled toward the origin so their phase is kept.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::waveform::Waveform;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClipStats {
    pub seen: u64,
    pub clipped: u64,
}

impl ClipStats {
    pub fn merge(self, other: Self) -> Self {
        Self {
            seen: self.seen + other.seen,
            clipped: self.clipped + other.clipped,
        }
    }

    pub fn clipped_fraction(&self) -> f64 {
        if self.seen == 0 {
            0.0
        } else {
            self.clipped as f64 / self.seen as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipConfig {
    pub cr_db: f64,
    /// Amplitude threshold A_th.
    pub threshold: f64,
    pub stats: ClipStats,
}

impl ClipConfig {
    pub fn from_threshold(cr_db: f64, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::arg(format!("clip threshold must be finite and > 0, got {threshold}")));
        }
        Ok(Self {
            cr_db,
            threshold,
            stats: ClipStats::default(),
        })
    }

    /// Threshold set from the mean power of `w` as a whole.
    pub fn for_waveform(w: &Waveform, cr_db: f64) -> Result<Self> {
        Self::from_threshold(cr_db, threshold_from_cr(w.mean_power(), cr_db)?)
    }
}

/// A_th = sqrt(E|x|²)·10^(CR/20).
pub fn threshold_from_cr(mean_power: f64, cr_db: f64) -> Result<f64> {
    if !(mean_power > 0.0) || !mean_power.is_finite() {
        return Err(Error::arg(format!("mean power must be finite and > 0, got {mean_power}")));
    }
    if !cr_db.is_finite() {
        return Err(Error::arg(format!("clipping ratio must be finite, got {cr_db}")));
    }
    Ok(mean_power.sqrt() * 10f64.powf(cr_db / 20.0))
}

#[inline]
fn clip_inner(x: Complex64, a_th: f64) -> (Complex64, bool) {
    let (ar, ai) = (x.re.abs(), x.im.abs());
    let m = if ar >= ai { ar } else { ai };
    if m <= a_th {
        return (x, false);
    }
    let s = a_th / m;
    let mut re = x.re * s;
    let mut im = x.im * s;
    // Pin the dominant component to the boundary and clamp the other so
    // rounding can never leave the result outside the square; a second
    // pass then sees m == a_th and does nothing.
    if ar >= ai {
        re = a_th.copysign(x.re);
        im = im.clamp(-a_th, a_th);
    } else {
        im = a_th.copysign(x.im);
        re = re.clamp(-a_th, a_th);
    }
    (Complex64::new(re, im), true)
}

pub fn clip_sample(x: Complex64, a_th: f64) -> Complex64 {
    clip_inner(x, a_th).0
}

/// Clips every sample of `w` and adds to `config.stats`.
pub fn clip_waveform(w: &Waveform, config: &mut ClipConfig) -> Waveform {
    let a_th = config.threshold;
    let (samples, clipped): (Vec<Complex64>, Vec<bool>) =
        w.samples.par_iter().map(|&x| clip_inner(x, a_th)).unzip();
    let n_clipped = clipped.iter().filter(|&&c| c).count() as u64;
    config.stats = config.stats.merge(ClipStats {
        seen: w.len() as u64,
        clipped: n_clipped,
    });
    Waveform::new(samples, w.sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn threshold_values() {
        assert_eq!(threshold_from_cr(1.0, 0.0).unwrap(), 1.0);
        assert!((threshold_from_cr(1.0, 6.72).unwrap() - 2.167_704_104_819_695).abs() < 1e-12);
        assert!((threshold_from_cr(4.0, 6.0).unwrap() - 3.990_524_629_937_759).abs() < 1e-12);
        assert!(threshold_from_cr(0.0, 6.0).is_err());
        assert!(threshold_from_cr(-1.0, 6.0).is_err());
    }

    #[test]
    fn sample_cases() {
        assert_eq!(clip_sample(c(3.0, 0.0), 2.0), c(2.0, 0.0));
        assert_eq!(clip_sample(c(1.0, 1.0), 2.0), c(1.0, 1.0));
        assert_eq!(clip_sample(c(3.0, 4.0), 2.0), c(1.5, 2.0));
        assert_eq!(clip_sample(c(-3.0, -4.0), 2.0), c(-1.5, -2.0));
        assert_eq!(clip_sample(c(0.0, 0.0), 2.0), c(0.0, 0.0));
    }

    #[test]
    fn stats_and_untouched_fast_path() {
        let w = Waveform::new(vec![c(0.5, -0.2), c(3.0, 0.1), c(-0.1, 0.9)], 1.0);
        let mut cfg = ClipConfig::from_threshold(0.0, 1.0).unwrap();
        let out = clip_waveform(&w, &mut cfg);
        assert_eq!(cfg.stats, ClipStats { seen: 3, clipped: 1 });
        assert_eq!(out.samples[0], w.samples[0]);
        assert_eq!(out.samples[2], w.samples[2]);

        let mut loose = ClipConfig::from_threshold(0.0, 10.0).unwrap();
        assert_eq!(clip_waveform(&w, &mut loose), w);
        assert_eq!(loose.stats.clipped, 0);
    }
}
