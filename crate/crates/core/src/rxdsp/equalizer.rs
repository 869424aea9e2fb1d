use num_complex::Complex64;

use super::qam::QamConstellation;
use crate::waveform::{DualPolWaveform, Waveform};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmsConfig {
    /// Odd tap count per filter, T/2 spaced.
    pub taps: usize,
    pub mu: f64,
    /// Passes over the training prefix.
    pub epochs: usize,
    /// Keep adapting on hard decisions after the prefix instead of
    /// freezing. Needs phase-stable input.
    pub decision_directed: bool,
}

impl Default for LmsConfig {
    fn default() -> Self {
        Self {
            taps: 15,
            mu: 1e-3,
            epochs: 30,
            decision_directed: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EqualizerMode {
    /// Downsample at the stronger of the two sampling phases.
    Bypass,
    Lms(LmsConfig),
}

/// 2×2 butterfly taps: `h[out][in][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoTaps {
    pub h: [[Vec<Complex64>; 2]; 2],
}

impl MimoTaps {
    pub fn identity(taps: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); taps];
        let mut h = [[z.clone(), z.clone()], [z.clone(), z]];
        h[0][0][taps / 2] = Complex64::new(1.0, 0.0);
        h[1][1][taps / 2] = Complex64::new(1.0, 0.0);
        Self { h }
    }

    pub fn len(&self) -> usize {
        self.h[0][0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest deviation from the centre-tap identity.
    pub fn distance_from_identity(&self) -> f64 {
        let id = Self::identity(self.len());
        let mut worst = 0.0f64;
        for o in 0..2 {
            for i in 0..2 {
                for (a, b) in self.h[o][i].iter().zip(&id.h[o][i]) {
                    worst = worst.max((a - b).norm());
                }
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct EqualizerOutput {
    /// One sample per symbol.
    pub symbols: DualPolWaveform,
    pub taps: Option<MimoTaps>,
    pub sampling_phase: usize,
}

fn tap_input(pol: &[Complex64], center: usize, taps: usize, buf: &mut [Complex64]) {
    let half = (taps / 2) as isize;
    for (k, b) in buf.iter_mut().enumerate() {
        let idx = center as isize + k as isize - half;
        *b = if (0..pol.len() as isize).contains(&idx) {
            pol[idx as usize]
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
}

fn filter_out(h: &MimoTaps, ix: &[Complex64], iy: &[Complex64]) -> [Complex64; 2] {
    let mut y = [Complex64::new(0.0, 0.0); 2];
    for (o, yo) in y.iter_mut().enumerate() {
        for k in 0..ix.len() {
            *yo += h.h[o][0][k] * ix[k] + h.h[o][1][k] * iy[k];
        }
    }
    y
}

/// Stronger of the two T/2 sampling phases by mean power.
pub fn best_sampling_phase(w: &DualPolWaveform) -> usize {
    let power = |phase: usize| -> f64 {
        [&w.x, &w.y]
            .iter()
            .flat_map(|p| p.samples.iter().skip(phase).step_by(2))
            .map(|s| s.norm_sqr())
            .sum()
    };
    if power(1) > power(0) {
        1
    } else {
        0
    }
}

/// 2 samples/symbol in, 1 out. `training` holds known symbols for the
/// first symbols of each polarization; LMS adapts on them and then either
/// freezes or continues on hard decisions.
pub fn equalize_2x2(w: &DualPolWaveform, training: [&[Complex64]; 2], mode: EqualizerMode) -> Result<EqualizerOutput> {
    match mode {
        EqualizerMode::Bypass => {
            let rate = w.sample_rate() / 2.0;
            let phase = best_sampling_phase(w);
            let pick = |p: &Waveform| Waveform::new(p.samples.iter().skip(phase).step_by(2).copied().collect(), rate);
            Ok(EqualizerOutput {
                symbols: DualPolWaveform::new(pick(&w.x), pick(&w.y))?,
                taps: None,
                sampling_phase: phase,
            })
        }
        EqualizerMode::Lms(cfg) => lms(w, training, cfg, None),
    }
}

/// LMS whose decision-directed stage slices `y·guide[k]` instead of `y`.
/// `guide` carries a per-symbol gain and carrier-phase estimate from an
/// earlier pass, so decisions stay valid while the phase wanders.
pub fn equalize_2x2_guided(
    w: &DualPolWaveform,
    training: [&[Complex64]; 2],
    cfg: LmsConfig,
    guide: [&[Complex64]; 2],
) -> Result<EqualizerOutput> {
    let n_sym = w.len() / 2;
    if guide[0].len() < n_sym || guide[1].len() < n_sym {
        return Err(Error::size(format!("guide shorter than {n_sym} symbols")));
    }
    lms(w, training, cfg, Some(guide))
}

fn lms(
    w: &DualPolWaveform,
    training: [&[Complex64]; 2],
    cfg: LmsConfig,
    guide: Option<[&[Complex64]; 2]>,
) -> Result<EqualizerOutput> {
    let n_sym = w.len() / 2;
    let rate = w.sample_rate() / 2.0;
    if cfg.taps.is_multiple_of(2) {
        return Err(Error::arg(format!("LMS tap count must be odd, got {}", cfg.taps)));
    }
    let train = training[0].len().min(training[1].len()).min(n_sym);
    if train == 0 {
        return Err(Error::arg("LMS mode needs training symbols"));
    }
    let mut h = MimoTaps::identity(cfg.taps);
    let mut ix = vec![Complex64::new(0.0, 0.0); cfg.taps];
    let mut iy = ix.clone();
    let update = |h: &mut MimoTaps, ix: &[Complex64], iy: &[Complex64], o: usize, e: Complex64| {
        for t in 0..cfg.taps {
            h.h[o][0][t] += e * ix[t].conj();
            h.h[o][1][t] += e * iy[t].conj();
        }
    };
    for _ in 0..cfg.epochs {
        for k in 0..train {
            tap_input(&w.x.samples, 2 * k, cfg.taps, &mut ix);
            tap_input(&w.y.samples, 2 * k, cfg.taps, &mut iy);
            let y = filter_out(&h, &ix, &iy);
            for o in 0..2 {
                update(&mut h, &ix, &iy, o, (training[o][k] - y[o]) * cfg.mu);
            }
        }
    }
    let qam = QamConstellation::qam16();
    let (mut ox, mut oy) = (Vec::with_capacity(n_sym), Vec::with_capacity(n_sym));
    for k in 0..n_sym {
        tap_input(&w.x.samples, 2 * k, cfg.taps, &mut ix);
        tap_input(&w.y.samples, 2 * k, cfg.taps, &mut iy);
        let y = filter_out(&h, &ix, &iy);
        if cfg.decision_directed && k >= train {
            for o in 0..2 {
                let target = match guide {
                    Some(g) => qam.decide(y[o] * g[o][k]) / g[o][k],
                    None => qam.decide(y[o]),
                };
                update(&mut h, &ix, &iy, o, (target - y[o]) * cfg.mu);
            }
        }
        ox.push(y[0]);
        oy.push(y[1]);
    }
    Ok(EqualizerOutput {
        symbols: DualPolWaveform::new(Waveform::new(ox, rate), Waveform::new(oy, rate))?,
        taps: Some(h),
        sampling_phase: 0,
    })
}
