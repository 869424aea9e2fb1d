//! Fiber and impairment model.
//!
//! Order of application: TX laser phase noise, chromatic dispersion,
//! first-order DGD, ASE loading, frequency offset, LO phase noise.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::cascade_ref::CdFilter;
use crate::filters::{CdProfile, CdSign};
use crate::params::{omega_grid, DerivedConstants, SystemConfig};
use crate::rng::{stream, Stream};
use crate::waveform::{DualPolWaveform, Waveform};
use crate::{Error, Result};

/// Fiber dispersion (sign −1). The banded profile keeps the response
/// short; over its exact region it is the quadratic phase.
pub fn propagate_cd(w: &Waveform, beta2: f64, length: f64, profile: CdProfile) -> Result<Waveform> {
    if length == 0.0 || beta2 == 0.0 {
        return Ok(w.clone());
    }
    Ok(CdFilter::auto(beta2, length, CdSign::Propagate, w.sample_rate, profile)?.apply(w))
}

fn rotate(w: &DualPolWaveform, theta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let (s, c) = theta.sin_cos();
    w.x.samples
        .iter()
        .zip(&w.y.samples)
        .map(|(&x, &y)| (x * c - y * s, x * s + y * c))
        .unzip()
}

/// First-order DGD: rotate 45°, delay x by +τ/2 and y by −τ/2, rotate
/// back. The delay is circular over the whole record.
pub fn apply_dgd(w: &DualPolWaveform, tau: f64) -> Result<DualPolWaveform> {
    if tau == 0.0 || w.is_empty() {
        return Ok(w.clone());
    }
    let fs = w.sample_rate();
    let n = w.len();
    let (mut a, mut b) = rotate(w, PI / 4.0);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let grid = omega_grid(n, fs);
    for (buf, sign) in [(&mut a, -1.0), (&mut b, 1.0)] {
        fft.process(buf);
        for (v, &om) in buf.iter_mut().zip(&grid) {
            // delay by d multiplies the spectrum by exp(−jωd)
            *v *= Complex64::from_polar(1.0 / n as f64, sign * om * tau / 2.0);
        }
        ifft.process(buf);
    }
    let rotated = DualPolWaveform::new(Waveform::new(a, fs), Waveform::new(b, fs))?;
    let (x, y) = rotate(&rotated, -PI / 4.0);
    DualPolWaveform::new(Waveform::new(x, fs), Waveform::new(y, fs))
}

/// Per-sample, per-polarization noise variance for a target OSNR.
pub fn ase_variance(total_power: f64, osnr_db: f64, ref_bandwidth: f64, fs: f64) -> f64 {
    let osnr = 10f64.powf(osnr_db / 10.0);
    total_power / (2.0 * osnr) * (fs / ref_bandwidth)
}

fn add_noise(w: &Waveform, variance: f64, rng: &mut ChaCha8Rng) -> Waveform {
    let sd = (variance / 2.0).sqrt();
    let samples = w
        .samples
        .iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex64::new(re, im) * sd
        })
        .collect();
    Waveform::new(samples, w.sample_rate)
}

/// Adds circular Gaussian noise to both polarizations. `osnr_db = +∞`
/// disables loading. Returns the waveform and the per-pol variance.
pub fn load_ase(
    w: &DualPolWaveform,
    osnr_db: f64,
    ref_bandwidth: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(DualPolWaveform, f64)> {
    if osnr_db == f64::INFINITY {
        return Ok((w.clone(), 0.0));
    }
    if !osnr_db.is_finite() || !(ref_bandwidth > 0.0) {
        return Err(Error::arg("OSNR must be finite or +inf, reference bandwidth > 0"));
    }
    let var = ase_variance(w.total_mean_power(), osnr_db, ref_bandwidth, w.sample_rate());
    let x = add_noise(&w.x, var, rng);
    let y = add_noise(&w.y, var, rng);
    Ok((DualPolWaveform::new(x, y)?, var))
}

/// Wiener phase trajectory starting at 0, increment variance 2πΔν/fs.
pub fn wiener_phase(len: usize, linewidth: f64, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if linewidth == 0.0 {
        return vec![0.0; len];
    }
    let sd = (2.0 * PI * linewidth / fs).sqrt();
    let mut phi = 0.0;
    (0..len)
        .map(|i| {
            if i > 0 {
                let step: f64 = StandardNormal.sample(rng);
                phi += sd * step;
            }
            phi
        })
        .collect()
}

pub fn apply_phase(w: &Waveform, phase: &[f64]) -> Result<Waveform> {
    if phase.len() != w.len() {
        return Err(Error::size(format!("{} phase values for {} samples", phase.len(), w.len())));
    }
    Ok(Waveform::new(
        w.samples
            .iter()
            .zip(phase)
            .map(|(&s, &p)| s * Complex64::from_polar(1.0, p))
            .collect(),
        w.sample_rate,
    ))
}

/// Draws a Wiener trajectory and rotates `w` by it.
pub fn apply_phase_noise(w: &Waveform, linewidth: f64, rng: &mut ChaCha8Rng) -> Result<(Waveform, Vec<f64>)> {
    let phase = wiener_phase(w.len(), linewidth, w.sample_rate, rng);
    Ok((apply_phase(w, &phase)?, phase))
}

/// exp(j2πΔf·n/fs). The cycle count is reduced mod 1 before the
/// exponential so long records keep full phase precision.
pub fn cfo_rotation(n: usize, delta_f: f64, fs: f64) -> Complex64 {
    let cycles = (delta_f / fs) * n as f64;
    Complex64::from_polar(1.0, 2.0 * PI * (cycles - cycles.round()))
}

pub fn apply_cfo(w: &Waveform, delta_f: f64) -> Waveform {
    if delta_f == 0.0 {
        return w.clone();
    }
    Waveform::new(
        w.samples
            .iter()
            .enumerate()
            .map(|(n, &s)| s * cfo_rotation(n, delta_f, w.sample_rate))
            .collect(),
        w.sample_rate,
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Impairments {
    pub beta2: f64,
    pub fiber_length: f64,
    pub cd_profile: CdProfile,
    pub dgd: f64,
    /// +∞ disables ASE.
    pub osnr_db: f64,
    pub ref_bandwidth: f64,
    pub linewidth: f64,
    pub freq_offset: f64,
}

impl Impairments {
    pub fn from_config(config: &SystemConfig, consts: &DerivedConstants) -> Self {
        Self {
            beta2: consts.beta2,
            fiber_length: consts.fiber_length,
            cd_profile: CdProfile::for_signal(consts),
            dgd: config.dgd,
            osnr_db: config.osnr_db,
            ref_bandwidth: config.ref_bandwidth,
            linewidth: config.linewidth,
            freq_offset: config.freq_offset,
        }
    }

    /// Every impairment switched off.
    pub fn none() -> Self {
        Self {
            beta2: 0.0,
            fiber_length: 0.0,
            cd_profile: CdProfile::Exact,
            dgd: 0.0,
            osnr_db: f64::INFINITY,
            ref_bandwidth: 12.5e9,
            linewidth: 0.0,
            freq_offset: 0.0,
        }
    }
}

/// Channel output plus the hidden state a genie receiver may use.
#[derive(Clone, Debug)]
pub struct ChannelOutput {
    pub waveform: DualPolWaveform,
    pub tx_phase: Vec<f64>,
    pub lo_phase: Vec<f64>,
    pub noise_variance: f64,
}

pub fn run_channel(tx: &DualPolWaveform, imp: &Impairments, seed: u64) -> Result<ChannelOutput> {
    let len = tx.len();
    let fs = tx.sample_rate();
    let tx_phase = wiener_phase(len, imp.linewidth, fs, &mut stream(seed, Stream::TxPhase));
    let lo_phase = wiener_phase(len, imp.linewidth, fs, &mut stream(seed, Stream::LoPhase));

    // same laser drives both polarizations
    let mut w = DualPolWaveform::new(apply_phase(&tx.x, &tx_phase)?, apply_phase(&tx.y, &tx_phase)?)?;
    w = DualPolWaveform::new(
        propagate_cd(&w.x, imp.beta2, imp.fiber_length, imp.cd_profile)?,
        propagate_cd(&w.y, imp.beta2, imp.fiber_length, imp.cd_profile)?,
    )?;
    w = apply_dgd(&w, imp.dgd)?;
    let (w, noise_variance) = load_ase(&w, imp.osnr_db, imp.ref_bandwidth, &mut stream(seed, Stream::Ase))?;
    let w = w.map_each(|p| apply_cfo(p, imp.freq_offset));
    let w = DualPolWaveform::new(apply_phase(&w.x, &lo_phase)?, apply_phase(&w.y, &lo_phase)?)?;
    Ok(ChannelOutput {
        waveform: w,
        tx_phase,
        lo_phase,
        noise_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::relative_l2;
    use rand::Rng;

    fn noisy(n: usize, seed: u64) -> Waveform {
        let mut rng = stream(seed, Stream::Aux);
        Waveform::new(
            (0..n)
                .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
            72e9,
        )
    }

    fn dual(n: usize) -> DualPolWaveform {
        DualPolWaveform::new(noisy(n, 1), noisy(n, 2)).unwrap()
    }

    #[test]
    fn disabled_channel_is_identity() {
        let w = dual(1000);
        let out = run_channel(&w, &Impairments::none(), 5).unwrap();
        assert_eq!(out.waveform, w);
        assert_eq!(out.noise_variance, 0.0);
    }

    #[test]
    fn dgd_preserves_energy_and_mixes() {
        let w = dual(4096);
        assert_eq!(apply_dgd(&w, 0.0).unwrap(), w);
        let out = apply_dgd(&w, 1.0 / 72e9).unwrap();
        assert!((out.energy() / w.energy() - 1.0).abs() < 1e-9);
        assert!(relative_l2(&out.x.samples, &w.x.samples) > 0.1);
        let back = apply_dgd(&out, -1.0 / 72e9).unwrap();
        assert!(relative_l2(&back.x.samples, &w.x.samples) < 1e-12);
    }

    #[test]
    fn ase_is_seeded_and_sized() {
        let w = dual(1 << 18);
        let (a, var) = load_ase(&w, 23.0, 12.5e9, &mut stream(3, Stream::Ase)).unwrap();
        let (b, _) = load_ase(&w, 23.0, 12.5e9, &mut stream(3, Stream::Ase)).unwrap();
        assert_eq!(a, b);
        let expected = ase_variance(w.total_mean_power(), 23.0, 12.5e9, 72e9);
        assert_eq!(var, expected);
        let (c, _) = load_ase(&w, f64::INFINITY, 12.5e9, &mut stream(3, Stream::Ase)).unwrap();
        assert_eq!(c, w);
    }

    #[test]
    fn phase_noise_is_unit_modulus() {
        let w = noisy(5000, 4);
        let (out, phase) = apply_phase_noise(&w, 100e3, &mut stream(1, Stream::TxPhase)).unwrap();
        assert_eq!(phase[0], 0.0);
        for (a, b) in out.samples.iter().zip(&w.samples) {
            assert!((a.norm() - b.norm()).abs() < 1e-14);
        }
        let (same, _) = apply_phase_noise(&w, 0.0, &mut stream(1, Stream::TxPhase)).unwrap();
        assert_eq!(same, w);
    }

    #[test]
    fn cfo_round_trip() {
        let w = noisy(5000, 6);
        assert_eq!(apply_cfo(&w, 0.0), w);
        let back = apply_cfo(&apply_cfo(&w, 1e9), -1e9);
        assert!(relative_l2(&back.samples, &w.samples) < 1e-12);
    }

    #[test]
    fn streams_do_not_interfere() {
        let w = dual(2048);
        let run = |osnr: f64, lw: f64| {
            let mut imp = Impairments::none();
            imp.osnr_db = osnr;
            imp.linewidth = lw;
            run_channel(&w, &imp, 9).unwrap()
        };
        let noise = |a: &ChannelOutput, b: &ChannelOutput| -> Vec<Complex64> {
            a.waveform.x.samples.iter().zip(&b.waveform.x.samples).map(|(p, q)| p - q).collect()
        };
        let plain = noise(&run(20.0, 0.0), &run(f64::INFINITY, 0.0));
        let (with_pn, without_noise) = (run(20.0, 100e3), run(f64::INFINITY, 100e3));
        assert_eq!(with_pn.tx_phase, without_noise.tx_phase);
        assert_eq!(with_pn.lo_phase, without_noise.lo_phase);
        // ASE is added before the LO rotation; undoing that rotation must
        // give back the identical noise draw
        let rotated = noise(&with_pn, &without_noise);
        let lo: Vec<f64> = with_pn.lo_phase.iter().map(|p| -p).collect();
        let back = apply_phase(&Waveform::new(rotated, 72e9), &lo).unwrap();
        assert!(relative_l2(&back.samples, &plain) < 1e-12);
    }
}
