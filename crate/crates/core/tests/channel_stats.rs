mod common;

use std::f64::consts::PI;

use cohtx::channel::{apply_cfo, apply_dgd, load_ase, wiener_phase};
use cohtx::rng::{stream, Stream};
use cohtx::waveform::relative_l2;
use cohtx::{DualPolWaveform, Waveform};
use common::{constants, jfscd, symbols};
use rustfft::FftPlanner;

fn shaped_pair(n_sym: usize) -> DualPolWaveform {
    let k = constants(128, 0.2, 100e3);
    DualPolWaveform::new(jfscd(&symbols(n_sym, 1), &k), jfscd(&symbols(n_sym, 2), &k)).unwrap()
}

#[test]
fn measured_osnr_matches_target() {
    let w = shaped_pair(1 << 17);
    let (out, _) = load_ase(&w, 23.0, 12.5e9, &mut stream(8, Stream::Ase)).unwrap();
    let noise: f64 = [(&out.x, &w.x), (&out.y, &w.y)]
        .iter()
        .flat_map(|(a, b)| a.samples.iter().zip(&b.samples).map(|(p, q)| (p - q).norm_sqr()))
        .sum::<f64>()
        / w.len() as f64;
    // both polarizations' noise, rescaled from fs to the reference bandwidth
    let osnr = w.total_mean_power() / (noise * 12.5e9 / 72e9);
    let db = 10.0 * osnr.log10();
    assert!((db - 23.0).abs() < 0.05, "{db}");
}

#[test]
fn wiener_increments_have_the_stated_variance() {
    let fs = 72e9;
    let lw = 100e3;
    let phi = wiener_phase(1 << 21, lw, fs, &mut stream(3, Stream::TxPhase));
    for lag in [1usize, 10, 100] {
        let incs: Vec<f64> = phi.chunks_exact(lag + 1).map(|c| c[lag] - c[0]).collect();
        let var = incs.iter().map(|d| d * d).sum::<f64>() / incs.len() as f64;
        let expected = 2.0 * PI * lw * lag as f64 / fs;
        assert!((var / expected - 1.0).abs() < 0.05, "lag {lag}: {var:e} vs {expected:e}");
    }
}

fn centroid(w: &Waveform) -> f64 {
    let n = w.len();
    let mut buf = w.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, v) in buf.iter().enumerate() {
        let f = if k > n / 2 { k as f64 - n as f64 } else { k as f64 } * w.sample_rate / n as f64;
        num += f * v.norm_sqr();
        den += v.norm_sqr();
    }
    num / den
}

#[test]
fn frequency_offset_moves_the_spectral_centroid() {
    let w = shaped_pair(1 << 17).x;
    assert_eq!(w.len(), 1 << 18);
    let shift = centroid(&apply_cfo(&w, 1e9)) - centroid(&w);
    assert!((shift - 1e9).abs() < 72e9 / (1 << 18) as f64, "{shift}");
    for (a, b) in apply_cfo(&w, 1e9).samples.iter().zip(&w.samples) {
        assert!((a.norm() - b.norm()).abs() < 1e-14);
    }
}

#[test]
fn dgd_is_unitary() {
    let w = shaped_pair(1 << 12);
    let out = apply_dgd(&w, 1.0 / 72e9).unwrap();
    assert!((out.energy() / w.energy() - 1.0).abs() < 1e-9);
    let back = apply_dgd(&out, -1.0 / 72e9).unwrap();
    assert!(relative_l2(&back.y.samples, &w.y.samples) < 1e-12);
}
