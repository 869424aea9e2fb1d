mod common;

use cohtx::cascade_ref::{cascade_precompensate, ShapingVariant};
use cohtx::channel::propagate_cd;
use cohtx::filters::{build_joint_filter, CdProfile, CdSign};
use cohtx::jfscd::{partition_frames, JfsCdEngine};
use cohtx::waveform::relative_l2;
use common::{constants, constants_with_overlap, jfscd, symbols};

#[test]
fn joint_engine_matches_ideal_cascade_over_grid() {
    let s = symbols(1 << 13, 11);
    for n in [64, 128] {
        for alpha in [0.01, 0.1, 0.2] {
            for length in [0.0, 40e3, 100e3] {
                let k = constants(n, alpha, length);
                let a = jfscd(&s, &k);
                let b = cascade_precompensate(&s, &k, ShapingVariant::IdealFd).unwrap();
                let err = relative_l2(&a.samples, &b.samples);
                assert!(err < 1e-10, "N={n} α={alpha} L={length}: {err:.3e}");
            }
        }
    }
}

#[test]
fn every_block_matches_the_oracle() {
    let k = constants(128, 0.2, 100e3);
    let s = symbols(4000, 12);
    let engine = JfsCdEngine::from_constants(&k, build_joint_filter(&k, CdSign::Precompensate).unwrap()).unwrap();
    let oracle = cascade_precompensate(&s, &k, ShapingVariant::IdealFd).unwrap();
    let step = 2 * (k.n_symbols - 2 * k.overlap_symbols);
    for frame in partition_frames(&s, k.n_symbols, k.overlap_symbols).unwrap() {
        let block = engine.process_block(&frame).unwrap();
        let start = frame.block_index * step;
        let end = (start + block.samples.len()).min(oracle.len());
        let err = relative_l2(&block.samples[..end - start], &oracle.samples[start..end]);
        assert!(err < 1e-10, "block {}: {err:.3e}", frame.block_index);
    }
}

#[test]
fn stream_length_at_reference_defaults() {
    let k = constants(128, 0.2, 100e3);
    let w = jfscd(&symbols(1 << 14, 1), &k);
    assert_eq!(w.len(), 1 << 15);
    assert_eq!(w.sample_rate, 72e9);
}

/// Frames see only V symbols of context, so the raised-cosine tails beyond
/// that are cut. The mismatch between two block sizes therefore falls as V
/// grows and only drops below 1e-9 for very long blocks.
#[test]
fn block_size_invariance_improves_with_overlap() {
    let s = symbols(1 << 16, 4);
    let interior = 20_000..(1 << 17) - 20_000;
    let mut last = f64::INFINITY;
    for n in [32, 64, 128, 256] {
        let v = n / 4;
        let a = jfscd(&s, &constants_with_overlap(n, v, 0.2, 100e3));
        let b = jfscd(&s, &constants_with_overlap(2 * n, v, 0.2, 100e3));
        let err = relative_l2(&a.samples[interior.clone()], &b.samples[interior.clone()]);
        assert!(err < last, "N={n}: {err:.3e} !< {last:.3e}");
        last = err;
    }
    let a = jfscd(&s, &constants_with_overlap(16384, 4096, 0.2, 100e3));
    let b = jfscd(&s, &constants_with_overlap(32768, 4096, 0.2, 100e3));
    let err = relative_l2(&a.samples[interior.clone()], &b.samples[interior]);
    assert!(err < 1e-9, "{err:.3e}");
}

#[test]
fn propagation_undoes_precompensation() {
    let s = symbols(1 << 16, 5);
    let interior = 20_000..(1 << 17) - 20_000;
    let k = constants_with_overlap(16384, 4096, 0.2, 100e3);
    let flat = jfscd(&s, &constants_with_overlap(16384, 4096, 0.2, 0.0));
    let pre = jfscd(&s, &k);
    let out = propagate_cd(&pre, k.beta2, k.fiber_length, CdProfile::for_signal(&k)).unwrap();
    let err = relative_l2(&out.samples[interior.clone()], &flat.samples[interior]);
    assert!(err < 1e-9, "{err:.3e}");
}

#[test]
fn fir_cascade_tracks_ideal_cascade() {
    let k = constants(128, 0.2, 100e3);
    let s = symbols(1 << 14, 6);
    let ideal = cascade_precompensate(&s, &k, ShapingVariant::IdealFd).unwrap();
    let fir = cascade_precompensate(&s, &k, ShapingVariant::FIR21).unwrap();
    let interior = 2000..(1 << 15) - 2000;
    let err = relative_l2(&fir.samples[interior.clone()], &ideal.samples[interior]);
    // only the 21-tap truncation separates them
    assert!(err > 1e-6 && err < 0.05, "{err:.3e}");
}
