//! End-to-end simulation: payload, transmitter scheme, optional clipping,
//! channel, receiver and scoring.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade_ref::{self, CdFilter, ShapingVariant};
use crate::channel::{run_channel, ChannelOutput, Impairments};
use crate::filters::{build_joint_filter, CdSign};
use crate::jfscd::JfsCdEngine;
use crate::metrics::{bit_errors, evm, q_from_ber, q_from_evm};
use crate::params::{validate, DerivedConstants, ShapingProfile, SystemConfig};
use crate::prbs::{generate_prbs, PrbsMode};
use crate::rxdsp::{
    blind_phase_search, cfo_compensate, complex_gain, demap_symbols, equalize_2x2, equalize_2x2_guided, genie_derotate, lowpass, map_bits,
    resolve_quadrant, BpsConfig, CfoMode, EqualizerMode, LmsConfig, TRAINING_SYMBOLS,
};
use crate::sbc::{clip_waveform, ClipConfig, ClipStats};
use crate::waveform::{DualPolWaveform, Waveform};
use crate::{Error, Result};

/// Symbols per polarization for Q experiments.
pub const DEFAULT_LINK_SYMBOLS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxScheme {
    JfsCd,
    CascadeIdeal,
    /// 21-tap FIR shaping then overlap-save pre-compensation.
    CascadeFir,
    /// FIR shaping at the transmitter, dispersion removed at the receiver.
    PostComp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recovery {
    Genie,
    Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkOptions {
    pub scheme: TxScheme,
    /// Clipping ratio in dB; `None` leaves the waveform unclipped.
    pub clip_cr_db: Option<f64>,
    pub n_symbols: usize,
    pub cfo: Recovery,
    pub phase: Recovery,
    pub equalizer: EqualizerMode,
    /// Brick-wall receiver filter at the signal edge.
    pub front_end_filter: bool,
    /// Replaces the impairments derived from the config.
    pub impairments: Option<Impairments>,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self {
            scheme: TxScheme::JfsCd,
            clip_cr_db: None,
            n_symbols: DEFAULT_LINK_SYMBOLS,
            cfo: Recovery::Genie,
            phase: Recovery::Genie,
            equalizer: EqualizerMode::Lms(LmsConfig {
                decision_directed: true,
                ..LmsConfig::default()
            }),
            front_end_filter: true,
            impairments: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub bit_errors: usize,
    pub scored_bits: usize,
    pub ber: f64,
    pub q_ber_db: f64,
    pub evm: f64,
    pub q_evm_db: f64,
    pub clip_stats: Option<ClipStats>,
    pub estimated_cfo_hz: f64,
}

impl LinkResult {
    /// BER-derived Q when errors were seen, EVM-derived Q otherwise.
    pub fn q_db(&self) -> f64 {
        if self.bit_errors > 0 {
            self.q_ber_db
        } else {
            self.q_evm_db
        }
    }
}

/// Payload bits and symbols of both polarizations.
#[derive(Clone, Debug, PartialEq)]
pub struct Payload {
    pub bits: [Vec<u8>; 2],
    pub symbols: [Vec<Complex64>; 2],
}

pub fn payload(n_symbols: usize, seed: u64) -> Result<Payload> {
    let all = generate_prbs(8 * n_symbols, seed, PrbsMode::Prng)?;
    let (bx, by) = all.split_at(4 * n_symbols);
    Ok(Payload {
        symbols: [map_bits(bx)?, map_bits(by)?],
        bits: [bx.to_vec(), by.to_vec()],
    })
}

/// Transmitter waveform for one polarization, before clipping.
pub fn transmit(symbols: &[Complex64], consts: &DerivedConstants, scheme: TxScheme) -> Result<Waveform> {
    match scheme {
        TxScheme::JfsCd => {
            let filter = build_joint_filter(consts, CdSign::Precompensate)?;
            JfsCdEngine::from_constants(consts, filter)?.run_stream(symbols)
        }
        TxScheme::CascadeIdeal => cascade_ref::cascade_precompensate(symbols, consts, ShapingVariant::IdealFd),
        TxScheme::CascadeFir => cascade_ref::cascade_precompensate(symbols, consts, ShapingVariant::FIR21),
        TxScheme::PostComp => cascade_ref::shape(symbols, consts, ShapingVariant::FIR21),
    }
}

/// Symbol indices that are scored: past the training prefix and clear of
/// the record-edge transients.
pub fn scoring_window(n_symbols: usize, overlap_symbols: usize) -> std::ops::Range<usize> {
    let start = TRAINING_SYMBOLS.max(2 * overlap_symbols);
    let end = n_symbols.saturating_sub(2 * overlap_symbols);
    start..end.max(start)
}

fn dual(x: Waveform, y: Waveform) -> Result<DualPolWaveform> {
    DualPolWaveform::new(x, y)
}

pub fn simulate_link(config: &SystemConfig, opts: &LinkOptions) -> Result<LinkResult> {
    let consts = validate(config)?;
    if consts.shaping != ShapingProfile::Rc {
        return Err(Error::config("shaping", "end-to-end links are scored with the raised-cosine profile"));
    }
    let n = opts.n_symbols;
    let window = scoring_window(n, consts.overlap_symbols);
    if window.is_empty() {
        return Err(Error::size(format!("{n} symbols leave nothing to score")));
    }
    let data = payload(n, config.seed)?;

    let mut tx = dual(
        transmit(&data.symbols[0], &consts, opts.scheme)?,
        transmit(&data.symbols[1], &consts, opts.scheme)?,
    )?;
    let clip_stats = match opts.clip_cr_db {
        Some(cr) => {
            let mut cx = ClipConfig::for_waveform(&tx.x, cr)?;
            let mut cy = ClipConfig::for_waveform(&tx.y, cr)?;
            tx = dual(clip_waveform(&tx.x, &mut cx), clip_waveform(&tx.y, &mut cy))?;
            Some(cx.stats.merge(cy.stats))
        }
        None => None,
    };

    let imp = opts.impairments.unwrap_or_else(|| Impairments::from_config(config, &consts));
    let rx = run_channel(&tx, &imp, config.seed)?;
    receive(&rx, &data, &consts, &imp, opts, window, clip_stats)
}

/// Removes both lasers' phase noise using the channel's hidden state.
/// The TX phase acts before the fiber, so it is undone behind an exact
/// inverse of the dispersion rather than on the received samples.
fn genie_phase(w: &Waveform, rx: &ChannelOutput, imp: &Impairments) -> Result<Waveform> {
    let w = Waveform::new(genie_derotate(&w.samples, &rx.lo_phase)?, w.sample_rate);
    let dispersed = imp.fiber_length != 0.0 && imp.beta2 != 0.0;
    if !dispersed || rx.tx_phase.iter().all(|&p| p == 0.0) {
        return Ok(Waveform::new(genie_derotate(&w.samples, &rx.tx_phase)?, w.sample_rate));
    }
    let filter = |sign| CdFilter::auto(imp.beta2, imp.fiber_length, sign, w.sample_rate, imp.cd_profile);
    let before_fiber = filter(CdSign::Precompensate)?.apply(&w);
    let clean = Waveform::new(genie_derotate(&before_fiber.samples, &rx.tx_phase)?, w.sample_rate);
    Ok(filter(CdSign::Propagate)?.apply(&clean))
}

/// Gain (and, with `blind`, carrier phase) recovery on equalized symbols.
/// Returns the corrected symbols and the per-symbol factor applied.
fn recover(symbols: &[Complex64], prefix: &[Complex64], blind: bool) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let train = prefix.len();
    let g = complex_gain(&symbols[..train], prefix)?;
    let mut s: Vec<Complex64> = symbols.iter().map(|&v| v * g).collect();
    if !blind {
        return Ok((s, vec![g; symbols.len()]));
    }
    let (derotated, _) = blind_phase_search(&s, BpsConfig::default())?;
    s = resolve_quadrant(&derotated, prefix);
    let g2 = complex_gain(&s[..train], prefix)?;
    s.iter_mut().for_each(|v| *v *= g2);
    let factors = s.iter().zip(symbols).map(|(a, b)| if b.norm() > 0.0 { a / b } else { g * g2 }).collect();
    Ok((s, factors))
}

fn receive(
    rx: &ChannelOutput,
    data: &Payload,
    consts: &DerivedConstants,
    imp: &Impairments,
    opts: &LinkOptions,
    window: std::ops::Range<usize>,
    clip_stats: Option<ClipStats>,
) -> Result<LinkResult> {
    let post_comp = |w: &Waveform| -> Result<Waveform> {
        if opts.scheme == TxScheme::PostComp {
            cascade_ref::post_compensate(w, consts)
        } else {
            Ok(w.clone())
        }
    };

    let mode = match opts.cfo {
        Recovery::Genie => CfoMode::Genie(imp.freq_offset),
        Recovery::Estimate => {
            // the fourth-power line only survives once dispersion is undone
            let probe = post_comp(&rx.waveform.x)?;
            let df = crate::rxdsp::estimate_cfo(&probe, 1 << 16)?;
            CfoMode::Genie(df)
        }
    };
    let (x, df) = cfo_compensate(&rx.waveform.x, mode)?;
    let (y, _) = cfo_compensate(&rx.waveform.y, mode)?;

    let (x, y) = if opts.phase == Recovery::Genie {
        (genie_phase(&x, rx, imp)?, genie_phase(&y, rx, imp)?)
    } else {
        (x, y)
    };
    let (mut x, mut y) = (post_comp(&x)?, post_comp(&y)?);
    if opts.front_end_filter {
        let edge = consts.signal_edge_hz();
        x = lowpass(&x, edge);
        y = lowpass(&y, edge);
    }

    let train = TRAINING_SYMBOLS.min(data.symbols[0].len());
    let training = [&data.symbols[0][..train], &data.symbols[1][..train]];
    let pol_input = dual(x, y)?;
    // Decision-directed adaptation slices in the frame of a first, frozen
    // pass after gain (and, without genie phase, BPS) correction, so
    // decisions are unbiased and stay valid while the carrier wanders.
    let blind = opts.phase == Recovery::Estimate;
    let symbols = match opts.equalizer {
        EqualizerMode::Lms(cfg) if cfg.decision_directed => {
            let frozen = LmsConfig {
                decision_directed: false,
                ..cfg
            };
            let first = equalize_2x2(&pol_input, training, EqualizerMode::Lms(frozen))?;
            let g0 = recover(&first.symbols.x.samples, &data.symbols[0][..train], blind)?.1;
            let g1 = recover(&first.symbols.y.samples, &data.symbols[1][..train], blind)?.1;
            equalize_2x2_guided(&pol_input, training, cfg, [&g0, &g1])?.symbols
        }
        mode => equalize_2x2(&pol_input, training, mode)?.symbols,
    };

    let mut errors = 0usize;
    let mut scored = 0usize;
    let mut err_energy = 0.0;
    let mut ref_energy = 0.0;
    for (p, pol) in [&symbols.x, &symbols.y].into_iter().enumerate() {
        let reference = &data.symbols[p];
        let (s, _) = recover(&pol.samples, &reference[..train], blind)?;
        let rx_bits = demap_symbols(&s[window.clone()]);
        let tx_bits = &data.bits[p][4 * window.start..4 * window.end];
        errors += bit_errors(&rx_bits, tx_bits)?;
        scored += tx_bits.len();
        let e = evm(&s[window.clone()], &reference[window.clone()])?;
        let w = window.len() as f64;
        err_energy += e * e * w;
        ref_energy += w;
    }
    let ber = errors as f64 / scored as f64;
    let evm_total = (err_energy / ref_energy).sqrt();
    Ok(LinkResult {
        bit_errors: errors,
        scored_bits: scored,
        ber,
        q_ber_db: q_from_ber(ber),
        evm: evm_total,
        q_evm_db: q_from_evm(evm_total),
        clip_stats,
        estimated_cfo_hz: df,
    })
}
