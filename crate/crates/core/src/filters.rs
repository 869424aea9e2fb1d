//! Frequency-domain transfer functions: raised-cosine shaping, the
//! chromatic-dispersion all-pass, and their product tabulated on the
//! 2N-point grid used by the JFS-CD engine.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::params::{DerivedConstants, ShapingProfile};
use crate::{Error, Result};

/// Which way the dispersion phase is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdSign {
    /// `exp(+j β₂/2 ω² L)`: undoes the fiber.
    Precompensate,
    /// `exp(-j β₂/2 ω² L)`: the fiber itself.
    Propagate,
}

impl CdSign {
    pub fn factor(self) -> f64 {
        match self {
            CdSign::Precompensate => 1.0,
            CdSign::Propagate => -1.0,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            CdSign::Precompensate => CdSign::Propagate,
            CdSign::Propagate => CdSign::Precompensate,
        }
    }
}

/// Raised-cosine amplitude response: `Ts` on the flat top, a cosine taper
/// across the roll-off region, zero beyond `π(1+α)/Ts`.
pub fn rc_magnitude(omega: f64, ts: f64, alpha: f64) -> Result<f64> {
    if !(ts > 0.0) {
        return Err(Error::arg(format!("symbol period must be > 0, got {ts}")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::arg(format!("roll-off must lie in [0, 1], got {alpha}")));
    }
    let w = omega.abs();
    let lo = PI * (1.0 - alpha) / ts;
    let hi = PI * (1.0 + alpha) / ts;
    Ok(if w <= lo {
        ts
    } else if w > hi {
        0.0
    } else {
        // alpha > 0 here: with alpha == 0 the taper region is empty
        0.5 * ts * (1.0 + ((ts / (2.0 * alpha)) * (w - lo)).cos())
    })
}

/// Shaping amplitude for the selected profile. The RRC profile keeps the
/// same flat-top level so both variants share one gain convention.
pub fn shaping_magnitude(profile: ShapingProfile, omega: f64, ts: f64, alpha: f64) -> Result<f64> {
    let rc = rc_magnitude(omega, ts, alpha)?;
    Ok(match profile {
        ShapingProfile::Rc => rc,
        ShapingProfile::Rrc => (rc * ts).sqrt(),
    })
}

/// `exp(sign · j (β₂/2) ω² L)`.
pub fn cd_phasor(omega: f64, beta2: f64, length: f64, sign: CdSign) -> Complex64 {
    Complex64::from_polar(1.0, sign.factor() * 0.5 * beta2 * omega * omega * length)
}

/// Spectral phase profile used when dispersion is applied as a stand-alone
/// overlap-save filter.
///
/// `Exact` is the textbook quadratic phase on every bin. `Banded` matches
/// it exactly up to `passband` (rad/s) and then rolls the group delay off
/// to zero at the Nyquist frequency with a C⁶ smoothstep, which keeps the
/// filter all-pass but makes its impulse response decay fast enough for
/// short overlaps to be exact at the 1e-12 level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CdProfile {
    Exact,
    Banded { passband: f64, nyquist: f64 },
}

// 8-point Gauss-Legendre on [-1, 1]; exact for the degree-14 integrand.
const GAUSS_LEGENDRE_8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (-0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.183_434_642_495_649_78, 0.362_683_783_378_361_77),
    (0.525_532_409_916_329, 0.313_706_645_877_887_05),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_34),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_69),
];

// 13th-order smoothstep: zero derivatives up to order 6 at both ends.
fn smoothstep6(x: f64) -> f64 {
    const C: [f64; 7] = [1716.0, -9009.0, 20020.0, -24024.0, 16380.0, -6006.0, 924.0];
    let poly = C.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    x.powi(7) * poly
}

// 1 − S(t), using S(1 − t) on the upper half to avoid cancellation
fn taper(t: f64) -> f64 {
    if t <= 0.5 {
        1.0 - smoothstep6(t)
    } else {
        smoothstep6(1.0 - t)
    }
}

impl CdProfile {
    /// Banded profile whose exact region ends at `passband_hz`. Falls back to
    /// `Exact` when less than 5% of the band is left for the roll-off.
    pub fn banded(passband_hz: f64, fs: f64) -> Self {
        let passband = 2.0 * PI * passband_hz;
        let nyquist = PI * fs;
        if nyquist - passband < 0.05 * nyquist {
            CdProfile::Exact
        } else {
            CdProfile::Banded { passband, nyquist }
        }
    }

    /// Banded profile that is exact over the occupied signal band.
    pub fn for_signal(consts: &DerivedConstants) -> Self {
        Self::banded(consts.signal_edge_hz(), consts.fs)
    }

    /// `ω²/2` under the exact profile; the group-delay-integrated
    /// counterpart under the banded one. Multiply by β₂L for the phase.
    pub fn half_square(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match *self {
            CdProfile::Exact => 0.5 * w * w,
            CdProfile::Banded { passband, nyquist } => {
                if w <= passband {
                    return 0.5 * w * w;
                }
                let width = nyquist - passband;
                let x = ((w - passband) / width).min(1.0);
                // ∫₀ˣ (a + width·t)(1 − S(t)) dt
                let integral: f64 = GAUSS_LEGENDRE_8
                    .iter()
                    .map(|&(node, weight)| {
                        let t = 0.5 * x * (node + 1.0);
                        weight * (passband + width * t) * taper(t)
                    })
                    .sum::<f64>()
                    * 0.5
                    * x;
                0.5 * passband * passband + width * integral
            }
        }
    }

    pub fn phasor(&self, omega: f64, beta2: f64, length: f64, sign: CdSign) -> Complex64 {
        match self {
            CdProfile::Exact => cd_phasor(omega, beta2, length, sign),
            CdProfile::Banded { .. } => {
                Complex64::from_polar(1.0, sign.factor() * beta2 * length * self.half_square(omega))
            }
        }
    }
}

/// Joint shaping + dispersion response tabulated on the 2N grid.
#[derive(Clone, Debug)]
pub struct JointFilter {
    /// H_joint(ω_k), amplitude in units of `Ts`.
    pub coeffs: Vec<Complex64>,
    /// `true` where `|ω_k| > π(1+α)/Ts`; the coefficient there is exactly 0.
    pub stopband_mask: Vec<bool>,
    pub passband_count: usize,
    pub n_symbols: usize,
    pub cd_sign: CdSign,
    /// Scalar folded into [`JointFilter::scaled`]: the 1/(N·Ts) that maps a
    /// unit symbol to a unit pulse peak through an unnormalized IFFT.
    pub gain: f64,
    scaled: Vec<Complex64>,
    sample_rate: f64,
}

impl JointFilter {
    /// Coefficients with the output gain applied; what the block engine
    /// actually multiplies by.
    pub fn scaled(&self) -> &[Complex64] {
        &self.scaled
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Bin frequencies in Hz, same layout as the coefficients.
    pub fn frequencies_hz(&self) -> Vec<f64> {
        crate::params::omega_grid(self.len(), self.sample_rate)
            .into_iter()
            .map(|w| w / (2.0 * PI))
            .collect()
    }
}

pub fn build_joint_filter(consts: &DerivedConstants, sign: CdSign) -> Result<JointFilter> {
    let n = consts.n_symbols;
    if consts.omega_grid_2n.len() != 2 * n {
        return Err(Error::size(format!(
            "grid has {} bins, expected 2N = {}",
            consts.omega_grid_2n.len(),
            2 * n
        )));
    }
    let ts = consts.ts;
    let edge = PI * (1.0 + consts.rolloff) / ts;
    let gain = 1.0 / (n as f64 * ts);

    let mut coeffs = Vec::with_capacity(2 * n);
    let mut mask = Vec::with_capacity(2 * n);
    for &w in &consts.omega_grid_2n {
        let stop = w.abs() > edge;
        mask.push(stop);
        if stop {
            coeffs.push(Complex64::new(0.0, 0.0));
        } else {
            let amp = shaping_magnitude(consts.shaping, w, ts, consts.rolloff)?;
            coeffs.push(amp * cd_phasor(w, consts.beta2, consts.fiber_length, sign));
        }
    }
    let passband_count = mask.iter().filter(|&&m| !m).count();
    let scaled = coeffs.iter().map(|&c| c * gain).collect();
    Ok(JointFilter {
        coeffs,
        stopband_mask: mask,
        passband_count,
        n_symbols: n,
        cd_sign: sign,
        gain,
        scaled,
        sample_rate: consts.fs,
    })
}
