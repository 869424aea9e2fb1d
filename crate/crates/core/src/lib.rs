//! Transmitter-side DSP for coherent optical links.
//!
//! The centre of the crate is [`jfscd`], a block engine that performs
//! raised-cosine pulse shaping and chromatic-dispersion pre-compensation in
//! one frequency-domain pass, and [`sbc`], a square-boundary clipper that
//! tames the peak-to-average power ratio the pre-compensation creates.
//! [`cascade_ref`] holds the conventional shape-then-compensate pipeline
//! used as an equivalence oracle and as the baseline, and [`channel`],
//! [`rxdsp`] and [`metrics`] close the loop so schemes can be scored
//! end to end with [`link`].

pub mod cascade_ref;
pub mod channel;
pub mod error;
pub mod filters;
pub mod jfscd;
pub mod link;
pub mod metrics;
pub mod params;
pub mod prbs;
pub mod rng;
pub mod rxdsp;
pub mod sbc;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use params::{DerivedConstants, Modulation, ShapingProfile, SystemConfig};
pub use waveform::{DualPolWaveform, Waveform};
