use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Complex baseband samples together with their sample rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    pub samples: Vec<Complex64>,
    /// Samples per second.
    pub sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        energy(&self.samples)
    }

    /// Mean of `|x|²` over all samples; zero for an empty waveform.
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::new(self.samples.iter().map(|&s| f(s)).collect(), self.sample_rate)
    }
}

/// Two polarization tributaries sharing length and sample rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPolWaveform {
    pub x: Waveform,
    pub y: Waveform,
}

impl DualPolWaveform {
    pub fn new(x: Waveform, y: Waveform) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::size(format!(
                "polarization lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.sample_rate != y.sample_rate {
            return Err(Error::size(format!(
                "polarization sample rates differ: {} vs {}",
                x.sample_rate, y.sample_rate
            )));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.x.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.x.energy() + self.y.energy()
    }

    /// Mean power summed over both polarizations.
    pub fn total_mean_power(&self) -> f64 {
        self.x.mean_power() + self.y.mean_power()
    }

    pub fn map_each(&self, f: impl Fn(&Waveform) -> Waveform) -> Self {
        Self {
            x: f(&self.x),
            y: f(&self.y),
        }
    }
}

pub fn energy(samples: &[Complex64]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum()
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        0.0
    } else {
        energy(samples) / samples.len() as f64
    }
}

/// `‖a − b‖₂ / ‖b‖₂`, the error measure used throughout the test suites.
pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_l2 on unequal lengths");
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den = energy(b);
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_pol_rejects_mismatched_tributaries() {
        let a = Waveform::zeros(4, 1.0);
        assert!(DualPolWaveform::new(a.clone(), Waveform::zeros(5, 1.0)).is_err());
        assert!(DualPolWaveform::new(a.clone(), Waveform::zeros(4, 2.0)).is_err());
        assert!(DualPolWaveform::new(a.clone(), a).is_ok());
    }

    #[test]
    fn relative_l2_basics() {
        let b = vec![Complex64::new(3.0, 4.0)];
        let a = vec![Complex64::new(3.0, 4.5)];
        assert!((relative_l2(&a, &b) - 0.1).abs() < 1e-15);
        assert_eq!(relative_l2(&b, &b), 0.0);
    }
}
