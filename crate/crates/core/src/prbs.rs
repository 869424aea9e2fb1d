//! Payload bit generators.

use rand::Rng;

use crate::rng::{stream, Stream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrbsMode {
    Prng,
    Lfsr23,
}

pub const LFSR23_PERIOD: u64 = (1 << 23) - 1;

/// PRBS-23, polynomial x²³ + x¹⁸ + 1, Fibonacci form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lfsr23 {
    state: u32,
}

impl Lfsr23 {
    pub fn new(seed: u32) -> Result<Self> {
        let state = seed & 0x7F_FFFF;
        if state == 0 {
            return Err(Error::arg("PRBS-23 seed state must be nonzero in its low 23 bits"));
        }
        Ok(Self { state })
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let bit = ((self.state >> 22) ^ (self.state >> 17)) & 1;
        self.state = ((self.state << 1) | bit) & 0x7F_FFFF;
        bit as u8
    }
}

pub fn generate_prbs(length: usize, seed: u64, mode: PrbsMode) -> Result<Vec<u8>> {
    match mode {
        PrbsMode::Prng => {
            let mut rng = stream(seed, Stream::Payload);
            Ok((0..length).map(|_| rng.random::<bool>() as u8).collect())
        }
        PrbsMode::Lfsr23 => {
            // fold the seed so any u64 lands on a nonzero state
            let folded = (seed ^ (seed >> 23) ^ (seed >> 46)) as u32 & 0x7F_FFFF;
            let mut lfsr = Lfsr23::new(if folded == 0 { 1 } else { folded })?;
            Ok((0..length).map(|_| lfsr.next_bit()).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        for mode in [PrbsMode::Prng, PrbsMode::Lfsr23] {
            assert_eq!(generate_prbs(1000, 9, mode).unwrap(), generate_prbs(1000, 9, mode).unwrap());
        }
        assert_ne!(
            generate_prbs(1000, 9, PrbsMode::Prng).unwrap(),
            generate_prbs(1000, 10, PrbsMode::Prng).unwrap()
        );
    }

    #[test]
    fn prng_balance() {
        let bits = generate_prbs(1 << 18, 3, PrbsMode::Prng).unwrap();
        let ones = bits.iter().map(|&b| b as usize).sum::<usize>() as f64 / bits.len() as f64;
        assert!((ones - 0.5).abs() < 0.01);
    }

    #[test]
    fn lfsr23_period() {
        let mut lfsr = Lfsr23::new(1).unwrap();
        let start = lfsr.state();
        // must not revisit early (checks the first 2^18 states, past every proper divisor of the period) ...
        for _ in 0..(1 << 18) {
            lfsr.next_bit();
            assert_ne!(lfsr.state(), start);
        }
        // ... and must return exactly at the maximal period
        for _ in (1 << 18)..LFSR23_PERIOD {
            lfsr.next_bit();
        }
        assert_eq!(lfsr.state(), start);
        assert!(Lfsr23::new(0).is_err());
    }
}
