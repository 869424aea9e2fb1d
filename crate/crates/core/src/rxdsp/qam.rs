use num_complex::Complex64;

use crate::{Error, Result};

/// Gray-coded square 16QAM at unit mean power. Per axis, bit pairs
/// 00, 01, 11, 10 map to levels −3, −1, +1, +3; the first pair of each
/// nibble selects I, the second Q.
#[derive(Clone, Debug, PartialEq)]
pub struct QamConstellation {
    pub points: [Complex64; 16],
    pub bits_per_symbol: usize,
}

const LEVELS: [f64; 4] = [-3.0, -1.0, 3.0, 1.0]; // indexed by the 2-bit value
const SCALE: f64 = 0.316_227_766_016_837_94; // 1/√10

impl Default for QamConstellation {
    fn default() -> Self {
        Self::qam16()
    }
}

impl QamConstellation {
    pub fn qam16() -> Self {
        let mut points = [Complex64::new(0.0, 0.0); 16];
        for (v, p) in points.iter_mut().enumerate() {
            *p = Complex64::new(LEVELS[v >> 2], LEVELS[v & 3]) * SCALE;
        }
        Self {
            points,
            bits_per_symbol: 4,
        }
    }

    /// Index of the nearest point (per-axis slicing).
    pub fn decide_index(&self, s: Complex64) -> usize {
        (axis_bits(s.re / SCALE) << 2) | axis_bits(s.im / SCALE)
    }

    pub fn decide(&self, s: Complex64) -> Complex64 {
        self.points[self.decide_index(s)]
    }
}

fn axis_bits(v: f64) -> usize {
    if v < -2.0 {
        0b00
    } else if v < 0.0 {
        0b01
    } else if v < 2.0 {
        0b11
    } else {
        0b10
    }
}

pub fn map_bits(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(4) {
        return Err(Error::size(format!("bit count {} is not a multiple of 4", bits.len())));
    }
    let c = QamConstellation::qam16();
    Ok(bits
        .chunks_exact(4)
        .map(|b| {
            let v = ((b[0] & 1) << 3 | (b[1] & 1) << 2 | (b[2] & 1) << 1 | (b[3] & 1)) as usize;
            c.points[v]
        })
        .collect())
}

/// Hard-decision demapping.
pub fn demap_symbols(symbols: &[Complex64]) -> Vec<u8> {
    let c = QamConstellation::qam16();
    let mut bits = Vec::with_capacity(symbols.len() * 4);
    for &s in symbols {
        let v = c.decide_index(s);
        bits.extend([(v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1].map(|b| b as u8));
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_round_trip() {
        for pattern in 0u32..(1 << 12) {
            let bits: Vec<u8> = (0..12).map(|i| ((pattern >> (11 - i)) & 1) as u8).collect();
            assert_eq!(demap_symbols(&map_bits(&bits).unwrap()), bits);
        }
    }

    #[test]
    fn corner_and_power() {
        let s = map_bits(&[0, 0, 0, 0]).unwrap();
        assert!((s[0] - Complex64::new(-3.0, -3.0) / 10f64.sqrt()).norm() < 1e-15);
        let c = QamConstellation::qam16();
        let p: f64 = c.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert!((p - 1.0).abs() < 1e-15);
        assert!(map_bits(&[0, 1, 0]).is_err());
    }

    #[test]
    fn gray_neighbours_differ_in_one_bit() {
        let c = QamConstellation::qam16();
        for a in 0..16usize {
            for b in 0..16usize {
                let d = c.points[a] - c.points[b];
                let adjacent = (d.norm() - 2.0 * SCALE).abs() < 1e-12;
                if adjacent {
                    assert_eq!((a ^ b).count_ones(), 1, "{a:04b} vs {b:04b}");
                }
            }
        }
    }
}
