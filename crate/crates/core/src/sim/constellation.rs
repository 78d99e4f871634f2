//! Gray-mapped PSK and square-QAM constellations with unit average energy.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Psk8,
    Qam16,
    Qam64,
    Qam256,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Psk,
    Qam,
}

impl Modulation {
    pub const ALL: [Modulation; 6] = [
        Modulation::Bpsk,
        Modulation::Qpsk,
        Modulation::Psk8,
        Modulation::Qam16,
        Modulation::Qam64,
        Modulation::Qam256,
    ];

    /// Constellation size M.
    pub fn order(self) -> usize {
        match self {
            Modulation::Bpsk => 2,
            Modulation::Qpsk => 4,
            Modulation::Psk8 => 8,
            Modulation::Qam16 => 16,
            Modulation::Qam64 => 64,
            Modulation::Qam256 => 256,
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        self.order().trailing_zeros() as usize
    }

    pub fn family(self) -> Family {
        match self {
            Modulation::Bpsk | Modulation::Qpsk | Modulation::Psk8 => Family::Psk,
            _ => Family::Qam,
        }
    }

    /// Position in [`Modulation::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Psk8 => "8PSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
            Modulation::Qam256 => "256QAM",
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_uppercase().replace('-', "");
        Modulation::ALL
            .into_iter()
            .find(|m| m.label() == wanted)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown modulation '{s}'")))
    }
}

fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

/// Lookup table from bit pattern (MSB first) to constellation point.
#[derive(Debug, Clone)]
pub struct Constellation {
    modulation: Modulation,
    points: Vec<Complex64>,
}

impl Constellation {
    pub fn new(modulation: Modulation) -> Self {
        let m = modulation.order();
        let mut points = vec![Complex64::new(0.0, 0.0); m];
        match modulation.family() {
            Family::Psk => {
                // QPSK sits on the diagonals so that its points are (±1±j)/√2.
                let offset = if modulation == Modulation::Qpsk { PI / 4.0 } else { 0.0 };
                for k in 0..m as u32 {
                    let angle = 2.0 * PI * f64::from(k) / m as f64 + offset;
                    points[gray(k) as usize] = Complex64::from_polar(1.0, angle);
                }
            }
            Family::Qam => {
                let side = (m as f64).sqrt() as u32;
                let half_bits = modulation.bits_per_symbol() / 2;
                let scale = (2.0 * (m as f64 - 1.0) / 3.0).sqrt().recip();
                let level = |i: u32| f64::from(2 * i) - f64::from(side - 1);
                for i in 0..side {
                    for q in 0..side {
                        let bits = (gray(i) << half_bits) | gray(q);
                        points[bits as usize] = Complex64::new(level(i), level(q)) * scale;
                    }
                }
            }
        }
        Constellation { modulation, points }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    /// Point for the bit pattern `bits` (only the low `log2 M` bits are used).
    #[inline]
    pub fn point(&self, bits: u32) -> Complex64 {
        self.points[bits as usize & (self.points.len() - 1)]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
}

/// All `(bit pattern, point)` pairs of a modulation, ordered by bit pattern.
pub fn build_constellation(modulation: Modulation) -> Vec<(u32, Complex64)> {
    Constellation::new(modulation)
        .points
        .into_iter()
        .enumerate()
        .map(|(bits, p)| (bits as u32, p))
        .collect()
}

/// Maps a 0/1 bit sequence (MSB first within each symbol) to symbols.
pub fn modulate(bits: &[u8], modulation: Modulation) -> Result<Vec<Complex64>> {
    let k = modulation.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::LengthMismatch {
            len: bits.len(),
            bits_per_symbol: k,
        });
    }
    if let Some(&b) = bits.iter().find(|&&b| b > 1) {
        return Err(Error::InvalidBit(b));
    }
    let table = Constellation::new(modulation);
    Ok(bits
        .chunks_exact(k)
        .map(|chunk| {
            let pattern = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
            table.point(pattern)
        })
        .collect())
}
