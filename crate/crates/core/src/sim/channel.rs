use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Flat-fading MIMO channel, `n_rx × n_tx`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    n_rx: usize,
    n_tx: usize,
    entries: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn from_entries(n_rx: usize, n_tx: usize, entries: Vec<Complex64>) -> Self {
        assert_eq!(entries.len(), n_rx * n_tx, "channel entry count");
        ChannelMatrix { n_rx, n_tx, entries }
    }

    /// All-ones channel; every receive antenna sees the sum of the streams.
    pub fn ones(n_rx: usize, n_tx: usize) -> Self {
        Self::from_entries(n_rx, n_tx, vec![Complex64::new(1.0, 0.0); n_rx * n_tx])
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_tx(&self) -> usize {
        self.n_tx
    }

    #[inline]
    pub fn get(&self, rx: usize, tx: usize) -> Complex64 {
        self.entries[rx * self.n_tx + tx]
    }

    pub fn row(&self, rx: usize) -> &[Complex64] {
        &self.entries[rx * self.n_tx..(rx + 1) * self.n_tx]
    }
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite variance");
    Complex64::new(normal.sample(rng), normal.sample(rng))
}

/// Rayleigh channel draw: real and imaginary parts i.i.d. N(0, 1/2), so E|H(i,j)|² = 1.
pub fn draw_channel<R: Rng + ?Sized>(n_rx: usize, n_tx: usize, rng: &mut R) -> ChannelMatrix {
    let entries = (0..n_rx * n_tx).map(|_| complex_gaussian(rng, 1.0)).collect();
    ChannelMatrix { n_rx, n_tx, entries }
}
