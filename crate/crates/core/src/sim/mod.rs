//! Baseband MIMO transmission: spatially multiplexed symbol streams through a
//! quasi-static Rayleigh channel with additive white Gaussian noise.

mod channel;
mod constellation;

pub use channel::{draw_channel, ChannelMatrix};
pub use constellation::{build_constellation, modulate, Constellation, Family, Modulation};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::{self, stream};
use crate::{Error, Result};

pub const DEFAULT_SYMBOLS: usize = 1024;

/// How the configured SNR maps to the noise variance σ² per receive antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SnrConvention {
    /// σ² = 1 / snr: the SNR is per transmitted unit-energy stream and the
    /// noise floor does not depend on the number of transmit antennas.
    #[default]
    PerStream,
    /// σ² = n_tx / snr: the SNR is the total transmitted power over noise.
    TotalTransmit,
}

impl SnrConvention {
    pub fn noise_power(self, snr_db: f64, n_tx: usize) -> f64 {
        if snr_db == f64::INFINITY {
            return 0.0;
        }
        let snr = 10f64.powf(snr_db / 10.0);
        match self {
            SnrConvention::PerStream => 1.0 / snr,
            SnrConvention::TotalTransmit => n_tx as f64 / snr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxConfig {
    pub modulation: Modulation,
    pub n_tx: usize,
    pub n_rx: usize,
    /// `f64::INFINITY` disables the noise.
    pub snr_db: f64,
    pub n_symbols: usize,
    pub seed: u64,
    #[serde(default)]
    pub snr_convention: SnrConvention,
}

impl TxConfig {
    pub fn new(modulation: Modulation, n_tx: usize, n_rx: usize, snr_db: f64, seed: u64) -> Self {
        TxConfig {
            modulation,
            n_tx,
            n_rx,
            snr_db,
            n_symbols: DEFAULT_SYMBOLS,
            seed,
            snr_convention: SnrConvention::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols == 0 {
            return Err(Error::InvalidConfig("n_symbols must be positive".into()));
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(Error::InvalidConfig("n_tx and n_rx must be at least 1".into()));
        }
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::InvalidConfig(format!("snr_db {} is not usable", self.snr_db)));
        }
        Ok(())
    }

    pub fn noise_power(&self) -> f64 {
        self.snr_convention.noise_power(self.snr_db, self.n_tx)
    }
}

/// Received samples `y`, one row per receive antenna, plus generation metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalCapture {
    pub samples: Vec<Vec<Complex64>>,
    pub config: TxConfig,
    pub channel: ChannelMatrix,
    pub noise_power: f64,
}

impl SignalCapture {
    /// All receive streams concatenated antenna by antenna.
    pub fn flattened(&self) -> Vec<Complex64> {
        self.samples.iter().flatten().copied().collect()
    }
}

/// Simulates one capture. Bits, channel and noise come from independent
/// sub-streams of `config.seed`.
pub fn transmit(config: &TxConfig) -> Result<SignalCapture> {
    config.validate()?;
    let channel = draw_channel(
        config.n_rx,
        config.n_tx,
        &mut seed::derived_rng(config.seed, &[stream::CHANNEL]),
    );
    transmit_through(config, channel)
}

/// Like [`transmit`] with a caller-supplied channel.
pub fn transmit_through(config: &TxConfig, channel: ChannelMatrix) -> Result<SignalCapture> {
    config.validate()?;
    if channel.n_rx() != config.n_rx || channel.n_tx() != config.n_tx {
        return Err(Error::InvalidConfig(format!(
            "channel is {}x{}, config needs {}x{}",
            channel.n_rx(),
            channel.n_tx(),
            config.n_rx,
            config.n_tx
        )));
    }
    let mut bit_rng = seed::derived_rng(config.seed, &[stream::BITS]);
    let mut noise_rng = seed::derived_rng(config.seed, &[stream::NOISE]);
    let table = Constellation::new(config.modulation);
    let bits_mask = (config.modulation.order() - 1) as u32;
    let noise_power = config.noise_power();

    let mut samples = vec![Vec::with_capacity(config.n_symbols); config.n_rx];
    let mut x = vec![Complex64::new(0.0, 0.0); config.n_tx];
    for _ in 0..config.n_symbols {
        for xj in x.iter_mut() {
            // log2(M) i.i.d. uniform bits per stream
            *xj = table.point(bit_rng.random::<u32>() & bits_mask);
        }
        for (rx, out) in samples.iter_mut().enumerate() {
            let mut y: Complex64 = channel.row(rx).iter().zip(&x).map(|(h, s)| h * s).sum();
            if noise_power > 0.0 {
                y += channel::complex_gaussian(&mut noise_rng, noise_power);
            }
            out.push(y);
        }
    }

    Ok(SignalCapture {
        samples,
        config: config.clone(),
        channel,
        noise_power,
    })
}

/// Draws a fresh channel from `rng` rather than the config's channel stream.
pub fn transmit_with_rng<R: Rng + ?Sized>(config: &TxConfig, rng: &mut R) -> Result<SignalCapture> {
    config.validate()?;
    let channel = draw_channel(config.n_rx, config.n_tx, rng);
    transmit_through(config, channel)
}
