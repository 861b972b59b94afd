//! Physical-layer constants shared by the transmitter, channel and receiver.

use serde::{Deserialize, Serialize};

/// Sound speed used to convert velocities into Doppler factors (m/s).
pub const SOUND_SPEED: f64 = 1500.0;

/// Sampling and framing parameters of the modem.
///
/// The defaults reproduce the reference packet format: 600 superimposed
/// symbols at 6 kSym/s on a 32 kHz carrier, sampled at 192 kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModemParams {
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Passband sampling rate (Hz).
    pub sample_rate: f64,
    /// Symbol rate (symbols/s).
    pub symbol_rate: f64,
    /// Symbols per packet.
    pub n_symbols: usize,
    /// RRC roll-off.
    pub rolloff: f64,
    /// One-sided RRC support in passband samples.
    pub rrc_half_len: usize,
    /// FFT size used by the baseband processing (segments are twice this long).
    pub n_fft: usize,
}

impl Default for ModemParams {
    fn default() -> Self {
        Self {
            carrier_hz: 32_000.0,
            sample_rate: 192_000.0,
            symbol_rate: 6_000.0,
            n_symbols: 600,
            rolloff: 0.2,
            rrc_half_len: 160,
            n_fft: 1024,
        }
    }
}

impl ModemParams {
    /// Passband samples per symbol.
    pub fn samples_per_symbol(&self) -> usize {
        (self.sample_rate / self.symbol_rate).round() as usize
    }

    /// Baseband sampling rate, two samples per symbol.
    pub fn baseband_rate(&self) -> f64 {
        2.0 * self.symbol_rate
    }

    /// Passband-to-baseband decimation factor.
    pub fn decimation(&self) -> usize {
        self.samples_per_symbol() / 2
    }

    /// Packet duration without filter tails (s).
    pub fn packet_duration(&self) -> f64 {
        self.n_symbols as f64 / self.symbol_rate
    }

    /// Occupied bandwidth (1 + rolloff) times the symbol rate (Hz).
    pub fn occupied_bandwidth(&self) -> f64 {
        (1.0 + self.rolloff) * self.symbol_rate
    }

    /// Doppler bin spacing of the detector, the inverse packet duration (Hz).
    pub fn doppler_step(&self) -> f64 {
        1.0 / self.packet_duration()
    }

    /// Number of symbols preceding the packet inside an `n_fft`-symbol block.
    ///
    /// Segments are laid out with the packet centred so that both precursor
    /// and post-cursor multipath fit into the circular block.
    pub fn packet_lead(&self) -> usize {
        (self.n_fft - self.n_symbols) / 2
    }

    /// Baseband samples per extracted segment.
    pub fn segment_len(&self) -> usize {
        2 * self.n_fft
    }

    pub fn validate(&self) -> crate::Result<()> {
        let sps = self.sample_rate / self.symbol_rate;
        if (sps - sps.round()).abs() > 1e-9 || sps.round() as usize % 2 != 0 {
            return Err(crate::Error::Config(format!(
                "sample rate must be an even integer multiple of the symbol rate (got {sps})"
            )));
        }
        if self.n_fft < self.n_symbols {
            return Err(crate::Error::Config("n_fft must be >= n_symbols".into()));
        }
        if self.sample_rate <= 2.0 * self.carrier_hz + self.occupied_bandwidth() {
            return Err(crate::Error::Config(
                "sample rate too low for the carrier and bandwidth".into(),
            ));
        }
        Ok(())
    }
}
