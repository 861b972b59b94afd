//! Transmit chain: superimposed pilot/data framing and passband modulation.

use crate::codec::{gold_pilot, CodecConfig, PacketCodec};
use crate::dsp::RrcFilter;
use crate::{ModemParams, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Symbols `s(n) = p(n) + j d(n)` of one packet.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperimposedFrame {
    pub user: u32,
    pub symbols: Vec<Complex64>,
}

impl SuperimposedFrame {
    pub fn pilot(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.re).collect()
    }

    pub fn data(&self) -> Vec<f64> {
        self.symbols.iter().map(|s| s.im).collect()
    }
}

/// Passband packet at the modem sampling rate.
///
/// `analytic` is the complex signal whose real part is `samples`; the channel
/// simulator uses it to apply complex path gains as carrier phase rotations.
/// Index `lead` holds the peak of the first symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PassbandPacket {
    pub samples: Vec<f64>,
    pub analytic: Vec<Complex64>,
    pub lead: usize,
}

/// Packet builder shared by the simulator and the receiver's regeneration step.
#[derive(Debug, Clone)]
pub struct Transmitter {
    params: ModemParams,
    codec: PacketCodec,
    rrc: RrcFilter,
}

impl Transmitter {
    pub fn new(params: ModemParams, codec: CodecConfig) -> Result<Self> {
        params.validate()?;
        let rrc = RrcFilter::from_params(&params);
        Ok(Self {
            codec: PacketCodec::new(codec)?,
            params,
            rrc,
        })
    }

    pub fn params(&self) -> &ModemParams {
        &self.params
    }

    pub fn codec(&self) -> &PacketCodec {
        &self.codec
    }

    pub fn rrc(&self) -> &RrcFilter {
        &self.rrc
    }

    pub fn pilot(&self, user: u32) -> Result<Vec<f64>> {
        gold_pilot(user, self.params.n_symbols)
    }

    pub fn build_frame(&self, payload: &[u8], user: u32) -> Result<SuperimposedFrame> {
        let pilot = self.pilot(user)?;
        let data = self.codec.data_symbols(payload, user)?;
        Ok(SuperimposedFrame {
            user,
            symbols: pilot
                .iter()
                .zip(&data)
                .map(|(&p, &d)| Complex64::new(p, d))
                .collect(),
        })
    }

    /// `y(i) = Re{ exp(j 2 pi fc/fs i) sum_n s(n) g(i - n fs/Fd) }` over the
    /// filter-extended support.
    pub fn modulate(&self, frame: &SuperimposedFrame) -> PassbandPacket {
        self.modulate_symbols(&frame.symbols)
    }

    pub fn modulate_symbols(&self, symbols: &[Complex64]) -> PassbandPacket {
        let sps = self.params.samples_per_symbol();
        let half = self.rrc.half_len;
        let len = sps * symbols.len().saturating_sub(1) + 2 * half + 1;
        let mut env = vec![Complex64::new(0.0, 0.0); len];
        let taps = self.rrc.taps();
        for (n, &s) in symbols.iter().enumerate() {
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            let start = n * sps;
            for (k, &g) in taps.iter().enumerate() {
                env[start + k] += s * g;
            }
        }
        let w = 2.0 * PI * self.params.carrier_hz / self.params.sample_rate;
        let analytic: Vec<Complex64> = env
            .iter()
            .enumerate()
            .map(|(i, &e)| e * Complex64::from_polar(1.0, w * (i as f64 - half as f64)))
            .collect();
        PassbandPacket {
            samples: analytic.iter().map(|c| c.re).collect(),
            analytic,
            lead: half,
        }
    }

    /// Average passband power of a unit-gain packet core, `E|s|^2 sum g^2 / (2 sps)`.
    pub fn reference_power(&self) -> f64 {
        let e: f64 = self.rrc.taps().iter().map(|g| g * g).sum();
        2.0 * e / (2.0 * self.params.samples_per_symbol() as f64)
    }
}
