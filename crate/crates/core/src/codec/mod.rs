//! Packet bit chain: CRC framing, rate-1/3 convolutional coding, user interleaving.

pub mod conv;
pub mod crc;
pub mod gold;
pub mod interleave;

pub use conv::ConvCode;
pub use gold::gold_pilot;
pub use interleave::Interleaver;

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Interleaver seed shared by transmitter and receiver.
pub const DEFAULT_INTERLEAVER_SEED: u64 = 0x1D4A_5EED_0000_0001;

/// Coding parameters. `3 * (payload + crc + tail) == coded_bits`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub payload_bits: usize,
    pub crc_bits: usize,
    pub constraint_length: usize,
    pub polys_octal: [u32; 3],
    pub tail_bits: usize,
    pub coded_bits: usize,
    pub interleaver_seed: u64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            payload_bits: 176,
            crc_bits: crc::CRC_BITS,
            constraint_length: 9,
            polys_octal: [0o557, 0o663, 0o711],
            tail_bits: 8,
            coded_bits: 600,
            interleaver_seed: DEFAULT_INTERLEAVER_SEED,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.crc_bits != crc::CRC_BITS {
            return Err(Error::Config("only 16-bit CRC is supported".into()));
        }
        if self.tail_bits + 1 != self.constraint_length {
            return Err(Error::Config("tail bits must equal K - 1".into()));
        }
        if 3 * (self.payload_bits + self.crc_bits + self.tail_bits) != self.coded_bits {
            return Err(Error::Config(format!(
                "3 x ({} + {} + {}) != {} coded bits",
                self.payload_bits, self.crc_bits, self.tail_bits, self.coded_bits
            )));
        }
        Ok(())
    }

    /// Encoder input length: payload plus CRC (tail is appended by the encoder).
    pub fn framed_bits(&self) -> usize {
        self.payload_bits + self.crc_bits
    }
}

/// Outcome of decoding one soft codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub payload: Vec<u8>,
    pub crc_ok: bool,
    pub path_metric: f64,
    /// Re-encoded, re-interleaved BPSK symbols of the decoded message.
    pub reencoded: Vec<f64>,
}

/// Packet codec for a fixed configuration.
#[derive(Debug, Clone)]
pub struct PacketCodec {
    cfg: CodecConfig,
    code: ConvCode,
}

impl PacketCodec {
    pub fn new(cfg: CodecConfig) -> Result<Self> {
        cfg.validate()?;
        let code = ConvCode::new(cfg.constraint_length, &cfg.polys_octal);
        Ok(Self { cfg, code })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.cfg
    }

    pub fn interleaver(&self, user: u32) -> Interleaver {
        Interleaver::new(self.cfg.coded_bits, self.cfg.interleaver_seed, user)
    }

    pub fn crc16_attach(&self, payload: &[u8]) -> Result<Vec<u8>> {
        if payload.len() != self.cfg.payload_bits {
            return Err(Error::Config(format!(
                "payload has {} bits, expected {}",
                payload.len(),
                self.cfg.payload_bits
            )));
        }
        Ok(crc::crc16_attach(payload))
    }

    pub fn conv_encode(&self, framed: &[u8]) -> Result<Vec<u8>> {
        if framed.len() != self.cfg.framed_bits() {
            return Err(Error::Config(format!(
                "encoder input has {} bits, expected {}",
                framed.len(),
                self.cfg.framed_bits()
            )));
        }
        Ok(self.code.encode(framed))
    }

    /// Interleaved coded bits of `payload` for `user`.
    pub fn encode(&self, payload: &[u8], user: u32) -> Result<Vec<u8>> {
        let coded = self.conv_encode(&self.crc16_attach(payload)?)?;
        Ok(self.interleaver(user).interleave(&coded))
    }

    /// BPSK data symbols (0 -> +1, 1 -> -1) of `payload` for `user`.
    pub fn data_symbols(&self, payload: &[u8], user: u32) -> Result<Vec<f64>> {
        Ok(self
            .encode(payload, user)?
            .into_iter()
            .map(|b| 1.0 - 2.0 * b as f64)
            .collect())
    }

    /// Decodes interleaved soft symbols (positive favours bit 0).
    pub fn decode(&self, soft: &[f64], user: u32) -> Decoded {
        assert_eq!(soft.len(), self.cfg.coded_bits);
        let il = self.interleaver(user);
        let (framed, path_metric) = self.code.decode(&il.deinterleave(soft));
        let crc_ok = crc::crc16_check(&framed);
        let coded = self.code.encode(&framed);
        let reencoded = il
            .interleave(&coded)
            .into_iter()
            .map(|b| 1.0 - 2.0 * b as f64)
            .collect();
        Decoded {
            payload: framed[..self.cfg.payload_bits].to_vec(),
            crc_ok,
            path_metric,
            reencoded,
        }
    }
}
