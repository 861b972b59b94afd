//! Packet regeneration: the baseband image of a decoded packet at the
//! receiver, used for cancellation.

use crate::dsp::{energy, fft, ifft, resample};
use crate::rx::doppler::{doppler_correct, segment_centre};
use crate::rx::estimate::{estimate_channel, EstimatorConfig};
use crate::rx::turbo::{place, split_branches};
use crate::tx::Transmitter;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegenConfig {
    /// Use the absolute exponent `2 pi a1 fc/Fd n` instead of the residual shift
    /// `2 pi (a1 - 1) fc/Fd n`.
    pub literal_doppler: bool,
    /// Apply the full time-scale model instead of the frequency-shift model.
    pub resample: bool,
    /// Abort when the regenerated energy exceeds this multiple of the segment energy.
    pub energy_bound: f64,
    pub estimator: EstimatorConfig,
}

impl Default for RegenConfig {
    fn default() -> Self {
        Self {
            literal_doppler: false,
            resample: false,
            energy_bound: 1.5,
            estimator: EstimatorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegeneratedPacket {
    pub user: u32,
    /// Baseband start of the source detection.
    pub start: i64,
    /// Segment-aligned replica (length `2 N_FFT`).
    pub r_hat: Vec<Complex64>,
}

/// `s_D(n) = s(n) exp(j 2 pi (a1 - 1) fc/Fd (n - c))`, centred on the packet.
pub fn doppler_distort(s: &[Complex64], a1: f64, carrier_hz: f64, symbol_rate: f64, literal: bool) -> Vec<Complex64> {
    let c = (s.len() as f64 - 1.0) / 2.0;
    let shift = if literal { a1 } else { a1 - 1.0 };
    s.iter()
        .enumerate()
        .map(|(n, v)| {
            let x = if literal { n as f64 } else { n as f64 - c };
            v * Complex64::from_polar(1.0, 2.0 * PI * shift * carrier_hz / symbol_rate * x)
        })
        .collect()
}

/// Rebuilds the received image of a decoded packet inside `seg`.
///
/// The symbols are regenerated from the payload through the transmit chain,
/// Doppler-distorted by `a1`, and the channel is re-estimated against the
/// (uncorrected) segment with the full symbol sequence as pilot.
pub fn regenerate(
    seg: &[Complex64],
    payload: &[u8],
    user: u32,
    start: i64,
    a1: f64,
    tx: &Transmitter,
    cfg: &RegenConfig,
) -> Result<RegeneratedPacket> {
    let p = tx.params();
    let symbols = tx.build_frame(payload, user)?.symbols;
    let (work, s_d) = if cfg.resample {
        (doppler_correct(seg, a1, p), symbols)
    } else {
        (
            seg.to_vec(),
            doppler_distort(&symbols, a1, p.carrier_hz, p.symbol_rate, cfg.literal_doppler),
        )
    };
    let s_spec = fft(&place(&s_d, p));
    let mut r_hat = vec![Complex64::new(0.0, 0.0); seg.len()];
    for (b, branch) in split_branches(&work).iter().enumerate() {
        let x = fft(branch);
        let est = estimate_channel(&x, &s_spec, None, &cfg.estimator)?;
        if est.fallback {
            return Err(Error::DegenerateChannel("no channel support for regeneration".into()));
        }
        let r: Vec<Complex64> = est.freq.iter().zip(&s_spec).map(|(h, s)| h * s).collect();
        for (n, v) in ifft(&r).into_iter().enumerate() {
            r_hat[2 * n + b] = v;
        }
    }
    if cfg.resample && a1 != 1.0 {
        // Re-apply the time scaling and carrier offset removed above.
        let c = segment_centre(p);
        let w = 2.0 * PI * p.carrier_hz * (a1 - 1.0) / p.baseband_rate();
        let undistorted = r_hat.clone();
        for (i, v) in r_hat.iter_mut().enumerate() {
            let t = i as f64 - c;
            *v = resample::interpolate(&undistorted, c + a1 * t) * Complex64::from_polar(1.0, w * t);
        }
    }
    if energy(&r_hat) > cfg.energy_bound * energy(seg) {
        return Err(Error::DegenerateChannel("regenerated packet exceeds segment energy".into()));
    }
    Ok(RegeneratedPacket { user, start, r_hat })
}
