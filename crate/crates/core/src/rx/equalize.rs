//! Frequency-domain combiners: Rake, regularised linear, and IC-Rake.

use super::estimate::ChannelEstimate;
use crate::dsp::ifft;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqMode {
    Rake,
    Linear,
    IcRake,
}

impl EqMode {
    pub const ALL: [EqMode; 3] = [EqMode::Rake, EqMode::Linear, EqMode::IcRake];
}

impl fmt::Display for EqMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EqMode::Rake => "rake",
            EqMode::Linear => "linear",
            EqMode::IcRake => "ic-rake",
        })
    }
}

impl FromStr for EqMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "rake" => Ok(EqMode::Rake),
            "linear" => Ok(EqMode::Linear),
            "ic-rake" | "icrake" => Ok(EqMode::IcRake),
            other => Err(Error::Config(format!("unknown equalizer '{other}'"))),
        }
    }
}

/// Equalizes the branch spectrum `x` and returns the time-domain block.
///
/// `s_hat` is the spectrum of the current symbol estimate (used by IC-Rake)
/// and `eps_le` the regularisation of the linear equalizer.
pub fn equalize(
    x: &[Complex64],
    est: &ChannelEstimate,
    s_hat: &[Complex64],
    mode: EqMode,
    eps_le: f64,
) -> Result<Vec<Complex64>> {
    let energy = est.energy();
    if energy == 0.0 || est.freq.iter().all(|h| h.norm_sqr() == 0.0) {
        return Err(Error::DegenerateChannel("channel estimate is zero".into()));
    }
    let k = 1.0 / energy;
    let h = &est.freq;
    let z: Vec<Complex64> = match mode {
        EqMode::Rake => x.iter().zip(h).map(|(x, h)| k * h.conj() * x).collect(),
        EqMode::Linear => x
            .iter()
            .zip(h)
            .map(|(x, h)| h.conj() * x / (h.norm_sqr() + eps_le))
            .collect(),
        EqMode::IcRake => x
            .iter()
            .zip(h)
            .zip(s_hat)
            .map(|((x, h), s)| s + k * h.conj() * (x - s * h))
            .collect(),
    };
    Ok(ifft(&z))
}

/// Regularisation of the linear equalizer for a given SNR estimate.
pub fn linear_regularisation(est: &ChannelEstimate, snr_linear: f64) -> f64 {
    let mean = est.freq.iter().map(|h| h.norm_sqr()).sum::<f64>() / est.freq.len() as f64;
    mean / snr_linear.max(1e-3)
}

/// Rescales an equalizer output so its pilot component has unit gain.
///
/// The regularised linear equalizer shrinks its output towards zero, which
/// inflates the pilot-error SNR (a garbage segment scores about 0 dB).
/// Dividing by the least-squares pilot gain removes that bias.
pub fn remove_bias(y: &mut [Complex64], pilot: &[f64]) {
    let num: f64 = y.iter().zip(pilot).map(|(v, p)| v.re * p).sum();
    let den: f64 = pilot.iter().map(|p| p * p).sum();
    if num > 0.0 && den > 0.0 {
        let g = num / den;
        y.iter_mut().for_each(|v| *v /= g);
    }
}
