//! Channel simulator: sparse multipath with Doppler time scaling, additive
//! noise, optional impulsive interference, and the multiuser scenario mixer.

pub mod scenario;

pub use scenario::{Entry, GroundTruth, RandomTaps, RealizedScenario, Scenario, TapConfig, Transmission, UserConfig};

use crate::dsp::resample;
use crate::rng::XorShift64Star;
use crate::tx::PassbandPacket;
use crate::{Error, ModemParams, Result};
use num_complex::Complex64;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest supported tap delay (s), the reach of the channel estimator.
pub const MAX_TAP_DELAY: f64 = 0.05;
/// Largest supported |a1 - 1|.
pub const MAX_DOPPLER_DEVIATION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tap {
    pub delay: f64,
    pub amplitude: Complex64,
}

impl Tap {
    pub fn new(delay: f64, amplitude: Complex64) -> Self {
        Self { delay, amplitude }
    }
}

/// Time-invariant sparse multipath plus a Doppler time-scale factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub taps: Vec<Tap>,
    /// Doppler factor `1 + v/c`.
    pub a1: f64,
}

impl ChannelRealization {
    pub fn identity() -> Self {
        Self {
            taps: vec![Tap::new(0.0, Complex64::new(1.0, 0.0))],
            a1: 1.0,
        }
    }

    pub fn with_velocity(taps: Vec<Tap>, velocity: f64) -> Self {
        Self {
            taps,
            a1: 1.0 + velocity / crate::params::SOUND_SPEED,
        }
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.amplitude.norm_sqr()).sum()
    }

    pub fn max_delay(&self) -> f64 {
        self.taps.iter().map(|t| t.delay).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if (self.a1 - 1.0).abs() > MAX_DOPPLER_DEVIATION {
            return Err(Error::Scenario(format!(
                "Doppler factor {} outside 1 +- {MAX_DOPPLER_DEVIATION}",
                self.a1
            )));
        }
        if self.taps.is_empty() {
            return Err(Error::Scenario("channel has no taps".into()));
        }
        if let Some(t) = self
            .taps
            .iter()
            .find(|t| !(0.0..=MAX_TAP_DELAY).contains(&t.delay))
        {
            return Err(Error::Scenario(format!(
                "tap delay {} s outside [0, {MAX_TAP_DELAY}]",
                t.delay
            )));
        }
        Ok(())
    }
}

/// Passes a packet through the channel.
///
/// Output sample `i` is aligned with packet sample `i`; the output is longer by
/// the channel delay spread plus a Doppler margin. Complex tap gains rotate the
/// analytic signal, then the sum is time-scaled by `a1` about the packet
/// midpoint and the real part is returned.
pub fn apply_channel(
    pkt: &PassbandPacket,
    ch: &ChannelRealization,
    params: &ModemParams,
) -> Result<Vec<f64>> {
    ch.validate()?;
    let fs = params.sample_rate;
    let max_d = ch
        .taps
        .iter()
        .map(|t| (t.delay * fs).round() as usize)
        .max()
        .unwrap_or(0);
    let filtered_len = pkt.analytic.len() + max_d;
    let mut filtered = vec![Complex64::new(0.0, 0.0); filtered_len];
    for tap in &ch.taps {
        let d = (tap.delay * fs).round() as usize;
        for (i, &x) in pkt.analytic.iter().enumerate() {
            filtered[i + d] += tap.amplitude * x;
        }
    }
    if ch.a1 == 1.0 {
        return Ok(filtered.into_iter().map(|c| c.re).collect());
    }
    let sps = params.samples_per_symbol() as f64;
    let centre = pkt.lead as f64 + sps * (params.n_symbols as f64 - 1.0) / 2.0;
    let margin = ((ch.a1 - 1.0).abs() * filtered_len as f64).ceil() as usize + 2;
    let out_len = filtered_len + margin;
    Ok((0..out_len)
        .map(|i| resample::interpolate(&filtered, centre + ch.a1 * (i as f64 - centre)).re)
        .collect())
}

/// Variance of white noise at `fs` giving `snr_db` inside the occupied band,
/// for a signal of passband power `signal_power`.
pub fn noise_variance(signal_power: f64, snr_db: f64, params: &ModemParams) -> f64 {
    let band_fraction = params.occupied_bandwidth() / (params.sample_rate / 2.0);
    signal_power / (band_fraction * 10f64.powf(snr_db / 10.0))
}

/// White Gaussian noise samples with the given standard deviation.
pub fn gaussian_noise(len: usize, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = XorShift64Star::new(seed);
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect()
}

/// Adds noise so that the in-band SNR relative to the power of
/// `sig[core]` equals `snr_db`. Infinite SNR leaves the signal unchanged.
pub fn add_noise(
    sig: &[f64],
    core: std::ops::Range<usize>,
    snr_db: f64,
    seed: u64,
    params: &ModemParams,
) -> Vec<f64> {
    if snr_db.is_infinite() && snr_db > 0.0 {
        return sig.to_vec();
    }
    let core = &sig[core];
    let power = core.iter().map(|v| v * v).sum::<f64>() / core.len() as f64;
    let sigma = noise_variance(power, snr_db, params).sqrt();
    sig.iter()
        .zip(gaussian_noise(sig.len(), sigma, seed))
        .map(|(s, n)| s + n)
        .collect()
}

/// Random short tone bursts: Poisson count with mean `rate * duration`,
/// Gaussian envelopes of 0.2 to 2 ms at random in-band frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpulseConfig {
    /// Mean bursts per second.
    pub rate: f64,
    /// Peak burst amplitude.
    pub amplitude: f64,
}

/// Adds impulsive interference; returns the signal and the number of bursts.
pub fn impulse_interference(
    sig: &[f64],
    cfg: ImpulseConfig,
    seed: u64,
    params: &ModemParams,
) -> (Vec<f64>, usize) {
    let mut out = sig.to_vec();
    if cfg.rate <= 0.0 || sig.is_empty() {
        return (out, 0);
    }
    let fs = params.sample_rate;
    let duration = sig.len() as f64 / fs;
    let mut rng = XorShift64Star::new(seed);
    let count = Poisson::new(cfg.rate * duration)
        .map(|p| p.sample(&mut rng) as usize)
        .unwrap_or(0);
    for _ in 0..count {
        let centre = rng.unit() * sig.len() as f64;
        let width = (0.2e-3 + rng.unit() * 1.8e-3) * fs / 4.0;
        let freq = params.carrier_hz + (rng.unit() - 0.5) * 2.0 * params.occupied_bandwidth();
        let phase = rng.unit() * 2.0 * PI;
        let lo = (centre - 4.0 * width).max(0.0) as usize;
        let hi = ((centre + 4.0 * width) as usize).min(sig.len());
        for (i, v) in out.iter_mut().enumerate().take(hi).skip(lo) {
            let t = i as f64 - centre;
            let env = (-0.5 * (t / width).powi(2)).exp();
            *v += cfg.amplitude * env * (2.0 * PI * freq * i as f64 / fs + phase).cos();
        }
    }
    (out, count)
}
