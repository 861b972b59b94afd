//! Root-raised-cosine pulse design.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Sampled RRC impulse response with support `[-half_len, half_len]`,
/// normalised to unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RrcFilter {
    pub rolloff: f64,
    pub half_len: usize,
    pub samples_per_symbol: usize,
    taps: Vec<f64>,
}

impl RrcFilter {
    pub fn new(rolloff: f64, half_len: usize, samples_per_symbol: usize) -> Self {
        let sps = samples_per_symbol as f64;
        let mut taps: Vec<f64> = (-(half_len as i64)..=half_len as i64)
            .map(|i| rrc_value(i as f64 / sps, rolloff))
            .collect();
        let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt();
        taps.iter_mut().for_each(|v| *v /= norm);
        Self {
            rolloff,
            half_len,
            samples_per_symbol,
            taps,
        }
    }

    pub fn from_params(p: &crate::ModemParams) -> Self {
        Self::new(p.rolloff, p.rrc_half_len, p.samples_per_symbol())
    }

    /// Tap at signed offset `i`, zero outside the support.
    #[inline]
    pub fn at(&self, i: i64) -> f64 {
        let idx = i + self.half_len as i64;
        if idx < 0 || idx as usize >= self.taps.len() {
            0.0
        } else {
            self.taps[idx as usize]
        }
    }

    /// Taps ordered from `-half_len` to `half_len`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }
}

/// Continuous RRC pulse at time `t` in symbol periods (unnormalised).
pub fn rrc_value(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}
