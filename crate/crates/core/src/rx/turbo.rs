//! Per-segment turbo loop: Doppler correction, two-branch channel estimation
//! and equalization, fine Doppler, SNR-weighted combining and decoding.

use super::doppler::{doppler_correct, fine_doppler, remove_ramp};
use super::equalize::{equalize, linear_regularisation, remove_bias, EqMode};
use super::estimate::{estimate_channel, EstimatorConfig};
use crate::codec::{Decoded, PacketCodec};
use crate::dsp::fft;
use crate::tx::Transmitter;
use crate::{Error, ModemParams, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TurboConfig {
    /// Turbo iterations per segment.
    pub iterations: usize,
    pub mode: EqMode,
    /// Stop iterating as soon as the CRC passes.
    pub early_stop: bool,
    /// SNR assumed by the linear equalizer before any measurement (dB).
    pub initial_snr_db: f64,
    pub fine_doppler: bool,
    pub fine_doppler_halvings: u32,
    pub estimator: EstimatorConfig,
}

impl Default for TurboConfig {
    fn default() -> Self {
        Self {
            iterations: 9,
            mode: EqMode::IcRake,
            early_stop: true,
            initial_snr_db: 10.0,
            fine_doppler: true,
            fine_doppler_halvings: 16,
            estimator: EstimatorConfig::default(),
        }
    }
}

/// Diagnostics of one turbo iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationDiag {
    pub iteration: usize,
    pub snr_mrc_db: f64,
    pub snr_branch0_db: f64,
    pub snr_branch1_db: f64,
    pub weight0: f64,
    pub support0: usize,
    pub support1: usize,
    pub a1: f64,
    pub crc_ok: bool,
}

/// Result of the turbo loop on one segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub user: u32,
    pub payload: Vec<u8>,
    pub crc_ok: bool,
    pub snr_mrc_db: f64,
    /// Refined Doppler factor after the last iteration.
    pub a1: f64,
    pub iterations: usize,
    /// Combined equalizer output of the last iteration (N symbols).
    pub symbols: Vec<Complex64>,
    /// Re-encoded estimate `p + j d~` of the transmitted symbols.
    pub s_hat: Vec<Complex64>,
    pub diags: Vec<IterationDiag>,
}

/// Pilot-to-error power ratio `sum p^2 / sum (Re y - p)^2`.
pub fn pilot_snr(y: &[Complex64], pilot: &[f64]) -> f64 {
    let sig: f64 = pilot.iter().map(|p| p * p).sum();
    let err: f64 = y.iter().zip(pilot).map(|(v, p)| (v.re - p).powi(2)).sum();
    if err == 0.0 {
        f64::INFINITY
    } else {
        sig / err
    }
}

/// Combining weights `sqrt(SNR_b) / (sqrt(SNR_1) + sqrt(SNR_2))`.
pub fn mrc_weights(snr1: f64, snr2: f64) -> (f64, f64) {
    match (snr1.is_infinite(), snr2.is_infinite()) {
        (true, true) => (0.5, 0.5),
        (true, false) => (1.0, 0.0),
        (false, true) => (0.0, 1.0),
        _ => {
            let (a, b) = (snr1.max(0.0).sqrt(), snr2.max(0.0).sqrt());
            if a + b == 0.0 {
                (0.5, 0.5)
            } else {
                (a / (a + b), b / (a + b))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Combined {
    pub y: Vec<Complex64>,
    pub weights: (f64, f64),
    pub snr: (f64, f64),
    pub a1: f64,
}

pub fn mrc_combine(y1: &[Complex64], y2: &[Complex64], pilot: &[f64], a1: (f64, f64)) -> Combined {
    let snr = (pilot_snr(y1, pilot), pilot_snr(y2, pilot));
    let (w1, w2) = mrc_weights(snr.0, snr.1);
    Combined {
        y: y1.iter().zip(y2).map(|(a, b)| a * w1 + b * w2).collect(),
        weights: (w1, w2),
        snr,
        a1: w1 * a1.0 + w2 * a1.1,
    }
}

/// Soft data `Im{y}` through de-interleaving, Viterbi decoding and the CRC.
pub fn demap_decode(y: &[Complex64], user: u32, codec: &PacketCodec) -> Decoded {
    let soft: Vec<f64> = y.iter().map(|v| v.im).collect();
    codec.decode(&soft, user)
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Places `N` symbols centred in an `N_FFT` block.
pub fn place(symbols: &[Complex64], p: &ModemParams) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); p.n_fft];
    let lead = p.packet_lead();
    buf[lead..lead + symbols.len()].copy_from_slice(symbols);
    buf
}

/// Splits a segment into its even (`b = 0`) and odd (`b = 1`) branches.
pub fn split_branches(seg: &[Complex64]) -> [Vec<Complex64>; 2] {
    [
        seg.iter().step_by(2).copied().collect(),
        seg.iter().skip(1).step_by(2).copied().collect(),
    ]
}

/// The turbo receiver for single segments.
#[derive(Debug, Clone)]
pub struct TurboReceiver {
    pub tx: Transmitter,
    pub cfg: TurboConfig,
}

impl TurboReceiver {
    pub fn new(tx: Transmitter, cfg: TurboConfig) -> Self {
        Self { tx, cfg }
    }

    pub fn params(&self) -> &ModemParams {
        self.tx.params()
    }

    pub fn process(&self, seg: &[Complex64], user: u32, a1_init: f64) -> Result<SegmentOutcome> {
        let p = self.params();
        if seg.len() != p.segment_len() {
            return Err(Error::Config(format!("segment length {} != {}", seg.len(), p.segment_len())));
        }
        let n = p.n_symbols;
        let lead = p.packet_lead();
        let pilot = self.tx.pilot(user)?;
        let pilot_c: Vec<Complex64> = pilot.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let pilot_spec = fft(&place(&pilot_c, p));
        let mut s_hat = pilot_c.clone();
        let mut a1 = a1_init;
        let mut snr_est = (
            10f64.powf(self.cfg.initial_snr_db / 10.0),
            10f64.powf(self.cfg.initial_snr_db / 10.0),
        );
        let mut diags = Vec::with_capacity(self.cfg.iterations);
        let mut last: Option<(Decoded, Combined)> = None;
        for it in 0..self.cfg.iterations.max(1) {
            let corrected = doppler_correct(seg, a1, p);
            let s_spec = fft(&place(&s_hat, p));
            let mut ys = Vec::with_capacity(2);
            let mut a1b = [a1; 2];
            let mut support = [0usize; 2];
            for (b, branch) in split_branches(&corrected).iter().enumerate() {
                let x = fft(branch);
                let est = estimate_channel(&x, &s_spec, Some(&pilot_spec), &self.cfg.estimator)?;
                support[b] = est.support.len();
                let snr_b = if b == 0 { snr_est.0 } else { snr_est.1 };
                let eps = linear_regularisation(&est, if snr_b.is_finite() { snr_b } else { 1e12 });
                let full = equalize(&x, &est, &s_spec, self.cfg.mode, eps)?;
                let mut y = full[lead..lead + n].to_vec();
                if self.cfg.mode == EqMode::Linear {
                    remove_bias(&mut y, &pilot);
                }
                if self.cfg.fine_doppler {
                    let f = fine_doppler(&y, &s_hat, p.doppler_step(), self.cfg.fine_doppler_halvings, p.symbol_rate);
                    remove_ramp(&mut y, f, p.symbol_rate);
                    a1b[b] = a1 + f / p.carrier_hz;
                }
                ys.push(y);
            }
            let comb = mrc_combine(&ys[0], &ys[1], &pilot, (a1b[0], a1b[1]));
            let dec = demap_decode(&comb.y, user, self.tx.codec());
            let snr_mrc = pilot_snr(&comb.y, &pilot);
            diags.push(IterationDiag {
                iteration: it + 1,
                snr_mrc_db: to_db(snr_mrc),
                snr_branch0_db: to_db(comb.snr.0),
                snr_branch1_db: to_db(comb.snr.1),
                weight0: comb.weights.0,
                support0: support[0],
                support1: support[1],
                a1: comb.a1,
                crc_ok: dec.crc_ok,
            });
            snr_est = comb.snr;
            a1 = comb.a1;
            s_hat = pilot
                .iter()
                .zip(&dec.reencoded)
                .map(|(&pv, &d)| Complex64::new(pv, d))
                .collect();
            let stop = dec.crc_ok && self.cfg.early_stop;
            last = Some((dec, comb));
            if stop {
                break;
            }
        }
        let (dec, comb) = last.expect("at least one iteration");
        Ok(SegmentOutcome {
            user,
            payload: dec.payload,
            crc_ok: dec.crc_ok,
            snr_mrc_db: diags.last().map_or(f64::NEG_INFINITY, |d| d.snr_mrc_db),
            a1,
            iterations: diags.len(),
            symbols: comb.y,
            s_hat,
            diags,
        })
    }
}
