//! Doppler compensation: segment resampling with carrier derotation, and the
//! fine residual-frequency search on equalized symbols.

use crate::dsp::resample;
use crate::ModemParams;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Baseband index of the packet centre inside a segment.
pub fn segment_centre(p: &ModemParams) -> f64 {
    2.0 * p.packet_lead() as f64 + (p.n_symbols as f64 - 1.0)
}

/// Undoes a time scaling by `a1` about the packet centre and removes the
/// carrier offset `fc (a1 - 1)`.
pub fn doppler_correct(seg: &[Complex64], a1: f64, p: &ModemParams) -> Vec<Complex64> {
    if a1 == 1.0 {
        return seg.to_vec();
    }
    let c = segment_centre(p);
    let fs = p.baseband_rate();
    let w = -2.0 * PI * p.carrier_hz * (a1 - 1.0) / (a1 * fs);
    (0..seg.len())
        .map(|i| {
            let t = i as f64 - c;
            resample::interpolate(seg, c + t / a1) * Complex64::from_polar(1.0, w * t)
        })
        .collect()
}

/// Magnitude of the correlation with the reference symbols after removing a
/// residual frequency `f`.
fn metric(y: &[Complex64], reference: &[Complex64], f: f64, symbol_rate: f64) -> f64 {
    let c = (y.len() as f64 - 1.0) / 2.0;
    y.iter()
        .zip(reference)
        .enumerate()
        .map(|(n, (v, r))| v * r.conj() * Complex64::from_polar(1.0, -2.0 * PI * f * (n as f64 - c) / symbol_rate))
        .sum::<Complex64>()
        .norm()
}

/// Dichotomous search for the residual frequency in `[-range, range]` Hz.
///
/// `reference` is the current estimate of the transmitted symbols: the pilot
/// alone before any decoding, pilot plus re-encoded data afterwards, which
/// removes the data leakage into the metric.
pub fn fine_doppler(y: &[Complex64], reference: &[Complex64], range: f64, halvings: u32, symbol_rate: f64) -> f64 {
    let mut f = 0.0;
    let mut best = metric(y, reference, f, symbol_rate);
    let mut step = range;
    for _ in 0..halvings {
        step *= 0.5;
        let mut next = f;
        for cand in [f - step, f + step] {
            let m = metric(y, reference, cand, symbol_rate);
            if m > best {
                best = m;
                next = cand;
            }
        }
        f = next;
    }
    f
}

/// Removes a phase ramp of `f` Hz centred on the block.
pub fn remove_ramp(y: &mut [Complex64], f: f64, symbol_rate: f64) {
    let c = (y.len() as f64 - 1.0) / 2.0;
    for (n, v) in y.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -2.0 * PI * f * (n as f64 - c) / symbol_rate);
    }
}
