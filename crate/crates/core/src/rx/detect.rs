//! Cross-ambiguity packet detection and segment extraction.

use super::demod::BasebandSignal;
use crate::codec::gold_pilot;
use crate::dsp::{fft_in_place, ifft_in_place};
use crate::{Execution, ModemParams, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    /// Peak-to-floor factor of the clear-peak test. With the floor summed
    /// over `N` delays and normalised by `2 N_d N_FFT`, the test threshold is
    /// `nu N / N_FFT` times the mean cell power; 24 puts it above the maximum
    /// of a noise-like surface (about 9 times the mean for 6000 cells).
    pub nu: f64,
    /// Largest expected radial speed (m/s); sets the Doppler search range.
    pub max_velocity: f64,
    /// Window distance of the neighbour comparison, in window steps.
    pub compare_offset: usize,
    /// Also evaluate the odd baseband samples (half-symbol timing offsets).
    pub half_symbol_phases: bool,
    /// Collapse same-user detections closer than half a packet into one.
    pub merge_duplicates: bool,
    /// Drop a detection overlapping another one whose CAF peak is this much
    /// stronger (dB); such hits are pilot cross-correlation side products.
    /// The masked packet becomes detectable once the strong one is cancelled.
    pub dominance_db: Option<f64>,
    /// Refine the initial Doppler between bins from the CAF magnitudes of the
    /// neighbouring Doppler rows at the peak delay.
    pub refine_doppler: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            nu: 24.0,
            max_velocity: 1.0,
            compare_offset: 3,
            half_symbol_phases: true,
            merge_duplicates: true,
            dominance_db: Some(12.0),
            refine_doppler: true,
        }
    }
}

impl DetectorConfig {
    /// Doppler bins on each side of zero.
    pub fn doppler_bins(&self, p: &ModemParams) -> usize {
        (self.max_velocity / crate::params::SOUND_SPEED * p.carrier_hz / p.doppler_step()).round() as usize
    }
}

/// Summary of one CAF surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStat {
    pub user: u32,
    pub q: usize,
    /// Baseband sample phase (0 on even samples).
    pub phase: usize,
    /// Delay of the peak in symbols.
    pub tau: usize,
    pub f_bin: i32,
    /// Sub-bin Doppler offset in `[-0.5, 0.5]` bins.
    pub f_offset: f64,
    /// Peak value `I = max |A|^2`.
    pub peak: f64,
    /// `sum over tau and F != F_max of |A|^2`.
    pub off_peak: f64,
}

/// A detected packet and its extracted segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub user: u32,
    pub q: usize,
    /// Baseband index of the estimated first-symbol peak.
    pub start: i64,
    pub a1_init: f64,
    pub peak: f64,
    pub segment: Vec<Complex64>,
    pub truncated: bool,
}

impl Detection {
    /// Baseband index of the first segment sample.
    pub fn segment_origin(&self, p: &ModemParams) -> i64 {
        segment_origin(self.start, p)
    }
}

pub fn segment_origin(start: i64, p: &ModemParams) -> i64 {
    start - 2 * p.packet_lead() as i64
}

/// Frequency-domain pilots for the correlations.
#[derive(Debug, Clone)]
pub struct PilotBank {
    pub users: Vec<u32>,
    conj_spectra: Vec<Vec<Complex64>>,
    fft_len: usize,
}

impl PilotBank {
    pub fn new(users: &[u32], p: &ModemParams) -> Result<Self> {
        let fft_len = (3 * p.n_symbols).next_power_of_two();
        let mut conj_spectra = Vec::with_capacity(users.len());
        for &u in users {
            let pilot = gold_pilot(u, p.n_symbols)?;
            let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
            for (b, &v) in buf.iter_mut().zip(&pilot) {
                b.re = v;
            }
            fft_in_place(&mut buf);
            conj_spectra.push(buf.iter().map(|c| c.conj()).collect());
        }
        Ok(Self {
            users: users.to_vec(),
            conj_spectra,
            fft_len,
        })
    }
}

/// `|A(tau, F)|^2` for window `q`, sample phase `phase`, for every user in
/// the bank. Rows are Doppler bins `-n_d..=n_d`, columns delays `0..N`.
pub fn caf_surfaces(
    rb: &BasebandSignal,
    q: usize,
    phase: usize,
    bank: &PilotBank,
    n_d: usize,
    p: &ModemParams,
) -> Vec<Vec<Vec<f64>>> {
    let n = p.n_symbols;
    let base = 2 * q * (n / 2) + phase;
    let window: Vec<Complex64> = (0..2 * n)
        .map(|k| rb.samples.get(base + 2 * k).copied().unwrap_or_default())
        .collect();
    let step = p.doppler_step() / p.symbol_rate;
    let mut out = vec![Vec::with_capacity(2 * n_d + 1); bank.users.len()];
    for f in -(n_d as i64)..=n_d as i64 {
        let mut y = vec![Complex64::new(0.0, 0.0); bank.fft_len];
        for (k, (dst, &v)) in y.iter_mut().zip(&window).enumerate() {
            *dst = v * Complex64::from_polar(1.0, -2.0 * PI * f as f64 * step * k as f64);
        }
        fft_in_place(&mut y);
        for (ui, spec) in bank.conj_spectra.iter().enumerate() {
            let mut c: Vec<Complex64> = y.iter().zip(spec).map(|(a, b)| a * b).collect();
            ifft_in_place(&mut c);
            out[ui].push(c[..n].iter().map(|v| v.norm_sqr()).collect());
        }
    }
    out
}

fn summarize(user: u32, q: usize, phase: usize, surface: &[Vec<f64>], n_d: usize) -> WindowStat {
    let mut best = (f64::NEG_INFINITY, 0usize, 0i32);
    for tau in 0..surface[0].len() {
        for (row, vals) in surface.iter().enumerate() {
            let f = row as i32 - n_d as i32;
            let v = vals[tau];
            // Strict comparison keeps the lowest tau; ties in tau prefer smaller |F|.
            if v > best.0 || (v == best.0 && tau == best.1 && f.abs() < best.2.abs()) {
                best = (v, tau, f);
            }
        }
    }
    let f_row = (best.2 + n_d as i32) as usize;
    let off_peak = surface
        .iter()
        .enumerate()
        .filter(|(r, _)| *r != f_row)
        .map(|(_, v)| v.iter().sum::<f64>())
        .sum();
    // The pilot lasts one bin period, so the Doppler profile is a sinc and
    // the larger neighbour c of the peak b gives the offset c / (b + c).
    let mag = |r: Option<usize>| r.and_then(|r| surface.get(r)).map_or(0.0, |v| v[best.1].sqrt());
    let b = mag(Some(f_row));
    let (lo, hi) = (mag(f_row.checked_sub(1)), mag(Some(f_row + 1)));
    let f_offset = if b <= 0.0 {
        0.0
    } else if hi >= lo {
        (hi / (b + hi)).min(0.5)
    } else {
        -(lo / (b + lo)).min(0.5)
    };
    WindowStat {
        user,
        q,
        phase,
        tau: best.1,
        f_bin: best.2,
        f_offset,
        peak: best.0,
        off_peak,
    }
}

/// Number of detection windows covering `rb`.
pub fn window_count(rb: &BasebandSignal, p: &ModemParams) -> usize {
    rb.len().div_ceil(p.n_symbols)
}

/// CAF statistics for every window and user, indexed `[q][user]`.
pub fn window_stats(
    rb: &BasebandSignal,
    bank: &PilotBank,
    cfg: &DetectorConfig,
    p: &ModemParams,
    exec: Execution,
) -> Vec<Vec<WindowStat>> {
    let n_d = cfg.doppler_bins(p);
    let phases = if cfg.half_symbol_phases { 2 } else { 1 };
    exec.map_range(window_count(rb, p), |q| {
        let mut best: Vec<Option<WindowStat>> = vec![None; bank.users.len()];
        for phase in 0..phases {
            let surfaces = caf_surfaces(rb, q, phase, bank, n_d, p);
            for (ui, s) in surfaces.iter().enumerate() {
                let st = summarize(bank.users[ui], q, phase, s, n_d);
                if best[ui].is_none_or(|b| st.peak > b.peak) {
                    best[ui] = Some(st);
                }
            }
        }
        best.into_iter().map(|b| b.expect("at least one phase")).collect()
    })
}

/// Neighbour test: the window must beat the sum of the windows `offset` away.
pub fn passes_neighbour_test(stats: &[Vec<WindowStat>], q: usize, ui: usize, offset: usize) -> bool {
    let at = |k: Option<usize>| k.and_then(|k| stats.get(k)).map_or(0.0, |s| s[ui].peak);
    stats[q][ui].peak > at(q.checked_sub(offset)) + at(Some(q + offset))
}

/// Clear-peak test: the peak must exceed the scaled off-peak energy.
pub fn passes_peak_test(st: &WindowStat, cfg: &DetectorConfig, p: &ModemParams) -> bool {
    let n_d = cfg.doppler_bins(p).max(1);
    st.peak > cfg.nu / (2.0 * n_d as f64 * p.n_fft as f64) * st.off_peak
}

/// Packet start (baseband index) implied by a window statistic.
pub fn stat_start(st: &WindowStat, p: &ModemParams) -> i64 {
    (2 * st.q * (p.n_symbols / 2) + 2 * st.tau + st.phase) as i64
}

/// Full detection sweep over `rb` for all users in the bank.
pub fn sweep(
    rb: &BasebandSignal,
    bank: &PilotBank,
    cfg: &DetectorConfig,
    p: &ModemParams,
    exec: Execution,
) -> Vec<Detection> {
    let stats = window_stats(rb, bank, cfg, p, exec);
    let mut hits: Vec<WindowStat> = Vec::new();
    for q in 0..stats.len() {
        for ui in 0..bank.users.len() {
            if passes_neighbour_test(&stats, q, ui, cfg.compare_offset)
                && passes_peak_test(&stats[q][ui], cfg, p)
            {
                hits.push(stats[q][ui]);
            }
        }
    }
    if cfg.merge_duplicates {
        hits = merge_duplicates(hits, p);
    }
    if let Some(db) = cfg.dominance_db {
        hits = drop_dominated(hits, db, p);
    }
    if !cfg.refine_doppler {
        hits.iter_mut().for_each(|h| h.f_offset = 0.0);
    }
    hits.iter().map(|st| extract(rb, st, p)).collect()
}

/// Keeps the strongest of same-user hits whose starts differ by at most half a packet.
pub fn merge_duplicates(mut hits: Vec<WindowStat>, p: &ModemParams) -> Vec<WindowStat> {
    hits.sort_by_key(|h| (h.user, stat_start(h, p)));
    let radius = p.n_symbols as i64;
    let mut out: Vec<WindowStat> = Vec::new();
    for h in hits {
        match out.last_mut() {
            Some(last) if last.user == h.user && (stat_start(&h, p) - stat_start(last, p)).abs() <= radius => {
                if h.peak > last.peak {
                    *last = h;
                }
            }
            _ => out.push(h),
        }
    }
    out.sort_by_key(|h| (stat_start(h, p), h.user));
    out
}

/// Removes hits overlapping (start difference below one packet) a hit whose
/// peak exceeds theirs by more than `db`.
pub fn drop_dominated(hits: Vec<WindowStat>, db: f64, p: &ModemParams) -> Vec<WindowStat> {
    let ratio = 10f64.powf(db / 10.0);
    let span = 2 * p.n_symbols as i64;
    hits.iter()
        .filter(|h| {
            !hits.iter().any(|o| {
                (stat_start(o, p) - stat_start(h, p)).abs() < span && o.peak > ratio * h.peak
            })
        })
        .copied()
        .collect()
}

pub fn extract(rb: &BasebandSignal, st: &WindowStat, p: &ModemParams) -> Detection {
    let start = stat_start(st, p);
    let (segment, truncated) = rb.extract(segment_origin(start, p), p.segment_len());
    Detection {
        user: st.user,
        q: st.q,
        start,
        a1_init: 1.0 + (st.f_bin as f64 + st.f_offset) * p.doppler_step() / p.carrier_hz,
        peak: st.peak,
        segment,
        truncated,
    }
}
