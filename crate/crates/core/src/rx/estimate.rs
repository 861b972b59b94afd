//! Sparse frequency-domain channel estimation.
//!
//! The branch spectrum is modelled as `Z(k) = S(k) sum_q c_q exp(-j 2 pi k m_q / N)`.
//! Candidate delays are picked from the circular cross-correlation with the
//! symbol estimate, then the amplitudes solve the regularised normal
//! equations `G c = xi` by DCD.

use super::dcd;
use crate::dsp::{fft, ifft};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Support threshold relative to the correlation peak power.
    pub kappa: f64,
    /// Maximum support size.
    pub max_taps: usize,
    /// One-sided delay window (symbols); the support lies in `[-window, window]`.
    pub delay_window: usize,
    /// Minimum spacing between chosen delays minus one (0 allows adjacent taps).
    pub exclusion_radius: usize,
    /// Diagonal loading relative to `rho(0) / N_FFT`.
    pub eps_rel: f64,
    /// Build the Gram matrix from the pilot spectrum only.
    pub gram_pilot_only: bool,
    pub dcd_bits: u32,
    /// DCD update budget; `None` means eight per complex unknown.
    pub dcd_max_updates: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            kappa: 4e-4,
            max_taps: 30,
            delay_window: 150,
            exclusion_radius: 0,
            eps_rel: 1e-3,
            gram_pilot_only: false,
            dcd_bits: 16,
            dcd_max_updates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    /// Delays in `0..N_FFT` (negative delays wrapped).
    pub support: Vec<usize>,
    pub amps: Vec<Complex64>,
    /// Frequency response on the `N_FFT` grid.
    pub freq: Vec<Complex64>,
    /// The support threshold removed every candidate; a single tap was used.
    pub fallback: bool,
    pub dcd_converged: bool,
}

impl ChannelEstimate {
    pub fn energy(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Signed delay of a support index.
    pub fn signed_delay(m: usize, n: usize) -> i64 {
        if m > n / 2 {
            m as i64 - n as i64
        } else {
            m as i64
        }
    }

    /// Impulse response on the circular grid.
    pub fn impulse_response(&self) -> Vec<Complex64> {
        let mut h = vec![Complex64::new(0.0, 0.0); self.freq.len()];
        for (&m, &a) in self.support.iter().zip(&self.amps) {
            h[m] += a;
        }
        h
    }

    /// Delays whose power is at least `rel` times the strongest estimated tap.
    pub fn significant_support(&self, rel: f64) -> Vec<usize> {
        let max = self.amps.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        let mut s: Vec<usize> = self
            .support
            .iter()
            .zip(&self.amps)
            .filter(|(_, a)| a.norm_sqr() >= rel * max && max > 0.0)
            .map(|(&m, _)| m)
            .collect();
        s.sort_unstable();
        s
    }
}

/// `H(k) = sum_q c_q exp(-j 2 pi k m_q / N)`.
pub fn frequency_response(support: &[usize], amps: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for (&m, &a) in support.iter().zip(amps) {
        h[m] += a;
    }
    fft(&h)
}

/// `gamma = IFFT(Z S*)`, the circular cross-correlation divided by `N_FFT`.
pub fn correlate(z: &[Complex64], s: &[Complex64]) -> Vec<Complex64> {
    let prod: Vec<Complex64> = z.iter().zip(s).map(|(a, b)| a * b.conj()).collect();
    ifft(&prod)
}

/// `rho(n) = sum_k |S(k)|^2 exp(-j 2 pi k n / N)`.
pub fn rho(s: &[Complex64]) -> Vec<Complex64> {
    let p: Vec<Complex64> = s.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    fft(&p)
}

/// `G_pq = rho((m_q - m_p) mod N) + eps delta_pq`, row-major.
pub fn build_gram(support: &[usize], rho: &[Complex64], eps: f64) -> Vec<Complex64> {
    let n = rho.len();
    let m = support.len();
    let mut g = vec![Complex64::new(0.0, 0.0); m * m];
    for p in 0..m {
        for q in 0..m {
            g[p * m + q] = rho[(support[q] + n - support[p]) % n];
        }
        g[p * m + p] += eps;
    }
    g
}

/// Greedy support selection over the wrapped delay window.
pub fn select_support(gamma: &[Complex64], cfg: &EstimatorConfig) -> (Vec<usize>, bool) {
    let n = gamma.len();
    let w = cfg.delay_window.min(n / 2 - 1);
    let power: Vec<f64> = gamma.iter().map(|v| v.norm_sqr()).collect();
    let mut cand: Vec<usize> = (0..=w).chain(n - w..n).collect();
    let peak = cand.iter().map(|&m| power[m]).fold(0.0, f64::max);
    cand.retain(|&m| power[m] > cfg.kappa * peak && power[m] > 0.0);
    if cand.is_empty() {
        let best = (0..n).max_by(|&a, &b| power[a].total_cmp(&power[b])).unwrap_or(0);
        return (vec![best], true);
    }
    cand.sort_by(|&a, &b| power[b].total_cmp(&power[a]).then(a.cmp(&b)));
    let circ = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d)
    };
    let mut chosen: Vec<usize> = Vec::with_capacity(cfg.max_taps);
    for m in cand {
        if chosen.len() == cfg.max_taps {
            break;
        }
        if chosen.iter().all(|&c| circ(c, m) > cfg.exclusion_radius) {
            chosen.push(m);
        }
    }
    (chosen, false)
}

/// Estimates the channel from branch spectrum `z` and symbol-estimate spectrum
/// `s`. `pilot` is the pilot-only spectrum used when `gram_pilot_only` is set.
pub fn estimate_channel(
    z: &[Complex64],
    s: &[Complex64],
    pilot: Option<&[Complex64]>,
    cfg: &EstimatorConfig,
) -> Result<ChannelEstimate> {
    let n = z.len();
    if s.len() != n {
        return Err(Error::Config("spectrum lengths differ".into()));
    }
    let gamma = correlate(z, s);
    let (support, fallback) = select_support(&gamma, cfg);
    let rho = rho(match (cfg.gram_pilot_only, pilot) {
        (true, Some(p)) => p,
        _ => s,
    });
    if rho[0].re <= 0.0 {
        return Err(Error::DegenerateChannel("symbol estimate has no energy".into()));
    }
    let eps = cfg.eps_rel * rho[0].re / n as f64;
    let g = build_gram(&support, &rho, eps);
    let xi: Vec<Complex64> = support.iter().map(|&m| gamma[m] * n as f64).collect();
    let h0 = dcd::initial_step(&xi, rho[0].re + eps);
    let budget = cfg.dcd_max_updates.unwrap_or(8 * 2 * cfg.max_taps);
    let (amps, sol) = dcd::dcd_complex(&g, &xi, h0, cfg.dcd_bits, budget);
    let freq = frequency_response(&support, &amps, n);
    Ok(ChannelEstimate {
        support,
        amps,
        freq,
        fallback,
        dcd_converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::XorShift64Star;
    use nalgebra::DMatrix;

    fn random_symbols(n: usize, len: usize, lead: usize, seed: u64, with_data: bool) -> Vec<Complex64> {
        let mut g = XorShift64Star::new(seed);
        let mut s = vec![Complex64::new(0.0, 0.0); n];
        for v in &mut s[lead..lead + len] {
            let p = if g.next() >> 63 == 0 { 1.0 } else { -1.0 };
            let d = if g.next() >> 63 == 0 { 1.0 } else { -1.0 };
            *v = Complex64::new(p, if with_data { d } else { 0.0 });
        }
        s
    }

    fn apply(s: &[Complex64], taps: &[(i64, Complex64)]) -> Vec<Complex64> {
        let n = s.len() as i64;
        let mut z = vec![Complex64::new(0.0, 0.0); s.len()];
        for &(d, a) in taps {
            for i in 0..n {
                z[((i + d).rem_euclid(n)) as usize] += a * s[i as usize];
            }
        }
        z
    }

    #[test]
    fn recovers_two_tap_channel() {
        let s = random_symbols(1024, 600, 212, 1, false);
        let taps = [(0, Complex64::new(1.0, 0.0)), (10, Complex64::new(0.0, 0.5))];
        let z = apply(&s, &taps);
        let est = estimate_channel(&fft(&z), &fft(&s), None, &EstimatorConfig::default()).unwrap();
        assert_eq!(est.significant_support(1e-2), vec![0, 10]);
        let h = est.impulse_response();
        for &(d, a) in &taps {
            assert!((h[d as usize] - a).norm() < 1e-3, "{:?}", h[d as usize]);
        }
        assert!(est.support.len() <= 30);
    }

    #[test]
    fn weak_tap_below_threshold_is_excluded() {
        let gamma: Vec<Complex64> = (0..64)
            .map(|i| match i {
                0 => Complex64::new(1.0, 0.0),
                5 => Complex64::new(0.01, 0.0),
                60 => Complex64::new(0.5, 0.0),
                _ => Complex64::new(0.0, 0.0),
            })
            .collect();
        let cfg = EstimatorConfig {
            delay_window: 10,
            ..EstimatorConfig::default()
        };
        let (s, fb) = select_support(&gamma, &cfg);
        assert!(!fb);
        assert_eq!(s, vec![0, 60]);
    }

    #[test]
    fn exclusion_radius_skips_neighbours() {
        let gamma: Vec<Complex64> = [1.0, 0.9, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let cfg = EstimatorConfig {
            delay_window: 3,
            exclusion_radius: 1,
            ..EstimatorConfig::default()
        };
        assert_eq!(select_support(&gamma, &cfg).0, vec![0, 3]);
    }

    #[test]
    fn gram_matches_direct_product() {
        let mut g = XorShift64Star::new(4);
        let n = 128;
        let s: Vec<Complex64> = (0..n).map(|_| Complex64::new(g.unit() - 0.5, g.unit() - 0.5)).collect();
        let spec = fft(&s);
        for trial in 0..10 {
            let support: Vec<usize> = (0..(3 + trial)).map(|_| g.below(n as u64) as usize).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            let m = support.len();
            let b = DMatrix::from_fn(n, m, |k, q| {
                spec[k] * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * support[q]) as f64 / n as f64)
            });
            let direct = b.adjoint() * &b;
            let gram = build_gram(&support, &rho(&spec), 0.0);
            let scale = direct[(0, 0)].norm();
            for p in 0..m {
                for q in 0..m {
                    assert!((gram[p * m + q] - direct[(p, q)]).norm() < 1e-9 * scale);
                }
            }
        }
    }

    #[test]
    fn rho_zero_is_spectral_energy() {
        let s = random_symbols(64, 30, 10, 2, true);
        let spec = fft(&s);
        let r = rho(&spec);
        let e: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        assert!((r[0].re - e).abs() < 1e-9 * e);
        assert!(r[0].im.abs() < 1e-9 * e);
    }

    #[test]
    fn known_data_improves_estimate() {
        let mut worse = 0;
        for seed in 0..10u64 {
            let s_full = random_symbols(1024, 600, 212, 10 + seed, true);
            let s_pilot: Vec<Complex64> = s_full.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
            let taps = [
                (0, Complex64::new(0.8, 0.1)),
                (7, Complex64::new(-0.3, 0.4)),
                (-4, Complex64::new(0.2, 0.0)),
            ];
            let z = apply(&s_full, &taps);
            let zf = fft(&z);
            let nmse = |s: &[Complex64]| {
                let est = estimate_channel(&zf, &fft(s), None, &EstimatorConfig::default()).unwrap();
                let h = est.impulse_response();
                let mut truth = vec![Complex64::new(0.0, 0.0); 1024];
                for &(d, a) in &taps {
                    truth[d.rem_euclid(1024) as usize] = a;
                }
                let err: f64 = h.iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum();
                err / truth.iter().map(|v| v.norm_sqr()).sum::<f64>()
            };
            if nmse(&s_full) >= nmse(&s_pilot) {
                worse += 1;
            }
        }
        assert_eq!(worse, 0);
    }

    #[test]
    fn silent_input_falls_back_to_single_tap() {
        let z = vec![Complex64::new(0.0, 0.0); 64];
        let s = random_symbols(64, 20, 10, 3, false);
        let est = estimate_channel(&z, &fft(&s), None, &EstimatorConfig::default()).unwrap();
        assert!(est.fallback);
        assert_eq!(est.support.len(), 1);
    }
}
