//! Complex demodulation to baseband at two samples per symbol.

use crate::channel::RealizedScenario;
use crate::dsp::RrcFilter;
use crate::{Execution, ModemParams, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Random-access source of passband samples.
pub trait PassbandSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Fills `out` with samples `[start, start + out.len())`; zero past the end.
    fn fill(&self, start: usize, out: &mut [f64]) -> Result<()>;
}

impl PassbandSource for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    fn fill(&self, start: usize, out: &mut [f64]) -> Result<()> {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.get(start + i).copied().unwrap_or(0.0);
        }
        Ok(())
    }
}

impl PassbandSource for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn fill(&self, start: usize, out: &mut [f64]) -> Result<()> {
        self.as_slice().fill(start, out)
    }
}

impl PassbandSource for RealizedScenario {
    fn len(&self) -> usize {
        self.total_samples
    }

    fn fill(&self, start: usize, out: &mut [f64]) -> Result<()> {
        let n = out.len().min(self.total_samples.saturating_sub(start));
        self.render_into(start, &mut out[..n], true, None)?;
        out[n..].iter_mut().for_each(|v| *v = 0.0);
        Ok(())
    }
}

/// Baseband signal `r_B(n)`; sample `n` is centred on passband sample
/// `n * decimation + rrc_half_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    pub samples: Vec<Complex64>,
    pub decimation: usize,
    pub half_len: usize,
}

impl BasebandSignal {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Passband sample index at the centre of baseband sample `n`.
    pub fn passband_index(&self, n: f64) -> f64 {
        n * self.decimation as f64 + self.half_len as f64
    }

    /// Baseband index whose centre is passband sample `i`.
    pub fn baseband_index(&self, i: f64) -> f64 {
        (i - self.half_len as f64) / self.decimation as f64
    }

    /// Copies `len` samples starting at `start` (may be negative); reports
    /// whether any part fell outside the signal.
    pub fn extract(&self, start: i64, len: usize) -> (Vec<Complex64>, bool) {
        let mut truncated = false;
        let out = (0..len as i64)
            .map(|k| {
                let i = start + k;
                if i < 0 || i as usize >= self.samples.len() {
                    truncated = true;
                    Complex64::new(0.0, 0.0)
                } else {
                    self.samples[i as usize]
                }
            })
            .collect();
        (out, truncated)
    }

    /// `r_B(start + k) -= x(k)` over the part inside the signal.
    pub fn subtract(&mut self, start: i64, x: &[Complex64]) {
        for (k, v) in x.iter().enumerate() {
            let i = start + k as i64;
            if i >= 0 && (i as usize) < self.samples.len() {
                self.samples[i as usize] -= v;
            }
        }
    }
}

/// Mixer and matched filter: `r_B(n) = sum_i g(i) x(nK + i)` with
/// `x(m) = r(m) exp(-j 2 pi fc m / fs)`.
#[derive(Debug, Clone)]
pub struct Demodulator {
    params: ModemParams,
    rrc: RrcFilter,
}

/// Baseband samples produced per work item.
const CHUNK: usize = 1 << 14;

impl Demodulator {
    pub fn new(params: &ModemParams) -> Self {
        Self {
            rrc: RrcFilter::from_params(params),
            params: params.clone(),
        }
    }

    fn mixer(&self, m: usize) -> Complex64 {
        // Phase reduced exactly in rational arithmetic when fc/fs is rational.
        let ratio = self.params.carrier_hz / self.params.sample_rate;
        let cycles = (m as f64 * ratio).fract();
        Complex64::from_polar(1.0, -2.0 * PI * cycles)
    }

    fn block(&self, src: &(impl PassbandSource + ?Sized), n0: usize, count: usize) -> Result<Vec<Complex64>> {
        let k = self.params.decimation();
        let taps = self.rrc.taps();
        let span = (count.max(1) - 1) * k + taps.len();
        let mut buf = vec![0.0; span];
        src.fill(n0 * k, &mut buf)?;
        let mixed: Vec<Complex64> = buf
            .iter()
            .enumerate()
            .map(|(i, &v)| self.mixer(n0 * k + i) * v)
            .collect();
        Ok((0..count)
            .map(|n| {
                let seg = &mixed[n * k..n * k + taps.len()];
                seg.iter().zip(taps).map(|(x, g)| x * g).sum()
            })
            .collect())
    }

    /// Demodulates a whole source.
    pub fn demodulate(&self, src: &(impl PassbandSource + ?Sized), exec: Execution) -> Result<BasebandSignal> {
        let n_out = src.len().div_ceil(self.params.decimation());
        let chunks = n_out.div_ceil(CHUNK);
        let parts = exec.map_range(chunks, |c| {
            let n0 = c * CHUNK;
            self.block(src, n0, CHUNK.min(n_out - n0))
        });
        let mut samples = Vec::with_capacity(n_out);
        for p in parts {
            samples.extend(p?);
        }
        Ok(BasebandSignal {
            samples,
            decimation: self.params.decimation(),
            half_len: self.rrc.half_len,
        })
    }
}

pub fn demodulate(sig: &[f64], params: &ModemParams) -> BasebandSignal {
    Demodulator::new(params)
        .demodulate(sig, Execution::Sequential)
        .expect("slice sources cannot fail")
}
