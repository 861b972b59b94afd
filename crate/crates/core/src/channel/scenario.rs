//! Asynchronous multiuser scenarios: burst schedules with clock skew, per-user
//! channels, and the block-wise renderer of the received passband signal.

use super::{apply_channel, noise_variance, ChannelRealization, ImpulseConfig, Tap};
use crate::codec::CodecConfig;
use crate::rng::XorShift64Star;
use crate::tx::Transmitter;
use crate::{Error, ModemParams, Result};
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Noise is generated in fixed blocks so that any sample range renders identically.
pub const NOISE_BLOCK: usize = 1 << 16;

const STREAM_SKEW: u64 = 0x5CE0_0000;
const STREAM_CHANNEL: u64 = 0xC4A0_0000;
const STREAM_PAYLOAD: u64 = 0x9A71_0000_0000;
const STREAM_NOISE: u64 = 0x0153_0000_0000;
const STREAM_IMPULSE: u64 = 0x1A9B_0000_0000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapConfig {
    pub delay_s: f64,
    pub gain: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

/// Random sparse channel: a unit direct path plus `count - 1` later arrivals
/// with exponentially decaying power; normalised to unit energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomTaps {
    pub count: usize,
    pub max_delay_s: f64,
    pub decay_s: f64,
}

impl RandomTaps {
    pub fn draw(&self, rng: &mut XorShift64Star) -> Vec<Tap> {
        let mut taps = vec![Tap::new(0.0, Complex64::new(1.0, 0.0))];
        for _ in 1..self.count.max(1) {
            let delay = (1.0 + rng.unit() * (self.max_delay_s * 192_000.0 - 1.0)).round() / 192_000.0;
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let scale = (-delay / self.decay_s).exp() * 0.5;
            taps.push(Tap::new(delay, Complex64::new(re, im) * scale * std::f64::consts::FRAC_1_SQRT_2));
        }
        normalize(&mut taps);
        taps
    }
}

fn normalize(taps: &mut [Tap]) {
    let e: f64 = taps.iter().map(|t| t.amplitude.norm_sqr()).sum();
    if e > 0.0 {
        let s = 1.0 / e.sqrt();
        taps.iter_mut().for_each(|t| t.amplitude *= s);
    }
}

/// One transmitter entry. Entries sharing an `id` share the user's clock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub id: u32,
    #[serde(default = "default_burst")]
    pub packets_per_burst: usize,
    pub packet_period_s: f64,
    #[serde(default)]
    pub burst_offset_s: f64,
    #[serde(default)]
    pub gain_db: f64,
    #[serde(default)]
    pub velocity_mps: f64,
    #[serde(default)]
    pub propagation_delay_s: f64,
    #[serde(default)]
    pub taps: Vec<TapConfig>,
    #[serde(default)]
    pub random_taps: Option<RandomTaps>,
}

fn default_burst() -> usize {
    3
}

fn default_period() -> f64 {
    8.0
}

/// Scenario description, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration_s: f64,
    #[serde(default = "default_period")]
    pub burst_period_s: f64,
    /// Maximum relative clock error; each user draws uniformly in +-clock_skew.
    #[serde(default)]
    pub clock_skew: f64,
    #[serde(default)]
    pub master_seed: u64,
    /// In-band SNR of a unit-gain, unit-energy user; absent means noiseless.
    #[serde(default)]
    pub noise_snr_db: Option<f64>,
    #[serde(default)]
    pub impulse: Option<ImpulseConfig>,
    #[serde(rename = "user")]
    pub users: Vec<UserConfig>,
}

impl Scenario {
    /// Three users, bursts of three packets every 8 s with packet periods of
    /// 0.4, 1.2 and 2.8 s, 1 % clock accuracy, unequal received powers.
    pub fn default_three_user(duration_s: f64, seed: u64) -> Self {
        let rt = |count, max_delay_s, decay_s| {
            Some(RandomTaps {
                count,
                max_delay_s,
                decay_s,
            })
        };
        let user = |id, period, offset, gain_db, v, dist: f64, taps| UserConfig {
            id,
            packets_per_burst: 3,
            packet_period_s: period,
            burst_offset_s: offset,
            gain_db,
            velocity_mps: v,
            propagation_delay_s: dist / crate::params::SOUND_SPEED,
            taps: vec![],
            random_taps: taps,
        };
        Self {
            duration_s,
            burst_period_s: 8.0,
            clock_skew: 0.01,
            master_seed: seed,
            noise_snr_db: Some(30.0),
            impulse: None,
            users: vec![
                user(1, 0.4, 1.0, 0.0, 0.05, 4.9, rt(8, 0.012, 0.004)),
                user(2, 1.2, 1.35, -8.0, -0.1, 11.0, rt(10, 0.015, 0.005)),
                user(3, 2.8, 1.75, -5.0, 0.15, 15.7, rt(10, 0.015, 0.005)),
            ],
        }
    }

    /// Doubles the traffic: every entry gets a copy delayed by `delay_s` through
    /// an independent channel of comparable power.
    pub fn doubled(&self, delay_s: f64) -> Self {
        let mut out = self.clone();
        for u in &self.users {
            let mut c = u.clone();
            c.burst_offset_s += delay_s;
            c.gain_db = -4.0;
            c.random_taps = Some(RandomTaps {
                count: 12,
                max_delay_s: 0.02,
                decay_s: 0.007,
            });
            c.taps.clear();
            out.users.push(c);
        }
        out
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map(|s| line_col(text, s.start))
                .unwrap_or((0, 0));
            Error::ScenarioParse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0) || !(self.burst_period_s > 0.0) {
            return Err(Error::Scenario("duration and burst period must be positive".into()));
        }
        if !(0.0..0.1).contains(&self.clock_skew) {
            return Err(Error::Scenario("clock_skew must be in [0, 0.1)".into()));
        }
        if self.users.is_empty() {
            return Err(Error::Scenario("scenario has no users".into()));
        }
        for u in &self.users {
            if u.id == 0 || u.id > crate::codec::gold::MAX_USERS {
                return Err(Error::Scenario(format!("user id {} out of range", u.id)));
            }
            if !u.taps.is_empty() && u.random_taps.is_some() {
                return Err(Error::Scenario(format!(
                    "user {}: give either taps or random_taps, not both",
                    u.id
                )));
            }
            if u.packets_per_burst == 0 || u.packet_period_s < 0.0 {
                return Err(Error::Scenario(format!("user {}: bad burst pattern", u.id)));
            }
        }
        Ok(())
    }

    /// Utilisation implied by the burst pattern: packets per period times
    /// packet duration over the period.
    pub fn nominal_utilization(&self, params: &ModemParams) -> f64 {
        let per_period: usize = self.users.iter().map(|u| u.packets_per_burst).sum();
        per_period as f64 * params.packet_duration() / self.burst_period_s
    }

    pub fn realize(&self, params: &ModemParams, codec: &CodecConfig) -> Result<RealizedScenario> {
        self.validate()?;
        let tx = Transmitter::new(params.clone(), codec.clone())?;
        let mut entries = Vec::with_capacity(self.users.len());
        for (k, u) in self.users.iter().enumerate() {
            let mut rng = XorShift64Star::derived(self.master_seed, STREAM_CHANNEL + k as u64);
            let taps = match &u.random_taps {
                Some(rt) => rt.draw(&mut rng),
                None if u.taps.is_empty() => vec![Tap::new(0.0, Complex64::new(1.0, 0.0))],
                None => u
                    .taps
                    .iter()
                    .map(|t| Tap::new(t.delay_s, Complex64::from_polar(t.gain, t.phase_deg * PI / 180.0)))
                    .collect(),
            };
            let channel = ChannelRealization::with_velocity(taps, u.velocity_mps);
            channel.validate()?;
            let mut skew_rng = XorShift64Star::derived(self.master_seed, STREAM_SKEW + u.id as u64);
            let clock = 1.0 + self.clock_skew * (2.0 * skew_rng.unit() - 1.0);
            entries.push(Entry {
                user: u.id,
                channel,
                amplitude: 10f64.powf(u.gain_db / 20.0),
                clock,
            });
        }

        let tp = params.packet_duration();
        let tail = (params.rrc_half_len as f64 + 64.0) / params.sample_rate;
        let mut transmissions = Vec::new();
        for (k, (u, e)) in self.users.iter().zip(&entries).enumerate() {
            let mut burst = 0usize;
            loop {
                let start = u.burst_offset_s + burst as f64 * self.burst_period_s;
                if e.clock * start > self.duration_s {
                    break;
                }
                for j in 0..u.packets_per_burst {
                    let t_tx = e.clock * (start + j as f64 * u.packet_period_s);
                    let t_rx = t_tx + u.propagation_delay_s;
                    if t_tx < 0.0 || t_rx + tp + e.channel.max_delay() + tail > self.duration_s {
                        continue;
                    }
                    let index = transmissions.len();
                    let mut prng = XorShift64Star::derived(
                        self.master_seed,
                        STREAM_PAYLOAD + ((k as u64) << 24) + (burst * u.packets_per_burst + j) as u64,
                    );
                    let payload = (0..codec.payload_bits).map(|_| (prng.next() >> 63) as u8).collect();
                    transmissions.push(Transmission {
                        index,
                        entry: k,
                        user: u.id,
                        t_tx,
                        t_rx,
                        payload,
                    });
                }
                burst += 1;
            }
        }
        transmissions.sort_by(|a, b| a.t_rx.total_cmp(&b.t_rx).then(a.entry.cmp(&b.entry)));
        for (i, t) in transmissions.iter_mut().enumerate() {
            t.index = i;
        }

        let noise_sigma = self
            .noise_snr_db
            .map(|snr| noise_variance(tx.reference_power(), snr, params).sqrt());
        Ok(RealizedScenario {
            total_samples: (self.duration_s * params.sample_rate).round() as usize,
            params: params.clone(),
            tx,
            entries,
            transmissions,
            noise_sigma,
            impulse: self.impulse,
            master_seed: self.master_seed,
            duration_s: self.duration_s,
        })
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub user: u32,
    pub channel: ChannelRealization,
    /// Linear amplitude gain applied on top of the channel.
    pub amplitude: f64,
    /// Clock rate factor of the user (1 +- skew).
    pub clock: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub index: usize,
    pub entry: usize,
    pub user: u32,
    pub t_tx: f64,
    /// Arrival time of the first symbol through the zero-delay path.
    pub t_rx: f64,
    pub payload: Vec<u8>,
}

/// One row of the ground-truth log.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub user: u32,
    pub t_tx: f64,
    pub t_rx: f64,
    pub payload: Vec<u8>,
}

/// A scenario with schedules, channels and payloads drawn.
#[derive(Debug, Clone)]
pub struct RealizedScenario {
    pub params: ModemParams,
    pub tx: Transmitter,
    pub entries: Vec<Entry>,
    pub transmissions: Vec<Transmission>,
    pub noise_sigma: Option<f64>,
    pub impulse: Option<ImpulseConfig>,
    pub master_seed: u64,
    pub duration_s: f64,
    pub total_samples: usize,
}

impl RealizedScenario {
    pub fn ground_truth(&self) -> Vec<GroundTruth> {
        self.transmissions
            .iter()
            .map(|t| GroundTruth {
                user: t.user,
                t_tx: t.t_tx,
                t_rx: t.t_rx,
                payload: t.payload.clone(),
            })
            .collect()
    }

    /// Fraction of time occupied by packets, summed over all transmissions.
    pub fn utilization(&self) -> f64 {
        self.transmissions.len() as f64 * self.params.packet_duration() / self.duration_s
    }

    /// In-band SNR of each entry (dB); infinite when noiseless.
    pub fn entry_snr_db(&self) -> Vec<f64> {
        let pref = self.tx.reference_power();
        self.entries
            .iter()
            .map(|e| match self.noise_sigma {
                Some(s) => {
                    let p = pref * e.amplitude.powi(2) * e.channel.energy();
                    let n = s * s * self.params.occupied_bandwidth() / (self.params.sample_rate / 2.0);
                    10.0 * (p / n).log10()
                }
                None => f64::INFINITY,
            })
            .collect()
    }

    /// Received waveform of one transmission and the absolute index of its first sample.
    pub fn received_packet(&self, t: &Transmission) -> Result<(i64, Vec<f64>)> {
        let e = &self.entries[t.entry];
        let frame = self.tx.build_frame(&t.payload, t.user)?;
        let pkt = self.tx.modulate(&frame);
        let mut y = apply_channel(&pkt, &e.channel, &self.params)?;
        y.iter_mut().for_each(|v| *v *= e.amplitude);
        let first = (t.t_rx * self.params.sample_rate).round() as i64 - pkt.lead as i64;
        Ok((first, y))
    }

    fn packet_span(&self, t: &Transmission) -> (i64, i64) {
        let e = &self.entries[t.entry];
        let fs = self.params.sample_rate;
        let lead = self.params.rrc_half_len as i64;
        let first = (t.t_rx * fs).round() as i64 - lead;
        let len = (self.params.packet_duration() * fs) as i64
            + 2 * lead
            + (e.channel.max_delay() * fs).ceil() as i64
            + ((e.channel.a1 - 1.0).abs() * 30_000.0).ceil() as i64
            + 8;
        (first, first + len)
    }

    /// Renders samples `[start, start + out.len())` of the received signal.
    ///
    /// `only` restricts the sum to the listed transmission indices and
    /// `with_noise` toggles the noise and impulse processes.
    pub fn render_into(
        &self,
        start: usize,
        out: &mut [f64],
        with_noise: bool,
        only: Option<&[usize]>,
    ) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        let lo = start as i64;
        let hi = lo + out.len() as i64;
        let selected: Box<dyn Iterator<Item = &Transmission>> = match only {
            Some(idx) => Box::new(idx.iter().map(|&i| &self.transmissions[i])),
            None => Box::new(self.transmissions.iter()),
        };
        for t in selected {
            let (a, b) = self.packet_span(t);
            if b <= lo || a >= hi {
                continue;
            }
            let (first, y) = self.received_packet(t)?;
            for (i, v) in y.iter().enumerate() {
                let idx = first + i as i64;
                if idx >= lo && idx < hi {
                    out[(idx - lo) as usize] += v;
                }
            }
        }
        if with_noise && (self.noise_sigma.is_some() || self.impulse.is_some()) {
            let first_block = start / NOISE_BLOCK;
            let last_block = (start + out.len()).div_ceil(NOISE_BLOCK);
            for b in first_block..last_block {
                let block = self.noise_block(b);
                let b0 = b * NOISE_BLOCK;
                let from = start.max(b0);
                let to = (start + out.len()).min(b0 + NOISE_BLOCK);
                for i in from..to {
                    out[i - start] += block[i - b0];
                }
            }
        }
        Ok(())
    }

    fn noise_block(&self, b: usize) -> Vec<f64> {
        let mut block = match self.noise_sigma {
            Some(s) => super::gaussian_noise(
                NOISE_BLOCK,
                s,
                crate::rng::mix(self.master_seed ^ (STREAM_NOISE + b as u64)),
            ),
            None => vec![0.0; NOISE_BLOCK],
        };
        if let Some(imp) = self.impulse {
            block = super::impulse_interference(
                &block,
                imp,
                crate::rng::mix(self.master_seed ^ (STREAM_IMPULSE + b as u64)),
                &self.params,
            )
            .0;
        }
        block
    }

    /// The whole received signal.
    pub fn render(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.total_samples];
        self.render_into(0, &mut out, true, None)?;
        Ok(out)
    }
}
