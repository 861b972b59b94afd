//! Receiver orchestration: detection sweep, per-segment turbo loops, packet
//! IC rounds inside overlapping segments and signal IC rounds on the stream.

use super::regen::{regenerate, RegenConfig, RegeneratedPacket};
use crate::codec::CodecConfig;
use crate::rx::detect::{segment_origin, sweep, Detection, DetectorConfig, PilotBank};
use crate::rx::turbo::{IterationDiag, SegmentOutcome, TurboConfig, TurboReceiver};
use crate::rx::BasebandSignal;
use crate::tx::Transmitter;
use crate::{Execution, ModemParams, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IcConfig {
    /// Packet IC rounds `I2` (1 disables packet IC).
    pub packet_rounds: usize,
    /// Signal IC rounds `I3` (1 disables signal IC).
    pub signal_rounds: usize,
    /// Neighbours are cancelled inside a segment only above this SNR (dB).
    pub snr_gate_db: f64,
    /// Additionally require a CRC pass for packet IC.
    pub packet_ic_requires_crc: bool,
    pub regen: RegenConfig,
}

impl Default for IcConfig {
    fn default() -> Self {
        Self {
            packet_rounds: 2,
            signal_rounds: 2,
            snr_gate_db: 0.0,
            packet_ic_requires_crc: false,
            regen: RegenConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReceiverConfig {
    /// User ids searched for.
    pub users: Vec<u32>,
    pub detector: DetectorConfig,
    pub turbo: TurboConfig,
    pub ic: IcConfig,
    pub execution: Execution,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            users: vec![1, 2, 3],
            detector: DetectorConfig::default(),
            turbo: TurboConfig::default(),
            ic: IcConfig::default(),
            execution: Execution::default(),
        }
    }
}

/// Final decision on one detected packet.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub user: u32,
    /// Baseband index of the estimated first-symbol peak.
    pub start: i64,
    /// Arrival time of the first symbol (s).
    pub time_s: f64,
    pub payload: Vec<u8>,
    pub crc_ok: bool,
    pub snr_mrc_db: f64,
    pub a1: f64,
    pub iterations: usize,
    pub decoded_at_i2: Option<usize>,
    pub decoded_at_i3: Option<usize>,
}

/// Per-segment processing record for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLog {
    pub i3: usize,
    pub i2: usize,
    pub user: u32,
    pub start: i64,
    pub crc_ok: bool,
    pub snr_mrc_db: f64,
    pub diags: Vec<IterationDiag>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOutput {
    /// Deduplicated verdicts sorted by time.
    pub verdicts: Vec<Verdict>,
    /// Detections returned by each sweep (before filtering known packets).
    pub detections_per_round: Vec<usize>,
    /// Segments processed in each signal IC round.
    pub segments_per_round: Vec<usize>,
    pub log: Vec<SegmentLog>,
}

/// The complete receiver.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub tx: Transmitter,
    pub cfg: ReceiverConfig,
    bank: PilotBank,
    turbo: TurboReceiver,
}

impl Pipeline {
    pub fn new(params: &ModemParams, codec: &CodecConfig, cfg: ReceiverConfig) -> Result<Self> {
        let tx = Transmitter::new(params.clone(), codec.clone())?;
        let bank = PilotBank::new(&cfg.users, params)?;
        let turbo = TurboReceiver::new(tx.clone(), cfg.turbo.clone());
        Ok(Self { tx, cfg, bank, turbo })
    }

    pub fn params(&self) -> &ModemParams {
        self.tx.params()
    }

    /// Runs detection, turbo decoding and both IC loops. `rb` is modified by
    /// signal IC.
    pub fn run(&self, rb: &mut BasebandSignal) -> Result<PipelineOutput> {
        let p = self.params().clone();
        let exec = self.cfg.execution;
        let ic = &self.cfg.ic;
        let i2_max = ic.packet_rounds.max(1);
        let i3_max = ic.signal_rounds.max(1);
        let half = p.n_symbols as i64;
        let mut out = PipelineOutput::default();
        let mut decoded: Vec<Verdict> = Vec::new();
        let mut pending: Vec<RegeneratedPacket> = Vec::new();
        let mut failed: Vec<Verdict> = Vec::new();

        for i3 in 1..=i3_max {
            if i3 > 1 {
                if pending.is_empty() {
                    break;
                }
                for r in pending.drain(..) {
                    rb.subtract(segment_origin(r.start, &p), &r.r_hat);
                }
            }
            let found = sweep(rb, &self.bank, &self.cfg.detector, &p, exec);
            out.detections_per_round.push(found.len());
            let dets: Vec<Detection> = found
                .into_iter()
                .filter(|d| !decoded.iter().any(|v| v.user == d.user && (v.start - d.start).abs() <= half))
                .collect();
            out.segments_per_round.push(dets.len());

            let mut segs: Vec<Vec<Complex64>> = dets.iter().map(|d| d.segment.clone()).collect();
            let mut outcomes: Vec<Option<SegmentOutcome>> = vec![None; dets.len()];
            let mut regens: Vec<Option<RegeneratedPacket>> = vec![None; dets.len()];
            let mut first_pass: Vec<Option<usize>> = vec![None; dets.len()];
            for i2 in 1..=i2_max {
                if i2 > 1 {
                    segs = self.packet_ic_segments(&dets, &outcomes, &regens);
                }
                // Packets that passed CRC in an earlier round are final.
                let done: Vec<bool> = outcomes.iter().map(|o| o.as_ref().is_some_and(|o| o.crc_ok)).collect();
                let prev_outcomes = std::mem::take(&mut outcomes);
                outcomes = exec.map_range(dets.len(), |i| {
                    if done[i] {
                        return prev_outcomes[i].clone();
                    }
                    self.turbo.process(&segs[i], dets[i].user, dets[i].a1_init).ok()
                });
                let need_packet = i2 < i2_max;
                let need_signal = i3 < i3_max;
                let prev_regens = std::mem::take(&mut regens);
                regens = exec.map_range(dets.len(), |i| {
                    let o = outcomes[i].as_ref()?;
                    let useful = (need_packet && self.packet_gate(o)) || (need_signal && o.crc_ok);
                    if !useful {
                        return None;
                    }
                    if done[i] {
                        if let Some(r) = &prev_regens[i] {
                            return Some(r.clone());
                        }
                    }
                    regenerate(&segs[i], &o.payload, o.user, dets[i].start, o.a1, &self.tx, &ic.regen).ok()
                });
                for (i, o) in outcomes.iter().enumerate() {
                    if done[i] {
                        continue;
                    }
                    if let Some(o) = o {
                        if o.crc_ok && first_pass[i].is_none() {
                            first_pass[i] = Some(i2);
                        }
                        out.log.push(SegmentLog {
                            i3,
                            i2,
                            user: o.user,
                            start: dets[i].start,
                            crc_ok: o.crc_ok,
                            snr_mrc_db: o.snr_mrc_db,
                            diags: o.diags.clone(),
                        });
                    }
                }
            }

            failed.clear();
            for (i, o) in outcomes.into_iter().enumerate() {
                let Some(o) = o else { continue };
                let v = Verdict {
                    user: o.user,
                    start: dets[i].start,
                    time_s: rb.passband_index(dets[i].start as f64) / p.sample_rate,
                    payload: o.payload,
                    crc_ok: o.crc_ok,
                    snr_mrc_db: o.snr_mrc_db,
                    a1: o.a1,
                    iterations: o.iterations,
                    decoded_at_i2: first_pass[i],
                    decoded_at_i3: o.crc_ok.then_some(i3),
                };
                if v.crc_ok {
                    if let Some(r) = regens[i].take() {
                        pending.push(r);
                    }
                    decoded.push(v);
                } else {
                    failed.push(v);
                }
            }
        }
        decoded.extend(failed);
        out.verdicts = dedup(decoded, half);
        Ok(out)
    }

    fn packet_gate(&self, o: &SegmentOutcome) -> bool {
        o.snr_mrc_db > self.cfg.ic.snr_gate_db && (o.crc_ok || !self.cfg.ic.packet_ic_requires_crc)
    }

    /// Segments with the previous round's regenerated neighbours removed.
    fn packet_ic_segments(
        &self,
        dets: &[Detection],
        outcomes: &[Option<SegmentOutcome>],
        regens: &[Option<RegeneratedPacket>],
    ) -> Vec<Vec<Complex64>> {
        let p = self.params();
        let seg_len = p.segment_len() as i64;
        let same_user_span = 2 * p.n_symbols as i64;
        let mut order: Vec<usize> = (0..dets.len())
            .filter(|&i| regens[i].is_some() && outcomes[i].as_ref().is_some_and(|o| self.packet_gate(o)))
            .collect();
        order.sort_by(|&a, &b| {
            let sa = outcomes[a].as_ref().map_or(f64::NEG_INFINITY, |o| o.snr_mrc_db);
            let sb = outcomes[b].as_ref().map_or(f64::NEG_INFINITY, |o| o.snr_mrc_db);
            sb.total_cmp(&sa).then(a.cmp(&b))
        });
        self.cfg.execution.map_range(dets.len(), |g| {
            let mut seg = dets[g].segment.clone();
            let og = dets[g].segment_origin(p);
            for &v in &order {
                if v == g {
                    continue;
                }
                let d = dets[v].segment_origin(p) - og;
                if d.abs() >= seg_len {
                    continue;
                }
                if dets[v].user == dets[g].user && (dets[v].start - dets[g].start).abs() < same_user_span {
                    continue;
                }
                let r = regens[v].as_ref().expect("filtered");
                for (k, x) in r.r_hat.iter().enumerate() {
                    let n = k as i64 + d;
                    if n >= 0 && n < seg_len {
                        seg[n as usize] -= x;
                    }
                }
            }
            seg
        })
    }
}

/// Keeps one verdict per (user, start within `radius` samples): a CRC pass
/// with the highest SNR if any, otherwise the highest SNR.
pub fn dedup(mut verdicts: Vec<Verdict>, radius: i64) -> Vec<Verdict> {
    verdicts.sort_by(|a, b| a.user.cmp(&b.user).then(a.start.cmp(&b.start)));
    let mut out: Vec<Verdict> = Vec::new();
    for v in verdicts {
        match out.last_mut() {
            Some(last) if last.user == v.user && (v.start - last.start).abs() <= radius => {
                let better = (v.crc_ok, v.snr_mrc_db) > (last.crc_ok, last.snr_mrc_db);
                if better {
                    *last = v;
                }
            }
            _ => out.push(v),
        }
    }
    out.sort_by(|a, b| a.start.cmp(&b.start).then(a.user.cmp(&b.user)));
    out
}
