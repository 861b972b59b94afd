//! CSV row types for verdict logs, turbo diagnostics, CAF dumps and scores.

use super::score::Score;
use crate::ic::{SegmentLog, Verdict};
use crate::io::payload_to_hex;
use crate::rx::detect::{passes_neighbour_test, passes_peak_test, stat_start, WindowStat};
use crate::rx::DetectorConfig;
use crate::ModemParams;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRow {
    pub user: u32,
    pub start: i64,
    pub time_s: f64,
    pub crc_ok: bool,
    pub snr_mrc_db: f64,
    pub a1: f64,
    pub iterations: usize,
    pub decoded_at_i2: Option<usize>,
    pub decoded_at_i3: Option<usize>,
    pub payload_hex: String,
}

pub fn verdict_rows(verdicts: &[Verdict]) -> Vec<VerdictRow> {
    verdicts
        .iter()
        .map(|v| VerdictRow {
            user: v.user,
            start: v.start,
            time_s: v.time_s,
            crc_ok: v.crc_ok,
            snr_mrc_db: v.snr_mrc_db,
            a1: v.a1,
            iterations: v.iterations,
            decoded_at_i2: v.decoded_at_i2,
            decoded_at_i3: v.decoded_at_i3,
            payload_hex: payload_to_hex(&v.payload),
        })
        .collect()
}

/// One turbo iteration of one segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagRow {
    pub i3: usize,
    pub i2: usize,
    pub user: u32,
    pub start: i64,
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

pub fn diag_rows(log: &[SegmentLog]) -> Vec<DiagRow> {
    log.iter()
        .flat_map(|l| {
            l.diags.iter().map(move |d| DiagRow {
                i3: l.i3,
                i2: l.i2,
                user: l.user,
                start: l.start,
                iteration: d.iteration,
                snr_mrc_db: d.snr_mrc_db,
                snr_branch0_db: d.snr_branch0_db,
                snr_branch1_db: d.snr_branch1_db,
                weight0: d.weight0,
                support0: d.support0,
                support1: d.support1,
                a1: d.a1,
                crc_ok: d.crc_ok,
            })
        })
        .collect()
}

/// CAF summary of one window and user with both detection tests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CafRow {
    pub q: usize,
    pub user: u32,
    pub phase: usize,
    pub tau: usize,
    pub f_bin: i32,
    pub f_offset: f64,
    pub peak: f64,
    pub off_peak: f64,
    pub start: i64,
    pub neighbour_test: bool,
    pub peak_test: bool,
}

pub fn caf_rows(stats: &[Vec<WindowStat>], cfg: &DetectorConfig, p: &ModemParams) -> Vec<CafRow> {
    let mut rows = Vec::new();
    for (q, per_user) in stats.iter().enumerate() {
        for (ui, st) in per_user.iter().enumerate() {
            rows.push(CafRow {
                q,
                user: st.user,
                phase: st.phase,
                tau: st.tau,
                f_bin: st.f_bin,
                f_offset: st.f_offset,
                peak: st.peak,
                off_peak: st.off_peak,
                start: stat_start(st, p),
                neighbour_test: passes_neighbour_test(stats, q, ui, cfg.compare_offset),
                peak_test: passes_peak_test(st, cfg, p),
            });
        }
    }
    rows
}

/// Score summary; `user` is `all` for the total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub user: String,
    pub total: usize,
    pub received: usize,
    pub lost: usize,
    pub fer: f64,
}

pub fn score_rows(s: &Score) -> Vec<ScoreRow> {
    let mut rows = vec![ScoreRow {
        user: "all".into(),
        total: s.total,
        received: s.received,
        lost: s.lost(),
        fer: s.fer(),
    }];
    for u in &s.per_user {
        let lost = u.total - u.received;
        rows.push(ScoreRow {
            user: u.user.to_string(),
            total: u.total,
            received: u.received,
            lost,
            fer: if u.total == 0 { 0.0 } else { lost as f64 / u.total as f64 },
        });
    }
    rows
}
