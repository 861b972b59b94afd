//! Frame error rate scoring against the ground-truth log.

use crate::channel::GroundTruth;
use crate::ic::Verdict;
use crate::ModemParams;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserScore {
    pub user: u32,
    pub total: usize,
    pub received: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Score {
    pub total: usize,
    pub received: usize,
    /// CRC-passing verdicts near a transmitted packet of the same user whose
    /// payload matches none of them.
    pub undetected_errors: usize,
    /// CRC-passing verdicts with no transmitted packet of that user nearby.
    pub spurious: usize,
    pub per_user: Vec<UserScore>,
}

impl Score {
    pub fn lost(&self) -> usize {
        self.total - self.received
    }

    /// Lost packets over transmitted packets.
    pub fn fer(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.lost() as f64 / self.total as f64
        }
    }
}

/// Baseband index of a truth packet's first symbol.
pub fn truth_start(t: &GroundTruth, p: &ModemParams) -> f64 {
    ((t.t_rx * p.sample_rate).round() - p.rrc_half_len as f64) / p.decimation() as f64
}

/// A packet is received when a CRC-passing verdict of the same user starts
/// within half a packet of the truth and carries the same payload.
pub fn score(verdicts: &[Verdict], truth: &[GroundTruth], p: &ModemParams) -> Score {
    let window = p.n_symbols as f64; // baseband samples = N/2 symbols
    let mut s = Score {
        total: truth.len(),
        ..Score::default()
    };
    let mut users: Vec<u32> = truth.iter().map(|t| t.user).collect();
    users.sort_unstable();
    users.dedup();
    s.per_user = users
        .iter()
        .map(|&user| UserScore {
            user,
            total: truth.iter().filter(|t| t.user == user).count(),
            received: 0,
        })
        .collect();
    let near = |v: &Verdict, t: &GroundTruth| v.user == t.user && (v.start as f64 - truth_start(t, p)).abs() <= window;
    for t in truth {
        let got = verdicts.iter().any(|v| v.crc_ok && near(v, t) && v.payload == t.payload);
        if got {
            s.received += 1;
            if let Some(u) = s.per_user.iter_mut().find(|u| u.user == t.user) {
                u.received += 1;
            }
        }
    }
    for v in verdicts.iter().filter(|v| v.crc_ok) {
        let mut close = truth.iter().filter(|t| near(v, t)).peekable();
        if close.peek().is_none() {
            s.spurious += 1;
        } else if !close.any(|t| t.payload == v.payload) {
            s.undetected_errors += 1;
        }
    }
    s
}
