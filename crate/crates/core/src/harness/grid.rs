//! FER grids over packet-IC depth, signal-IC depth and equalizer.

use super::score::{score, Score};
use super::to_baseband;
use crate::channel::RealizedScenario;
use crate::ic::{Pipeline, ReceiverConfig};
use crate::rx::EqMode;
use crate::Result;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub i2_max: usize,
    pub i3_max: usize,
    pub modes: Vec<EqMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub mode: EqMode,
    pub i2: usize,
    pub i3: usize,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub seed: u64,
    pub packets: usize,
    pub utilization: f64,
    pub cells: Vec<GridCell>,
}

/// Runs the receiver for every `(mode, I2, I3)` cell on the same received signal.
pub fn run_grid(sc: &RealizedScenario, base: &ReceiverConfig, spec: &GridSpec) -> Result<GridReport> {
    let rb = to_baseband(sc, &sc.params, base)?;
    let truth = sc.ground_truth();
    let mut cells = Vec::new();
    for &mode in &spec.modes {
        for i2 in 1..=spec.i2_max {
            for i3 in 1..=spec.i3_max {
                let mut cfg = base.clone();
                cfg.turbo.mode = mode;
                cfg.ic.packet_rounds = i2;
                cfg.ic.signal_rounds = i3;
                let pipeline = Pipeline::new(&sc.params, sc.tx.codec().config(), cfg)?;
                let mut work = rb.clone();
                let out = pipeline.run(&mut work)?;
                cells.push(GridCell {
                    mode,
                    i2,
                    i3,
                    score: score(&out.verdicts, &truth, &sc.params),
                });
            }
        }
    }
    Ok(GridReport {
        seed: sc.master_seed,
        packets: truth.len(),
        utilization: sc.utilization(),
        cells,
    })
}

impl GridReport {
    pub fn cell(&self, mode: EqMode, i2: usize, i3: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.mode == mode && c.i2 == i2 && c.i3 == i3)
    }

    /// Long-format CSV: one row per cell and user (`all` for the total).
    pub fn to_csv(&self) -> String {
        let mut s = String::from("mode,i2,i3,user,total,lost,fer,undetected_errors,spurious\n");
        for c in &self.cells {
            let sc = &c.score;
            let _ = writeln!(
                s,
                "{},{},{},all,{},{},{:.6},{},{}",
                c.mode,
                c.i2,
                c.i3,
                sc.total,
                sc.lost(),
                sc.fer(),
                sc.undetected_errors,
                sc.spurious
            );
            for u in &sc.per_user {
                let fer = if u.total == 0 { 0.0 } else { (u.total - u.received) as f64 / u.total as f64 };
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{:.6},,",
                    c.mode,
                    c.i2,
                    c.i3,
                    u.user,
                    u.total,
                    u.total - u.received,
                    fer
                );
            }
        }
        s
    }

    /// Aligned FER tables (rows I2, columns I3), one per equalizer.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "seed {}  packets {}  utilization {:.2}%",
            self.seed,
            self.packets,
            100.0 * self.utilization
        );
        let mut modes: Vec<EqMode> = self.cells.iter().map(|c| c.mode).collect();
        modes.dedup();
        let i2_max = self.cells.iter().map(|c| c.i2).max().unwrap_or(0);
        let i3_max = self.cells.iter().map(|c| c.i3).max().unwrap_or(0);
        for mode in modes {
            let _ = writeln!(s, "\nFER (%) {mode}");
            let _ = write!(s, "{:>8}", "I2\\I3");
            for i3 in 1..=i3_max {
                let _ = write!(s, "{i3:>10}");
            }
            s.push('\n');
            for i2 in 1..=i2_max {
                let _ = write!(s, "{i2:>8}");
                for i3 in 1..=i3_max {
                    match self.cell(mode, i2, i3) {
                        Some(c) => {
                            let _ = write!(s, "{:>10.2}", 100.0 * c.score.fer());
                        }
                        None => s.push_str(&format!("{:>10}", "-")),
                    }
                }
                s.push('\n');
            }
        }
        s
    }
}
