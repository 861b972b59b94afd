//! Scenario execution, scoring and FER grids.

pub mod grid;
pub mod report;
pub mod score;

pub use grid::{run_grid, GridCell, GridReport, GridSpec};
pub use score::{score, Score};

use crate::channel::RealizedScenario;
use crate::ic::{Pipeline, PipelineOutput, ReceiverConfig};
use crate::rx::{BasebandSignal, Demodulator, PassbandSource};
use crate::{ModemParams, Result};

/// Demodulates any passband source.
pub fn to_baseband(src: &(impl PassbandSource + ?Sized), params: &ModemParams, cfg: &ReceiverConfig) -> Result<BasebandSignal> {
    Demodulator::new(params).demodulate(src, cfg.execution)
}

/// Receives a realized scenario and scores the verdicts.
pub fn run_scenario(sc: &RealizedScenario, cfg: &ReceiverConfig) -> Result<(PipelineOutput, Score)> {
    let pipeline = Pipeline::new(&sc.params, sc.tx.codec().config(), cfg.clone())?;
    let mut rb = to_baseband(sc, &sc.params, cfg)?;
    let out = pipeline.run(&mut rb)?;
    let s = score(&out.verdicts, &sc.ground_truth(), &sc.params);
    Ok((out, s))
}
