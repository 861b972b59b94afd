//! Interference cancellation: packet regeneration and the IC receiver loops.

pub mod pipeline;
pub mod regen;

pub use pipeline::{IcConfig, Pipeline, PipelineOutput, ReceiverConfig, SegmentLog, Verdict};
pub use regen::{regenerate, RegenConfig, RegeneratedPacket};
