//! Receiver: demodulation, detection, and the per-segment turbo core.

pub mod dcd;
pub mod demod;
pub mod detect;
pub mod doppler;
pub mod equalize;
pub mod estimate;
pub mod turbo;

pub use demod::{BasebandSignal, Demodulator, PassbandSource};
pub use detect::{Detection, DetectorConfig, PilotBank};
pub use equalize::EqMode;
pub use estimate::{ChannelEstimate, EstimatorConfig};
pub use turbo::{SegmentOutcome, TurboConfig, TurboReceiver};
