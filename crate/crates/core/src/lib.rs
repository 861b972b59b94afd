//! Single-carrier underwater acoustic random-access modem.
//!
//! The crate contains the transmit chain (superimposed pilot and coded data on
//! an RRC-shaped carrier), a multiuser multipath/Doppler channel simulator, and
//! an interference-cancelling receiver: cross-ambiguity packet detection,
//! sparse frequency-domain channel estimation solved by dichotomous coordinate
//! descent, Rake / linear / IC-Rake equalization inside turbo iterations, and
//! packet-level and signal-level interference cancellation loops.

pub mod channel;
pub mod codec;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod ic;
pub mod io;
pub mod par;
pub mod params;
pub mod rng;
pub mod rx;
pub mod tx;

pub use error::{Error, Result};
pub use par::Execution;
pub use params::ModemParams;
