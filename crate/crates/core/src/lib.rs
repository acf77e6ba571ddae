//! Rate optimization for a two-hop decode-and-forward MIMO-OFDM link whose
//! relay is powered by energy harvested from the source (time-switching
//! relaying).
//!
//! The pipeline is: draw a [`channel::ChannelRealization`], reduce it to
//! sorted per-subchannel gains with a [`tsr::SystemInstance`], then maximize
//! the end-to-end rate with the augmented Lagrangian solver in [`alpf`].
//! [`oracle`] solves the same reduced problem by water-filling and serves as
//! an independent check; [`experiment`] runs Monte Carlo sweeps.

pub mod alpf;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod oracle;
pub mod scenario;
pub mod tsr;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, SvdResult};
pub use scenario::Scenario;
