//! Simulation and analysis of the K-slot switching Markovian
//! amplify-and-forward relay scheme.
//!
//! `K` half-duplex relays take turns listening to the transmitter and
//! forwarding what they heard one slot later. The crate samples Rayleigh
//! channels, builds the equivalent lower-triangular MIMO channel, estimates
//! outage probabilities by Monte Carlo, and evaluates the closed-form
//! diversity-multiplexing tradeoff curves together with brute-force oracles.

pub mod channel;
pub mod cli;
pub mod dmt;
pub mod error;
pub mod oracle;
pub mod outage;
pub mod scheme;
pub mod topology;

pub use error::{Error, Result};
