//! Privacy-preserving query release with additive noise drawn from
//! synchronized chaotic oscillators.
//!
//! The pipeline has four stages:
//!
//! 1. [`noiseopt`] designs the additive noise distribution `p_V` that
//!    minimizes the mutual information `I[X; Y + V]` between private data
//!    `X` and the released response.
//! 2. [`chaossim`] simulates a chaotic driver feeding two convergent
//!    responders (one per channel endpoint) and validates boundedness,
//!    convergence, chaos and stationarity.
//! 3. [`prng`] partitions the responder output support into cells whose
//!    probabilities match `p_V`, so that sampling the synchronized output
//!    yields identical noise realizations at both endpoints.
//! 4. [`channel`] runs a query session: the server releases `Z = Y + V`
//!    and the remote station recovers `Y` by subtracting its own copy of `V`.
//!
//! [`ingest`] builds the probability model from census data and
//! [`pipeline`] wires everything together for the command line tool.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaossim;
pub mod channel;
pub mod config;
pub mod error;
pub mod ingest;
pub mod jsonio;
pub mod noiseopt;
pub mod pipeline;
pub mod prng;
pub mod probmodel;

pub use error::{Error, Result};
