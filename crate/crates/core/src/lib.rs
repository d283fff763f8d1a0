//! Low-complexity downlink precoding for subarray-based XL-MIMO.
//!
//! The crate simulates a base station whose antenna array is split into
//! `S` subarrays, each serving its own group of single-antenna users over
//! spatially non-stationary channels (per-user visibility regions). Every
//! subarray builds a regularized zero-forcing (RZF) precoder, either directly
//! through a matrix inverse or approximately with the randomized Kaczmarz
//! algorithm (uniform row selection, "rKA") or its norm-weighted variant
//! ("SwoR-rKA").
//!
//! Module map:
//!
//! - [`config`]: scenario parameters ([`SystemConfig`]).
//! - [`channel`]: correlation, visibility regions, channel draws and CSI errors.
//! - [`kaczmarz`]: the Kaczmarz solver for `(H^H H + xi I) w = e_k` and its
//!   convergence diagnostics.
//! - [`precoding`]: direct and Kaczmarz-based RZF precoders.
//! - [`metrics`]: SINR/SE under channel hardening, QPSK BER, NMSE, op counts.
//! - [`harness`]: experiment specs, sweeps, CSV output and the CLI.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod kaczmarz;
pub mod linalg;
pub mod metrics;
pub mod precoding;
pub mod rng;

pub use channel::{ChannelRealization, CorrelationModel, CorrelationSpec, VrMask};
pub use config::{Normalization, SystemConfig};
pub use error::{Error, Result};
pub use kaczmarz::{KaczmarzRun, SelectionMode};
pub use metrics::MetricsReport;
pub use precoding::{Csi, Method, Precoder};
pub use rng::Streams;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
