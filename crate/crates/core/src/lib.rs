//! Secrecy-rate optimization for amplify-and-forward relay networks.
//!
//! A source reaches a destination through `M` relays that scale their received
//! signal by `β_i`, while an eavesdropper listens to the same relays. The crate
//! computes relay weights that maximize the secrecy rate under per-relay or total
//! power constraints, for the general degraded case and for two structured special
//! cases with closed-form answers.

pub mod cli;
pub mod convex;
pub mod degraded;
pub mod error;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod scaled;
pub mod symmetric;
pub mod zero_forcing;

pub use convex::SolverConfig;
pub use error::{Error, Result};
pub use model::{
    beta_max_bounds, omega_max_bounds, rate_from_snrs, secrecy_rate, snr, ChannelInstance,
    Diagnostics, Method, Node, ScalingVector, SolveReport, TransformedVector,
};
