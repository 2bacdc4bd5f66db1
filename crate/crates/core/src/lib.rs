//! Construction and analysis of co-commenter networks.
//!
//! The pipeline turns a trace of comment events into weekly snapshots,
//! projects each snapshot onto a weighted co-commenter graph, filters that
//! graph down to its statistically salient backbone using a per-edge
//! Poisson-Binomial null model, and then detects, characterizes and tracks
//! the communities living in the backbone.

pub mod community;
pub mod dynamics;
pub mod error;
pub mod ingest;
pub mod nullmodel;
pub mod projection;
pub mod rng;
pub mod special;
pub mod synth;
pub mod text;

pub use error::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
