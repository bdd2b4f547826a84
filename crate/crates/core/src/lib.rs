//! Outbreak surveillance toolkit: report ingestion, case registry, transmission
//! networks, epidemiological analytics, media-attention series and stochastic
//! spread simulation.

pub mod analytics;
pub mod dataset;
pub mod dates;
pub mod ingest;
pub mod media;
pub mod net;
pub mod registry;
pub mod sim;

/// Data-format revision written by exports and reported by the CLI.
pub const FORMAT_REVISION: &str = "r1";
