//! Streaming, parallel analytics over Yelp-format NDJSON datasets.
//!
//! Three analyses are provided: yearly feature performance (new users,
//! reviews, elite users, tips, check-ins), daily tip sentiment per region,
//! and monthly star-rating counts per region. Inputs are parsed in parallel
//! batches, aggregated into per-worker partial counts, merged, and written
//! as sorted CSV tables.

pub mod analytics;
pub mod cli;
mod error;
pub mod records;
pub mod regionmap;
pub mod report;
pub mod sentiment;

pub use error::LoadError;
