//! Epidemic–economic planning toolkit: a stochastic eight-compartment
//! epidemic model, a four-component government expenditure function,
//! surveillance-data ingestion, physics-informed neural calibration of the
//! dynamics, per-step neural policy optimization of the vaccination rate,
//! and a sensitivity-analysis suite with report emission.
//!
//! The guide under `book/` walks through each layer with runnable snippets;
//! the `epiopt` binary wires them into an `ingest → calibrate → optimize →
//! sweep → report` pipeline.

pub mod baseline;
pub mod costmodel;
pub mod ingest;
pub mod epimodel;
pub mod seeds;
