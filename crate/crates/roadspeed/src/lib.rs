//! File formats and commands around `roadspeed-core`: calibration from
//! surveyed road markers, scene simulation, model training and the
//! frame-sequence speed pipeline.

pub mod commands;
pub mod config;
pub mod failure;
pub mod formats;
pub mod imageio;

pub use config::RunConfig;
pub use failure::{Failure, Result, EXIT_FAILURE};
