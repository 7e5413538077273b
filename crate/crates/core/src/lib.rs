//! Merge a pretrained/instruction-tuned checkpoint pair along an
//! interpolation coefficient, score each merged model's calibration, and
//! locate the accuracy-calibration Pareto frontier across the sweep.

pub mod calibration;
pub mod cli;
pub mod error;
pub mod eval_ingest;
pub mod frontier;
pub mod merge;
pub mod tensor_store;

pub use error::{Error, Result};
