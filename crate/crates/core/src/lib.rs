pub mod cli;
pub mod detection;
pub mod engine;
pub mod error;
pub mod link;
pub mod polarization;
pub mod postprocessing;
pub mod protocol;
pub mod rng;
pub mod source;

pub use error::{Error, Result};
