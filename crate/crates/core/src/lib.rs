pub mod cli;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod experiment;
pub mod geom;
pub mod infogain;
pub mod io;
pub mod sensing;

pub use error::{Error, Result};
