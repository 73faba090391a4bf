pub mod approx;
pub mod cli;
pub mod error;
pub mod logic;
pub mod perfring;
pub mod tilt;
pub mod witt;

pub use error::{Error, Result};
