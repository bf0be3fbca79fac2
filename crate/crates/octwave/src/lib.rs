pub mod cli;
pub mod error;
pub mod kernels;
pub mod norms;
pub mod propagator;
pub mod scaling;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
