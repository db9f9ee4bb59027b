pub mod distinguish;
pub mod dynamics;
pub mod equilibration;
pub mod error;
pub mod harness;
pub mod matrixkit;
pub mod random;
pub mod spectral;
pub mod stats;
pub mod subsystem;
pub mod universality;

pub use error::{Error, Result};
