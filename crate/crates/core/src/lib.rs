//! Numerical verification engine for central limit theorems of spatial
//! averages of the hyperbolic Anderson model driven by time-independent
//! Gaussian noise.

pub mod asymptotics;
pub mod cache;
pub mod chaos;
pub mod covariance;
pub mod error;
pub mod mc;
pub mod quad;
pub mod runner;
pub mod stats;
pub mod wave;
pub mod wick;

pub use error::{Error, Result};
