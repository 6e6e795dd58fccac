//! Simulation of exact first-order methods for consensus optimization over
//! a static undirected network: the distributed spectral gradient method
//! with node-local, iteration-varying step-sizes, constant-step gradient
//! tracking and distributed gradient descent, together with the problem
//! generators and diagnostics needed to compare them.

pub mod analysis;
pub mod costs;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod mixing;
pub mod network;
pub mod rng;
pub mod solvers;
pub mod sweep;

pub use error::{Error, Result};
