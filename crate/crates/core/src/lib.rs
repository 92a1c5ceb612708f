//! Interface-roughness variability models for silicon quantum-dot spin qubits.
//!
//! The crate is organised by physical stage: rough surface synthesis and
//! analysis ([`surface`]), confinement potentials ([`electrostatics`]),
//! valley physics ([`valleymodel`]), g-tensors ([`spinorbit`]), exchange from
//! path-integral Monte Carlo ([`pimc`]) and the dot-grid aggregation
//! ([`variability`]).

pub mod eigen;
pub mod electrostatics;
mod error;
pub mod pimc;
pub mod spinorbit;
pub mod stats;
pub mod surface;
pub mod units;
pub mod valleymodel;
pub mod variability;

pub use error::{Error, ErrorClass, Result};
