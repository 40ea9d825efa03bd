//! Resilience analysis of linear systems that lose control authority over
//! part of their actuators.

pub mod app;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mintime;
pub mod pairs;
pub mod resilience;
pub mod system;

pub use error::{Error, Result};
