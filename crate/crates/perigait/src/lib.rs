#![doc = include_str!("../../../book/src/introduction.md")]

pub mod error;
pub mod math;

#[doc = include_str!("../../../book/src/gait-waves.md")]
pub mod gait;

#[doc = include_str!("../../../book/src/cable-geometry.md")]
pub mod cable;

#[doc = include_str!("../../../book/src/terrain.md")]
pub mod terrain;

#[doc = include_str!("../../../book/src/robot-model.md")]
pub mod robot;

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod sim;

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics;

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod harness;

pub mod config;
pub mod report;

pub use error::{Error, Result};
