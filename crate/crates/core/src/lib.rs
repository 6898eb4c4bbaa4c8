//! Empirical coordination over a memoryless channel with feedback.
//!
//! The crate evaluates the information constraints that decide which joint
//! distributions of source, channel input, channel output and decoder output
//! can be coordinated, maximizes the auxiliary-variable variants, simulates
//! the block-Markov scheme that achieves them, and reproduces the binary
//! source / binary symmetric channel example in closed form.
//!
//! Probability tensors are generic over [`Real`] (`f32` or `f64`); the
//! optimizer and the simulator work in `f64`.

pub mod aux_opt;
pub mod binary_example;
pub mod coord_sim;
pub mod error;
pub mod prob;
pub mod real;
pub mod settings;

pub use error::{Error, Result};
pub use real::Real;

pub type JointDist64 = prob::JointDist<f64>;
pub type JointDist32 = prob::JointDist<f32>;
pub type Kernel64 = prob::Kernel<f64>;
pub type Kernel32 = prob::Kernel<f32>;
pub type ObjectiveFn64 = prob::ObjectiveFn<f64>;
pub type ObjectiveFn32 = prob::ObjectiveFn<f32>;
pub type CoordinationProblem64 = settings::CoordinationProblem<f64>;
pub type CoordinationProblem32 = settings::CoordinationProblem<f32>;
