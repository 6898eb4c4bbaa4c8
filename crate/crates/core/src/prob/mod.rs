//! Finite-alphabet probability tensors and information measures.

mod alphabet;
mod empirical;
mod index;
mod joint;
mod kernel;
mod measures;

pub use alphabet::Alphabet;
pub use empirical::{empirical_distribution, is_typical, EmpiricalCounts, TypicalSet};
pub use joint::{joint_from_factors, JointDist};
pub use kernel::Kernel;
pub use measures::{binary_entropy, expected_objective, total_variation, ObjectiveFn};

pub(crate) use index::projection;
