//! Active sequential hypothesis testing.
//!
//! A decision maker chooses among sensing actions, observes symbols drawn
//! from the kernel of the true hypothesis, and eventually retires and
//! declares a hypothesis, paying one unit per sample and `L` for a wrong
//! declaration. This crate provides the model calculus, the information
//! games behind the two-phase policies, explicit bounds on the optimal
//! cost, a dynamic-programming oracle for small `M`, and a reproducible
//! Monte Carlo engine.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod dp;
pub mod error;
pub mod games;
pub mod info;
pub mod model;
pub mod nds;
pub mod policies;
pub mod sim;

pub use bounds::{Bound, BoundParams, BoundReport, Bounds};
pub use error::{Error, Result};
pub use games::{ActionMixture, GameQuantities, SolverOptions, SolverReport};
pub use model::{Belief, BeliefUpdate, Model, ModelFile, ValidationReport};
pub use policies::{Decision, Policy, PolicyConfig, PolicyKind};
pub use sim::{SimEstimate, TrialRecord};
