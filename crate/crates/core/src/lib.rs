//! Tabular batch reinforcement learning with regularized transition models.
//!
//! Three regularizers are expressed as weighted averages of the
//! maximum-likelihood transition matrix and a regularization matrix: a
//! uniform Dirichlet prior (posterior mean), a lowered discount factor
//! (blend with zeros) and epsilon-greedy planning (blend with the action
//! average). Models are planned with exact policy iteration and scored in
//! the true MDP by the [`harness`].

// `!(x >= 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod environments;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod harness;
pub mod mdp;
pub mod planning;
pub mod properties;
pub mod regularizers;

pub use error::{Error, Result};
pub use mdp::{DeterministicPolicy, QFunction, TabularMdp, ValueFunction};
