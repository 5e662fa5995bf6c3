//! Task-hierarchy extraction for reinforcement learning.
//!
//! Successful trajectories from tabular Q-learning are treated as
//! transactions; FP-growth and sequential rule generation find frequently
//! visited subgoal states and their visiting order; the rules are folded
//! into a hierarchical structure tree whose exits define options for
//! semi-MDP learning.

pub mod codec;
pub mod envs;
pub mod harness;
pub mod hrl;
pub mod hst;
pub mod learner;
pub mod miner;
pub mod scalar;

pub use codec::{DomainSpec, EncodedState, FactoredState};
pub use envs::{Action, Environment};
pub use scalar::Scalar;

pub type QTable64 = learner::QTable<f64>;
pub type QTable32 = learner::QTable<f32>;
pub type LearnerParams64 = learner::LearnerParams<f64>;
pub type EpisodeRecord64 = learner::EpisodeRecord<f64>;
pub type OptionPolicy64 = hrl::OptionPolicy<f64>;
pub type AbstractQ64 = hrl::AbstractQ<f64>;
