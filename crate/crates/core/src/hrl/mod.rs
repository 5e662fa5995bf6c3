//! Hierarchical execution: options learned per subtask, SMDP Q-learning
//! over them, and the decomposed value recursion.

mod option;
mod smdp;
mod value;

use thiserror::Error;

use crate::codec::EncodedState;
use crate::envs::EnvError;
use crate::learner::LearnerError;

pub use option::{
    learn_option, run_option, unreachable_states, LearnedOption, OptionEnd, OptionParams, OptionPolicy, OptionRun,
};
pub use smdp::{admissible, smdp_rollout, smdp_train, smdp_train_into, AbstractQ};
pub use value::{decomposed_value, DecomposedQ};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HrlError {
    #[error("subtask {0} has no exits or no states")]
    NotAnOption(usize),
    #[error("no exit reachable from {} states of subtask {subtask}", states.len())]
    Unreachable { subtask: usize, states: Vec<EncodedState> },
    #[error("no options given")]
    NoOptions,
    #[error("no admissible option at state {0}")]
    NoAdmissible(EncodedState),
    #[error("cycle through subtasks {0:?}")]
    Cycle(Vec<usize>),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}

/// Primitive options followed by one learned option per non-root subtask.
/// Subtasks with an empty region or an unreachable exit are skipped with a
/// warning.
pub fn learn_options<T: crate::scalar::Scalar, E: crate::envs::Environment<T>>(
    env: &E,
    hierarchy: &crate::hst::TaskHierarchy,
    params: &OptionParams<T>,
) -> Result<Vec<OptionPolicy<T>>, HrlError> {
    let mut options = OptionPolicy::primitives(env.num_actions());
    for st in hierarchy.subtasks().iter().filter(|s| !s.is_root()) {
        match learn_option(env, st, params) {
            Ok(o) => options.push(o),
            Err(e @ (HrlError::NotAnOption(_) | HrlError::Unreachable { .. })) => {
                log::warn!("skipping subtask {}: {e}", st.id);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(options)
}
