//! From sequential rules to a task hierarchy: the structure tree, exits,
//! subtask regions and trajectory consistency.

mod exits;
mod hierarchy;
mod tree;

use thiserror::Error;

pub use exits::{cluster_adjacent_subgoals, extract_exits, Exit};
pub use hierarchy::{build_hierarchy, ConsistencyReport, Segment, Subtask, TaskHierarchy};
pub use tree::{hst_construct, Hst, HstNode, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HstError {
    #[error("no exits to build a hierarchy from")]
    NoExits,
    #[error("trajectory {0} carries no actions")]
    MissingActions(usize),
    #[error("environment error: {0}")]
    Env(String),
}

/// Free-function form of [`TaskHierarchy::check_consistency`].
pub fn check_consistency(h: &TaskHierarchy, t: &crate::learner::Trajectory) -> ConsistencyReport {
    h.check_consistency(t)
}
