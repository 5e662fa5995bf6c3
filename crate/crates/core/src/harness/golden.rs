//! The 60-state three-phase maze with its six recorded trajectories.

use crate::envs::{infer_actions, load_map, GoalMode, KeyMaze, ProgressSpec};
use crate::learner::Trajectory;
use crate::miner::trajectories_from_csv;

use super::mining::{mine_hierarchy, MinedHierarchy, MiningParams};
use super::{PipelineError, Stage};

pub const GOLDEN_MAZE: &str = include_str!("../../fixtures/golden/maze.txt");
pub const GOLDEN_TRANSACTIONS: &str = include_str!("../../fixtures/golden/transactions.csv");
pub const GOLDEN_HIERARCHY_TXT: &str = include_str!("../../fixtures/golden/hierarchy.txt");
pub const GOLDEN_HIERARCHY_ADJ: &str = include_str!("../../fixtures/golden/hierarchy.adj");

/// Deterministic version of the maze; the recorded runs differ only in
/// their start and goal cells.
pub fn golden_env() -> KeyMaze {
    let map = load_map(GOLDEN_MAZE).expect("golden maze parses");
    KeyMaze::builder(map)
        .progress(ProgressSpec::chain("12"))
        .start((0, 0))
        .goal((0, 4))
        .slip(0.0)
        .goal_mode(GoalMode::EnterGoal)
        .build()
        .expect("golden maze builds")
}

/// The recorded trajectories with the actions that explain each step.
pub fn golden_trajectories(env: &KeyMaze) -> Result<Vec<Trajectory>, PipelineError> {
    let raw = trajectories_from_csv(GOLDEN_TRANSACTIONS).map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
    raw.iter()
        .map(|t| infer_actions::<f64, _>(env, t).map_err(|e| PipelineError::new(Stage::Config, e.to_string())))
        .collect()
}

pub fn run_golden(minsup: f64, minconf: f64) -> Result<MinedHierarchy, PipelineError> {
    let env = golden_env();
    let trajs = golden_trajectories(&env)?;
    let params = MiningParams {
        minsup,
        minconf,
        ..MiningParams::default()
    };
    mine_hierarchy::<f64, _>(&env, &trajs, &params)
}
