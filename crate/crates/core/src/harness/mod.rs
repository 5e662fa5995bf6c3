//! Experiment pipelines, learning curves, visit matrices and statistics.

mod config;
mod curves;
pub mod golden;
mod maps;
mod mining;
mod pipeline;
mod stats;
mod visits;

use std::fmt;

use thiserror::Error;

pub use config::{ConfigError, EnvKind, ExperimentConfig, Method};
pub use curves::{curves_to_csv, learning_curve, tail_mean_reward, CurvePoint};
pub use maps::{builtin_map, load_map_source};
pub use mining::{mine_hierarchy, MinedHierarchy, MiningParams};
pub use pipeline::{
    build_maze, build_taxi, collect_trajectories, mine_family, option_params, mine_only, mining_params, run_family, run_pipeline,
    run_seed, stats_text, train_flat, write_artifacts, write_mined, write_visits, MethodResult, RunArtifacts,
    TaskFamily,
};
pub use stats::{mean, variance, welch_t_test, StatsError, WelchResult};
pub use visits::{emit_visit_matrix, VisitMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Learn,
    Mine,
    Build,
    Options,
    Hrl,
    Stats,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Learn => "learn",
            Stage::Mine => "mine",
            Stage::Build => "build-hst",
            Stage::Options => "options",
            Stage::Hrl => "run-hrl",
            Stage::Stats => "stats",
            Stage::Write => "write",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{stage} failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

impl PipelineError {
    pub fn new(stage: Stage, message: impl Into<String>) -> Self {
        PipelineError {
            stage,
            message: message.into(),
        }
    }
}
