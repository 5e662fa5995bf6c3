//! End-to-end runs: collect trajectories, mine a hierarchy, learn options
//! and compare flat and hierarchical learners over paired seeds.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{EnvKind, ExperimentConfig, Method};
use super::curves::{curves_to_csv, learning_curve, tail_mean_reward, CurvePoint};
use super::maps::load_map_source;
use super::mining::{mine_hierarchy, MinedHierarchy, MiningParams};
use super::stats::{mean, welch_t_test, WelchResult};
use super::visits::{emit_visit_matrix, VisitMatrix};
use super::{PipelineError, Stage};
use crate::envs::{EnvError, Environment, GridView, KeyMaze, ProgressSpec, Taxi};
use crate::hrl::{learn_options, smdp_train, OptionParams, OptionPolicy};
use crate::learner::{select_successful_trajectories, train, EpisodeRecord, LearnerParams, QTable, Trajectory};
use crate::miner::{rules_to_csv, trajectories_to_csv};

/// An environment that can spawn mining tasks and a target task.
pub trait TaskFamily: Environment<f64> + GridView + Clone + Send + Sync {
    /// Task `i` of a mining batch.
    fn mining_task<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<Self, EnvError>;
    /// The task learners are compared on.
    fn target_task<R: Rng + ?Sized>(&self, cfg: &ExperimentConfig, rng: &mut R) -> Result<Self, EnvError>;
}

fn two_cells<R: Rng + ?Sized>(env: &KeyMaze, rng: &mut R) -> Result<(crate::envs::Cell, crate::envs::Cell), EnvError> {
    let free = env.map().free_cells();
    if free.len() < 2 {
        return Err(EnvError::Config("map needs two free cells".into()));
    }
    let mut pick = free.choose_multiple(rng, 2);
    Ok((*pick.next().unwrap(), *pick.next().unwrap()))
}

impl TaskFamily for KeyMaze {
    fn mining_task<R: Rng + ?Sized>(&self, _i: usize, rng: &mut R) -> Result<Self, EnvError> {
        let (s, g) = two_cells(self, rng)?;
        self.with_endpoints(s, g)
    }

    fn target_task<R: Rng + ?Sized>(&self, cfg: &ExperimentConfig, rng: &mut R) -> Result<Self, EnvError> {
        let (s, g) = two_cells(self, rng)?;
        self.with_endpoints(cfg.start.unwrap_or(s), cfg.goal.unwrap_or(g))
    }
}

impl TaskFamily for Taxi {
    /// Tasks cycle through the 16 pickup/destination landmark pairs with a
    /// random taxi cell.
    fn mining_task<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<Self, EnvError> {
        let cell = (rng.gen_range(0..self.size()), rng.gen_range(0..self.size()));
        self.with_task(cell, (i / 4) % 4, i % 4)
    }

    fn target_task<R: Rng + ?Sized>(&self, cfg: &ExperimentConfig, rng: &mut R) -> Result<Self, EnvError> {
        let cell = cfg
            .start
            .unwrap_or((rng.gen_range(0..self.size()), rng.gen_range(0..self.size())));
        let pickup = rng.gen_range(0..4);
        let dest = rng.gen_range(0..4);
        self.with_task(cell, pickup, dest)
    }
}

pub fn build_maze(cfg: &ExperimentConfig) -> Result<KeyMaze, PipelineError> {
    let err = |e: String| PipelineError::new(Stage::Config, e);
    let map = load_map_source(&cfg.map).map_err(err)?;
    let progress = if cfg.progress.is_empty() {
        let mut labels: Vec<char> = map.subgoals().iter().map(|(_, l)| *l).collect();
        labels.sort_unstable();
        ProgressSpec::chain(&labels.into_iter().collect::<String>())
    } else {
        ProgressSpec::parse(&cfg.progress)
    };
    let free = map.free_cells();
    let first = *free.first().ok_or_else(|| err("map has no free cell".into()))?;
    KeyMaze::builder(map)
        .progress(progress)
        .start(cfg.start.unwrap_or(first))
        .goal(cfg.goal.unwrap_or(*free.last().unwrap()))
        .slip(cfg.slip)
        .scheme(cfg.scheme)
        .goal_mode(cfg.goal_mode)
        .build()
        .map_err(|e| err(e.to_string()))
}

pub fn build_taxi(cfg: &ExperimentConfig) -> Result<Taxi, PipelineError> {
    Taxi::new(cfg.taxi_scale, cfg.slip).map_err(|e| PipelineError::new(Stage::Config, e.to_string()))
}

fn learner_params(cfg: &ExperimentConfig, episodes: usize, seed: u64) -> LearnerParams<f64> {
    LearnerParams {
        alpha: cfg.alpha,
        gamma: cfg.gamma,
        epsilon: cfg.epsilon,
        episodes,
        max_steps: cfg.max_steps,
        seed,
    }
}

pub fn mining_params(cfg: &ExperimentConfig) -> MiningParams {
    MiningParams {
        minsup: cfg.minsup,
        minconf: cfg.minconf,
        max_len: cfg.max_len,
        cluster_window: cfg.cluster_window,
        close_limit: cfg.close_limit,
    }
}

/// Seed of run `r`, shared by both methods.
pub fn run_seed(cfg: &ExperimentConfig, r: usize) -> u64 {
    cfg.seed.wrapping_mul(1_000_003).wrapping_add(r as u64 + 1)
}

/// Flat Q-learning on `cfg.tasks` mining tasks; the `top_k` best successful
/// episodes of each, with loops removed.
pub fn collect_trajectories<E: TaskFamily>(
    cfg: &ExperimentConfig,
    base: &E,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Trajectory>, PipelineError> {
    let mut tasks = Vec::with_capacity(cfg.tasks);
    for i in 0..cfg.tasks {
        let env = base
            .mining_task(i, rng)
            .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        tasks.push((env, rng.gen::<u64>()));
    }
    let per_task: Vec<Vec<Trajectory>> = tasks
        .par_iter()
        .map(|(env, seed)| {
            let (_, records) = train(env, &learner_params(cfg, cfg.task_episodes, *seed))
                .map_err(|e| PipelineError::new(Stage::Learn, e.to_string()))?;
            let picked = select_successful_trajectories(&records, cfg.top_k)
                .map_err(|e| PipelineError::new(Stage::Learn, e.to_string()))?
                .into_vec();
            Ok(picked.iter().map(Trajectory::without_loops).collect())
        })
        .collect::<Result<_, PipelineError>>()?;
    let mut out: Vec<Trajectory> = per_task.into_iter().flatten().collect();
    for (i, t) in out.iter_mut().enumerate() {
        t.source = i;
    }
    if out.is_empty() {
        return Err(PipelineError::new(Stage::Learn, "no successful trajectories"));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MethodResult {
    pub method: Method,
    pub curve: Vec<CurvePoint>,
    /// Per-run mean reward over the final episodes.
    pub tails: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub config: ExperimentConfig,
    pub trajectories: Vec<Trajectory>,
    pub mined: Option<MinedHierarchy>,
    pub option_count: usize,
    pub results: Vec<MethodResult>,
    /// Hierarchical against flat, when both ran.
    pub stats: Option<WelchResult>,
    pub visits: Option<VisitMatrix>,
}

impl RunArtifacts {
    pub fn result(&self, m: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == m)
    }
}

/// Mining trajectories and the hierarchy mined from them.
pub fn mine_family<E: TaskFamily>(
    cfg: &ExperimentConfig,
    base: &E,
) -> Result<(E, Vec<Trajectory>, MinedHierarchy), PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = base
        .target_task(cfg, &mut rng)
        .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
    let trajs = collect_trajectories(cfg, base, &mut rng)?;
    let mined = mine_hierarchy(&target, &trajs, &mining_params(cfg))?;
    Ok((target, trajs, mined))
}

pub fn option_params(cfg: &ExperimentConfig) -> OptionParams<f64> {
    OptionParams {
        alpha: cfg.option_alpha,
        gamma: cfg.gamma,
        epsilon: cfg.option_epsilon,
        episodes: cfg.option_episodes,
        max_steps: cfg.option_max_steps,
        bonus: cfg.bonus,
        seed: cfg.seed,
    }
}

pub fn run_family<E: TaskFamily>(cfg: &ExperimentConfig, base: &E) -> Result<RunArtifacts, PipelineError> {
    cfg.validate().map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target = base
        .target_task(cfg, &mut rng)
        .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;

    let (trajectories, mined, options) = if cfg.has(Method::Hier) {
        let trajs = collect_trajectories(cfg, base, &mut rng)?;
        let mined = mine_hierarchy(&target, &trajs, &mining_params(cfg))?;
        let options = learn_options(&target, &mined.hierarchy, &option_params(cfg))
            .map_err(|e| PipelineError::new(Stage::Options, e.to_string()))?;
        (trajs, Some(mined), options)
    } else {
        (Vec::new(), None, Vec::new())
    };

    let mut results = Vec::new();
    for &m in &cfg.methods {
        let runs: Vec<Vec<EpisodeRecord<f64>>> = (0..cfg.runs)
            .into_par_iter()
            .map(|r| {
                let params = learner_params(cfg, cfg.episodes, run_seed(cfg, r));
                match m {
                    Method::Flat => train(&target, &params)
                        .map(|(_, rec)| rec)
                        .map_err(|e| PipelineError::new(Stage::Learn, e.to_string())),
                    Method::Hier => smdp_train(&target, &options, &params)
                        .map(|(_, rec)| rec)
                        .map_err(|e| PipelineError::new(Stage::Hrl, e.to_string())),
                }
            })
            .collect::<Result<_, _>>()?;
        results.push(MethodResult {
            method: m,
            curve: learning_curve(&runs),
            tails: runs.iter().map(|r| tail_mean_reward(r, cfg.tail_fraction)).collect(),
        });
    }

    let stats = match (
        results.iter().find(|r| r.method == Method::Hier),
        results.iter().find(|r| r.method == Method::Flat),
    ) {
        (Some(h), Some(f)) if cfg.runs >= 2 => {
            Some(welch_t_test(&h.tails, &f.tails).map_err(|e| PipelineError::new(Stage::Stats, e.to_string()))?)
        }
        _ => None,
    };
    let visits = mined.as_ref().map(|_| emit_visit_matrix(&trajectories, &target));
    Ok(RunArtifacts {
        config: cfg.clone(),
        option_count: options.iter().filter(|o| matches!(o, OptionPolicy::Learned(_))).count(),
        trajectories,
        mined,
        results,
        stats,
        visits,
    })
}

/// Dispatch on the configured environment.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunArtifacts, PipelineError> {
    match cfg.env {
        EnvKind::Maze => run_family(cfg, &build_maze(cfg)?),
        EnvKind::Taxi => run_family(cfg, &build_taxi(cfg)?),
    }
}

/// Flat Q-learning on the target task only.
pub fn train_flat(cfg: &ExperimentConfig) -> Result<(QTable<f64>, Vec<EpisodeRecord<f64>>), PipelineError> {
    fn go<E: TaskFamily>(cfg: &ExperimentConfig, base: &E) -> Result<(QTable<f64>, Vec<EpisodeRecord<f64>>), PipelineError> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let target = base
            .target_task(cfg, &mut rng)
            .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
        train(&target, &learner_params(cfg, cfg.episodes, run_seed(cfg, 0)))
            .map_err(|e| PipelineError::new(Stage::Learn, e.to_string()))
    }
    match cfg.env {
        EnvKind::Maze => go(cfg, &build_maze(cfg)?),
        EnvKind::Taxi => go(cfg, &build_taxi(cfg)?),
    }
}

/// Mine from given trajectories, or from freshly collected ones.
pub fn mine_only(
    cfg: &ExperimentConfig,
    input: Option<Vec<Trajectory>>,
) -> Result<(Vec<Trajectory>, MinedHierarchy, Option<VisitMatrix>), PipelineError> {
    fn go<E: TaskFamily>(
        cfg: &ExperimentConfig,
        base: &E,
        input: Option<Vec<Trajectory>>,
    ) -> Result<(Vec<Trajectory>, MinedHierarchy, Option<VisitMatrix>), PipelineError> {
        match input {
            Some(raw) => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let target = base
                    .target_task(cfg, &mut rng)
                    .map_err(|e| PipelineError::new(Stage::Config, e.to_string()))?;
                let trajs = raw
                    .iter()
                    .map(|t| {
                        if t.has_actions() || t.states.len() < 2 {
                            Ok(t.clone())
                        } else {
                            crate::envs::infer_actions::<f64, _>(&target, t)
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| PipelineError::new(Stage::Mine, e.to_string()))?;
                let mined = mine_hierarchy(&target, &trajs, &mining_params(cfg))?;
                let visits = emit_visit_matrix(&trajs, &target);
                Ok((trajs, mined, Some(visits)))
            }
            None => {
                let (target, trajs, mined) = mine_family(cfg, base)?;
                let visits = emit_visit_matrix(&trajs, &target);
                Ok((trajs, mined, Some(visits)))
            }
        }
    }
    match cfg.env {
        EnvKind::Maze => go(cfg, &build_maze(cfg)?, input),
        EnvKind::Taxi => go(cfg, &build_taxi(cfg)?, input),
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), PipelineError> {
    fs::write(dir.join(name), body).map_err(|e| PipelineError::new(Stage::Write, format!("{name}: {e}")))
}

pub fn write_mined(dir: &Path, trajs: &[Trajectory], mined: &MinedHierarchy) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Write, e.to_string()))?;
    write(dir, "transactions.csv", &trajectories_to_csv(trajs))?;
    write(dir, "rules.csv", &rules_to_csv(&mined.rules))?;
    write(dir, "hierarchy.txt", &mined.hierarchy.render())?;
    write(dir, "hierarchy.adj", &mined.hierarchy.to_adjacency())
}

pub fn write_visits(dir: &Path, v: &VisitMatrix) -> Result<(), PipelineError> {
    write(dir, "visits.csv", &v.to_csv())?;
    write(dir, "visits.pgm", &v.to_pgm())
}

pub fn stats_text(a: &RunArtifacts) -> String {
    let mut out = String::new();
    for r in &a.results {
        out.push_str(&format!("mean_tail_reward_{} = {}\n", r.method.name(), mean(&r.tails)));
    }
    if let Some(s) = a.stats {
        out.push_str(&format!("t = {}\ndf = {}\np = {}\n", s.t, s.df, s.p));
    }
    out
}

/// Write every artifact of a run into `dir`.
pub fn write_artifacts(dir: &Path, a: &RunArtifacts) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::new(Stage::Write, e.to_string()))?;
    write(dir, "config.txt", &a.config.to_text())?;
    let named: Vec<(&str, &[CurvePoint])> = a.results.iter().map(|r| (r.method.name(), r.curve.as_slice())).collect();
    write(dir, "curves.csv", &curves_to_csv(&named))?;
    write(dir, "stats.txt", &stats_text(a))?;
    if let Some(m) = &a.mined {
        write_mined(dir, &a.trajectories, m)?;
    }
    if let Some(v) = &a.visits {
        write_visits(dir, v)?;
    }
    Ok(())
}
