//! Flat `key = value` experiment configuration.

use std::fmt::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::envs::{Cell, GoalMode, RewardScheme};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("bad value {value:?} for {key}")]
    BadValue { key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Flat,
    Hier,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Flat => "flat",
            Method::Hier => "hier",
        }
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "flat" => Ok(Method::Flat),
            "hier" | "hierarchical" => Ok(Method::Hier),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Maze,
    Taxi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvKind,
    /// Built-in map name or a path to an ASCII map.
    pub map: String,
    /// Progress spec such as `123` or `123|45|6|7`; empty means the map's
    /// labels in ascending order as a chain.
    pub progress: String,
    pub goal_mode: GoalMode,
    pub scheme: RewardScheme,
    pub slip: f64,
    pub taxi_scale: usize,
    pub start: Option<Cell>,
    pub goal: Option<Cell>,

    pub minsup: f64,
    pub minconf: f64,
    pub max_len: Option<usize>,
    pub cluster_window: usize,
    pub close_limit: usize,

    pub runs: usize,
    pub episodes: usize,
    pub max_steps: usize,
    pub tasks: usize,
    pub task_episodes: usize,
    pub top_k: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Share of final episodes averaged per run for the comparison.
    pub tail_fraction: f64,

    pub option_episodes: usize,
    pub option_max_steps: usize,
    pub option_alpha: f64,
    pub option_epsilon: f64,
    pub bonus: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvKind::Maze,
            map: "chain11".into(),
            progress: String::new(),
            goal_mode: GoalMode::PressAtGoal,
            scheme: RewardScheme::KeyPress,
            slip: 0.2,
            taxi_scale: 1,
            start: None,
            goal: None,
            minsup: 0.9,
            minconf: 0.9,
            max_len: None,
            cluster_window: 0,
            close_limit: 100_000,
            runs: 10,
            episodes: 2000,
            max_steps: 1000,
            tasks: 10,
            task_episodes: 1000,
            top_k: 5,
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.1,
            seed: 0,
            methods: vec![Method::Flat, Method::Hier],
            tail_fraction: 0.1,
            option_episodes: 3000,
            option_max_steps: 200,
            option_alpha: 0.2,
            option_epsilon: 0.2,
            bonus: 10.0,
        }
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
    })
}

fn parse_cell(key: &str, value: &str) -> Result<Option<Cell>, ConfigError> {
    if value.is_empty() || value == "random" {
        return Ok(None);
    }
    let bad = || ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
    };
    let (x, y) = value.split_once(',').ok_or_else(bad)?;
    Ok(Some((x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?)))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.into(),
            value: value.into(),
        };
        match key {
            "env" => {
                self.env = match value {
                    "maze" => EnvKind::Maze,
                    "taxi" => EnvKind::Taxi,
                    _ => return Err(bad()),
                }
            }
            "map" => self.map = value.into(),
            "progress" => self.progress = value.into(),
            "goal_mode" => {
                self.goal_mode = match value {
                    "press" => GoalMode::PressAtGoal,
                    "enter" => GoalMode::EnterGoal,
                    _ => return Err(bad()),
                }
            }
            "scheme" => {
                self.scheme = match value {
                    "keypress" => RewardScheme::KeyPress,
                    "sparse" => RewardScheme::SparseGoal,
                    _ => return Err(bad()),
                }
            }
            "slip" => self.slip = parse(key, value)?,
            "taxi_scale" => self.taxi_scale = parse(key, value)?,
            "start" => self.start = parse_cell(key, value)?,
            "goal" => self.goal = parse_cell(key, value)?,
            "minsup" => self.minsup = parse(key, value)?,
            "minconf" => self.minconf = parse(key, value)?,
            "max_len" => {
                self.max_len = match value {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "cluster_window" => self.cluster_window = parse(key, value)?,
            "close_limit" => self.close_limit = parse(key, value)?,
            "runs" => self.runs = parse(key, value)?,
            "episodes" => self.episodes = parse(key, value)?,
            "max_steps" => self.max_steps = parse(key, value)?,
            "tasks" => self.tasks = parse(key, value)?,
            "task_episodes" => self.task_episodes = parse(key, value)?,
            "top_k" => self.top_k = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|m| m.parse::<Method>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>, _>>()?;
                self.methods.sort();
                self.methods.dedup();
            }
            "tail_fraction" => self.tail_fraction = parse(key, value)?,
            "option_episodes" => self.option_episodes = parse(key, value)?,
            "option_max_steps" => self.option_max_steps = parse(key, value)?,
            "option_alpha" => self.option_alpha = parse(key, value)?,
            "option_epsilon" => self.option_epsilon = parse(key, value)?,
            "bonus" => self.bonus = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError::Invalid(m.into()));
        if !(self.minsup > 0.0 && self.minsup <= 1.0) {
            return fail("minsup must be in (0, 1]");
        }
        if !(self.minconf > 0.0 && self.minconf <= 1.0) {
            return fail("minconf must be in (0, 1]");
        }
        if self.runs == 0 {
            return fail("runs must be at least 1");
        }
        if self.episodes == 0 || self.max_steps == 0 {
            return fail("episodes and max_steps must be positive");
        }
        if self.methods.is_empty() {
            return fail("no methods selected");
        }
        if self.methods.contains(&Method::Hier) && (self.tasks == 0 || self.top_k == 0) {
            return fail("hierarchical runs need tasks and top_k");
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return fail("tail_fraction must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.slip) {
            return fail("slip must be in [0, 1]");
        }
        Ok(())
    }

    pub fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    /// Round-trippable `key = value` text.
    pub fn to_text(&self) -> String {
        let cell = |c: Option<Cell>| c.map_or("random".to_string(), |(x, y)| format!("{x},{y}"));
        let mut out = String::new();
        let _ = writeln!(out, "env = {}", if self.env == EnvKind::Maze { "maze" } else { "taxi" });
        let _ = writeln!(out, "map = {}", self.map);
        let _ = writeln!(out, "progress = {}", self.progress);
        let _ = writeln!(
            out,
            "goal_mode = {}",
            if self.goal_mode == GoalMode::PressAtGoal { "press" } else { "enter" }
        );
        let _ = writeln!(
            out,
            "scheme = {}",
            if self.scheme == RewardScheme::KeyPress { "keypress" } else { "sparse" }
        );
        let _ = writeln!(out, "slip = {}", self.slip);
        let _ = writeln!(out, "taxi_scale = {}", self.taxi_scale);
        let _ = writeln!(out, "start = {}", cell(self.start));
        let _ = writeln!(out, "goal = {}", cell(self.goal));
        let _ = writeln!(out, "minsup = {}", self.minsup);
        let _ = writeln!(out, "minconf = {}", self.minconf);
        let _ = writeln!(out, "max_len = {}", self.max_len.map_or("none".into(), |v| v.to_string()));
        let _ = writeln!(out, "cluster_window = {}", self.cluster_window);
        let _ = writeln!(out, "close_limit = {}", self.close_limit);
        let _ = writeln!(out, "runs = {}", self.runs);
        let _ = writeln!(out, "episodes = {}", self.episodes);
        let _ = writeln!(out, "max_steps = {}", self.max_steps);
        let _ = writeln!(out, "tasks = {}", self.tasks);
        let _ = writeln!(out, "task_episodes = {}", self.task_episodes);
        let _ = writeln!(out, "top_k = {}", self.top_k);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "gamma = {}", self.gamma);
        let _ = writeln!(out, "epsilon = {}", self.epsilon);
        let _ = writeln!(out, "seed = {}", self.seed);
        let methods: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let _ = writeln!(out, "methods = {}", methods.join(","));
        let _ = writeln!(out, "tail_fraction = {}", self.tail_fraction);
        let _ = writeln!(out, "option_episodes = {}", self.option_episodes);
        let _ = writeln!(out, "option_max_steps = {}", self.option_max_steps);
        let _ = writeln!(out, "option_alpha = {}", self.option_alpha);
        let _ = writeln!(out, "option_epsilon = {}", self.option_epsilon);
        let _ = writeln!(out, "bonus = {}", self.bonus);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::parse("# demo\nminsup = 0.5\nmethods = hier, flat\nstart = 1,2\n").unwrap();
        assert_eq!(cfg.minsup, 0.5);
        assert_eq!(cfg.methods, vec![Method::Flat, Method::Hier]);
        assert_eq!(cfg.start, Some((1, 2)));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentConfig::parse("minsup"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(ExperimentConfig::parse("nope = 1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(ExperimentConfig::parse("runs = x"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(ExperimentConfig::parse("minsup = 0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ExperimentConfig::parse("runs = 0"), Err(ConfigError::Invalid(_))));
    }
}
