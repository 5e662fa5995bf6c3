//! Episodic testbeds: key-press mazes, the taxi domain and small explicit
//! MDPs, all behind [`Environment`].

mod grid;
pub mod keymaze;
mod table;
pub mod taxi;

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;
use thiserror::Error;

use crate::codec::{CodecError, DomainSpec, EncodedState};
use crate::learner::Trajectory;
use crate::scalar::Scalar;

pub use grid::{load_map, Cell, GridMap, MapError};
pub use keymaze::{GoalMode, KeyMaze, KeyMazeBuilder, MazeState, ProgressSpec, RewardScheme};
pub use table::TableEnv;
pub use taxi::{Passenger, Taxi, TaxiState, LANDMARK_NAMES};

/// Primitive action index, `0..num_actions`.
pub type Action = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("action {action} invalid; environment has {count} actions")]
    InvalidAction { action: Action, count: usize },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid environment configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome<T, S> {
    pub next_state: S,
    pub reward: T,
    pub terminal: bool,
}

/// Episodic MDP with a discrete action set and an encodable state space.
pub trait Environment<T: Scalar> {
    type State: Clone + Eq + Hash + Debug;

    fn domain(&self) -> &DomainSpec;
    fn encode(&self, s: &Self::State) -> EncodedState;
    fn decode(&self, l: EncodedState) -> Result<Self::State, EnvError>;
    fn num_actions(&self) -> usize;
    fn start(&self) -> Self::State;

    fn action_name(&self, a: Action) -> String {
        a.to_string()
    }

    /// Support of the next-state distribution; probabilities sum to one and
    /// duplicate next states are merged.
    fn transition_distribution(
        &self,
        s: &Self::State,
        a: Action,
    ) -> Result<Vec<(Self::State, T)>, EnvError>;

    fn reward(&self, s: &Self::State, a: Action, next: &Self::State) -> T;

    fn is_terminal(&self, s: &Self::State, a: Action, next: &Self::State) -> bool;

    /// One Monte-Carlo step. Always consumes exactly one uniform draw.
    fn sample_step<R: Rng + ?Sized>(
        &self,
        s: &Self::State,
        a: Action,
        rng: &mut R,
    ) -> Result<StepOutcome<T, Self::State>, EnvError> {
        let dist = self.transition_distribution(s, a)?;
        let u: f64 = rng.gen();
        let next = pick(&dist, u);
        Ok(StepOutcome {
            reward: self.reward(s, a, &next),
            terminal: self.is_terminal(s, a, &next),
            next_state: next,
        })
    }

    fn check_action(&self, a: Action) -> Result<(), EnvError> {
        if a >= self.num_actions() {
            Err(EnvError::InvalidAction {
                action: a,
                count: self.num_actions(),
            })
        } else {
            Ok(())
        }
    }
}

/// Environments laid out on a 2-D grid, for visit-frequency matrices.
pub trait GridView {
    fn grid_dims(&self) -> (usize, usize);
    fn cell_of(&self, l: EncodedState) -> Option<Cell>;
}

fn pick<S: Clone, T: Scalar>(dist: &[(S, T)], u: f64) -> S {
    let mut acc = 0.0;
    for (s, p) in dist {
        acc += p.as_f64();
        if u < acc {
            return s.clone();
        }
    }
    dist.last().expect("non-empty distribution").0.clone()
}

/// Merge duplicate outcomes, keeping first-seen order.
pub(crate) fn merge_outcomes<S: PartialEq, T: Scalar>(items: Vec<(S, T)>) -> Vec<(S, T)> {
    let mut out: Vec<(S, T)> = Vec::with_capacity(items.len());
    for (s, p) in items {
        if p == T::zero() {
            continue;
        }
        match out.iter_mut().find(|(o, _)| *o == s) {
            Some(slot) => slot.1 += p,
            None => out.push((s, p)),
        }
    }
    out
}

/// Most likely action explaining the observed transition `s -> next`, ties
/// to the lowest action id. `None` if no action can produce it.
pub fn infer_action<T: Scalar, E: Environment<T>>(
    env: &E,
    s: &E::State,
    next: &E::State,
) -> Option<Action> {
    let mut best: Option<(Action, T)> = None;
    for a in 0..env.num_actions() {
        let dist = env.transition_distribution(s, a).ok()?;
        if let Some((_, p)) = dist.iter().find(|(o, _)| o == next) {
            if best.is_none_or(|(_, bp)| *p > bp) {
                best = Some((a, *p));
            }
        }
    }
    best.map(|(a, _)| a)
}

/// Fill in the actions of a state-only trajectory with [`infer_action`].
pub fn infer_actions<T: Scalar, E: Environment<T>>(env: &E, t: &Trajectory) -> Result<Trajectory, EnvError> {
    let mut actions = Vec::with_capacity(t.states.len().saturating_sub(1));
    for w in t.states.windows(2) {
        let s = env.decode(w[0])?;
        let n = env.decode(w[1])?;
        let a = infer_action(env, &s, &n)
            .ok_or_else(|| EnvError::InvalidState(format!("no action moves {} to {}", w[0], w[1])))?;
        actions.push(a);
    }
    Ok(Trajectory {
        states: t.states.clone(),
        actions,
        source: t.source,
    })
}

/// All states reachable in one step with nonzero probability, any action.
pub fn successors<T: Scalar, E: Environment<T>>(env: &E, s: &E::State) -> Vec<(Action, E::State)> {
    let mut out = Vec::new();
    for a in 0..env.num_actions() {
        if let Ok(dist) = env.transition_distribution(s, a) {
            for (n, _) in dist {
                out.push((a, n));
            }
        }
    }
    out
}

/// Four compass moves shared by the grid worlds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    Up,
    Right,
    Down,
    Left,
}

impl Dir {
    pub(crate) const ALL: [Dir; 4] = [Dir::Up, Dir::Right, Dir::Down, Dir::Left];

    pub(crate) fn delta(self) -> (isize, isize) {
        match self {
            Dir::Up => (0, -1),
            Dir::Right => (1, 0),
            Dir::Down => (0, 1),
            Dir::Left => (-1, 0),
        }
    }
}

/// Movement noise: the intended direction with probability `1 - slip`,
/// otherwise a uniform draw over all four directions (the intended one
/// included), so the intended move gets `1 - slip + slip / 4`.
pub(crate) fn slip_directions<T: Scalar>(intended: Dir, slip: f64) -> Vec<(Dir, T)> {
    Dir::ALL
        .iter()
        .map(|&d| {
            let mut p = slip / 4.0;
            if d == intended {
                p += 1.0 - slip;
            }
            (d, T::of(p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slip_spreads_uniformly() {
        let d: Vec<(Dir, f64)> = slip_directions(Dir::Up, 0.2);
        assert_eq!(d[0], (Dir::Up, 0.8 + 0.05));
        for (_, p) in &d[1..] {
            assert!((p - 0.05).abs() < 1e-15);
        }
        let total: f64 = d.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merge_sums_duplicates() {
        let m = merge_outcomes(vec![(1, 0.25f64), (2, 0.5), (1, 0.25), (3, 0.0)]);
        assert_eq!(m, vec![(1, 0.5), (2, 0.5)]);
    }
}
