//! Explicit tabular MDPs for small test problems and oracles.

use super::{Action, EnvError, Environment};
use crate::codec::{DomainSpec, EncodedState};
use crate::scalar::Scalar;

/// States are `0..n`; transitions and rewards are given per `(s, a)`.
#[derive(Debug, Clone)]
pub struct TableEnv<T> {
    transitions: Vec<Vec<Vec<(usize, T)>>>,
    rewards: Vec<Vec<T>>,
    terminal: Vec<bool>,
    start: usize,
    domain: DomainSpec,
}

impl<T: Scalar> TableEnv<T> {
    /// `transitions[s][a]` is the next-state distribution, `rewards[s][a]`
    /// the reward for taking `a` in `s`. Entering a state flagged in
    /// `terminal` ends the episode.
    pub fn new(
        transitions: Vec<Vec<Vec<(usize, T)>>>,
        rewards: Vec<Vec<T>>,
        terminal: Vec<bool>,
        start: usize,
    ) -> Result<Self, EnvError> {
        let n = transitions.len();
        if n == 0 || rewards.len() != n || terminal.len() != n || start >= n {
            return Err(EnvError::Config("inconsistent table sizes".into()));
        }
        let m = transitions[0].len();
        for (s, row) in transitions.iter().enumerate() {
            if row.len() != m || rewards[s].len() != m {
                return Err(EnvError::Config(format!("state {s} has wrong action count")));
            }
            for (a, dist) in row.iter().enumerate() {
                let total: f64 = dist.iter().map(|(_, p)| p.as_f64()).sum();
                if dist.iter().any(|(t, _)| *t >= n) || (total - 1.0).abs() > 1e-9 {
                    return Err(EnvError::Config(format!("bad distribution at ({s}, {a})")));
                }
            }
        }
        Ok(TableEnv {
            transitions,
            rewards,
            terminal,
            start,
            domain: DomainSpec::univariate(n)?,
        })
    }

    /// Deterministic table: `next[s][a]` is the successor.
    pub fn deterministic(
        next: Vec<Vec<usize>>,
        rewards: Vec<Vec<T>>,
        terminal: Vec<bool>,
        start: usize,
    ) -> Result<Self, EnvError> {
        let transitions = next
            .into_iter()
            .map(|row| row.into_iter().map(|t| vec![(t, T::one())]).collect())
            .collect();
        Self::new(transitions, rewards, terminal, start)
    }

    pub fn with_start(&self, start: usize) -> Self {
        TableEnv {
            start,
            ..self.clone()
        }
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_terminal_state(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn table_reward(&self, s: usize, a: Action) -> T {
        self.rewards[s][a]
    }

    pub fn table_transitions(&self, s: usize, a: Action) -> &[(usize, T)] {
        &self.transitions[s][a]
    }
}

impl<T: Scalar> Environment<T> for TableEnv<T> {
    type State = usize;

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn encode(&self, s: &usize) -> EncodedState {
        self.domain.from_ordinal(*s)
    }

    fn decode(&self, l: EncodedState) -> Result<usize, EnvError> {
        Ok(self.domain.ordinal(l)?)
    }

    fn num_actions(&self) -> usize {
        self.transitions[0].len()
    }

    fn start(&self) -> usize {
        self.start
    }

    fn transition_distribution(&self, s: &usize, a: Action) -> Result<Vec<(usize, T)>, EnvError> {
        <Self as Environment<T>>::check_action(self, a)?;
        self.transitions
            .get(*s)
            .map(|row| row[a].clone())
            .ok_or_else(|| EnvError::InvalidState(format!("{s}")))
    }

    fn reward(&self, s: &usize, a: Action, _next: &usize) -> T {
        self.rewards[*s][a]
    }

    fn is_terminal(&self, _s: &usize, _a: Action, next: &usize) -> bool {
        self.terminal[*next]
    }
}
