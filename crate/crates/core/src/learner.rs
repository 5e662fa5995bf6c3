//! Flat tabular Q-learning, trajectory recording and greedy rollouts.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::codec::{DomainSpec, EncodedState};
use crate::envs::{Action, EnvError, Environment};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("invalid learner parameter: {0}")]
    Params(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("malformed table csv at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Dense action-value table over an environment's state domain.
/// Unvisited entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<T> {
    domain: DomainSpec,
    actions: usize,
    values: Vec<T>,
}

impl<T: Scalar> QTable<T> {
    pub fn new(domain: &DomainSpec, actions: usize) -> Self {
        QTable {
            domain: domain.clone(),
            actions,
            values: vec![T::zero(); domain.size() as usize * actions],
        }
    }

    pub fn for_env<E: Environment<T>>(env: &E) -> Self {
        Self::new(env.domain(), env.num_actions())
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn base(&self, s: EncodedState) -> usize {
        let o = self
            .domain
            .ordinal(s)
            .unwrap_or_else(|e| panic!("state outside table domain: {e}"));
        o * self.actions
    }

    /// # Panics
    /// If `s` is outside the table's domain.
    pub fn row(&self, s: EncodedState) -> &[T] {
        let b = self.base(s);
        &self.values[b..b + self.actions]
    }

    pub fn get(&self, s: EncodedState, a: Action) -> T {
        self.row(s)[a]
    }

    pub fn set(&mut self, s: EncodedState, a: Action, v: T) {
        let b = self.base(s);
        self.values[b + a] = v;
    }

    pub fn max_value(&self, s: EncodedState) -> T {
        max_of(self.row(s))
    }

    /// Argmax with ties to the lowest action id.
    pub fn greedy(&self, s: EncodedState) -> Action {
        argmax(self.row(s))
    }

    /// One Q-learning backup. `next = None` marks a terminal transition.
    pub fn update(&mut self, s: EncodedState, a: Action, r: T, next: Option<EncodedState>, alpha: T, gamma: T) {
        let target = match next {
            Some(n) => r + gamma * self.max_value(n),
            None => r,
        };
        let b = self.base(s) + a;
        let q = self.values[b];
        self.values[b] = q + alpha * (target - q);
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `state,action,value` rows for every entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,action,value\n");
        for (o, row) in self.values.chunks(self.actions).enumerate() {
            let s = self.domain.from_ordinal(o);
            for (a, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{s},{a},{v}");
            }
        }
        out
    }

    pub fn from_csv(domain: &DomainSpec, actions: usize, text: &str) -> Result<Self, LearnerError> {
        let mut q = Self::new(domain, actions);
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| LearnerError::Csv {
                line: i + 1,
                msg: msg.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(err("expected 3 fields"));
            }
            let s: u64 = f[0].trim().parse().map_err(|_| err("bad state"))?;
            let a: usize = f[1].trim().parse().map_err(|_| err("bad action"))?;
            let v: f64 = f[2].trim().parse().map_err(|_| err("bad value"))?;
            if a >= actions || domain.ordinal(EncodedState(s)).is_err() {
                return Err(err("entry outside table"));
            }
            q.set(EncodedState(s), a, T::of(v));
        }
        Ok(q)
    }
}

pub(crate) fn max_of<T: Scalar>(row: &[T]) -> T {
    row.iter().copied().fold(T::neg_infinity(), T::max)
}

pub(crate) fn argmax<T: Scalar>(row: &[T]) -> Action {
    let mut best = 0;
    for (a, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = a;
        }
    }
    best
}

/// Epsilon-greedy choice. Always consumes one uniform draw, plus one more
/// when exploring.
pub(crate) fn epsilon_greedy<T: Scalar, R: Rng + ?Sized>(row: &[T], epsilon: f64, rng: &mut R) -> Action {
    let u: f64 = rng.gen();
    if u < epsilon {
        rng.gen_range(0..row.len())
    } else {
        argmax(row)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub epsilon: f64,
    pub episodes: usize,
    pub max_steps: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for LearnerParams<T> {
    fn default() -> Self {
        LearnerParams {
            alpha: T::of(0.1),
            gamma: T::of(0.9),
            epsilon: 0.1,
            episodes: 500,
            max_steps: 1000,
            seed: 0,
        }
    }
}

impl<T: Scalar> LearnerParams<T> {
    pub fn validate(&self) -> Result<(), LearnerError> {
        let (a, g) = (self.alpha.as_f64(), self.gamma.as_f64());
        if !(a > 0.0 && a <= 1.0) {
            return Err(LearnerError::Params(format!("alpha {a} not in (0,1]")));
        }
        if !(g > 0.0 && g <= 1.0) {
            return Err(LearnerError::Params(format!("gamma {g} not in (0,1]")));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(LearnerError::Params(format!("epsilon {} not in [0,1]", self.epsilon)));
        }
        if self.max_steps == 0 {
            return Err(LearnerError::Params("max_steps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord<T> {
    pub states: Vec<EncodedState>,
    pub actions: Vec<Action>,
    pub rewards: Vec<T>,
    pub total_reward: T,
    pub reached_goal: bool,
}

impl<T: Scalar> EpisodeRecord<T> {
    pub(crate) fn start(s: EncodedState) -> Self {
        EpisodeRecord {
            states: vec![s],
            actions: Vec::new(),
            rewards: Vec::new(),
            total_reward: T::zero(),
            reached_goal: false,
        }
    }

    pub(crate) fn push(&mut self, a: Action, r: T, next: EncodedState) {
        self.actions.push(a);
        self.rewards.push(r);
        self.states.push(next);
        self.total_reward += r;
    }

    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

/// A recorded state/action sequence handed to the miner.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    pub states: Vec<EncodedState>,
    /// `actions[i]` is taken in `states[i]`; may be empty when only states
    /// are known.
    pub actions: Vec<Action>,
    pub source: usize,
}

impl Trajectory {
    pub fn from_states(states: Vec<EncodedState>, source: usize) -> Self {
        Trajectory {
            states,
            actions: Vec::new(),
            source,
        }
    }

    pub fn has_actions(&self) -> bool {
        !self.states.is_empty() && self.actions.len() + 1 == self.states.len()
    }

    /// Drop every loop: whenever a state recurs, the steps between its
    /// visits are cut. The result is still a feasible path because the
    /// outgoing action of the last visit is kept.
    pub fn without_loops(&self) -> Trajectory {
        let with_actions = self.has_actions();
        let mut states: Vec<EncodedState> = Vec::with_capacity(self.states.len());
        let mut actions: Vec<Action> = Vec::new();
        for (i, s) in self.states.iter().enumerate() {
            if let Some(pos) = states.iter().position(|x| x == s) {
                states.truncate(pos + 1);
                if with_actions {
                    actions.truncate(pos);
                }
            } else {
                states.push(*s);
            }
            if with_actions && i < self.actions.len() {
                actions.truncate(states.len() - 1);
                actions.push(self.actions[i]);
            }
        }
        Trajectory {
            states,
            actions: if with_actions { actions } else { Vec::new() },
            source: self.source,
        }
    }
}

/// Train a fresh table with epsilon-greedy Q-learning from `env.start()`.
pub fn train<T: Scalar, E: Environment<T>>(
    env: &E,
    params: &LearnerParams<T>,
) -> Result<(QTable<T>, Vec<EpisodeRecord<T>>), LearnerError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut q = QTable::for_env(env);
    let records = train_into(env, &mut q, params, &mut rng)?;
    Ok((q, records))
}

/// Continue training `q` with the caller's generator.
pub fn train_into<T: Scalar, E: Environment<T>, R: Rng + ?Sized>(
    env: &E,
    q: &mut QTable<T>,
    params: &LearnerParams<T>,
    rng: &mut R,
) -> Result<Vec<EpisodeRecord<T>>, LearnerError> {
    params.validate()?;
    let mut records = Vec::with_capacity(params.episodes);
    for _ in 0..params.episodes {
        let mut s = env.start();
        let mut l = env.encode(&s);
        let mut rec = EpisodeRecord::start(l);
        for _ in 0..params.max_steps {
            let a = epsilon_greedy(q.row(l), params.epsilon, rng);
            let out = env.sample_step(&s, a, rng)?;
            let nl = env.encode(&out.next_state);
            q.update(l, a, out.reward, (!out.terminal).then_some(nl), params.alpha, params.gamma);
            rec.push(a, out.reward, nl);
            s = out.next_state;
            l = nl;
            if out.terminal {
                rec.reached_goal = true;
                break;
            }
        }
        records.push(rec);
    }
    Ok(records)
}

/// Re-apply the Q-learning backups of recorded episodes in order.
pub fn replay_episodes<T: Scalar>(q: &mut QTable<T>, records: &[EpisodeRecord<T>], alpha: T, gamma: T) {
    for rec in records {
        let last = rec.actions.len().saturating_sub(1);
        for (i, (&a, &r)) in rec.actions.iter().zip(&rec.rewards).enumerate() {
            let terminal = rec.reached_goal && i == last;
            q.update(rec.states[i], a, r, (!terminal).then_some(rec.states[i + 1]), alpha, gamma);
        }
    }
}

/// Outcome of trajectory selection; no successes is not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    NoSuccess,
    Found(Vec<Trajectory>),
}

impl Selection {
    pub fn into_vec(self) -> Vec<Trajectory> {
        match self {
            Selection::NoSuccess => Vec::new(),
            Selection::Found(v) => v,
        }
    }
}

/// The `k` goal-reaching episodes with the highest total reward, ties to the
/// earlier episode. Each trajectory's `source` is its episode index.
pub fn select_successful_trajectories<T: Scalar>(
    records: &[EpisodeRecord<T>],
    k: usize,
) -> Result<Selection, LearnerError> {
    if k == 0 {
        return Err(LearnerError::Params("k must be at least 1".into()));
    }
    let mut ok: Vec<(usize, &EpisodeRecord<T>)> =
        records.iter().enumerate().filter(|(_, r)| r.reached_goal).collect();
    if ok.is_empty() {
        return Ok(Selection::NoSuccess);
    }
    ok.sort_by(|(ia, a), (ib, b)| {
        b.total_reward
            .partial_cmp(&a.total_reward)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });
    Ok(Selection::Found(
        ok.into_iter()
            .take(k)
            .map(|(i, r)| Trajectory {
                states: r.states.clone(),
                actions: r.actions.clone(),
                source: i,
            })
            .collect(),
    ))
}

/// Follow argmax-Q (lowest action on ties) from `start`.
pub fn greedy_rollout<T: Scalar, E: Environment<T>, R: Rng + ?Sized>(
    env: &E,
    q: &QTable<T>,
    start: &E::State,
    rng: &mut R,
    max_steps: usize,
) -> Result<EpisodeRecord<T>, LearnerError> {
    let mut s = start.clone();
    let mut l = env.encode(&s);
    let mut rec = EpisodeRecord::start(l);
    for _ in 0..max_steps {
        let a = q.greedy(l);
        let out = env.sample_step(&s, a, rng)?;
        let nl = env.encode(&out.next_state);
        rec.push(a, out.reward, nl);
        s = out.next_state;
        l = nl;
        if out.terminal {
            rec.reached_goal = true;
            break;
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::TableEnv;

    fn rec(total: f64, goal: bool) -> EpisodeRecord<f64> {
        EpisodeRecord {
            states: vec![EncodedState(1), EncodedState(2)],
            actions: vec![0],
            rewards: vec![total],
            total_reward: total,
            reached_goal: goal,
        }
    }

    #[test]
    fn selection_orders_by_reward_then_index() {
        let recs = vec![rec(5.0, true), rec(-2.0, false), rec(7.0, true)];
        let sel = select_successful_trajectories(&recs, 2).unwrap().into_vec();
        assert_eq!(sel.iter().map(|t| t.source).collect::<Vec<_>>(), vec![2, 0]);
        let all = select_successful_trajectories(&recs, 10).unwrap().into_vec();
        assert_eq!(all.len(), 2);
        let ties = vec![rec(1.0, true), rec(1.0, true)];
        let sel = select_successful_trajectories(&ties, 2).unwrap().into_vec();
        assert_eq!(sel[0].source, 0);
    }

    #[test]
    fn selection_without_success_is_flagged() {
        let recs = vec![rec(5.0, false)];
        assert_eq!(select_successful_trajectories(&recs, 1).unwrap(), Selection::NoSuccess);
        assert!(select_successful_trajectories(&recs, 0).is_err());
    }

    #[test]
    fn single_state_converges_to_geometric_fixed_point() {
        let env: TableEnv<f64> = TableEnv::deterministic(vec![vec![0]], vec![vec![1.0]], vec![false], 0).unwrap();
        let params = LearnerParams {
            alpha: 0.5,
            gamma: 0.9,
            epsilon: 0.0,
            episodes: 1,
            max_steps: 2000,
            seed: 1,
        };
        let (q, recs) = train(&env, &params).unwrap();
        assert!(!recs[0].reached_goal);
        assert!((q.get(EncodedState(1), 0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn one_update_on_two_state_chain() {
        // state 0 --right(1)--> state 1 (terminal, reward 1); action 0 stays
        let env: TableEnv<f64> = TableEnv::deterministic(
            vec![vec![0, 1], vec![1, 1]],
            vec![vec![0.0, 1.0], vec![0.0, 0.0]],
            vec![false, true],
            0,
        )
        .unwrap();
        let mut q = QTable::for_env(&env);
        let a = EncodedState(1);
        q.update(a, 1, 1.0, None, 1.0, 0.9);
        assert_eq!(q.get(a, 1), 1.0);
        assert_eq!(q.greedy(a), 1);
    }

    #[test]
    fn zero_table_greedy_picks_action_zero() {
        let env: TableEnv<f64> = TableEnv::deterministic(
            vec![vec![0, 0, 1], vec![1, 1, 1]],
            vec![vec![-1.0; 3], vec![0.0; 3]],
            vec![false, true],
            0,
        )
        .unwrap();
        let q: QTable<f64> = QTable::for_env(&env);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = greedy_rollout(&env, &q, &0, &mut rng, 7).unwrap();
        assert!(r.actions.iter().all(|&a| a == 0));
        assert_eq!(r.steps(), 7);
        assert!(!r.reached_goal);
        assert_eq!(r.total_reward, -7.0);
    }

    #[test]
    fn csv_round_trip() {
        let d = DomainSpec::univariate(3).unwrap();
        let mut q: QTable<f64> = QTable::new(&d, 2);
        q.set(EncodedState(2), 1, -3.25);
        let back = QTable::<f64>::from_csv(&d, 2, &q.to_csv()).unwrap();
        assert_eq!(back, q);
        assert!(QTable::<f64>::from_csv(&d, 2, "h\n9,0,1\n").is_err());
    }

    #[test]
    fn loop_removal_keeps_feasible_path() {
        let s = |v: &[u64]| v.iter().map(|&x| EncodedState(x)).collect::<Vec<_>>();
        let t = Trajectory {
            states: s(&[1, 2, 3, 2, 4, 1, 5]),
            actions: vec![10, 11, 12, 13, 14, 15],
            source: 0,
        };
        let n = t.without_loops();
        assert_eq!(n.states, s(&[1, 5]));
        assert_eq!(n.actions, vec![15]);
        let t = Trajectory {
            states: s(&[1, 2, 3, 2, 4]),
            actions: vec![10, 11, 12, 13],
            source: 0,
        };
        let n = t.without_loops();
        assert_eq!(n.states, s(&[1, 2, 4]));
        assert_eq!(n.actions, vec![10, 13]);
        let t = Trajectory::from_states(s(&[1, 2, 1, 3]), 4);
        assert_eq!(t.without_loops().states, s(&[1, 3]));
    }
}
