//! Options: primitive actions and learned subtask policies.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HrlError;
use crate::codec::EncodedState;
use crate::envs::{Action, Environment};
use crate::hst::{Exit, Subtask};
use crate::learner::{epsilon_greedy, QTable};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct OptionParams<T> {
    pub alpha: T,
    pub gamma: T,
    pub epsilon: f64,
    pub episodes: usize,
    pub max_steps: usize,
    /// Reward added for executing an exit, subtracted for leaving the
    /// region any other way.
    pub bonus: T,
    pub seed: u64,
}

impl<T: Scalar> Default for OptionParams<T> {
    fn default() -> Self {
        OptionParams {
            alpha: T::of(0.2),
            gamma: T::of(0.9),
            epsilon: 0.2,
            episodes: 3000,
            max_steps: 200,
            bonus: T::of(10.0),
            seed: 0,
        }
    }
}

/// A subtask policy over primitive actions, confined to its region.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedOption<T> {
    pub subtask: usize,
    pub q: QTable<T>,
    pub states: BTreeSet<EncodedState>,
    pub exits: Vec<Exit>,
    pub priority: f64,
}

impl<T: Scalar> LearnedOption<T> {
    pub fn is_exit(&self, s: EncodedState, a: Action) -> bool {
        self.exits.iter().any(|e| e.state == s && e.action == a)
    }

    /// The exit action at an exit state, otherwise greedy.
    pub fn action(&self, s: EncodedState) -> Action {
        match self.exits.iter().find(|e| e.state == s) {
            Some(e) => e.action,
            None => self.q.greedy(s),
        }
    }
}

/// A temporally extended action. Primitives are one-step options.
#[derive(Debug, Clone, PartialEq)]
pub enum OptionPolicy<T> {
    Primitive(Action),
    Learned(LearnedOption<T>),
}

impl<T: Scalar> OptionPolicy<T> {
    pub fn primitives(n: usize) -> Vec<Self> {
        (0..n).map(OptionPolicy::Primitive).collect()
    }

    pub fn can_start(&self, s: EncodedState) -> bool {
        match self {
            OptionPolicy::Primitive(_) => true,
            OptionPolicy::Learned(o) => o.states.contains(&s),
        }
    }

    pub fn priority(&self) -> f64 {
        match self {
            OptionPolicy::Primitive(_) => 0.0,
            OptionPolicy::Learned(o) => o.priority,
        }
    }

    pub fn subtask(&self) -> Option<usize> {
        match self {
            OptionPolicy::Primitive(_) => None,
            OptionPolicy::Learned(o) => Some(o.subtask),
        }
    }

    pub fn label(&self) -> String {
        match self {
            OptionPolicy::Primitive(a) => format!("a{a}"),
            OptionPolicy::Learned(o) => format!("T{}", o.subtask),
        }
    }
}

/// Region states from which no exit can be reached by transitions that
/// stay inside the region.
pub fn unreachable_states<T: Scalar, E: Environment<T>>(
    env: &E,
    states: &BTreeSet<EncodedState>,
    exits: &[Exit],
) -> Result<Vec<EncodedState>, HrlError> {
    let mut preds: HashMap<EncodedState, Vec<EncodedState>> = HashMap::new();
    for &l in states {
        let s = env.decode(l)?;
        for a in 0..env.num_actions() {
            if exits.iter().any(|e| e.state == l && e.action == a) {
                continue;
            }
            for (n, _) in env.transition_distribution(&s, a)? {
                let nl = env.encode(&n);
                if states.contains(&nl) {
                    preds.entry(nl).or_default().push(l);
                }
            }
        }
    }
    let mut reach: BTreeSet<EncodedState> = exits.iter().map(|e| e.state).filter(|s| states.contains(s)).collect();
    let mut stack: Vec<EncodedState> = reach.iter().copied().collect();
    while let Some(l) = stack.pop() {
        for &p in preds.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
            if reach.insert(p) {
                stack.push(p);
            }
        }
    }
    Ok(states.difference(&reach).copied().collect())
}

/// Q-learning inside the subtask's region from uniformly drawn start
/// states. Executing an exit ends the episode with `+bonus`; leaving the
/// region otherwise ends it with `-bonus`.
pub fn learn_option<T: Scalar, E: Environment<T>>(
    env: &E,
    subtask: &Subtask,
    params: &OptionParams<T>,
) -> Result<OptionPolicy<T>, HrlError> {
    if subtask.exits.is_empty() || subtask.states.is_empty() {
        return Err(HrlError::NotAnOption(subtask.id));
    }
    let unreachable = unreachable_states(env, &subtask.states, &subtask.exits)?;
    if !unreachable.is_empty() {
        return Err(HrlError::Unreachable {
            subtask: subtask.id,
            states: unreachable,
        });
    }
    let starts: Vec<EncodedState> = subtask.states.iter().copied().collect();
    let mut q = QTable::for_env(env);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ (subtask.id as u64).wrapping_mul(0x9e37_79b9));
    for _ in 0..params.episodes {
        let mut l = *starts.choose(&mut rng).expect("non-empty region");
        let mut s = env.decode(l)?;
        for _ in 0..params.max_steps {
            let a = epsilon_greedy(q.row(l), params.epsilon, &mut rng);
            let out = env.sample_step(&s, a, &mut rng)?;
            let nl = env.encode(&out.next_state);
            let exit = subtask.is_exit(l, a);
            if exit || out.terminal || !subtask.contains(nl) {
                let r = if exit {
                    out.reward + params.bonus
                } else if out.terminal {
                    out.reward
                } else {
                    out.reward - params.bonus
                };
                q.update(l, a, r, None, params.alpha, params.gamma);
                break;
            }
            q.update(l, a, out.reward, Some(nl), params.alpha, params.gamma);
            l = nl;
            s = out.next_state;
        }
    }
    Ok(OptionPolicy::Learned(LearnedOption {
        subtask: subtask.id,
        q,
        states: subtask.states.clone(),
        exits: subtask.exits.clone(),
        priority: subtask.confidence,
    }))
}

/// How an option execution ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionEnd {
    Exited,
    /// Left the region without executing an exit.
    Interrupted,
    Terminal,
    Budget,
    /// A primitive finished its single step.
    Stepped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionRun<T, S> {
    pub next_state: S,
    /// Σ γ^j r_j over the executed steps.
    pub reward: T,
    /// γ^k for k executed steps.
    pub discount: T,
    pub end: OptionEnd,
    /// (action, reward, next state) per executed step.
    pub trace: Vec<(Action, T, EncodedState)>,
}

impl<T, S> OptionRun<T, S> {
    pub fn steps(&self) -> usize {
        self.trace.len()
    }

    pub fn terminal(&self) -> bool {
        self.end == OptionEnd::Terminal
    }
}

/// Execute an option from `s` for at most `budget` steps (at least one).
pub fn run_option<T: Scalar, E: Environment<T>, R: Rng + ?Sized>(
    env: &E,
    option: &OptionPolicy<T>,
    s: &E::State,
    gamma: T,
    budget: usize,
    rng: &mut R,
) -> Result<OptionRun<T, E::State>, HrlError> {
    match option {
        OptionPolicy::Primitive(a) => {
            let out = env.sample_step(s, *a, rng)?;
            let nl = env.encode(&out.next_state);
            Ok(OptionRun {
                reward: out.reward,
                discount: gamma,
                end: if out.terminal { OptionEnd::Terminal } else { OptionEnd::Stepped },
                trace: vec![(*a, out.reward, nl)],
                next_state: out.next_state,
            })
        }
        OptionPolicy::Learned(o) => {
            let mut cur = s.clone();
            let mut l = env.encode(&cur);
            let mut acc = T::zero();
            let mut disc = T::one();
            let mut trace = Vec::new();
            let end = loop {
                let a = o.action(l);
                let out = env.sample_step(&cur, a, rng)?;
                let nl = env.encode(&out.next_state);
                acc += disc * out.reward;
                disc *= gamma;
                trace.push((a, out.reward, nl));
                let exited = o.is_exit(l, a);
                cur = out.next_state;
                l = nl;
                if out.terminal {
                    break OptionEnd::Terminal;
                }
                if exited {
                    break OptionEnd::Exited;
                }
                if !o.states.contains(&l) {
                    break OptionEnd::Interrupted;
                }
                if trace.len() >= budget.max(1) {
                    break OptionEnd::Budget;
                }
            };
            Ok(OptionRun {
                next_state: cur,
                reward: acc,
                discount: disc,
                end,
                trace,
            })
        }
    }
}
