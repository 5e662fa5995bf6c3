//! SMDP Q-learning over options.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::option::{run_option, OptionPolicy};
use super::HrlError;
use crate::codec::EncodedState;
use crate::envs::Environment;
use crate::learner::{EpisodeRecord, LearnerParams, QTable};
use crate::scalar::Scalar;

/// Action values over (state, option index).
#[derive(Debug, Clone, PartialEq)]
pub struct AbstractQ<T> {
    q: QTable<T>,
    priorities: Vec<f64>,
    tie_tolerance: T,
}

impl<T: Scalar> AbstractQ<T> {
    pub fn new<E: Environment<T>>(env: &E, options: &[OptionPolicy<T>]) -> Self {
        AbstractQ {
            q: QTable::new(env.domain(), options.len()),
            priorities: options.iter().map(OptionPolicy::priority).collect(),
            tie_tolerance: T::of(1e-9),
        }
    }

    /// Values within `tol` of the best admissible value count as tied for
    /// the priority tie-break.
    pub fn with_tie_tolerance(mut self, tol: T) -> Self {
        self.tie_tolerance = tol;
        self
    }

    pub fn table(&self) -> &QTable<T> {
        &self.q
    }

    pub fn get(&self, s: EncodedState, o: usize) -> T {
        self.q.get(s, o)
    }

    pub fn set(&mut self, s: EncodedState, o: usize, v: T) {
        self.q.set(s, o, v);
    }

    pub fn max_admissible(&self, s: EncodedState, admissible: &[usize]) -> T {
        let row = self.q.row(s);
        admissible.iter().map(|&o| row[o]).fold(T::neg_infinity(), T::max)
    }

    /// Best admissible option. Among options within the tie tolerance of
    /// the best, a strictly higher priority wins; otherwise the lowest
    /// index holding the maximum.
    pub fn select(&self, s: EncodedState, admissible: &[usize]) -> usize {
        let row = self.q.row(s);
        let mut best = admissible[0];
        for &o in &admissible[1..] {
            if row[o] > row[best] {
                best = o;
            }
        }
        let floor = row[best] - self.tie_tolerance;
        let mut pick = best;
        for &o in admissible {
            if row[o] >= floor && self.priorities[o] > self.priorities[pick] {
                pick = o;
            }
        }
        pick
    }

    fn update(&mut self, s: EncodedState, o: usize, target: T, alpha: T) {
        let q = self.q.get(s, o);
        self.q.set(s, o, q + alpha * (target - q));
    }
}

/// Learned options whose region holds `s`; primitives only where no
/// learned option applies.
pub fn admissible<T: Scalar>(options: &[OptionPolicy<T>], s: EncodedState) -> Vec<usize> {
    let learned: Vec<usize> = (0..options.len())
        .filter(|&o| matches!(options[o], OptionPolicy::Learned(_)) && options[o].can_start(s))
        .collect();
    if !learned.is_empty() {
        return learned;
    }
    (0..options.len())
        .filter(|&o| matches!(options[o], OptionPolicy::Primitive(_)))
        .collect()
}

/// Train a fresh abstract table from `env.start()`.
pub fn smdp_train<T: Scalar, E: Environment<T>>(
    env: &E,
    options: &[OptionPolicy<T>],
    params: &LearnerParams<T>,
) -> Result<(AbstractQ<T>, Vec<EpisodeRecord<T>>), HrlError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut q = AbstractQ::new(env, options);
    let records = smdp_train_into(env, &mut q, options, params, &mut rng)?;
    Ok((q, records))
}

/// Epsilon-greedy over admissible options with the update
/// `Q(s,o) += α [R + γ^k max Q(s',·) − Q(s,o)]`, where `R` is the
/// discounted reward accumulated over the option's `k` steps. Records hold
/// primitive steps; `max_steps` caps primitive steps per episode.
pub fn smdp_train_into<T: Scalar, E: Environment<T>, R: Rng + ?Sized>(
    env: &E,
    q: &mut AbstractQ<T>,
    options: &[OptionPolicy<T>],
    params: &LearnerParams<T>,
    rng: &mut R,
) -> Result<Vec<EpisodeRecord<T>>, HrlError> {
    params.validate()?;
    if options.is_empty() {
        return Err(HrlError::NoOptions);
    }
    let mut records = Vec::with_capacity(params.episodes);
    for _ in 0..params.episodes {
        let mut s = env.start();
        let mut l = env.encode(&s);
        let mut rec = EpisodeRecord::start(l);
        let mut adm = admissible(options, l);
        while rec.steps() < params.max_steps {
            if adm.is_empty() {
                return Err(HrlError::NoAdmissible(l));
            }
            let u: f64 = rng.gen();
            let o = if u < params.epsilon {
                adm[rng.gen_range(0..adm.len())]
            } else {
                q.select(l, &adm)
            };
            let budget = params.max_steps - rec.steps();
            let run = run_option(env, &options[o], &s, params.gamma, budget, rng)?;
            for &(a, r, n) in &run.trace {
                rec.push(a, r, n);
            }
            let nl = env.encode(&run.next_state);
            let terminal = run.terminal();
            adm = admissible(options, nl);
            let target = if terminal {
                run.reward
            } else {
                run.reward + run.discount * q.max_admissible(nl, &adm)
            };
            q.update(l, o, target, params.alpha);
            s = run.next_state;
            l = nl;
            if terminal {
                rec.reached_goal = true;
                break;
            }
        }
        records.push(rec);
    }
    Ok(records)
}

/// Greedy execution of the abstract policy.
pub fn smdp_rollout<T: Scalar, E: Environment<T>, R: Rng + ?Sized>(
    env: &E,
    q: &AbstractQ<T>,
    options: &[OptionPolicy<T>],
    start: &E::State,
    gamma: T,
    max_steps: usize,
    rng: &mut R,
) -> Result<(EpisodeRecord<T>, Vec<usize>), HrlError> {
    let mut s = start.clone();
    let mut l = env.encode(&s);
    let mut rec = EpisodeRecord::start(l);
    let mut chosen = Vec::new();
    while rec.steps() < max_steps {
        let adm = admissible(options, l);
        if adm.is_empty() {
            return Err(HrlError::NoAdmissible(l));
        }
        let o = q.select(l, &adm);
        chosen.push(o);
        let run = run_option(env, &options[o], &s, gamma, max_steps - rec.steps(), rng)?;
        for &(a, r, n) in &run.trace {
            rec.push(a, r, n);
        }
        l = env.encode(&run.next_state);
        s = run.next_state;
        if run.end == super::OptionEnd::Terminal {
            rec.reached_goal = true;
            break;
        }
    }
    Ok((rec, chosen))
}
