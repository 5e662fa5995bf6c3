//! Exit extraction and adjacent-subgoal clustering.

use std::collections::{BTreeMap, BTreeSet};

use super::HstError;
use crate::codec::EncodedState;
use crate::envs::Action;
use crate::learner::Trajectory;

/// A state-action pair whose execution completes a subtask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exit {
    pub state: EncodedState,
    pub action: Action,
}

fn first_index(t: &Trajectory, s: EncodedState) -> Option<usize> {
    t.states.iter().position(|x| *x == s)
}

/// Most common key, ties to the smallest.
fn majority<K: Ord + Copy>(counts: &BTreeMap<K, usize>) -> Option<K> {
    let mut best: Option<(K, usize)> = None;
    for (&k, &c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.map(|(k, _)| k)
}

fn mean_first_time(s: EncodedState, trajectories: &[Trajectory]) -> f64 {
    let times: Vec<usize> = trajectories.iter().filter_map(|t| first_index(t, s)).collect();
    if times.is_empty() {
        f64::INFINITY
    } else {
        times.iter().sum::<usize>() as f64 / times.len() as f64
    }
}

/// One exit per surviving subgoal, in order of mean first visit.
///
/// A subgoal whose most common predecessor is itself a subgoal is absorbed
/// by that predecessor's exit. The exit action is the most common action
/// taken at the subgoal's first visit, ties to the lowest id; a subgoal that
/// only ever ends its trajectory takes the action that entered it.
pub fn extract_exits(subgoals: &[EncodedState], trajectories: &[Trajectory]) -> Result<Vec<Exit>, HstError> {
    if let Some(t) = trajectories.iter().find(|t| !t.has_actions() && t.states.len() > 1) {
        return Err(HstError::MissingActions(t.source));
    }
    let set: BTreeSet<EncodedState> = subgoals.iter().copied().collect();
    let mut exits = Vec::new();
    for &s in &set {
        let mut preds: BTreeMap<EncodedState, usize> = BTreeMap::new();
        let mut actions: BTreeMap<Action, usize> = BTreeMap::new();
        let mut final_actions: BTreeMap<Action, usize> = BTreeMap::new();
        for t in trajectories {
            let Some(i) = first_index(t, s) else { continue };
            if i > 0 {
                *preds.entry(t.states[i - 1]).or_default() += 1;
            }
            match t.actions.get(i) {
                Some(&a) => *actions.entry(a).or_default() += 1,
                None if i > 0 => *final_actions.entry(t.actions[i - 1]).or_default() += 1,
                None => {}
            }
        }
        if majority(&preds).is_some_and(|p| set.contains(&p)) {
            continue;
        }
        let action = majority(&actions).or_else(|| majority(&final_actions));
        match action {
            Some(action) => exits.push(Exit { state: s, action }),
            None => log::warn!("subgoal {s} has no recorded action; no exit"),
        }
    }
    exits.sort_by(|a, b| {
        mean_first_time(a.state, trajectories)
            .total_cmp(&mean_first_time(b.state, trajectories))
            .then(a.cmp(b))
    });
    Ok(exits)
}

/// Group subgoals whose first visits fall within `window` steps of each
/// other in a majority of the trajectories containing both. Each cluster
/// lists its earliest member first; clusters are ordered by that member.
pub fn cluster_adjacent_subgoals(
    subgoals: &[EncodedState],
    trajectories: &[Trajectory],
    window: usize,
) -> Vec<Vec<EncodedState>> {
    let items: Vec<EncodedState> = subgoals.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            let (mut both, mut close) = (0usize, 0usize);
            for t in trajectories {
                if let (Some(a), Some(b)) = (first_index(t, items[i]), first_index(t, items[j])) {
                    both += 1;
                    if a.abs_diff(b) <= window {
                        close += 1;
                    }
                }
            }
            if both > 0 && 2 * close > both {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<EncodedState>> = BTreeMap::new();
    for i in 0..items.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(items[i]);
    }
    let key = |s: &EncodedState| (mean_first_time(*s, trajectories), *s);
    let mut clusters: Vec<Vec<EncodedState>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_by(|a, b| key(a).0.total_cmp(&key(b).0).then(a.cmp(b)));
            g
        })
        .collect();
    clusters.sort_by(|a, b| key(&a[0]).0.total_cmp(&key(&b[0]).0).then(a[0].cmp(&b[0])));
    clusters
}
