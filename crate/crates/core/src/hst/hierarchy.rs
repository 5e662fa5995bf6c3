//! Subtasks, region partitioning and trajectory consistency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write;

use super::{Exit, Hst, HstError, NodeId};
use crate::codec::{DomainSpec, EncodedState};
use crate::envs::Environment;
use crate::learner::Trajectory;
use crate::scalar::Scalar;

/// ⟨X, S, G, C⟩ plus bookkeeping. The root subtask has no exits and ends
/// with the episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtask {
    pub id: usize,
    /// Indices of the state variables that change within the region.
    pub variables: BTreeSet<usize>,
    pub states: BTreeSet<EncodedState>,
    pub exits: Vec<Exit>,
    pub children: Vec<usize>,
    /// Rule confidence carried over from the tree, used as option priority.
    pub confidence: f64,
    pub hst_node: NodeId,
}

impl Subtask {
    pub fn is_root(&self) -> bool {
        self.exits.is_empty()
    }

    pub fn contains(&self, s: EncodedState) -> bool {
        self.states.contains(&s)
    }

    pub fn is_exit(&self, s: EncodedState, a: usize) -> bool {
        self.exits.iter().any(|e| e.state == s && e.action == a)
    }
}

/// A stretch of a trajectory handled by one subtask. `end` is the index of
/// the exit state, or the last index for the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub subtask: usize,
    pub start: usize,
    pub end: usize,
    pub exit: Option<Exit>,
    /// False when the exit sequence left the root-anchored tree paths.
    pub matched: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violation: Option<String>,
}

impl ConsistencyReport {
    fn ok() -> Self {
        ConsistencyReport {
            consistent: true,
            violation: None,
        }
    }

    fn fail(msg: String) -> Self {
        ConsistencyReport {
            consistent: false,
            violation: Some(msg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskHierarchy {
    subtasks: Vec<Subtask>,
    parent: Vec<Option<usize>>,
    resultants: Vec<BTreeSet<EncodedState>>,
    warnings: usize,
}

struct Skel {
    hst_node: NodeId,
    exit: Option<Exit>,
    confidence: f64,
    children: Vec<usize>,
}

/// Partition the trajectories into subtask regions. Tree nodes whose
/// subgoal is not an exit state are spliced out; subtask ids follow a
/// post-order walk so the root comes last.
pub fn build_hierarchy(
    hst: &Hst,
    exits: &[Exit],
    trajectories: &[Trajectory],
    domain: &DomainSpec,
) -> Result<TaskHierarchy, HstError> {
    if exits.is_empty() {
        return Err(HstError::NoExits);
    }
    if let Some(t) = trajectories.iter().find(|t| !t.has_actions() && t.states.len() > 1) {
        return Err(HstError::MissingActions(t.source));
    }
    let mut by_state: BTreeMap<EncodedState, Exit> = BTreeMap::new();
    for e in exits {
        by_state.entry(e.state).or_insert(*e);
    }

    let mut skel = vec![Skel {
        hst_node: Hst::ROOT,
        exit: None,
        confidence: 0.0,
        children: Vec::new(),
    }];
    let mut stack = vec![(Hst::ROOT, 0usize)];
    while let Some((node, owner)) = stack.pop() {
        let mut next = Vec::new();
        for &c in &hst.node(node).children {
            let hn = hst.node(c);
            let next_owner = match hn.subgoal.and_then(|s| by_state.get(&s)) {
                Some(&e) => {
                    let existing = skel[owner].children.iter().copied().find(|&k| skel[k].exit == Some(e));
                    match existing {
                        Some(k) => {
                            skel[k].confidence = skel[k].confidence.max(hn.confidence);
                            k
                        }
                        None => {
                            let k = skel.len();
                            skel.push(Skel {
                                hst_node: c,
                                exit: Some(e),
                                confidence: hn.confidence,
                                children: Vec::new(),
                            });
                            skel[owner].children.push(k);
                            k
                        }
                    }
                }
                None => owner,
            };
            next.push((c, next_owner));
        }
        stack.extend(next.into_iter().rev());
    }

    let mut post = Vec::with_capacity(skel.len());
    let mut visit = vec![(0usize, false)];
    while let Some((k, done)) = visit.pop() {
        if done {
            post.push(k);
        } else {
            visit.push((k, true));
            visit.extend(skel[k].children.iter().rev().map(|&c| (c, false)));
        }
    }
    let mut id_of = vec![0usize; skel.len()];
    for (id, &k) in post.iter().enumerate() {
        id_of[k] = id;
    }
    let mut subtasks: Vec<Subtask> = post
        .iter()
        .enumerate()
        .map(|(id, &k)| Subtask {
            id,
            variables: BTreeSet::new(),
            states: BTreeSet::new(),
            exits: skel[k].exit.into_iter().collect(),
            children: skel[k].children.iter().map(|&c| id_of[c]).collect(),
            confidence: skel[k].confidence,
            hst_node: skel[k].hst_node,
        })
        .collect();
    let mut parent = vec![None; subtasks.len()];
    for st in &subtasks {
        for &c in &st.children {
            parent[c] = Some(st.id);
        }
    }
    let n = subtasks.len();
    let mut h = TaskHierarchy {
        subtasks: std::mem::take(&mut subtasks),
        parent,
        resultants: vec![BTreeSet::new(); n],
        warnings: 0,
    };

    let mut owner: BTreeMap<EncodedState, usize> = BTreeMap::new();
    let mut regions: Vec<BTreeSet<EncodedState>> = vec![BTreeSet::new(); n];
    for t in trajectories {
        for seg in h.segment(t) {
            if !seg.matched {
                h.warnings += 1;
            }
            for &s in &t.states[seg.start..=seg.end] {
                match owner.get(&s) {
                    Some(&o) if o != seg.subtask => h.warnings += 1,
                    Some(_) => {}
                    None => {
                        owner.insert(s, seg.subtask);
                        regions[seg.subtask].insert(s);
                    }
                }
            }
            if seg.exit.is_some() {
                if let Some(&r) = t.states.get(seg.end + 1) {
                    h.resultants[seg.subtask].insert(r);
                }
            }
        }
    }
    for (i, region) in regions.into_iter().enumerate() {
        h.subtasks[i].states = region;
        let clash: Vec<EncodedState> = h.subtasks[i].states.intersection(&h.resultants[i]).copied().collect();
        for s in clash {
            h.subtasks[i].states.remove(&s);
            h.warnings += 1;
        }
    }
    h.recompute_variables(domain);
    if h.warnings > 0 {
        log::warn!("hierarchy built with {} region warnings", h.warnings);
    }
    Ok(h)
}

impl TaskHierarchy {
    pub fn subtasks(&self) -> &[Subtask] {
        &self.subtasks
    }

    pub fn subtask(&self, id: usize) -> &Subtask {
        &self.subtasks[id]
    }

    pub fn len(&self) -> usize {
        self.subtasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtasks.is_empty()
    }

    pub fn root_id(&self) -> usize {
        self.subtasks.len() - 1
    }

    pub fn root(&self) -> &Subtask {
        &self.subtasks[self.root_id()]
    }

    pub fn parent(&self, id: usize) -> Option<usize> {
        self.parent[id]
    }

    /// Resultant states observed after each subtask's exits.
    pub fn resultants(&self, id: usize) -> &BTreeSet<EncodedState> {
        &self.resultants[id]
    }

    pub fn warnings(&self) -> usize {
        self.warnings
    }

    /// The subtask whose region holds `s`.
    pub fn region_of(&self, s: EncodedState) -> Option<usize> {
        self.subtasks.iter().position(|t| t.contains(s))
    }

    /// Parent-child pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.subtasks
            .iter()
            .flat_map(|t| t.children.iter().map(move |&c| (t.id, c)))
            .collect()
    }

    /// Every exit, in subtask id order.
    pub fn exits(&self) -> Vec<Exit> {
        self.subtasks.iter().flat_map(|t| t.exits.iter().copied()).collect()
    }

    pub(crate) fn recompute_variables(&mut self, domain: &DomainSpec) {
        for i in 0..self.subtasks.len() {
            let mut vars = BTreeSet::new();
            if domain.variable_count() == 1 {
                vars.insert(0);
            } else {
                let digits: Vec<Vec<usize>> = self.subtasks[i]
                    .states
                    .iter()
                    .chain(self.resultants[i].iter())
                    .filter_map(|&s| domain.decode(s).ok())
                    .map(|f| f.digits().to_vec())
                    .collect();
                if let Some(first) = digits.first() {
                    for v in 0..first.len() {
                        if digits.iter().any(|d| d[v] != first[v]) {
                            vars.insert(v);
                        }
                    }
                }
            }
            self.subtasks[i].variables = vars;
        }
    }

    /// Grow each region to everything reachable from it under `env` without
    /// executing one of its exits, entering a terminal state, or entering a
    /// state another region already holds. At most `limit` states are
    /// added per region.
    pub fn close_regions<T: Scalar, E: Environment<T>>(&mut self, env: &E, limit: usize) -> Result<(), HstError> {
        let mut owner: BTreeMap<EncodedState, usize> = BTreeMap::new();
        for t in &self.subtasks {
            for &s in &t.states {
                owner.insert(s, t.id);
            }
        }
        for i in 0..self.subtasks.len() {
            let mut queue: VecDeque<EncodedState> = self.subtasks[i].states.iter().copied().collect();
            let mut added = 0usize;
            'bfs: while let Some(l) = queue.pop_front() {
                let s = env.decode(l).map_err(|e| HstError::Env(e.to_string()))?;
                for a in 0..env.num_actions() {
                    if self.subtasks[i].is_exit(l, a) {
                        continue;
                    }
                    let dist = env.transition_distribution(&s, a).map_err(|e| HstError::Env(e.to_string()))?;
                    for (next, _) in dist {
                        if env.is_terminal(&s, a, &next) {
                            continue;
                        }
                        let nl = env.encode(&next);
                        if owner.contains_key(&nl) || self.resultants[i].contains(&nl) {
                            continue;
                        }
                        if added >= limit {
                            log::warn!("region of T{i} truncated at {limit} added states");
                            break 'bfs;
                        }
                        owner.insert(nl, i);
                        self.subtasks[i].states.insert(nl);
                        added += 1;
                        queue.push_back(nl);
                    }
                }
            }
        }
        self.recompute_variables(env.domain());
        Ok(())
    }

    fn exit_lookup(&self) -> BTreeMap<(EncodedState, usize), usize> {
        let mut m = BTreeMap::new();
        for t in &self.subtasks {
            for e in &t.exits {
                m.entry((e.state, e.action)).or_insert(t.id);
            }
        }
        m
    }

    /// Cut a trajectory at its exit executions and match the exit sequence,
    /// last exit first, against the subtask tree.
    pub fn segment(&self, t: &Trajectory) -> Vec<Segment> {
        let lookup = self.exit_lookup();
        let occurrences: Vec<(usize, Exit)> = t
            .actions
            .iter()
            .enumerate()
            .filter(|(p, &a)| lookup.contains_key(&(t.states[*p], a)))
            .map(|(p, &a)| (p, Exit { state: t.states[p], action: a }))
            .collect();
        let mut owners = vec![(0usize, true); occurrences.len()];
        let mut node = self.root_id();
        for (k, (_, e)) in occurrences.iter().enumerate().rev() {
            let child = self.subtasks[node].children.iter().copied().find(|&c| self.subtasks[c].exits.contains(e));
            owners[k] = match child {
                Some(c) => (c, true),
                None => (lookup[&(e.state, e.action)], false),
            };
            node = owners[k].0;
        }
        let mut segments = Vec::with_capacity(occurrences.len() + 1);
        let mut start = 0;
        for ((p, e), (owner, matched)) in occurrences.iter().zip(owners) {
            segments.push(Segment {
                subtask: owner,
                start,
                end: *p,
                exit: Some(*e),
                matched,
            });
            start = p + 1;
        }
        if start < t.states.len() {
            segments.push(Segment {
                subtask: self.root_id(),
                start,
                end: t.states.len() - 1,
                exit: None,
                matched: true,
            });
        }
        segments
    }

    /// Whether the trajectory splits along exits into segments that stay in
    /// their subtask regions, following a root-anchored path.
    pub fn check_consistency(&self, t: &Trajectory) -> ConsistencyReport {
        if !t.has_actions() && t.states.len() > 1 {
            return ConsistencyReport::fail(format!("trajectory {} has no actions", t.source));
        }
        for (k, seg) in self.segment(t).iter().enumerate() {
            let st = &self.subtasks[seg.subtask];
            if !seg.matched {
                let e = seg.exit.expect("unmatched segments end at an exit");
                return ConsistencyReport::fail(format!(
                    "segment {k} (T{}): exit ({}, {}) is off the tree path",
                    st.id, e.state, e.action
                ));
            }
            let body = &t.states[seg.start..seg.end];
            for (j, &s) in body.iter().enumerate() {
                if !st.contains(s) {
                    return ConsistencyReport::fail(format!(
                        "segment {k} (T{}): state {s} at step {} outside region",
                        st.id,
                        seg.start + j
                    ));
                }
                if seg.exit.is_some() && st.exits.iter().any(|e| e.state == s) {
                    return ConsistencyReport::fail(format!(
                        "segment {k} (T{}): exit state {s} visited at step {} before its exit",
                        st.id,
                        seg.start + j
                    ));
                }
            }
        }
        ConsistencyReport::ok()
    }

    /// Indented tree from the root.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root_id(), 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let t = &self.subtasks[id];
            let exits: Vec<String> = t.exits.iter().map(|e| format!("(s{},{})", e.state, e.action)).collect();
            let vars: Vec<String> = t.variables.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{}T{}{} G={} X={{{}}} S={{{}}}",
                "  ".repeat(depth),
                t.id,
                if t.is_root() { " root" } else { "" },
                if exits.is_empty() { "-".to_string() } else { exits.join(",") },
                vars.join(","),
                compress(&t.states)
            );
            stack.extend(t.children.iter().rev().map(|&c| (c, depth + 1)));
        }
        out
    }

    /// `id subgoal exit_state exit_action children`, one subtask per line.
    pub fn to_adjacency(&self) -> String {
        let mut out = String::from("# id subgoal exit_state exit_action children\n");
        for t in &self.subtasks {
            let kids: Vec<String> = t.children.iter().map(|c| c.to_string()).collect();
            let (state, action) = match t.exits.first() {
                Some(e) => (e.state.to_string(), e.action.to_string()),
                None => ("-".into(), "-".into()),
            };
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                t.id,
                state,
                state,
                action,
                if kids.is_empty() { "-".into() } else { kids.join(",") }
            );
        }
        out
    }
}

/// `1-3,7,9-10` style listing of ascending ids.
fn compress(states: &BTreeSet<EncodedState>) -> String {
    let mut parts = Vec::new();
    let mut iter = states.iter().map(|s| s.0).peekable();
    while let Some(lo) = iter.next() {
        let mut hi = lo;
        while iter.peek() == Some(&(hi + 1)) {
            hi = iter.next().unwrap();
        }
        parts.push(if lo == hi { lo.to_string() } else { format!("{lo}-{hi}") });
    }
    parts.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_compress() {
        let s: BTreeSet<EncodedState> = [1, 2, 3, 7, 9, 10].into_iter().map(EncodedState).collect();
        assert_eq!(compress(&s), "1-3,7,9-10");
        assert_eq!(compress(&BTreeSet::new()), "");
    }
}
