//! The decomposed value recursion V_i(s) = max_a [V_{child(a)}(s) + Q_i(s, a)].

use super::option::OptionPolicy;
use super::smdp::{admissible, AbstractQ};
use super::HrlError;
use crate::codec::EncodedState;
use crate::hst::TaskHierarchy;
use crate::learner::QTable;
use crate::scalar::Scalar;

/// Per-subtask tables over `primitives ++ children`. A child column holds
/// the completion value added to that child's own value.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedQ<T> {
    pub primitives: usize,
    pub children: Vec<Vec<usize>>,
    pub tables: Vec<QTable<T>>,
    /// States where each subtask may run; `None` means everywhere.
    pub regions: Vec<Option<std::collections::BTreeSet<EncodedState>>>,
}

impl<T: Scalar> DecomposedQ<T> {
    /// Assemble tables from learned pieces. Option subtasks take their
    /// option tables, the root takes the primitive columns of the abstract
    /// table (the best admissible abstract value where primitives are not
    /// admissible), and child columns carry the abstract value of invoking the
    /// child minus that child's own value, so the recursion returns the
    /// abstract value wherever the child may start.
    pub fn from_learned(h: &TaskHierarchy, options: &[OptionPolicy<T>], abstract_q: &AbstractQ<T>) -> Self {
        let domain = abstract_q.table().domain().clone();
        let primitives = options.iter().filter(|o| matches!(o, OptionPolicy::Primitive(_))).count();
        let mut tables: Vec<QTable<T>> = Vec::with_capacity(h.len());
        let mut regions = Vec::with_capacity(h.len());
        for st in h.subtasks() {
            let width = primitives + st.children.len();
            let mut t = QTable::new(&domain, width);
            let source = options.iter().find_map(|o| match o {
                OptionPolicy::Learned(l) if l.subtask == st.id => Some(l),
                _ => None,
            });
            for s in domain.iter() {
                let adm = admissible(options, s);
                for a in 0..primitives {
                    let v = match (st.is_root(), source) {
                        (false, Some(l)) => l.q.get(s, a),
                        _ if adm.contains(&a) => abstract_q.get(s, a),
                        _ => abstract_q.max_admissible(s, &adm),
                    };
                    t.set(s, a, v);
                }
            }
            tables.push(t);
            regions.push(if st.is_root() { None } else { Some(st.states.clone()) });
        }
        let mut dq = DecomposedQ {
            primitives,
            children: h.subtasks().iter().map(|s| s.children.clone()).collect(),
            tables,
            regions,
        };
        for st in h.subtasks() {
            for (j, &c) in st.children.iter().enumerate() {
                let Some(col) = options.iter().position(|o| o.subtask() == Some(c)) else {
                    continue;
                };
                for s in domain.iter() {
                    if !dq.admits(c, s) {
                        continue;
                    }
                    let own = dq.value(c, s).unwrap_or_else(|_| T::zero());
                    let v = abstract_q.get(s, col) - own;
                    dq.tables[st.id].set(s, primitives + j, v);
                }
            }
        }
        dq
    }

    fn admits(&self, subtask: usize, s: EncodedState) -> bool {
        self.regions[subtask].as_ref().is_none_or(|r| r.contains(&s))
    }

    fn value(&self, subtask: usize, s: EncodedState) -> Result<T, HrlError> {
        let mut path = Vec::new();
        self.eval(subtask, s, &mut path)
    }

    fn eval(&self, i: usize, s: EncodedState, path: &mut Vec<usize>) -> Result<T, HrlError> {
        if path.contains(&i) {
            path.push(i);
            return Err(HrlError::Cycle(path.clone()));
        }
        path.push(i);
        let row = self.tables[i].row(s);
        let mut best = T::neg_infinity();
        for &v in &row[..self.primitives] {
            best = best.max(v);
        }
        for (j, &c) in self.children[i].iter().enumerate() {
            if !self.admits(c, s) {
                continue;
            }
            let v = self.eval(c, s, path)? + row[self.primitives + j];
            best = best.max(v);
        }
        path.pop();
        Ok(best)
    }
}

/// Value of `state` under `subtask`, recursing through child subtasks
/// whose regions hold the state. Fails on a cyclic child relation.
pub fn decomposed_value<T: Scalar>(dq: &DecomposedQ<T>, subtask: usize, state: EncodedState) -> Result<T, HrlError> {
    dq.value(subtask, state)
}
