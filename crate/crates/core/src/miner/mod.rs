//! Sequential association rule mining over trajectory transactions.
//!
//! Each successful trajectory becomes a transaction: the set of distinct
//! visited states plus the time step of each state's first visit. FP-growth
//! finds the frequent itemsets, rules are generated from the maximal ones and
//! the first-visit times order each rule's items into a sequence.

mod fptree;
mod io;
mod rules;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::codec::EncodedState;
use crate::learner::Trajectory;

pub use fptree::{fp_growth, FpTree, FrequentItemset};
pub use io::{rules_to_csv, trajectories_from_csv, trajectories_to_csv};
pub use rules::{
    candidate_rule_count, confidence_of, generate_rules, order_premise, sequential_confidence,
    single_consequent_candidates, SequentialRule,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinerError {
    #[error("threshold {name}={value} outside (0, 1]")]
    Threshold { name: &'static str, value: f64 },
    #[error("rule count for d={0} overflows u64")]
    Overflow(u32),
    #[error("rule count needs at least one item")]
    NoItems,
    #[error("malformed csv at line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Distinct states of one trajectory with their first-visit step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    items: Vec<EncodedState>,
    first_occurrence: BTreeMap<EncodedState, usize>,
    source_id: usize,
}

impl Transaction {
    pub fn from_sequence(states: &[EncodedState], source_id: usize) -> Self {
        let mut first_occurrence = BTreeMap::new();
        for (t, s) in states.iter().enumerate() {
            first_occurrence.entry(*s).or_insert(t);
        }
        Transaction {
            items: first_occurrence.keys().copied().collect(),
            first_occurrence,
            source_id,
        }
    }

    /// Ascending state ids.
    pub fn items(&self) -> &[EncodedState] {
        &self.items
    }

    pub fn first_occurrence(&self, s: EncodedState) -> Option<usize> {
        self.first_occurrence.get(&s).copied()
    }

    pub fn source_id(&self) -> usize {
        self.source_id
    }

    pub fn contains(&self, s: EncodedState) -> bool {
        self.first_occurrence.contains_key(&s)
    }

    pub fn contains_all(&self, items: &[EncodedState]) -> bool {
        items.iter().all(|s| self.contains(*s))
    }

    /// `items` sorted by first visit.
    pub fn visit_order(&self, items: &[EncodedState]) -> Vec<EncodedState> {
        let mut v = items.to_vec();
        v.sort_by_key(|s| (self.first_occurrence(*s), *s));
        v
    }
}

/// Transactions plus the number of empty trajectories that were skipped.
pub fn trajectories_to_transactions(trajs: &[Trajectory]) -> (Vec<Transaction>, usize) {
    let mut skipped = 0;
    let mut out = Vec::with_capacity(trajs.len());
    for t in trajs {
        if t.states.is_empty() {
            skipped += 1;
            continue;
        }
        out.push(Transaction::from_sequence(&t.states, t.source));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} empty trajectories");
    }
    (out, skipped)
}

/// Number of transactions containing every item.
pub fn support_count(items: &[EncodedState], transactions: &[Transaction]) -> usize {
    transactions.iter().filter(|t| t.contains_all(items)).count()
}

pub fn support_of(items: &[EncodedState], transactions: &[Transaction]) -> f64 {
    if transactions.is_empty() {
        return 0.0;
    }
    support_count(items, transactions) as f64 / transactions.len() as f64
}

/// Inclusive threshold test `count / n >= threshold`, tolerant to the
/// rounding of decimal thresholds.
pub fn meets(count: usize, n: usize, threshold: f64) -> bool {
    n > 0 && count as f64 / n as f64 >= threshold - 1e-12
}

pub(crate) fn check_threshold(name: &'static str, value: f64) -> Result<(), MinerError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(MinerError::Threshold { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[u64]) -> Vec<EncodedState> {
        v.iter().map(|&x| EncodedState(x)).collect()
    }

    #[test]
    fn dedup_keeps_first_visit() {
        let t = Transaction::from_sequence(&s(&[10, 11, 10, 12]), 3);
        assert_eq!(t.items(), s(&[10, 11, 12]).as_slice());
        assert_eq!(t.first_occurrence(EncodedState(10)), Some(0));
        assert_eq!(t.first_occurrence(EncodedState(11)), Some(1));
        assert_eq!(t.first_occurrence(EncodedState(12)), Some(3));
        assert_eq!(t.source_id(), 3);
    }

    #[test]
    fn empty_inputs() {
        let (t, skipped) = trajectories_to_transactions(&[]);
        assert!(t.is_empty());
        assert_eq!(skipped, 0);
        let (t, skipped) = trajectories_to_transactions(&[
            Trajectory::from_states(vec![], 0),
            Trajectory::from_states(s(&[1]), 1),
        ]);
        assert_eq!(t.len(), 1);
        assert_eq!(skipped, 1);
    }

    #[test]
    fn inclusive_thresholds() {
        assert!(meets(9, 10, 0.9));
        assert!(meets(5, 80, 0.0625));
        assert!(!meets(4, 80, 0.0625));
        assert!(!meets(0, 0, 0.1));
    }
}
