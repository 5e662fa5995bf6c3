//! Sequential rule generation from maximal frequent itemsets.

use std::collections::{BTreeMap, HashSet};

use super::{meets, support_count, FrequentItemset, MinerError, Transaction};
use crate::codec::EncodedState;

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialRule {
    /// Premise items in visit order.
    pub premise: Vec<EncodedState>,
    pub consequent: EncodedState,
    /// Support of the whole itemset.
    pub support: f64,
    /// σ(premise ∪ consequent) / σ(premise).
    pub confidence: f64,
    /// Supporting transactions that visit the items in exactly this order.
    pub order_frequency: usize,
}

impl SequentialRule {
    /// Premise followed by the consequent.
    pub fn sequence(&self) -> Vec<EncodedState> {
        let mut v = self.premise.clone();
        v.push(self.consequent);
        v
    }

    pub fn len(&self) -> usize {
        self.premise.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Confidence descending, support descending, then item sequence.
    pub fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .confidence
            .total_cmp(&self.confidence)
            .then(other.support.total_cmp(&self.support))
            .then_with(|| self.sequence().cmp(&other.sequence()))
    }
}

/// σ(A ∪ B) / σ(A), zero when A never occurs.
pub fn confidence_of(premise: &[EncodedState], consequent: &[EncodedState], transactions: &[Transaction]) -> f64 {
    let a = support_count(premise, transactions);
    if a == 0 {
        return 0.0;
    }
    let mut all = premise.to_vec();
    all.extend_from_slice(consequent);
    support_count(&all, transactions) as f64 / a as f64
}

/// Fraction of transactions containing the premise in which the consequent
/// is first visited after every premise item.
pub fn sequential_confidence(premise: &[EncodedState], consequent: EncodedState, transactions: &[Transaction]) -> f64 {
    let mut with_premise = 0usize;
    let mut ordered = 0usize;
    for t in transactions.iter().filter(|t| t.contains_all(premise)) {
        with_premise += 1;
        let last = premise.iter().filter_map(|p| t.first_occurrence(*p)).max();
        if let (Some(c), Some(l)) = (t.first_occurrence(consequent), last) {
            if c > l {
                ordered += 1;
            }
        } else if premise.is_empty() && t.contains(consequent) {
            ordered += 1;
        }
    }
    if with_premise == 0 {
        0.0
    } else {
        ordered as f64 / with_premise as f64
    }
}

/// Each item as consequent with the rest as premise.
pub fn single_consequent_candidates(items: &[EncodedState]) -> Vec<(Vec<EncodedState>, EncodedState)> {
    (0..items.len())
        .map(|i| {
            let mut rest = items.to_vec();
            let c = rest.remove(i);
            (rest, c)
        })
        .collect()
}

/// Number of rules A → B with A, B nonempty and disjoint over `d` items:
/// 3^d − 2^(d+1) + 1.
pub fn candidate_rule_count(d: u32) -> Result<u64, MinerError> {
    if d == 0 {
        return Err(MinerError::NoItems);
    }
    let of = || MinerError::Overflow(d);
    let three = 3u64.checked_pow(d).ok_or_else(of)?;
    let two = 2u64.checked_pow(d + 1).ok_or_else(of)?;
    Ok(three + 1 - two)
}

/// One rule per distinct first-visit ordering among the transactions that
/// contain every item. The last visited item becomes the consequent.
pub fn order_premise(items: &[EncodedState], transactions: &[Transaction]) -> Vec<SequentialRule> {
    if items.len() < 2 {
        return Vec::new();
    }
    let mut orders: BTreeMap<Vec<EncodedState>, usize> = BTreeMap::new();
    for t in transactions.iter().filter(|t| t.contains_all(items)) {
        *orders.entry(t.visit_order(items)).or_default() += 1;
    }
    let n = transactions.len();
    let count = support_count(items, transactions);
    let mut rules: Vec<SequentialRule> = orders
        .into_iter()
        .map(|(mut seq, freq)| {
            let consequent = seq.pop().expect("at least two items");
            let premise_count = support_count(&seq, transactions);
            SequentialRule {
                premise: seq,
                consequent,
                support: count as f64 / n as f64,
                confidence: count as f64 / premise_count as f64,
                order_frequency: freq,
            }
        })
        .collect();
    rules.sort_by(|a, b| b.order_frequency.cmp(&a.order_frequency).then_with(|| a.sequence().cmp(&b.sequence())));
    rules
}

/// Sequential rules from the maximal frequent itemsets, filtered by
/// `minconf` and sorted canonically.
pub fn generate_rules(
    frequents: &[FrequentItemset],
    transactions: &[Transaction],
    minconf: f64,
) -> Result<Vec<SequentialRule>, MinerError> {
    super::check_threshold("minconf", minconf)?;
    let mut rules = Vec::new();
    for itemset in maximal(frequents) {
        if itemset.items.len() < 2 {
            continue;
        }
        for rule in order_premise(&itemset.items, transactions) {
            let premise_count = support_count(&rule.premise, transactions);
            if meets(itemset.count, premise_count, minconf) {
                rules.push(rule);
            }
        }
    }
    rules.sort_by(SequentialRule::canonical_cmp);
    Ok(rules)
}

/// An itemset is maximal when no one-item extension is frequent; downward
/// closure makes that equivalent to having no frequent superset.
fn maximal(frequents: &[FrequentItemset]) -> Vec<&FrequentItemset> {
    let sets: HashSet<&[EncodedState]> = frequents.iter().map(|f| f.items.as_slice()).collect();
    let singles: Vec<EncodedState> = frequents
        .iter()
        .filter(|f| f.items.len() == 1)
        .map(|f| f.items[0])
        .collect();
    let mut probe = Vec::new();
    frequents
        .iter()
        .filter(|f| {
            !singles.iter().any(|&x| {
                if f.items.binary_search(&x).is_ok() {
                    return false;
                }
                probe.clear();
                probe.extend_from_slice(&f.items);
                let at = probe.partition_point(|&y| y < x);
                probe.insert(at, x);
                sets.contains(probe.as_slice())
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::fp_growth;
    use super::*;

    fn e(v: &[u64]) -> Vec<EncodedState> {
        v.iter().map(|&x| EncodedState(x)).collect()
    }

    fn tx(rows: &[&[u64]]) -> Vec<Transaction> {
        rows.iter().enumerate().map(|(i, r)| Transaction::from_sequence(&e(r), i)).collect()
    }

    #[test]
    fn rule_counts() {
        assert_eq!(candidate_rule_count(1).unwrap(), 0);
        assert_eq!(candidate_rule_count(2).unwrap(), 2);
        assert_eq!(candidate_rule_count(3).unwrap(), 12);
        assert!(candidate_rule_count(0).is_err());
        assert!(candidate_rule_count(41).is_err());
        assert_eq!(candidate_rule_count(40).unwrap(), 3u64.pow(40) - 2u64.pow(41) + 1);
        assert_eq!(single_consequent_candidates(&e(&[1, 2, 3])).len(), 3);
    }

    #[test]
    fn two_orderings_equal_frequency() {
        let t = tx(&[&[1, 2, 3, 4], &[2, 1, 3, 4], &[1, 2, 3, 4], &[2, 1, 3, 4]]);
        let rules = order_premise(&e(&[1, 2, 3, 4]), &t);
        assert_eq!(rules.len(), 2);
        assert_eq!(rules[0].order_frequency, 2);
        assert_eq!(rules[1].order_frequency, 2);
        assert!(rules.iter().all(|r| r.consequent == EncodedState(4)));
    }

    #[test]
    fn agreeing_transactions_give_one_rule() {
        let t = tx(&[&[5, 1, 9], &[5, 2, 1, 9]]);
        let rules = order_premise(&e(&[1, 5, 9]), &t);
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].premise, e(&[5, 1]));
        assert_eq!(rules[0].consequent, EncodedState(9));
        assert_eq!(rules[0].order_frequency, 2);
    }

    #[test]
    fn only_maximal_itemsets_produce_rules() {
        let t = tx(&[&[1, 2, 3], &[1, 2, 3], &[1, 2]]);
        let f = fp_growth(&t, 0.6, None).unwrap();
        let rules = generate_rules(&f, &t, 0.5).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].sequence(), e(&[1, 2, 3]));
        assert!((rules[0].confidence - 2.0 / 3.0).abs() < 1e-12);
        assert!(generate_rules(&f, &t, 0.7).unwrap().is_empty());
    }

    #[test]
    fn sequential_confidence_counts_order() {
        let t = tx(&[&[1, 2], &[2, 1], &[1, 3]]);
        assert!((sequential_confidence(&e(&[1]), EncodedState(2), &t) - 1.0 / 3.0).abs() < 1e-12);
        assert!((confidence_of(&e(&[1]), &e(&[2]), &t) - 2.0 / 3.0).abs() < 1e-12);
    }
}
