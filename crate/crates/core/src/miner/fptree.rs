//! FP-tree construction and FP-growth frequent itemset mining.

use std::collections::HashMap;

use super::{check_threshold, meets, MinerError, Transaction};
use crate::codec::EncodedState;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequentItemset {
    /// Ascending state ids.
    pub items: Vec<EncodedState>,
    pub count: usize,
    pub support: f64,
}

#[derive(Debug, Clone)]
struct Node {
    item: Option<usize>,
    count: usize,
    parent: Option<usize>,
    children: Vec<usize>,
}

/// Prefix tree of weighted transactions. Items are ranked by descending
/// count, ties by ascending state id; rank 0 sits nearest the root.
#[derive(Debug, Clone)]
pub struct FpTree {
    nodes: Vec<Node>,
    // rank -> item
    order: Vec<EncodedState>,
    // rank -> total count
    counts: Vec<usize>,
    // rank -> nodes holding that item
    header: Vec<Vec<usize>>,
}

impl FpTree {
    /// Build from weighted item lists, keeping items whose total weight is
    /// at least `min_count`.
    pub fn build(patterns: &[(Vec<EncodedState>, usize)], min_count: usize) -> Self {
        let mut totals: HashMap<EncodedState, usize> = HashMap::new();
        for (items, w) in patterns {
            for i in items {
                *totals.entry(*i).or_default() += w;
            }
        }
        let mut ranked: Vec<(EncodedState, usize)> =
            totals.into_iter().filter(|(_, c)| *c >= min_count.max(1)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let rank: HashMap<EncodedState, usize> =
            ranked.iter().enumerate().map(|(r, (i, _))| (*i, r)).collect();

        let mut tree = FpTree {
            nodes: vec![Node {
                item: None,
                count: 0,
                parent: None,
                children: Vec::new(),
            }],
            order: ranked.iter().map(|(i, _)| *i).collect(),
            counts: ranked.iter().map(|(_, c)| *c).collect(),
            header: vec![Vec::new(); ranked.len()],
        };
        for (items, w) in patterns {
            let mut path: Vec<usize> = items.iter().filter_map(|i| rank.get(i).copied()).collect();
            path.sort_unstable();
            path.dedup();
            tree.insert(&path, *w);
        }
        tree
    }

    pub fn from_transactions(transactions: &[Transaction], min_count: usize) -> Self {
        let patterns: Vec<(Vec<EncodedState>, usize)> =
            transactions.iter().map(|t| (t.items().to_vec(), 1)).collect();
        Self::build(&patterns, min_count)
    }

    fn insert(&mut self, ranks: &[usize], weight: usize) {
        let mut cur = 0;
        self.nodes[0].count += weight;
        for &r in ranks {
            let existing = self.nodes[cur]
                .children
                .iter()
                .copied()
                .find(|&c| self.nodes[c].item == Some(r));
            cur = match existing {
                Some(c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(Node {
                        item: Some(r),
                        count: 0,
                        parent: Some(cur),
                        children: Vec::new(),
                    });
                    self.nodes[cur].children.push(id);
                    self.header[r].push(id);
                    id
                }
            };
            self.nodes[cur].count += weight;
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Items in tree order.
    pub fn items(&self) -> &[EncodedState] {
        &self.order
    }

    /// Sum of node counts along an item's header chain.
    pub fn chain_count(&self, item: EncodedState) -> usize {
        self.order
            .iter()
            .position(|i| *i == item)
            .map_or(0, |r| self.header[r].iter().map(|&n| self.nodes[n].count).sum())
    }

    pub fn item_count(&self, item: EncodedState) -> usize {
        self.order.iter().position(|i| *i == item).map_or(0, |r| self.counts[r])
    }

    /// Counts never increase from a node to its children, and ranks strictly
    /// increase along every path.
    pub fn check_invariants(&self) -> bool {
        self.nodes.iter().enumerate().skip(1).all(|(id, n)| {
            let p = &self.nodes[n.parent.expect("non-root has parent")];
            let rank_ok = match p.item {
                Some(pr) => pr < n.item.unwrap(),
                None => true,
            };
            rank_ok && n.count <= p.count && self.header[n.item.unwrap()].contains(&id)
        })
    }

    fn prefix_path(&self, mut node: usize) -> Vec<EncodedState> {
        let mut path = Vec::new();
        while let Some(p) = self.nodes[node].parent {
            if let Some(r) = self.nodes[p].item {
                path.push(self.order[r]);
            }
            node = p;
        }
        path
    }

    fn mine(
        &self,
        suffix: &[EncodedState],
        min_count: usize,
        n: usize,
        max_len: usize,
        out: &mut Vec<FrequentItemset>,
    ) {
        for r in (0..self.order.len()).rev() {
            let count: usize = self.header[r].iter().map(|&id| self.nodes[id].count).sum();
            if count < min_count {
                continue;
            }
            let mut items = suffix.to_vec();
            items.push(self.order[r]);
            let mut sorted = items.clone();
            sorted.sort_unstable();
            out.push(FrequentItemset {
                items: sorted,
                count,
                support: count as f64 / n as f64,
            });
            if items.len() >= max_len {
                continue;
            }
            let base: Vec<(Vec<EncodedState>, usize)> = self.header[r]
                .iter()
                .map(|&id| (self.prefix_path(id), self.nodes[id].count))
                .filter(|(p, _)| !p.is_empty())
                .collect();
            if base.is_empty() {
                continue;
            }
            let cond = FpTree::build(&base, min_count);
            if !cond.order.is_empty() {
                cond.mine(&items, min_count, n, max_len, out);
            }
        }
    }
}

/// All itemsets with `support >= minsup`, optionally capped at `max_len`
/// items. Output is sorted by length, then lexicographically.
pub fn fp_growth(
    transactions: &[Transaction],
    minsup: f64,
    max_len: Option<usize>,
) -> Result<Vec<FrequentItemset>, MinerError> {
    check_threshold("minsup", minsup)?;
    let n = transactions.len();
    let Some(min_count) = (1..=n).find(|&c| meets(c, n, minsup)) else {
        return Ok(Vec::new());
    };
    let tree = FpTree::from_transactions(transactions, min_count);
    let mut out = Vec::new();
    tree.mine(&[], min_count, n, max_len.unwrap_or(usize::MAX), &mut out);
    out.sort_by(|a, b| a.items.len().cmp(&b.items.len()).then_with(|| a.items.cmp(&b.items)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(rows: &[&[u64]]) -> Vec<Transaction> {
        rows.iter()
            .enumerate()
            .map(|(i, r)| {
                let s: Vec<EncodedState> = r.iter().map(|&x| EncodedState(x)).collect();
                Transaction::from_sequence(&s, i)
            })
            .collect()
    }

    #[test]
    fn single_transaction_full_support() {
        let t = tx(&[&[3, 1, 2]]);
        let f = fp_growth(&t, 1.0, None).unwrap();
        assert_eq!(f.len(), 7);
        assert!(f.iter().all(|i| i.support == 1.0));
    }

    #[test]
    fn textbook_example() {
        let t = tx(&[&[1, 2, 5], &[2, 4], &[2, 3], &[1, 2, 4], &[1, 3], &[2, 3], &[1, 3], &[1, 2, 3, 5], &[1, 2, 3]]);
        let f = fp_growth(&t, 2.0 / 9.0, None).unwrap();
        let find = |v: &[u64]| {
            f.iter()
                .find(|i| i.items == v.iter().map(|&x| EncodedState(x)).collect::<Vec<_>>())
                .map(|i| i.count)
        };
        assert_eq!(find(&[2]), Some(7));
        assert_eq!(find(&[1, 2, 5]), Some(2));
        assert_eq!(find(&[1, 2, 3]), Some(2));
        assert_eq!(find(&[4, 5]), None);
        assert_eq!(f.len(), 13);
    }

    #[test]
    fn tree_invariants_and_chain_sums() {
        let t = tx(&[&[1, 2, 5], &[2, 4], &[2, 3], &[1, 2, 4], &[1, 3]]);
        let tree = FpTree::from_transactions(&t, 1);
        assert!(tree.check_invariants());
        for &i in tree.items() {
            assert_eq!(tree.chain_count(i), tree.item_count(i));
        }
        assert_eq!(tree.items()[0], EncodedState(2));
    }

    #[test]
    fn max_len_caps_output() {
        let t = tx(&[&[1, 2, 3, 4]]);
        let f = fp_growth(&t, 1.0, Some(2)).unwrap();
        assert_eq!(f.len(), 4 + 6);
    }

    #[test]
    fn rejects_bad_minsup() {
        assert!(fp_growth(&[], 0.0, None).is_err());
        assert!(fp_growth(&[], 1.5, None).is_err());
        assert!(fp_growth(&[], 0.5, None).unwrap().is_empty());
    }
}
