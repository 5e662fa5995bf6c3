//! The hierarchical structure tree: a trie of reversed sequential rules.

use std::fmt::Write;

use crate::codec::EncodedState;
use crate::miner::SequentialRule;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct HstNode {
    /// `None` only for the root.
    pub subgoal: Option<EncodedState>,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Highest confidence among the rules passing through this node.
    pub confidence: f64,
    /// Set when some rule ends here, including rules that are a strict
    /// prefix of a longer path.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hst {
    nodes: Vec<HstNode>,
}

impl Default for Hst {
    fn default() -> Self {
        Self::new()
    }
}

impl Hst {
    pub const ROOT: NodeId = 0;

    pub fn new() -> Self {
        Hst {
            nodes: vec![HstNode {
                subgoal: None,
                parent: None,
                children: Vec::new(),
                confidence: 0.0,
                terminal: false,
            }],
        }
    }

    pub fn node(&self, id: NodeId) -> &HstNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[HstNode] {
        &self.nodes
    }

    /// Non-root node count.
    pub fn len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn child(&self, id: NodeId, subgoal: EncodedState) -> Option<NodeId> {
        self.nodes[id]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].subgoal == Some(subgoal))
    }

    /// Insert a rule given in visit order (premise..., consequent). The walk
    /// starts from the consequent.
    pub fn insert(&mut self, sequence: &[EncodedState], confidence: f64) -> NodeId {
        let mut cur = Self::ROOT;
        for &s in sequence.iter().rev() {
            cur = match self.child(cur, s) {
                Some(c) => c,
                None => {
                    let id = self.nodes.len();
                    self.nodes.push(HstNode {
                        subgoal: Some(s),
                        parent: Some(cur),
                        children: Vec::new(),
                        confidence,
                        terminal: false,
                    });
                    self.nodes[cur].children.push(id);
                    id
                }
            };
            let n = &mut self.nodes[cur];
            n.confidence = n.confidence.max(confidence);
        }
        if cur != Self::ROOT {
            self.nodes[cur].terminal = true;
        }
        cur
    }

    /// Node reached by walking `sequence` reversed from the root.
    pub fn find(&self, sequence: &[EncodedState]) -> Option<NodeId> {
        sequence
            .iter()
            .rev()
            .try_fold(Self::ROOT, |cur, &s| self.child(cur, s))
    }

    pub fn contains_rule(&self, rule: &SequentialRule) -> bool {
        self.find(&rule.sequence()).is_some()
    }

    /// Parent-child pairs.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes
            .iter()
            .enumerate()
            .flat_map(|(p, n)| n.children.iter().map(move |&c| (p, c)))
            .collect()
    }

    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[id].parent {
            d += 1;
            id = p;
        }
        d
    }

    /// Structure with children sorted by subgoal; equal strings mean
    /// isomorphic trees.
    pub fn canonical(&self) -> String {
        fn walk(t: &Hst, id: NodeId, out: &mut String) {
            if let Some(s) = t.nodes[id].subgoal {
                let _ = write!(out, "{}", s.0);
            }
            let mut kids: Vec<NodeId> = t.nodes[id].children.clone();
            kids.sort_by_key(|&c| t.nodes[c].subgoal);
            if !kids.is_empty() {
                out.push('(');
                for (i, c) in kids.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    walk(t, c, out);
                }
                out.push(')');
            }
        }
        let mut out = String::new();
        walk(self, Self::ROOT, &mut out);
        out
    }

    /// Indented plain-text rendering, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::from("R\n");
        let mut stack: Vec<(NodeId, usize)> = self.nodes[Self::ROOT].children.iter().rev().map(|&c| (c, 1)).collect();
        while let Some((id, depth)) = stack.pop() {
            let n = &self.nodes[id];
            let _ = writeln!(
                out,
                "{}s{} conf={}{}",
                "  ".repeat(depth),
                n.subgoal.expect("non-root").0,
                n.confidence,
                if n.terminal { " *" } else { "" }
            );
            stack.extend(n.children.iter().rev().map(|&c| (c, depth + 1)));
        }
        out
    }
}

/// Build the tree from rules inserted in canonical order: confidence
/// descending, support descending, then item sequence.
pub fn hst_construct(rules: &[SequentialRule]) -> Hst {
    let mut sorted: Vec<&SequentialRule> = rules.iter().collect();
    sorted.sort_by(|a, b| a.canonical_cmp(b));
    let mut hst = Hst::new();
    for r in sorted {
        hst.insert(&r.sequence(), r.confidence);
    }
    hst
}
