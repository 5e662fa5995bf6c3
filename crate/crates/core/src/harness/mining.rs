//! Mining and hierarchy construction over a set of trajectories.

use crate::codec::EncodedState;
use crate::envs::Environment;
use crate::hst::{build_hierarchy, cluster_adjacent_subgoals, extract_exits, hst_construct, Exit, Hst, TaskHierarchy};
use crate::learner::Trajectory;
use crate::miner::{fp_growth, generate_rules, trajectories_to_transactions, FrequentItemset, SequentialRule, Transaction};
use crate::scalar::Scalar;

use super::{PipelineError, Stage};

#[derive(Debug, Clone, PartialEq)]
pub struct MiningParams {
    pub minsup: f64,
    pub minconf: f64,
    /// Longest itemset FP-growth will grow.
    pub max_len: Option<usize>,
    /// Merge subgoals first visited within this many steps; 0 disables.
    pub cluster_window: usize,
    /// Grow regions through the environment, adding at most this many
    /// states per region; 0 disables.
    pub close_limit: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            minsup: 0.9,
            minconf: 0.9,
            max_len: None,
            cluster_window: 0,
            close_limit: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinedHierarchy {
    pub transactions: Vec<Transaction>,
    pub frequents: Vec<FrequentItemset>,
    pub rules: Vec<SequentialRule>,
    /// Items of the kept rules, ascending.
    pub subgoals: Vec<EncodedState>,
    pub hst: Hst,
    pub exits: Vec<Exit>,
    pub hierarchy: TaskHierarchy,
}

/// Transactions → frequent itemsets → rules → tree → exits → hierarchy.
pub fn mine_hierarchy<T: Scalar, E: Environment<T>>(
    env: &E,
    trajectories: &[Trajectory],
    params: &MiningParams,
) -> Result<MinedHierarchy, PipelineError> {
    let mine = |e: String| PipelineError::new(Stage::Mine, e);
    let build = |e: String| PipelineError::new(Stage::Build, e);
    let (transactions, _) = trajectories_to_transactions(trajectories);
    let frequents = fp_growth(&transactions, params.minsup, params.max_len).map_err(|e| mine(e.to_string()))?;
    let rules = generate_rules(&frequents, &transactions, params.minconf).map_err(|e| mine(e.to_string()))?;
    if rules.is_empty() {
        return Err(mine("no rule reaches the thresholds".into()));
    }
    let mut subgoals: Vec<EncodedState> = rules.iter().flat_map(|r| r.sequence()).collect();
    subgoals.sort_unstable();
    subgoals.dedup();
    let hst = hst_construct(&rules);

    let candidates: Vec<EncodedState> = if params.cluster_window > 0 {
        cluster_adjacent_subgoals(&subgoals, trajectories, params.cluster_window)
            .into_iter()
            .map(|c| c[0])
            .collect()
    } else {
        subgoals.clone()
    };
    let exits = extract_exits(&candidates, trajectories).map_err(|e| build(e.to_string()))?;
    let mut hierarchy = build_hierarchy(&hst, &exits, trajectories, env.domain()).map_err(|e| build(e.to_string()))?;
    if params.close_limit > 0 {
        hierarchy
            .close_regions(env, params.close_limit)
            .map_err(|e| build(e.to_string()))?;
    }
    Ok(MinedHierarchy {
        transactions,
        frequents,
        rules,
        subgoals,
        hst,
        exits,
        hierarchy,
    })
}
