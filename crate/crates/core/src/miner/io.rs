//! CSV import and export for trajectories and rules.

use std::fmt::Write;

use super::{MinerError, SequentialRule};
use crate::codec::EncodedState;
use crate::learner::Trajectory;

/// One line per trajectory, comma-separated state ids in visit order.
pub fn trajectories_to_csv(trajs: &[Trajectory]) -> String {
    let mut out = String::new();
    for t in trajs {
        let line: Vec<String> = t.states.iter().map(|s| s.0.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Inverse of [`trajectories_to_csv`]. Blank lines become empty
/// trajectories; `#` lines are comments.
pub fn trajectories_from_csv(text: &str) -> Result<Vec<Trajectory>, MinerError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        let states = if line.is_empty() {
            Vec::new()
        } else {
            line.split(',')
                .map(|f| {
                    f.trim().parse::<u64>().map(EncodedState).map_err(|e| MinerError::Csv {
                        line: i + 1,
                        msg: format!("{f:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        out.push(Trajectory::from_states(states, out.len()));
    }
    Ok(out)
}

/// `premise|consequent|support|confidence|order_freq`, premise items
/// space-separated.
pub fn rules_to_csv(rules: &[SequentialRule]) -> String {
    let mut out = String::from("premise|consequent|support|confidence|order_freq\n");
    for r in rules {
        let premise: Vec<String> = r.premise.iter().map(|s| s.0.to_string()).collect();
        let _ = writeln!(
            out,
            "{}|{}|{}|{}|{}",
            premise.join(" "),
            r.consequent,
            r.support,
            r.confidence,
            r.order_frequency
        );
    }
    out
}
