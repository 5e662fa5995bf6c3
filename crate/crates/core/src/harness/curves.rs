//! Per-episode learning curves across runs.

use std::fmt::Write;

use crate::learner::EpisodeRecord;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub episode: usize,
    pub steps: Vec<f64>,
    pub rewards: Vec<f64>,
    pub mean_steps: f64,
    pub mean_reward: f64,
}

/// One point per episode index present in every run.
pub fn learning_curve<T: Scalar>(runs: &[Vec<EpisodeRecord<T>>]) -> Vec<CurvePoint> {
    let n = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..n)
        .map(|e| {
            let steps: Vec<f64> = runs.iter().map(|r| r[e].steps() as f64).collect();
            let rewards: Vec<f64> = runs.iter().map(|r| r[e].total_reward.as_f64()).collect();
            CurvePoint {
                episode: e,
                mean_steps: steps.iter().sum::<f64>() / steps.len() as f64,
                mean_reward: rewards.iter().sum::<f64>() / rewards.len() as f64,
                steps,
                rewards,
            }
        })
        .collect()
}

/// Mean total reward over the last `fraction` of a run's episodes.
pub fn tail_mean_reward<T: Scalar>(run: &[EpisodeRecord<T>], fraction: f64) -> f64 {
    let k = ((run.len() as f64 * fraction).ceil() as usize).clamp(1, run.len().max(1));
    let tail = &run[run.len().saturating_sub(k)..];
    if tail.is_empty() {
        return 0.0;
    }
    tail.iter().map(|r| r.total_reward.as_f64()).sum::<f64>() / tail.len() as f64
}

/// `episode,<method>_steps_<run>...,<method>_reward_<run>...,<method>_mean_steps,<method>_mean_reward`
/// for each method, joined on the episode column.
pub fn curves_to_csv(methods: &[(&str, &[CurvePoint])]) -> String {
    let mut out = String::from("episode");
    for (name, pts) in methods {
        let runs = pts.first().map_or(0, |p| p.steps.len());
        for r in 0..runs {
            let _ = write!(out, ",{name}_steps_{r}");
        }
        for r in 0..runs {
            let _ = write!(out, ",{name}_reward_{r}");
        }
        let _ = write!(out, ",{name}_mean_steps,{name}_mean_reward");
    }
    out.push('\n');
    let n = methods.iter().map(|(_, p)| p.len()).min().unwrap_or(0);
    for e in 0..n {
        let _ = write!(out, "{e}");
        for (_, pts) in methods {
            let p = &pts[e];
            for v in p.steps.iter().chain(&p.rewards) {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{},{}", p.mean_steps, p.mean_reward);
        }
        out.push('\n');
    }
    out
}
