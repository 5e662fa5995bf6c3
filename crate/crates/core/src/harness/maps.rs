//! Built-in ASCII maps.

use crate::envs::{load_map, GridMap};

/// 11x11 open grid with three chained subgoals.
pub const CHAIN11: &str = include_str!("../../fixtures/maps/chain11.txt");
/// 22x22 open grid with seven subgoals on the diagonal.
pub const EXP22: &str = include_str!("../../fixtures/maps/exp22.txt");

pub fn builtin_map(name: &str) -> Option<&'static str> {
    match name {
        "chain11" => Some(CHAIN11),
        "exp22" => Some(EXP22),
        "golden" => Some(super::golden::GOLDEN_MAZE),
        _ => None,
    }
}

/// A built-in name or a path to a map file.
pub fn load_map_source(source: &str) -> Result<GridMap, String> {
    let text = match builtin_map(source) {
        Some(t) => t.to_string(),
        None => std::fs::read_to_string(source).map_err(|e| format!("{source}: {e}"))?,
    };
    load_map(&text).map_err(|e| format!("{source}: {e}"))
}
