//! Multi-phase key-press mazes.
//!
//! The agent walks a grid and presses a key at labeled subgoal cells. A press
//! at a cell whose label belongs to the current stage advances the progress
//! level. Once every stage is done, the goal condition ends the episode.

use super::{merge_outcomes, slip_directions, Action, Cell, Dir, EnvError, Environment, GridMap, GridView};
use crate::codec::{DomainSpec, EncodedState};
use crate::scalar::Scalar;

pub const PRESS: Action = 4;
const ACTION_NAMES: [&str; 5] = ["up", "right", "down", "left", "press"];

/// Ordered stages of subgoal labels. A press at any label of the current
/// stage advances progress by one level. Chains have one label per stage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProgressSpec {
    stages: Vec<Vec<char>>,
}

impl ProgressSpec {
    pub fn chain(labels: &str) -> Self {
        ProgressSpec {
            stages: labels.chars().map(|c| vec![c]).collect(),
        }
    }

    pub fn stages(stages: Vec<Vec<char>>) -> Self {
        ProgressSpec { stages }
    }

    /// `"123"` is a chain, `"123|45|6|7"` a tree flattened by level.
    pub fn parse(text: &str) -> Self {
        if text.contains('|') {
            ProgressSpec::stages(
                text.split('|')
                    .map(|s| s.trim().chars().collect())
                    .collect(),
            )
        } else {
            ProgressSpec::chain(text.trim())
        }
    }

    pub fn levels(&self) -> usize {
        self.stages.len()
    }

    pub fn is_chain(&self) -> bool {
        self.stages.iter().all(|s| s.len() == 1)
    }

    pub fn admits(&self, level: usize, label: char) -> bool {
        self.stages.get(level).is_some_and(|s| s.contains(&label))
    }

    pub fn labels(&self) -> impl Iterator<Item = char> + '_ {
        self.stages.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardScheme {
    /// -1 per move, 0 for a press that advances progress, -1 for a press at
    /// a subgoal that does not, -10 for a press elsewhere, +10 on completion.
    KeyPress,
    /// 0 for every action, +10 on entering the goal; no press action.
    SparseGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalMode {
    /// Press at the goal cell with all stages done.
    PressAtGoal,
    /// Step onto the goal cell with all stages done.
    EnterGoal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MazeState {
    pub pos: Cell,
    pub progress: usize,
}

#[derive(Debug, Clone)]
pub struct KeyMaze {
    map: GridMap,
    progress: ProgressSpec,
    start: Cell,
    goal: Cell,
    slip: f64,
    scheme: RewardScheme,
    goal_mode: GoalMode,
    domain: DomainSpec,
}

pub struct KeyMazeBuilder {
    map: GridMap,
    progress: ProgressSpec,
    start: Option<Cell>,
    goal: Option<Cell>,
    slip: f64,
    scheme: RewardScheme,
    goal_mode: GoalMode,
}

impl KeyMazeBuilder {
    pub fn progress(mut self, p: ProgressSpec) -> Self {
        self.progress = p;
        self
    }
    pub fn start(mut self, c: Cell) -> Self {
        self.start = Some(c);
        self
    }
    pub fn goal(mut self, c: Cell) -> Self {
        self.goal = Some(c);
        self
    }
    pub fn slip(mut self, slip: f64) -> Self {
        self.slip = slip;
        self
    }
    pub fn scheme(mut self, s: RewardScheme) -> Self {
        self.scheme = s;
        self
    }
    pub fn goal_mode(mut self, g: GoalMode) -> Self {
        self.goal_mode = g;
        self
    }

    pub fn build(self) -> Result<KeyMaze, EnvError> {
        let free = self.map.free_cells();
        let start = self
            .start
            .or_else(|| free.first().copied())
            .ok_or_else(|| EnvError::Config("map has no free cell".into()))?;
        let goal = self
            .goal
            .or_else(|| free.last().copied())
            .ok_or_else(|| EnvError::Config("map has no free cell".into()))?;
        for (what, c) in [("start", start), ("goal", goal)] {
            if c.0 >= self.map.width() || c.1 >= self.map.height() || self.map.is_wall(c) {
                return Err(EnvError::Config(format!("{what} cell {c:?} is not open")));
            }
        }
        if !(0.0..=1.0).contains(&self.slip) {
            return Err(EnvError::Config(format!("slip {} outside [0,1]", self.slip)));
        }
        for l in self.progress.labels() {
            if self.map.subgoal_cell(l).is_none() {
                return Err(EnvError::Config(format!("stage label {l:?} not on map")));
            }
        }
        if self.scheme == RewardScheme::SparseGoal && self.progress.levels() > 0 {
            return Err(EnvError::Config(
                "sparse-goal mazes have no press action and no stages".into(),
            ));
        }
        let states = self.map.cell_count() * (self.progress.levels() + 1);
        let domain = DomainSpec::univariate(states)?;
        Ok(KeyMaze {
            map: self.map,
            progress: self.progress,
            start,
            goal,
            slip: self.slip,
            scheme: self.scheme,
            goal_mode: self.goal_mode,
            domain,
        })
    }
}

impl KeyMaze {
    pub fn builder(map: GridMap) -> KeyMazeBuilder {
        KeyMazeBuilder {
            map,
            progress: ProgressSpec::default(),
            start: None,
            goal: None,
            slip: 0.2,
            scheme: RewardScheme::KeyPress,
            goal_mode: GoalMode::PressAtGoal,
        }
    }

    /// Same maze with a different start and goal cell.
    pub fn with_endpoints(&self, start: Cell, goal: Cell) -> Result<KeyMaze, EnvError> {
        for c in [start, goal] {
            if c.0 >= self.map.width() || c.1 >= self.map.height() || self.map.is_wall(c) {
                return Err(EnvError::Config(format!("cell {c:?} is not open")));
            }
        }
        Ok(KeyMaze {
            start,
            goal,
            ..self.clone()
        })
    }

    pub fn with_slip(&self, slip: f64) -> KeyMaze {
        KeyMaze {
            slip,
            ..self.clone()
        }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn progress_spec(&self) -> &ProgressSpec {
        &self.progress
    }

    pub fn levels(&self) -> usize {
        self.progress.levels()
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn slip(&self) -> f64 {
        self.slip
    }

    pub fn state_count(&self) -> usize {
        self.domain.size() as usize
    }

    pub fn state(&self, pos: Cell, progress: usize) -> MazeState {
        MazeState { pos, progress }
    }

    pub fn encode_state(&self, pos: Cell, progress: usize) -> EncodedState {
        EncodedState((self.map.cell_index(pos) + self.map.cell_count() * progress) as u64)
    }

    fn has_press(&self) -> bool {
        self.scheme == RewardScheme::KeyPress
    }

    fn move_from(&self, pos: Cell, d: Dir) -> Cell {
        let (dx, dy) = d.delta();
        let (nx, ny) = (pos.0 as isize + dx, pos.1 as isize + dy);
        if self.map.in_bounds(nx, ny) && !self.map.is_wall((nx as usize, ny as usize)) {
            (nx as usize, ny as usize)
        } else {
            pos
        }
    }

    fn done(&self, s: &MazeState) -> bool {
        s.progress == self.progress.levels()
    }
}

impl<T: Scalar> Environment<T> for KeyMaze {
    type State = MazeState;

    fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn encode(&self, s: &MazeState) -> EncodedState {
        self.encode_state(s.pos, s.progress)
    }

    fn decode(&self, l: EncodedState) -> Result<MazeState, EnvError> {
        let o = self.domain.ordinal(l)?;
        let cells = self.map.cell_count();
        Ok(MazeState {
            pos: self.map.cell_at(o % cells + 1),
            progress: o / cells,
        })
    }

    fn num_actions(&self) -> usize {
        if self.has_press() {
            5
        } else {
            4
        }
    }

    fn action_name(&self, a: Action) -> String {
        ACTION_NAMES.get(a).map_or_else(|| a.to_string(), |s| s.to_string())
    }

    fn start(&self) -> MazeState {
        MazeState {
            pos: self.start,
            progress: 0,
        }
    }

    fn transition_distribution(
        &self,
        s: &MazeState,
        a: Action,
    ) -> Result<Vec<(MazeState, T)>, EnvError> {
        <Self as Environment<T>>::check_action(self, a)?;
        if s.pos.0 >= self.map.width() || s.pos.1 >= self.map.height() || s.progress > self.levels() {
            return Err(EnvError::InvalidState(format!("{s:?}")));
        }
        if a == PRESS {
            let mut next = *s;
            if let Some(label) = self.map.label_at(s.pos) {
                if self.progress.admits(s.progress, label) {
                    next.progress += 1;
                }
            }
            return Ok(vec![(next, T::one())]);
        }
        let outcomes = slip_directions::<T>(Dir::ALL[a], self.slip)
            .into_iter()
            .map(|(d, p)| {
                (
                    MazeState {
                        pos: self.move_from(s.pos, d),
                        progress: s.progress,
                    },
                    p,
                )
            })
            .collect();
        Ok(merge_outcomes(outcomes))
    }

    fn reward(&self, s: &MazeState, a: Action, next: &MazeState) -> T {
        let terminal = <Self as Environment<T>>::is_terminal(self, s, a, next);
        match self.scheme {
            RewardScheme::SparseGoal => {
                if terminal {
                    T::of(10.0)
                } else {
                    T::zero()
                }
            }
            RewardScheme::KeyPress => {
                if terminal {
                    T::of(10.0)
                } else if a == PRESS {
                    if next.progress > s.progress {
                        T::zero()
                    } else if self.map.label_at(s.pos).is_some() {
                        -T::one()
                    } else {
                        T::of(-10.0)
                    }
                } else {
                    -T::one()
                }
            }
        }
    }

    fn is_terminal(&self, s: &MazeState, a: Action, next: &MazeState) -> bool {
        match (self.scheme, self.goal_mode) {
            (RewardScheme::KeyPress, GoalMode::PressAtGoal) => {
                a == PRESS && s.pos == self.goal && self.done(s)
            }
            _ => next.pos == self.goal && self.done(next) && !(s.pos == self.goal && self.done(s)),
        }
    }
}

impl GridView for KeyMaze {
    fn grid_dims(&self) -> (usize, usize) {
        (self.map.width(), self.map.height())
    }

    fn cell_of(&self, l: EncodedState) -> Option<Cell> {
        <Self as Environment<f64>>::decode(self, l).ok().map(|s| s.pos)
    }
}
