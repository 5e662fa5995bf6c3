//! ASCII grid maps.
//!
//! Glyphs: `#` wall, `.` open, `T` goal-candidate cell, any other ASCII
//! letter or digit labels a subgoal cell. One row per line.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

/// `(x, y)` with `y` growing downwards.
pub type Cell = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("map is empty")]
    Empty,
    #[error("row {row} has width {got}, expected {expected}")]
    RaggedRow { row: usize, got: usize, expected: usize },
    #[error("unknown glyph {glyph:?} at row {row}, column {col}")]
    UnknownGlyph { row: usize, col: usize, glyph: char },
    #[error("subgoal label {0:?} used more than once")]
    DuplicateLabel(char),
    #[error("cell {0:?} out of bounds")]
    OutOfBounds(Cell),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    walls: Vec<bool>,
    subgoals: Vec<(Cell, char)>,
    goal_candidates: Vec<Cell>,
}

impl GridMap {
    /// All-open grid without subgoals.
    pub fn open(width: usize, height: usize) -> Self {
        GridMap {
            width,
            height,
            walls: vec![false; width * height],
            subgoals: Vec::new(),
            goal_candidates: Vec::new(),
        }
    }

    pub fn with_subgoal(mut self, cell: Cell, label: char) -> Result<Self, MapError> {
        self.check(cell)?;
        if self.subgoals.iter().any(|(_, l)| *l == label) {
            return Err(MapError::DuplicateLabel(label));
        }
        self.walls[cell.1 * self.width + cell.0] = false;
        self.subgoals.push((cell, label));
        Ok(self)
    }

    pub fn with_wall(mut self, cell: Cell) -> Result<Self, MapError> {
        self.check(cell)?;
        self.walls[cell.1 * self.width + cell.0] = true;
        Ok(self)
    }

    fn check(&self, cell: Cell) -> Result<(), MapError> {
        if cell.0 >= self.width || cell.1 >= self.height {
            Err(MapError::OutOfBounds(cell))
        } else {
            Ok(())
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls[c.1 * self.width + c.0]
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Subgoal cells in map reading order (row-major).
    pub fn subgoals(&self) -> &[(Cell, char)] {
        &self.subgoals
    }

    pub fn subgoal_cell(&self, label: char) -> Option<Cell> {
        self.subgoals.iter().find(|(_, l)| *l == label).map(|(c, _)| *c)
    }

    pub fn label_at(&self, c: Cell) -> Option<char> {
        self.subgoals.iter().find(|(sc, _)| *sc == c).map(|(_, l)| *l)
    }

    pub fn goal_candidates(&self) -> &[Cell] {
        &self.goal_candidates
    }

    /// Open cells that are neither walls nor subgoals, row-major.
    pub fn free_cells(&self) -> Vec<Cell> {
        let sub: BTreeSet<Cell> = self.subgoals.iter().map(|(c, _)| *c).collect();
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|c| !self.is_wall(*c) && !sub.contains(c))
            .collect()
    }

    /// 1-based row-major index, the order used for state ids.
    pub fn cell_index(&self, c: Cell) -> usize {
        c.1 * self.width + c.0 + 1
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let i = index - 1;
        (i % self.width, i / self.width)
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                let c = (x, y);
                let glyph = if self.is_wall(c) {
                    '#'
                } else if let Some(l) = self.label_at(c) {
                    l
                } else if self.goal_candidates.contains(&c) {
                    'T'
                } else {
                    '.'
                };
                out.push(glyph);
            }
            let _ = writeln!(out);
        }
        out
    }
}

pub fn load_map(text: &str) -> Result<GridMap, MapError> {
    let rows: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end())
        .skip_while(|l| l.is_empty())
        .collect();
    let rows: Vec<&str> = {
        let mut r = rows;
        while r.last().is_some_and(|l| l.is_empty()) {
            r.pop();
        }
        r
    };
    if rows.is_empty() {
        return Err(MapError::Empty);
    }
    let width = rows[0].chars().count();
    let mut map = GridMap::open(width, rows.len());
    for (y, row) in rows.iter().enumerate() {
        let got = row.chars().count();
        if got != width {
            return Err(MapError::RaggedRow {
                row: y,
                got,
                expected: width,
            });
        }
        for (x, glyph) in row.chars().enumerate() {
            match glyph {
                '#' => map.walls[y * width + x] = true,
                '.' => {}
                'T' => map.goal_candidates.push((x, y)),
                g if g.is_ascii_alphanumeric() => {
                    if map.subgoals.iter().any(|(_, l)| *l == g) {
                        return Err(MapError::DuplicateLabel(g));
                    }
                    map.subgoals.push(((x, y), g));
                }
                g => {
                    return Err(MapError::UnknownGlyph {
                        row: y,
                        col: x,
                        glyph: g,
                    })
                }
            }
        }
    }
    Ok(map)
}
