//! Visit-frequency matrices over grid cells.


use crate::envs::{Cell, GridView};
use crate::learner::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisitMatrix {
    pub width: usize,
    pub height: usize,
    /// Row-major counts.
    pub counts: Vec<u64>,
}

impl VisitMatrix {
    pub fn zeros(width: usize, height: usize) -> Self {
        VisitMatrix {
            width,
            height,
            counts: vec![0; width * height],
        }
    }

    pub fn get(&self, (x, y): Cell) -> u64 {
        self.counts[y * self.width + x]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The `k` most visited cells, ties to row-major order.
    pub fn top_cells(&self, k: usize) -> Vec<(Cell, u64)> {
        let mut cells: Vec<(Cell, u64)> = (0..self.counts.len())
            .map(|i| ((i % self.width, i / self.width), self.counts[i]))
            .collect();
        cells.sort_by(|a, b| b.1.cmp(&a.1).then((a.0 .1, a.0 .0).cmp(&(b.0 .1, b.0 .0))));
        cells.truncate(k);
        cells
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.counts.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Plain greymap scaled to 0..=255; brightest is most visited.
    pub fn to_pgm(&self) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(0).max(1);
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.counts.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|&c| (c * 255 / max).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Count every state visit on the grid.
pub fn emit_visit_matrix<G: GridView>(trajectories: &[Trajectory], grid: &G) -> VisitMatrix {
    let (w, h) = grid.grid_dims();
    let mut m = VisitMatrix::zeros(w, h);
    for t in trajectories {
        for &s in &t.states {
            if let Some((x, y)) = grid.cell_of(s) {
                m.counts[y * w + x] += 1;
            }
        }
    }
    m
}
