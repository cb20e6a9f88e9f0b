//! Occupancy grid and A* global planner.
//!
//! Cost model: 8-connected moves, straight step = 1, diagonal step = √2.
//! Diagonal moves may not cut corners: both orthogonal neighbours of a
//! diagonal step must be free. Costs are carried as integer step counts so
//! that two planners agreeing on the step mix agree on the cost bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Pose2D;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

impl Cell {
    pub fn new(col: u32, row: u32) -> Self {
        Self { col, row }
    }
}

/// Inclusive rectangle of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub min: Cell,
    pub max: Cell,
}

impl CellRect {
    pub fn new(min: Cell, max: Cell) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (self.min.col..=self.max.col).contains(&cell.col) && (self.min.row..=self.max.row).contains(&cell.row)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.min.row..=self.max.row)
            .flat_map(move |row| (self.min.col..=self.max.col).map(move |col| Cell::new(col, row)))
    }

    pub fn is_well_formed(&self) -> bool {
        self.min.col <= self.max.col && self.min.row <= self.max.row
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("grid resolution must be positive and finite")]
    InvalidResolution,
    #[error("coordinate ({x}, {y}) lies outside the map")]
    OutOfBounds { x: String, y: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    resolution: f64,
    width: u32,
    height: u32,
    occupied: Vec<bool>,
}

impl GridMap {
    pub fn new(width: u32, height: u32, resolution: f64) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::InvalidDimensions { width, height });
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GridError::InvalidResolution);
        }
        Ok(Self {
            resolution,
            width,
            height,
            occupied: vec![false; width as usize * height as usize],
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    fn index(&self, cell: Cell) -> usize {
        cell.row as usize * self.width as usize + cell.col as usize
    }

    pub fn contains_cell(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    /// Out-of-bounds cells count as occupied.
    pub fn is_occupied(&self, cell: Cell) -> bool {
        !self.contains_cell(cell) || self.occupied[self.index(cell)]
    }

    pub fn set_occupied(&mut self, cell: Cell, occupied: bool) {
        if self.contains_cell(cell) {
            let idx = self.index(cell);
            self.occupied[idx] = occupied;
        }
    }

    pub fn fill_rect(&mut self, rect: &CellRect) {
        for cell in rect.cells() {
            self.set_occupied(cell, true);
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|o| **o).count()
    }

    /// World coordinates to the containing cell. Rejects anything outside the
    /// map instead of clamping.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Result<Cell, GridError> {
        let out = || GridError::OutOfBounds {
            x: format!("{x:.3}"),
            y: format!("{y:.3}"),
        };
        if !x.is_finite() || !y.is_finite() {
            return Err(out());
        }
        let col = (x / self.resolution).floor();
        let row = (y / self.resolution).floor();
        if col < 0.0 || row < 0.0 || col >= self.width as f64 || row >= self.height as f64 {
            return Err(out());
        }
        Ok(Cell::new(col as u32, row as u32))
    }

    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            (cell.col as f64 + 0.5) * self.resolution,
            (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// True when the point is inside the map and on a free cell.
    pub fn is_free_at(&self, x: f64, y: f64) -> bool {
        self.world_to_cell(x, y).map(|c| !self.is_occupied(c)).unwrap_or(false)
    }

    /// World-space bounds `[x0, x1) × [y0, y1)` of a cell rectangle.
    pub fn rect_bounds(&self, rect: &CellRect) -> (f64, f64, f64, f64) {
        let r = self.resolution;
        (
            rect.min.col as f64 * r,
            rect.min.row as f64 * r,
            (rect.max.col + 1) as f64 * r,
            (rect.max.row + 1) as f64 * r,
        )
    }

    /// Free 8-connected neighbours with the step kind used to reach them.
    pub fn neighbors(&self, cell: Cell) -> Vec<(Cell, bool)> {
        let mut out = Vec::with_capacity(8);
        let free = |c: i64, r: i64| -> bool { c >= 0 && r >= 0 && !self.is_occupied(Cell::new(c as u32, r as u32)) };
        let (c, r) = (cell.col as i64, cell.row as i64);
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (c + dc, r + dr);
                if !free(nc, nr) {
                    continue;
                }
                let diagonal = dr != 0 && dc != 0;
                if diagonal && !(free(c + dc, r) && free(c, r + dr)) {
                    continue;
                }
                out.push((Cell::new(nc as u32, nr as u32), diagonal));
            }
        }
        out
    }
}

/// Path cost as a count of straight and diagonal steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PathCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub fn value(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self {
                diagonal: self.diagonal + 1,
                ..self
            }
        } else {
            Self {
                straight: self.straight + 1,
                ..self
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<Cell>,
    pub cost: PathCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Start,
    Goal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("{endpoint:?} endpoint is occupied or outside the map")]
    InvalidEndpoint { endpoint: Endpoint },
    #[error("goal is unreachable")]
    NoPath,
}

/// Octile distance, admissible and consistent for the cost model above.
pub fn octile(a: Cell, b: Cell) -> f64 {
    let dx = (a.col as f64 - b.col as f64).abs();
    let dy = (a.row as f64 - b.row as f64).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) + lo * SQRT_2
}

/// Plans between the cells containing `start` and `goal`.
pub fn plan_path(grid: &GridMap, start: &Pose2D, goal: &Pose2D) -> Result<GridPath, PathError> {
    let start_cell = grid
        .world_to_cell(start.x, start.y)
        .map_err(|_| PathError::InvalidEndpoint {
            endpoint: Endpoint::Start,
        })?;
    let goal_cell = grid
        .world_to_cell(goal.x, goal.y)
        .map_err(|_| PathError::InvalidEndpoint {
            endpoint: Endpoint::Goal,
        })?;
    plan_cells(grid, start_cell, goal_cell)
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    h: f64,
    cell: Cell,
    g: PathCost,
}

impl OpenEntry {
    fn key(&self) -> (f64, f64, u32, u32) {
        (self.f, self.h, self.cell.row, self.cell.col)
    }
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap; invert so the smallest key pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.total_cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

/// A* between two cells. Open-list ties break on lower heuristic, then lower
/// row, then lower column.
pub fn plan_cells(grid: &GridMap, start: Cell, goal: Cell) -> Result<GridPath, PathError> {
    if grid.is_occupied(start) {
        return Err(PathError::InvalidEndpoint {
            endpoint: Endpoint::Start,
        });
    }
    if grid.is_occupied(goal) {
        return Err(PathError::InvalidEndpoint {
            endpoint: Endpoint::Goal,
        });
    }
    let n = grid.width as usize * grid.height as usize;
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();

    best[grid.index(start)] = Some(PathCost::default());
    let h0 = octile(start, goal);
    open.push(OpenEntry {
        f: h0,
        h: h0,
        cell: start,
        g: PathCost::default(),
    });

    while let Some(entry) = open.pop() {
        let idx = grid.index(entry.cell);
        if best[idx] != Some(entry.g) || closed[idx] {
            continue;
        }
        closed[idx] = true;
        if entry.cell == goal {
            let mut cells = vec![goal];
            let mut cur = goal;
            while let Some(p) = parent[grid.index(cur)] {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Ok(GridPath { cells, cost: entry.g });
        }
        for (next, diagonal) in grid.neighbors(entry.cell) {
            let nidx = grid.index(next);
            let g = entry.g.step(diagonal);
            let improves = match best[nidx] {
                None => true,
                Some(old) => g.value() < old.value(),
            };
            if improves {
                best[nidx] = Some(g);
                parent[nidx] = Some(entry.cell);
                // a strictly better route reopens a closed cell
                closed[nidx] = false;
                let h = octile(next, goal);
                open.push(OpenEntry {
                    f: g.value() + h,
                    h,
                    cell: next,
                    g,
                });
            }
        }
    }
    Err(PathError::NoPath)
}
