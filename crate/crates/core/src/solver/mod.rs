//! Interior WFC: solve one rectangular grid.
//!
//! The loop is observe (minimum weighted entropy), collapse (weighted
//! sampling), propagate (AC-3). A contradiction rewinds the trail to the
//! latest decision, excludes the tile that was tried there and picks again
//! among the remaining candidates. The search is complete: `Unsat` is only
//! reported once the root has no alternatives left.

mod rules;
mod tiling;
mod wave;

use alloc::vec::Vec;

pub use rules::{Direction, Rules};
pub use tiling::{ShiftError, Tiling, Violation};
pub use wave::Wave;

use crate::brush::WeightField;
use crate::monitor::Monitor;
use crate::rng;
use crate::tileset::{TileId, Tileset};

/// Default step budget (collapses plus backtracks).
pub const DEFAULT_BUDGET: u64 = 100_000;

/// Poll the monitor once every this many steps.
const MONITOR_INTERVAL: u64 = 64;

/// A 1-based `(row, col)` cell address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellPos {
    pub row: u32,
    pub col: u32,
}

impl CellPos {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }
}

/// A domain emptied during propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("contradiction: cell ({}, {}) has no candidates left", cell.row, cell.col)]
pub struct Contradiction {
    pub cell: CellPos,
}

/// Pre-collapsed first row and/or first column of a grid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundarySpec {
    pub north_row: Option<Vec<TileId>>,
    pub west_col: Option<Vec<TileId>>,
}

impl BoundarySpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.north_row.is_none() && self.west_col.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoundaryError {
    #[error("north row has {got} tiles, grid width is {expected}")]
    NorthLength { expected: usize, got: usize },
    #[error("west column has {got} tiles, grid height is {expected}")]
    WestLength { expected: usize, got: usize },
    #[error("boundary references unknown tile {0}")]
    UnknownTile(TileId),
    #[error("corner conflict: north row starts with {north}, west column with {west}")]
    CornerConflict { north: TileId, west: TileId },
    #[error(transparent)]
    Contradiction(Contradiction),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("grid must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },
    #[error("invalid boundary: {0}")]
    Boundary(BoundaryError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub collapses: u64,
    pub propagations: u64,
    pub backtracks: u64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveOutcome {
    Solved(Tiling, SolveStats),
    Unsat(SolveStats),
    BudgetExceeded(SolveStats),
}

impl SolveOutcome {
    pub fn stats(&self) -> &SolveStats {
        match self {
            SolveOutcome::Solved(_, s) | SolveOutcome::Unsat(s) | SolveOutcome::BudgetExceeded(s) => s,
        }
    }

    pub fn tiling(&self) -> Option<&Tiling> {
        match self {
            SolveOutcome::Solved(t, _) => Some(t),
            _ => None,
        }
    }

    pub fn into_tiling(self) -> Option<Tiling> {
        match self {
            SolveOutcome::Solved(t, _) => Some(t),
            _ => None,
        }
    }
}

/// Everything about one solve except the grid rules.
#[derive(Debug, Clone, Copy)]
pub struct SolveJob<'a> {
    pub width: usize,
    pub height: usize,
    pub boundary: &'a BoundarySpec,
    pub weights: &'a WeightField,
    /// Global offset of local cell `(1, 1)` minus one, for brush lookups.
    pub origin: (u32, u32),
    pub seed: u64,
    /// Maximum collapses plus backtracks.
    pub budget: u64,
}

/// Solves a grid with a freshly compiled rule set. See [`solve_with`].
pub fn solve(
    ts: &Tileset,
    width: usize,
    height: usize,
    boundary: &BoundarySpec,
    weights: &WeightField,
    seed: u64,
    budget: u64,
) -> Result<SolveOutcome, SolveError> {
    let rules = Rules::new(ts);
    let job = SolveJob { width, height, boundary, weights, origin: (0, 0), seed, budget };
    solve_with(&rules, &job, &crate::monitor::Unmonitored)
}

/// Runs observe / collapse / propagate with chronological backtracking.
///
/// Input errors (zero-sized grid, malformed boundary) are `Err`. A boundary
/// whose propagation empties a domain has no completion, so it is `Unsat`.
pub fn solve_with<M: Monitor>(rules: &Rules<'_>, job: &SolveJob<'_>, monitor: &M) -> Result<SolveOutcome, SolveError> {
    let start = monitor.now_ns();
    let mut wave = Wave::with_weights(job.width, job.height, rules, job.weights, job.origin)?;
    let mut stats = SolveStats::default();
    let finish = |wave: &Wave<'_>, mut stats: SolveStats| {
        stats.collapses = wave.counters.collapses;
        stats.propagations = wave.counters.propagations;
        stats.elapsed_ns = monitor.now_ns().saturating_sub(start);
        stats
    };
    match wave.apply_boundary(job.boundary) {
        Ok(()) => {}
        Err(BoundaryError::Contradiction(_)) => return Ok(SolveOutcome::Unsat(finish(&wave, stats))),
        Err(e) => return Err(SolveError::Boundary(e)),
    }
    if wave.settle().is_err() {
        return Ok(SolveOutcome::Unsat(finish(&wave, stats)));
    }
    let mut rng = rng::seeded(job.seed);
    let mut steps: u64 = 0;
    // `pending` is a cell to re-pick after a backtrack, `None` to observe.
    let mut pending: Option<CellPos> = None;
    loop {
        let cell = match pending.take() {
            Some(c) => c,
            None => match wave.observe() {
                Some(c) => c,
                None => break,
            },
        };
        steps += 1;
        if steps > job.budget || (steps.is_multiple_of(MONITOR_INTERVAL) && monitor.should_stop()) {
            return Ok(SolveOutcome::BudgetExceeded(finish(&wave, stats)));
        }
        let mut result = wave.collapse(cell, &mut rng).and_then(|_| wave.propagate(cell));
        while result.is_err() {
            stats.backtracks += 1;
            steps += 1;
            if steps > job.budget || (steps.is_multiple_of(MONITOR_INTERVAL) && monitor.should_stop()) {
                return Ok(SolveOutcome::BudgetExceeded(finish(&wave, stats)));
            }
            match wave.backtrack_once() {
                None => return Ok(SolveOutcome::Unsat(finish(&wave, stats))),
                Some(Ok(c)) => {
                    pending = Some(c);
                    result = Ok(());
                }
                Some(Err(e)) => result = Err(e),
            }
        }
    }
    let cells = wave.cells().expect("loop ends only when every cell is collapsed");
    let tiling = Tiling {
        width: job.width,
        height: job.height,
        cells,
        tileset_hash: rules.tileset_hash().into(),
        seed: job.seed,
    };
    debug_assert!(tiling.verify(rules.tileset()).is_ok());
    Ok(SolveOutcome::Solved(tiling, finish(&wave, stats)))
}

#[cfg(test)]
mod tests;
