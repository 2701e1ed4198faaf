//! The exterior generation process.
//!
//! An `M x N` grid with `M = A(C-1) + 1` and `N = B(C-1) + 1` is covered by
//! `A x B` sub-grids of `C x C` cells, each sharing its first row with the
//! last row of its northern neighbour and its first column with the last
//! column of its western neighbour. Sub-grids are solved layer by layer
//! along anti-diagonals, so every sub-grid only ever sees north/west
//! pre-constraints. With a sub-complete tileset those are always
//! satisfiable and no committed sub-grid needs to be revisited.

use alloc::vec;
use alloc::vec::Vec;

use crate::brush::WeightField;
use crate::monitor::{Monitor, Unmonitored};
use crate::solver::{self, BoundarySpec, Rules, SolveError, SolveJob, SolveOutcome, SolveStats, Tiling};
use crate::tileset::{TileId, Tileset};
use crate::world::chunk_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("grid {rows}x{cols} with sub-grid side {chunk}: every dimension must be at least 2")]
    TooSmall { rows: usize, cols: usize, chunk: usize },
    #[error("{dim} - 1 = {} is not divisible by chunk - 1 = {}", dim - 1, chunk - 1)]
    NotDivisible { dim: usize, chunk: usize },
}

/// The `A x B` decomposition of an `M x N` grid into overlapping `C x C`
/// sub-grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubgridPlan {
    /// `M`, total rows.
    pub rows: usize,
    /// `N`, total columns.
    pub cols: usize,
    /// `C`, sub-grid side.
    pub chunk: usize,
    /// `A`, sub-grids per column of the layout.
    pub grid_rows: usize,
    /// `B`, sub-grids per row of the layout.
    pub grid_cols: usize,
}

impl SubgridPlan {
    pub fn new(rows: usize, cols: usize, chunk: usize) -> Result<Self, PlanError> {
        if rows < 2 || cols < 2 || chunk < 2 {
            return Err(PlanError::TooSmall { rows, cols, chunk });
        }
        let step = chunk - 1;
        for dim in [rows, cols] {
            if (dim - 1) % step != 0 {
                return Err(PlanError::NotDivisible { dim, chunk });
            }
        }
        Ok(Self { rows, cols, chunk, grid_rows: (rows - 1) / step, grid_cols: (cols - 1) / step })
    }

    pub fn subgrid_count(&self) -> usize {
        self.grid_rows * self.grid_cols
    }

    /// Global offset of sub-grid `(a, b)`'s first cell, minus one.
    pub fn origin(&self, a: usize, b: usize) -> (u32, u32) {
        subgrid_origin(self.chunk, a, b)
    }
}

/// Shorthand for [`SubgridPlan::new`].
pub fn plan(rows: usize, cols: usize, chunk: usize) -> Result<SubgridPlan, PlanError> {
    SubgridPlan::new(rows, cols, chunk)
}

pub(crate) fn subgrid_origin(chunk: usize, a: usize, b: usize) -> (u32, u32) {
    (((a - 1) * (chunk - 1)) as u32, ((b - 1) * (chunk - 1)) as u32)
}

/// Every `(a, b)` of an `A x B` layout, by anti-diagonal layer `a + b`
/// and ascending `a` inside a layer.
pub fn diagonal_order(grid_rows: usize, grid_cols: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(grid_rows * grid_cols);
    if grid_rows == 0 || grid_cols == 0 {
        return out;
    }
    for layer in 2..=grid_rows + grid_cols {
        let lo = layer.saturating_sub(grid_cols).max(1);
        let hi = (layer - 1).min(grid_rows);
        for a in lo..=hi {
            out.push((a, layer - a));
        }
    }
    out
}

/// One solved `C x C` sub-grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgridResult {
    pub a: usize,
    pub b: usize,
    pub tiling: Tiling,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerateStats {
    pub subgrids: u64,
    pub interior_backtracks: u64,
    /// Sub-grids regenerated after being committed. Always zero: a failed
    /// sub-grid aborts the run instead.
    pub exterior_retries: u64,
    pub elapsed_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("sub-grid ({a}, {b}) has no solution under its boundary")]
    SubgridUnsat { a: usize, b: usize },
    #[error("sub-grid ({a}, {b}) exceeded its step budget")]
    BudgetExceeded { a: usize, b: usize },
    #[error("sub-grid ({a}, {b}): {source}")]
    Solve { a: usize, b: usize, source: SolveError },
    #[error(transparent)]
    Stitch(#[from] StitchError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StitchError {
    #[error("sub-grid ({a}, {b}) is missing")]
    Missing { a: usize, b: usize },
    #[error("sub-grid ({a}, {b}) given more than once or outside the plan")]
    Unexpected { a: usize, b: usize },
    #[error("sub-grid ({a}, {b}) is not {chunk}x{chunk}")]
    Shape { a: usize, b: usize, chunk: usize },
    #[error("overlap mismatch at global cell ({row}, {col}) from sub-grid ({a}, {b})")]
    OverlapMismatch { a: usize, b: usize, row: usize, col: usize },
}

/// The pre-constraints of a sub-grid: the last row of its northern
/// neighbour and the last column of its western neighbour.
pub fn boundary_from(north: Option<&Tiling>, west: Option<&Tiling>) -> BoundarySpec {
    BoundarySpec {
        north_row: north.map(|t| (1..=t.width).map(|c| t.get(t.height, c)).collect()),
        west_col: west.map(|t| (1..=t.height).map(|r| t.get(r, t.width)).collect()),
    }
}

/// Solves sub-grid `(a, b)` against its committed neighbours with the
/// sub-grid seed `chunk_seed(seed, a, b)`.
#[allow(clippy::too_many_arguments)]
pub fn solve_subgrid<M: Monitor>(
    rules: &Rules<'_>,
    chunk: usize,
    a: usize,
    b: usize,
    north: Option<&Tiling>,
    west: Option<&Tiling>,
    weights: &WeightField,
    seed: u64,
    budget: u64,
    monitor: &M,
) -> Result<(SubgridResult, SolveStats), GenerateError> {
    let boundary = boundary_from(north, west);
    let job = SolveJob {
        width: chunk,
        height: chunk,
        boundary: &boundary,
        weights,
        origin: subgrid_origin(chunk, a, b),
        seed: chunk_seed(seed, a as u64, b as u64),
        budget,
    };
    match solver::solve_with(rules, &job, monitor).map_err(|source| GenerateError::Solve { a, b, source })? {
        SolveOutcome::Solved(tiling, stats) => Ok((SubgridResult { a, b, tiling }, stats)),
        SolveOutcome::Unsat(_) => Err(GenerateError::SubgridUnsat { a, b }),
        SolveOutcome::BudgetExceeded(_) => Err(GenerateError::BudgetExceeded { a, b }),
    }
}

/// Runs the diagonal process over a whole plan and stitches the result.
pub fn generate(
    plan: &SubgridPlan,
    ts: &Tileset,
    weights: &WeightField,
    seed: u64,
    budget: u64,
) -> Result<(Tiling, GenerateStats), GenerateError> {
    let rules = Rules::new(ts);
    generate_with(plan, &rules, weights, seed, budget, &Unmonitored).map(|(t, _, s)| (t, s))
}

/// [`generate`] with precompiled rules and a monitor. Also returns the
/// sub-grid results in generation order.
pub fn generate_with<M: Monitor>(
    plan: &SubgridPlan,
    rules: &Rules<'_>,
    weights: &WeightField,
    seed: u64,
    budget: u64,
    monitor: &M,
) -> Result<(Tiling, Vec<SubgridResult>, GenerateStats), GenerateError> {
    let start = monitor.now_ns();
    let (ar, bc) = (plan.grid_rows, plan.grid_cols);
    let mut committed: Vec<Option<Tiling>> = vec![None; ar * bc];
    let mut order = Vec::with_capacity(ar * bc);
    let mut stats = GenerateStats::default();
    for (a, b) in diagonal_order(ar, bc) {
        // sub-grids are small, so the solver may never poll; check here too
        if monitor.should_stop() {
            return Err(GenerateError::BudgetExceeded { a, b });
        }
        let north = if a > 1 { committed[(a - 2) * bc + (b - 1)].as_ref() } else { None };
        let west = if b > 1 { committed[(a - 1) * bc + (b - 2)].as_ref() } else { None };
        let (result, s) = solve_subgrid(rules, plan.chunk, a, b, north, west, weights, seed, budget, monitor)?;
        stats.subgrids += 1;
        stats.interior_backtracks += s.backtracks;
        committed[(a - 1) * bc + (b - 1)] = Some(result.tiling.clone());
        order.push(result);
    }
    let mut tiling = stitch(&order, plan)?;
    tiling.tileset_hash = rules.tileset_hash().into();
    tiling.seed = seed;
    stats.elapsed_ns = monitor.now_ns().saturating_sub(start);
    Ok((tiling, order, stats))
}

/// Pastes sub-grids into the global grid, checking that every shared cell
/// agrees between the sub-grids covering it.
///
/// The returned tiling carries the hash of the first result and seed 0;
/// [`generate_with`] overwrites both.
pub fn stitch(results: &[SubgridResult], plan: &SubgridPlan) -> Result<Tiling, StitchError> {
    let (ar, bc, c) = (plan.grid_rows, plan.grid_cols, plan.chunk);
    let mut seen = vec![false; ar * bc];
    let mut cells: Vec<Option<TileId>> = vec![None; plan.rows * plan.cols];
    for r in results {
        let (a, b) = (r.a, r.b);
        if a == 0 || b == 0 || a > ar || b > bc || seen[(a - 1) * bc + (b - 1)] {
            return Err(StitchError::Unexpected { a, b });
        }
        seen[(a - 1) * bc + (b - 1)] = true;
        if r.tiling.width != c || r.tiling.height != c || r.tiling.cells.len() != c * c {
            return Err(StitchError::Shape { a, b, chunk: c });
        }
        let (r0, c0) = subgrid_origin(c, a, b);
        for i in 0..c {
            for j in 0..c {
                let (row, col) = (r0 as usize + i, c0 as usize + j);
                let tile = r.tiling.cells[i * c + j];
                let slot = &mut cells[row * plan.cols + col];
                match slot {
                    Some(existing) if *existing != tile => {
                        return Err(StitchError::OverlapMismatch { a, b, row: row + 1, col: col + 1 });
                    }
                    _ => *slot = Some(tile),
                }
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(StitchError::Missing { a: i / bc + 1, b: i % bc + 1 });
    }
    Ok(Tiling {
        width: plan.cols,
        height: plan.rows,
        cells: cells.into_iter().map(|c| c.expect("all sub-grids present")).collect(),
        tileset_hash: results.first().map(|r| r.tiling.tileset_hash.clone()).unwrap_or_default(),
        seed: 0,
    })
}
