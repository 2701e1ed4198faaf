use alloc::string::String;
use alloc::vec::Vec;

use super::CellPos;
use crate::tileset::{TileId, Tileset};

/// A fully collapsed grid: one tile per cell, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tiling {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<TileId>,
    pub tileset_hash: String,
    pub seed: u64,
}

/// The first adjacent pair whose shared edge does not match.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// `west.e != east.w`
    WestEast { west: CellPos, east: CellPos },
    /// `north.s != south.n`
    NorthSouth { north: CellPos, south: CellPos },
    /// A cell holds an index outside the tileset.
    UnknownTile { cell: CellPos, tile: TileId },
    /// `cells.len() != width * height`
    Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("shift ({rows}, {cols}) must satisfy 0 <= rows < {height}, 0 <= cols < {width}, not both zero")]
pub struct ShiftError {
    pub rows: usize,
    pub cols: usize,
    pub width: usize,
    pub height: usize,
}

impl Tiling {
    /// Tile at 1-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> TileId {
        assert!(row >= 1 && col >= 1 && row <= self.height && col <= self.width);
        self.cells[(row - 1) * self.width + (col - 1)]
    }

    /// Checks every shared edge, scanning row-major and testing the east
    /// neighbour before the south one.
    pub fn verify(&self, ts: &Tileset) -> Result<(), Violation> {
        if self.cells.len() != self.width * self.height {
            return Err(Violation::Shape);
        }
        let d = ts.len() as u32;
        for (i, &t) in self.cells.iter().enumerate() {
            if t.0 >= d {
                let cell = CellPos::new((i / self.width) as u32 + 1, (i % self.width) as u32 + 1);
                return Err(Violation::UnknownTile { cell, tile: t });
            }
        }
        for r in 1..=self.height {
            for c in 1..=self.width {
                let here = ts.tile(self.get(r, c));
                let pos = CellPos::new(r as u32, c as u32);
                if c < self.width && here.e != ts.tile(self.get(r, c + 1)).w {
                    return Err(Violation::WestEast { west: pos, east: CellPos::new(r as u32, c as u32 + 1) });
                }
                if r < self.height && here.s != ts.tile(self.get(r + 1, c)).n {
                    return Err(Violation::NorthSouth { north: pos, south: CellPos::new(r as u32 + 1, c as u32) });
                }
            }
        }
        Ok(())
    }

    /// True when `g[m][n] == g[m + rows][n + cols]` for every pair inside the
    /// grid.
    pub fn is_periodic(&self, rows: usize, cols: usize) -> Result<bool, ShiftError> {
        if rows >= self.height || cols >= self.width || (rows == 0 && cols == 0) {
            return Err(ShiftError { rows, cols, width: self.width, height: self.height });
        }
        for r in 1..=self.height - rows {
            for c in 1..=self.width - cols {
                if self.get(r, c) != self.get(r + rows, c + cols) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The `rows x cols` block whose top-left cell is `(row, col)`.
    pub fn window(&self, row: usize, col: usize, rows: usize, cols: usize) -> Tiling {
        let mut cells = Vec::with_capacity(rows * cols);
        for r in row..row + rows {
            for c in col..col + cols {
                cells.push(self.get(r, c));
            }
        }
        Tiling { width: cols, height: rows, cells, tileset_hash: self.tileset_hash.clone(), seed: self.seed }
    }
}
