//! Nested wave function collapse (N-WFC) over simple-tiled tilesets.
//!
//! The crate is `no_std` with `alloc`. It contains the pure algorithmic
//! parts of the engine:
//!
//! * [`tileset`]: tiles, edge sets, completeness / sub-completeness checks
//!   and canonical tileset constructors (including the Carcassonne set).
//! * [`solver`]: the interior WFC solver (weighted-entropy observation,
//!   AC-3 propagation, chronological backtracking, boundary pre-constraints).
//! * [`nwfc`]: the exterior process that tiles a large grid with overlapping
//!   `C x C` sub-grids in diagonal order.
//! * [`world`]: deterministic infinite-mode chunk management.
//! * [`brush`]: tag-scoped weight brushes that bias observation and sampling.
//!
//! File formats, persistence, timing and the CLI live in the `nwfc` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod brush;
pub mod monitor;
pub mod nwfc;
pub mod rng;
pub mod solver;
pub mod tileset;
pub mod world;

pub use brush::{BrushError, BrushLayer, CellRect, WeightField};
pub use monitor::{Monitor, Unmonitored};
pub use nwfc::{GenerateError, GenerateStats, SubgridPlan, SubgridResult};
pub use solver::{BoundarySpec, SolveOutcome, SolveStats, Tiling, Wave};
pub use tileset::{Axis, CoverageReport, EdgeId, EdgeSet, Tile, TileId, Tileset, TilesetError};
pub use world::{chunk_seed, Chunk, ChunkStore, WorldConfig, WorldError};
