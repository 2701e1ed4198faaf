//! Infinite mode: chunks addressed `(a, b)` with `a, b >= 1`, growing
//! south-east from the origin.
//!
//! A chunk is generated only once its northern and western neighbours
//! exist, so the set of generated chunks is always closed under "every
//! `(a', b')` with `a' <= a` and `b' <= b`". Each chunk draws its own seed
//! from `(world_seed, a, b)`, which makes chunk contents independent of the
//! order in which a player explores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::brush::WeightField;
use crate::monitor::{Monitor, Unmonitored};
use crate::nwfc::{self, diagonal_order, GenerateError};
use crate::rng::splitmix64;
use crate::solver::{Rules, Tiling, DEFAULT_BUDGET};

const SEED_MUL_A: u64 = 0x9E37_79B9_7F4A_7C15;
const SEED_MUL_B: u64 = 0xBF58_476D_1CE4_E5B9;

/// `SM(SM(world_seed ^ a*K1) ^ b*K2)` with SplitMix64 finalizer `SM`,
/// wrapping arithmetic throughout.
pub fn chunk_seed(world_seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(world_seed ^ a.wrapping_mul(SEED_MUL_A)) ^ b.wrapping_mul(SEED_MUL_B))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldConfig {
    pub world_seed: u64,
    pub chunk_size: usize,
    pub tileset_hash: String,
}

/// One committed chunk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub a: u32,
    pub b: u32,
    /// Brush epoch in effect when the chunk was generated.
    pub brush_epoch: u64,
    pub tiling: Tiling,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("chunk size must be at least 2, got {0}")]
    ChunkSize(usize),
    #[error("chunk indices start at 1, got ({a}, {b})")]
    Index { a: u32, b: u32 },
    #[error("tileset hash {got} does not match world tileset {expected}")]
    HashMismatch { expected: String, got: String },
    #[error("world seed {got} does not match {expected}")]
    SeedMismatch { expected: u64, got: u64 },
    #[error("chunk ({a}, {b}) would break rectangle closure")]
    Closure { a: u32, b: u32 },
    #[error("chunk ({a}, {b}) does not fit this world: {reason}")]
    BadChunk { a: u32, b: u32, reason: &'static str },
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

/// The generated part of an infinite world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkStore {
    config: WorldConfig,
    chunks: BTreeMap<(u32, u32), Chunk>,
    order: Vec<(u32, u32)>,
    regenerated: u64,
}

impl ChunkStore {
    pub fn new(config: WorldConfig) -> Result<Self, WorldError> {
        if config.chunk_size < 2 {
            return Err(WorldError::ChunkSize(config.chunk_size));
        }
        Ok(Self { config, chunks: BTreeMap::new(), order: Vec::new(), regenerated: 0 })
    }

    /// Rebuilds a store from saved chunks, checking that they belong to this
    /// world and form a closed set. Chunks are inserted in diagonal order.
    pub fn from_chunks(config: WorldConfig, chunks: Vec<Chunk>) -> Result<Self, WorldError> {
        let mut store = Self::new(config)?;
        let mut sorted = chunks;
        sorted.sort_by_key(|c| (c.a + c.b, c.a));
        for chunk in sorted {
            if store.contains(chunk.a, chunk.b) {
                return Err(WorldError::BadChunk { a: chunk.a, b: chunk.b, reason: "duplicate chunk" });
            }
            store.insert(chunk)?;
        }
        Ok(store)
    }

    fn check_chunk(&self, chunk: &Chunk) -> Result<(), WorldError> {
        let (a, b) = (chunk.a, chunk.b);
        if a == 0 || b == 0 {
            return Err(WorldError::Index { a, b });
        }
        let c = self.config.chunk_size;
        let t = &chunk.tiling;
        if t.width != c || t.height != c || t.cells.len() != c * c {
            return Err(WorldError::BadChunk { a, b, reason: "wrong dimensions" });
        }
        if t.tileset_hash != self.config.tileset_hash {
            return Err(WorldError::HashMismatch {
                expected: self.config.tileset_hash.clone(),
                got: t.tileset_hash.clone(),
            });
        }
        if t.seed != chunk_seed(self.config.world_seed, a as u64, b as u64) {
            return Err(WorldError::BadChunk { a, b, reason: "seed does not match its position" });
        }
        Ok(())
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn contains(&self, a: u32, b: u32) -> bool {
        self.chunks.contains_key(&(a, b))
    }

    pub fn get(&self, a: u32, b: u32) -> Option<&Chunk> {
        self.chunks.get(&(a, b))
    }

    /// Chunks sorted by `(a, b)`.
    pub fn chunks(&self) -> impl Iterator<Item = &Chunk> {
        self.chunks.values()
    }

    /// Keys in the order they were generated (or loaded).
    pub fn generation_order(&self) -> &[(u32, u32)] {
        &self.order
    }

    /// Times an attempt was made to commit a chunk that already existed.
    /// Stays zero.
    pub fn chunks_regenerated(&self) -> u64 {
        self.regenerated
    }

    /// Generates every missing chunk of `[1..=a] x [1..=b]` in diagonal
    /// order and returns chunk `(a, b)`. Existing chunks are left alone.
    pub fn ensure_chunk(
        &mut self,
        rules: &Rules<'_>,
        weights: &WeightField,
        a: u32,
        b: u32,
    ) -> Result<&Chunk, WorldError> {
        self.ensure_chunk_with(rules, weights, a, b, DEFAULT_BUDGET, &Unmonitored)
    }

    pub fn ensure_chunk_with<M: Monitor>(
        &mut self,
        rules: &Rules<'_>,
        weights: &WeightField,
        a: u32,
        b: u32,
        budget: u64,
        monitor: &M,
    ) -> Result<&Chunk, WorldError> {
        for (ca, cb) in self.missing_for(a, b)? {
            let chunk = self.generate_chunk(rules, weights, ca, cb, budget, monitor)?;
            self.insert(chunk)?;
        }
        Ok(&self.chunks[&(a, b)])
    }

    /// Chunks of `[1..=a] x [1..=b]` not generated yet, in diagonal order.
    pub fn missing_for(&self, a: u32, b: u32) -> Result<Vec<(u32, u32)>, WorldError> {
        if a == 0 || b == 0 {
            return Err(WorldError::Index { a, b });
        }
        if self.contains(a, b) {
            return Ok(Vec::new());
        }
        Ok(diagonal_order(a as usize, b as usize)
            .into_iter()
            .map(|(ca, cb)| (ca as u32, cb as u32))
            .filter(|key| !self.chunks.contains_key(key))
            .collect())
    }

    /// Generates chunk `(a, b)` from its committed northern and western
    /// neighbours without inserting it. Both neighbours (where they exist in
    /// the quarter-plane) must already be present.
    pub fn generate_chunk<M: Monitor>(
        &self,
        rules: &Rules<'_>,
        weights: &WeightField,
        a: u32,
        b: u32,
        budget: u64,
        monitor: &M,
    ) -> Result<Chunk, WorldError> {
        if a == 0 || b == 0 {
            return Err(WorldError::Index { a, b });
        }
        if rules.tileset_hash() != self.config.tileset_hash {
            return Err(WorldError::HashMismatch {
                expected: self.config.tileset_hash.clone(),
                got: rules.tileset_hash().into(),
            });
        }
        let neighbour = |key: (u32, u32)| self.chunks.get(&key).map(|c| &c.tiling).ok_or(WorldError::Closure { a, b });
        let north = if a > 1 { Some(neighbour((a - 1, b))?) } else { None };
        let west = if b > 1 { Some(neighbour((a, b - 1))?) } else { None };
        let (result, _) = nwfc::solve_subgrid(
            rules,
            self.config.chunk_size,
            a as usize,
            b as usize,
            north,
            west,
            weights,
            self.config.world_seed,
            budget,
            monitor,
        )?;
        Ok(Chunk { a, b, brush_epoch: weights.epoch(), tiling: result.tiling })
    }

    /// Commits a chunk. Fails if it is already present, does not belong to
    /// this world, or its neighbours are missing.
    pub fn insert(&mut self, chunk: Chunk) -> Result<(), WorldError> {
        self.check_chunk(&chunk)?;
        let (a, b) = (chunk.a, chunk.b);
        if self.chunks.contains_key(&(a, b)) {
            self.regenerated += 1;
            return Err(WorldError::BadChunk { a, b, reason: "chunk already generated" });
        }
        if (a > 1 && !self.contains(a - 1, b)) || (b > 1 && !self.contains(a, b - 1)) {
            return Err(WorldError::Closure { a, b });
        }
        self.order.push((a, b));
        self.chunks.insert((a, b), chunk);
        Ok(())
    }

    /// Makes sure the (up to) nine chunks around `player` exist and returns
    /// them row-major. Neighbours with an index below 1 are skipped.
    pub fn visible_region(
        &mut self,
        rules: &Rules<'_>,
        weights: &WeightField,
        player: (u32, u32),
    ) -> Result<Vec<Chunk>, WorldError> {
        let (pa, pb) = player;
        if pa == 0 || pb == 0 {
            return Err(WorldError::Index { a: pa, b: pb });
        }
        self.ensure_chunk(rules, weights, pa + 1, pb + 1)?;
        let mut out = Vec::with_capacity(9);
        for a in pa.saturating_sub(1).max(1)..=pa + 1 {
            for b in pb.saturating_sub(1).max(1)..=pb + 1 {
                out.push(self.chunks[&(a, b)].clone());
            }
        }
        Ok(out)
    }
}
