use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::tileset::{TileId, Tileset};

/// Grid direction from a cell to one of its four neighbours.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    North,
    South,
    West,
    East,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::South, Direction::West, Direction::East];

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
            Direction::East => Direction::West,
        }
    }

    fn side(self) -> usize {
        self as usize
    }
}

/// Per-side edge masks of a tileset.
///
/// `masks[side][edge]` is the bitset of tiles whose `side` edge is `edge`,
/// so revising a neighbour is a handful of mask intersections instead of a
/// tile-by-tile support search.
#[derive(Debug, Clone)]
pub struct Rules<'t> {
    tileset: &'t Tileset,
    hash: String,
    words: usize,
    masks: [Vec<Vec<u64>>; 4],
    closed: bool,
}

impl<'t> Rules<'t> {
    pub fn new(tileset: &'t Tileset) -> Self {
        let d = tileset.len();
        let words = d.div_ceil(64);
        let ks = tileset.ens().len();
        let kw = tileset.ewe().len();
        let mut masks = [
            vec![vec![0u64; words]; ks],
            vec![vec![0u64; words]; ks],
            vec![vec![0u64; words]; kw],
            vec![vec![0u64; words]; kw],
        ];
        for (i, t) in tileset.tiles().iter().enumerate() {
            let (w, bit) = (i / 64, 1u64 << (i % 64));
            masks[Direction::North.side()][t.n.index()][w] |= bit;
            masks[Direction::South.side()][t.s.index()][w] |= bit;
            masks[Direction::West.side()][t.w.index()][w] |= bit;
            masks[Direction::East.side()][t.e.index()][w] |= bit;
        }
        let used = |side: &Vec<Vec<u64>>| side.iter().map(|m| m.iter().any(|&w| w != 0)).collect::<Vec<_>>();
        let closed = used(&masks[0]) == used(&masks[1]) && used(&masks[2]) == used(&masks[3]);
        Self { tileset, hash: tileset.content_hash(), words, masks, closed }
    }

    /// True when every edge shown on one side of some tile is shown on the
    /// opposite side of some tile. Full domains are then arc consistent.
    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn tileset(&self) -> &'t Tileset {
        self.tileset
    }

    pub fn tileset_hash(&self) -> &str {
        &self.hash
    }

    /// Tile count `d`.
    pub fn tile_count(&self) -> usize {
        self.tileset.len()
    }

    /// Words per domain bitset.
    pub fn words(&self) -> usize {
        self.words
    }

    /// Tiles exposing `edge` on side `dir`.
    pub fn side_mask(&self, dir: Direction, edge: usize) -> &[u64] {
        &self.masks[dir.side()][edge]
    }

    /// Writes into `allowed` the tiles that may sit in the neighbour of a
    /// cell with domain `source`, in direction `dir` from that cell.
    pub fn supported(&self, source: &[u64], dir: Direction, allowed: &mut [u64]) {
        allowed.fill(0);
        let facing = &self.masks[dir.side()];
        let receiving = &self.masks[dir.opposite().side()];
        for (edge, mask) in facing.iter().enumerate() {
            if intersects(source, mask) {
                for (a, m) in allowed.iter_mut().zip(&receiving[edge]) {
                    *a |= *m;
                }
            }
        }
    }

    /// True if tile `a` may sit with tile `b` immediately in direction `dir`.
    pub fn compatible(&self, a: TileId, dir: Direction, b: TileId) -> bool {
        let (ta, tb) = (self.tileset.tile(a), self.tileset.tile(b));
        match dir {
            Direction::North => ta.n == tb.s,
            Direction::South => ta.s == tb.n,
            Direction::West => ta.w == tb.e,
            Direction::East => ta.e == tb.w,
        }
    }
}

#[inline]
pub(crate) fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Iterates the set bits of a bitset in ascending order.
pub(crate) fn bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &word)| {
        let mut w = word;
        core::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}
